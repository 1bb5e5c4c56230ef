#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lhmp/sim/scan.hpp"

namespace lhmp::io {

// Sequence container, little-endian binary, extension .lhmp:
//   magic "LHMP", version u32 = 1, fps f32, frame_count u32
//   per frame: n_points u32, n_points*3 f32 xyz (m), n_points u8 labels,
//              72 f32 ground-truth joints (24 x 3).
// Frame timestamps are implicit (index / fps).
inline constexpr std::uint32_t kLhmpVersion = 1;

void write_sequence(const std::filesystem::path& path,
                    const std::vector<sim::ScanFrame>& frames, double fps);

std::vector<sim::ScanFrame> read_sequence(const std::filesystem::path& path,
                                          double* fps_out = nullptr);

// Write-to-temp-then-rename so interrupted runs never leave partial files.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace lhmp::io
