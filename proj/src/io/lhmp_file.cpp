#include "lhmp/io/lhmp_file.hpp"

#include <cstring>
#include <fstream>

namespace lhmp::io {

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, size_t& off, const std::filesystem::path& path) {
  if (off + sizeof(T) > in.size())
    throw IoError("truncated .lhmp file " + path.string() + " at byte offset " +
                  std::to_string(off));
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_sequence(const std::filesystem::path& path,
                    const std::vector<sim::ScanFrame>& frames, double fps) {
  std::string out;
  out.append("LHMP", 4);
  put<std::uint32_t>(out, kLhmpVersion);
  put<float>(out, static_cast<float>(fps));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frames.size()));
  for (const auto& fr : frames) {
    LHMP_CHECK(fr.points.size() == fr.labels.size(),
               "write_sequence: labels/points size mismatch");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(fr.points.size()));
    for (const Vec3& p : fr.points) {
      put<float>(out, static_cast<float>(p.x));
      put<float>(out, static_cast<float>(p.y));
      put<float>(out, static_cast<float>(p.z));
    }
    out.append(reinterpret_cast<const char*>(fr.labels.data()), fr.labels.size());
    for (const Vec3& j : fr.gt_joints) {
      put<float>(out, static_cast<float>(j.x));
      put<float>(out, static_cast<float>(j.y));
      put<float>(out, static_cast<float>(j.z));
    }
  }
  atomic_write(path, out);
}

std::vector<sim::ScanFrame> read_sequence(const std::filesystem::path& path,
                                          double* fps_out) {
  std::string in = read_file(path);
  size_t off = 0;
  if (in.size() < 4 || std::memcmp(in.data(), "LHMP", 4) != 0)
    throw IoError("bad magic in " + path.string());
  off = 4;
  auto version = take<std::uint32_t>(in, off, path);
  if (version != kLhmpVersion)
    throw IoError("unsupported .lhmp version " + std::to_string(version) + " in " +
                  path.string());
  float fps = take<float>(in, off, path);
  auto n_frames = take<std::uint32_t>(in, off, path);
  if (fps_out) *fps_out = fps;

  std::vector<sim::ScanFrame> frames;
  frames.reserve(n_frames);
  for (std::uint32_t f = 0; f < n_frames; ++f) {
    sim::ScanFrame fr;
    auto n_points = take<std::uint32_t>(in, off, path);
    fr.points.reserve(n_points);
    for (std::uint32_t i = 0; i < n_points; ++i) {
      float x = take<float>(in, off, path);
      float y = take<float>(in, off, path);
      float z = take<float>(in, off, path);
      fr.points.push_back(Vec3{x, y, z});
    }
    if (off + n_points > in.size())
      throw IoError("truncated .lhmp file " + path.string() + " at byte offset " +
                    std::to_string(off));
    fr.labels.assign(in.begin() + static_cast<long>(off),
                     in.begin() + static_cast<long>(off + n_points));
    off += n_points;
    for (int j = 0; j < kNumJoints; ++j) {
      float x = take<float>(in, off, path);
      float y = take<float>(in, off, path);
      float z = take<float>(in, off, path);
      fr.gt_joints[j] = Vec3{x, y, z};
    }
    fr.timestamp = fps > 0.f ? f / static_cast<double>(fps) : 0.0;
    frames.push_back(std::move(fr));
  }
  return frames;
}

}  // namespace lhmp::io
