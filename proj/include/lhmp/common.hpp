#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lhmp {

// Error taxonomy. Contract violations (bad shapes, bad arguments) and config
// errors map to CLI exit code 1, I/O and file-format problems to exit code 2.
class ContractError : public std::invalid_argument {
public:
  explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

class ConfigError : public ContractError {
public:
  explicit ConfigError(const std::string& msg) : ContractError(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
template <class... Args>
std::string format_msg(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

#define LHMP_CHECK(cond, ...)                                             \
  do {                                                                    \
    if (!(cond))                                                          \
      throw ::lhmp::ContractError(::lhmp::detail::format_msg(__VA_ARGS__)); \
  } while (0)

#define LHMP_CONFIG_CHECK(cond, ...)                                      \
  do {                                                                    \
    if (!(cond))                                                          \
      throw ::lhmp::ConfigError(::lhmp::detail::format_msg(__VA_ARGS__));   \
  } while (0)

// Small 3D vector in double precision. Geometry and metrics run in float64,
// network training in float32.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// 24-joint skeleton pose (SMPL-style joint ordering), world meters.
inline constexpr int kNumJoints = 24;
using Pose = std::array<Vec3, kNumJoints>;

// Body part labels. 9 part classes plus a noise class for injected clutter.
inline constexpr int kNumParts = 9;
inline constexpr std::uint8_t kNoiseLabel = 255;

enum class BodyPart : std::uint8_t {
  Head = 0,
  LeftArm = 1,
  RightArm = 2,
  UpperBody = 3,
  LowerBody = 4,
  UpperLeftLeg = 5,
  UpperRightLeg = 6,
  LowerLeftLeg = 7,
  LowerRightLeg = 8,
};

// Worker-thread cap: LHMP_THREADS env var, default = logical cores.
int worker_threads();

}  // namespace lhmp
