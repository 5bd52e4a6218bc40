#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace logdyn {

/// Standard normal draws that are reproducible across platforms:
/// std::normal_distribution is implementation-defined, mt19937_64 is not.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t bits() { return engine_(); }

  std::vector<double> vec(std::size_t n, double stddev = 1.0) {
    std::vector<double> out(n);
    for (double& x : out) x = stddev * next();
    return out;
  }

  std::vector<float> vec_f32(std::size_t n, double stddev) {
    std::vector<float> out(n);
    for (float& x : out) x = static_cast<float>(stddev * next());
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace logdyn
