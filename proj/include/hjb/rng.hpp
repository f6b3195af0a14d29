#pragma once

// Seeded RNG producing identical double streams on every platform: the
// standard distributions are implementation defined, so uniforms are built
// directly from the mt19937_64 bit stream.

#include <cstdint>
#include <random>

#include "hjb/common.hpp"

namespace hjb {

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * n);
    return v >= n ? n - 1 : v;
  }

  V3 uniform_vec(double a, double b, int n) {
    V3 r{};
    for (int i = 0; i < n; ++i) r[i] = uniform(a, b);
    return r;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hjb
