#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace voltarget {

// One stream per simulated path, keyed by (seed, path_index). Every draw a
// path makes comes from its own engine, so results do not depend on how paths
// are scheduled across workers. The normal sampler is the Marsaglia polar
// method, hand-rolled so the draw sequence is pinned by this code alone.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path_index),
                      static_cast<std::uint32_t>(path_index >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, w, s;
    do {
      u = 2.0 * uniform() - 1.0;
      w = 2.0 * uniform() - 1.0;
      s = u * u + w * w;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = w * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace voltarget
