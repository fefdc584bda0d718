#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zz {

// Uniform/exponential/normal draws on top of std::mt19937_64. The transforms are
// implemented here rather than with std::*_distribution so that a given seed
// produces the same stream on every standard library.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{seed & 0xffffffffu, seed >> 32, stream, std::uint64_t{0x9e3779b9}};
    gen_.seed(seq);
  }

  std::uint64_t raw() { return gen_(); }

  // strictly inside (0,1)
  double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential() { return -std::log(uniform()); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(2.0 * exponential());
    const double a = 2.0 * 3.14159265358979323846 * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Named substreams of one run: event-time deviates, subsample draws and thinning
// uniforms are kept separate so that sampler variants are comparable under a
// shared seed.
struct RunRng {
  explicit RunRng(std::uint64_t seed)
      : events(seed, 1), subsample(seed, 2), thinning(seed, 3), aux(seed, 4) {}

  RngStream events;
  RngStream subsample;
  RngStream thinning;
  RngStream aux;
};

}  // namespace zz
