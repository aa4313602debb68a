#pragma once

#include <cstdint>
#include <random>

namespace wmlab {

// Seeded random stream with self-contained distribution code, so that a
// given seed produces the same values on every standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi], unbiased via rejection
  int64_t uniform_int(int64_t lo, int64_t hi);

  // standard normal via Box-Muller; one spare value is cached
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  int bit() { return static_cast<int>(next_u64() >> 63); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wmlab
