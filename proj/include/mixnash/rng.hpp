#pragma once

#include <cstdint>
#include <random>

namespace mixnash {

// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the real-valued transforms below are written out
// explicitly because the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one variate per call (the sine branch is discarded).
  double normal();
  // Inverse CDF of Exponential(1).
  double exponential();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent stream seeds from a base
// seed and a role tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace mixnash
