#pragma once

#include <cstdint>
#include <random>

namespace phonon_hop {

/// splitmix64 finalizer; used to derive independent engine seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for substream `stream` of a run seeded with `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Seedable generator with a platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard. The
/// standard distributions are implementation-defined, so every variate here is
/// built directly from raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(stream_seed(seed, stream)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both values used).
  double normal();
  /// Thermal/geometric occupation with P(n) = n̄ⁿ / (n̄+1)^{n+1}, by inverse CDF.
  long geometric(double mean_n);
  /// Number of successes in `trials` Bernoulli(p) draws.
  long binomial(long trials, double p);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace phonon_hop
