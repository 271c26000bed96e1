#include "phonon_hop/random.hpp"

#include <cmath>

#include "phonon_hop/constants.hpp"
#include "phonon_hop/errors.hpp"

namespace phonon_hop {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = kTwoPi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

long Rng::geometric(double mean_n) {
  if (!(mean_n >= 0.0)) throw DomainError("mean occupation must be non-negative");
  const double u = 1.0 - uniform();  // (0, 1]
  if (mean_n == 0.0) return 0;
  const double log_ratio = std::log(mean_n / (mean_n + 1.0));
  // P(n >= k) = ratio^k  <=>  n = floor(ln u / ln ratio)
  return static_cast<long>(std::floor(std::log(u) / log_ratio));
}

long Rng::binomial(long trials, double p) {
  if (trials < 0) throw DomainError("trials must be non-negative");
  long k = 0;
  for (long i = 0; i < trials; ++i)
    if (uniform() < p) ++k;
  return k;
}

}  // namespace phonon_hop
