#include "phonon_hop/kerr_model.hpp"

#include <algorithm>
#include <cmath>

namespace phonon_hop {

ThermalDistribution thermal_distribution(double mean_n, double tail_tol) {
  if (!(mean_n >= 0.0) || !std::isfinite(mean_n))
    throw DomainError("mean occupation must be finite and non-negative");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("tail_tol must lie in (0, 1)");

  ThermalDistribution dist;
  dist.mean_n = mean_n;
  dist.tail_bound = tail_tol;

  const double ratio = mean_n / (mean_n + 1.0);
  double p = 1.0 / (mean_n + 1.0);
  double cumulative = 0.0;
  // Analytic tail after n is ratio^{n+1}; also require the summed mass to clear 1 - tol
  // so rounding in the running sum cannot break the invariant.
  double tail = ratio;
  for (long n = 0;; ++n) {
    dist.probabilities.push_back(p);
    cumulative += p;
    if (tail <= tail_tol && cumulative >= 1.0 - tail_tol) {
      dist.n_max = n;
      break;
    }
    p *= ratio;
    tail *= ratio;
  }
  return dist;
}

void validate_time_grid(const Eigen::Ref<const Eigen::VectorXd>& times) {
  if (times.size() == 0) throw DomainError("empty time grid");
  if (!(times[0] >= 0.0)) throw DomainError("time grid must start at t >= 0");
  for (Eigen::Index i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing");
}

HoppingTrace hopping_signal(double kappa, double chi, const ThermalDistribution& dist,
                            const Eigen::Ref<const Eigen::VectorXd>& times) {
  validate_time_grid(times);
  HoppingTrace trace;
  trace.times = times;
  trace.values.resize(times.size());
  trace.metadata.kappa = kappa;
  trace.metadata.chi = chi;
  trace.metadata.mean_n = dist.mean_n;

  const auto& p = dist.probabilities;
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const double t = times[i];
    double h = 0.0;
    // smallest weights first
    for (auto n = static_cast<long>(p.size()) - 1; n >= 0; --n) {
      const double s = std::sin(0.5 * (kappa - chi * static_cast<double>(n)) * t);
      h += p[static_cast<std::size_t>(n)] * s * s;
    }
    trace.values[i] = std::clamp(h, 0.0, 1.0);
  }
  return trace;
}

CoherenceMetrics coherence_metrics(double kappa, double chi, double mean_n) {
  if (!(kappa > 0.0)) throw DomainError("hopping rate must be positive");
  if (!(mean_n >= 0.0)) throw DomainError("mean occupation must be non-negative");

  CoherenceMetrics m;
  m.hopping_frequency = kappa - chi * mean_n;
  if (chi == 0.0 || mean_n == 0.0) return m;

  const double threshold = std::exp(-1.0);
  const double half_period = kConstants.pi / std::abs(chi);
  auto contrast = [&](double t) { return envelope_closed_form(chi, mean_n, t).contrast; };
  // Minimum of the contrast over the first half revival period sits at χt = π.
  if (contrast(half_period) > threshold) return m;

  double lo = 0.0;
  double hi = half_period;
  // Bisect down to adjacent doubles.
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (contrast(mid) > threshold)
      lo = mid;
    else
      hi = mid;
  }
  m.decay_time = 0.5 * (lo + hi);
  m.num_oscillations = m.hopping_frequency * *m.decay_time / kTwoPi;
  return m;
}

}  // namespace phonon_hop
