#pragma once

// Kerr-type rocking/stretch coupling and the thermally averaged hopping signal
//
//   h(t) = Σ_n P_n sin²[(κ − χ n) t / 2]
//
// with P_n the thermal (geometric) occupation of the axial stretch mode.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "phonon_hop/constants.hpp"
#include "phonon_hop/errors.hpp"
#include "phonon_hop/trap_physics.hpp"

namespace phonon_hop {

template <typename Scalar>
struct BasicKerrCoupling {
  Scalar chi;  // rad/s, signed
};

using KerrCoupling = BasicKerrCoupling<double>;

/// Cross-Kerr coefficient between the radial rocking and axial stretch modes:
///
///   χ = −ω_s (1/2 + (ω_s²/2) / (4ω_r² − ω_s²)) (ω_z/ω_r) (2ħω_z / (α² m c²))^{1/3}
template <typename Scalar>
BasicKerrCoupling<Scalar> kerr_chi(const BasicModeSpectrum<Scalar>& spectrum, Scalar omega_z,
                                   Scalar mass) {
  using std::abs;
  using std::cbrt;
  const Scalar ws = spectrum.omega_stretch;
  const Scalar wr = spectrum.omega_rock;
  if (!(ws > Scalar(0)) || !(wr > Scalar(0)) || !(omega_z > Scalar(0)) || !(mass > Scalar(0)))
    throw DomainError("kerr_chi needs positive mode frequencies, omega_z and mass");
  const Scalar detuning = Scalar(4) * wr * wr - ws * ws;
  if (abs(detuning) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * Scalar(4) * wr * wr)
    throw ResonanceError("4 omega_r^2 == omega_s^2: rocking/stretch 2:1 resonance");

  const Scalar hbar = Scalar(kConstants.reduced_planck);
  const Scalar alpha = Scalar(kConstants.fine_structure);
  const Scalar c = Scalar(kConstants.speed_of_light);
  const Scalar bracket = Scalar(0.5) + (ws * ws / Scalar(2)) / detuning;
  const Scalar scale = cbrt(Scalar(2) * hbar * omega_z / (alpha * alpha * mass * c * c));
  return {-ws * bracket * (omega_z / wr) * scale};
}

template <typename Scalar>
BasicKerrCoupling<Scalar> kerr_chi(const BasicTrapConfig<Scalar>& config) {
  return kerr_chi(mode_spectrum(config), config.omega_z, config.mass);
}

/// δω_r = χ n_s.
template <typename Scalar>
Scalar rocking_shift(BasicKerrCoupling<Scalar> coupling, long n_s) {
  if (n_s < 0) throw DomainError("stretch quantum number must be non-negative");
  return coupling.chi * Scalar(n_s);
}

template <typename Scalar>
struct BasicEnvelope {
  Scalar contrast;
  Scalar phase;
};

using Envelope = BasicEnvelope<double>;

/// Resummed thermal average Σ P_n e^{−iχnt} = 1 / ((n̄+1) − n̄ e^{−iχt}) = C e^{iφ},
/// so that h(t) = 1/2 − (C/2) cos(κt + φ).
template <typename Scalar>
BasicEnvelope<Scalar> envelope_closed_form(Scalar chi, Scalar mean_n, Scalar t) {
  using std::abs;
  using std::arg;
  if (!(mean_n >= Scalar(0))) throw DomainError("mean occupation must be non-negative");
  const std::complex<Scalar> denom =
      (mean_n + Scalar(1)) - mean_n * std::polar(Scalar(1), -chi * t);
  const std::complex<Scalar> s = Scalar(1) / denom;
  return {abs(s), arg(s)};
}

template <typename Scalar>
Scalar hopping_closed_form(Scalar kappa, Scalar chi, Scalar mean_n, Scalar t) {
  using std::cos;
  const auto env = envelope_closed_form(chi, mean_n, t);
  return Scalar(0.5) - Scalar(0.5) * env.contrast * cos(kappa * t + env.phase);
}

/// Truncated thermal distribution P_n = n̄ⁿ / (n̄+1)^{n+1}, n = 0..n_max.
struct ThermalDistribution {
  double mean_n = 0.0;
  std::vector<double> probabilities;
  long n_max = 0;
  double tail_bound = 0.0;
};

/// n_max is the smallest n whose cumulative probability reaches 1 − tail_tol.
ThermalDistribution thermal_distribution(double mean_n, double tail_tol = 1e-12);

/// Which population a trace reports. h(0) = 0 means "phonon has left ion 1".
inline constexpr const char* kTraceConventionLeftIon1 = "phonon_left_ion1";

struct TraceMetadata {
  std::optional<double> kappa;
  std::optional<double> chi;
  std::optional<double> mean_n;
  bool ingested = false;
  std::string convention = kTraceConventionLeftIon1;
};

struct HoppingTrace {
  Eigen::VectorXd times;   // s, strictly increasing
  Eigen::VectorXd values;  // probability in [0, 1]
  TraceMetadata metadata;
};

/// Throws DomainError if the grid is empty, not strictly increasing or starts before 0.
void validate_time_grid(const Eigen::Ref<const Eigen::VectorXd>& times);

HoppingTrace hopping_signal(double kappa, double chi, const ThermalDistribution& dist,
                            const Eigen::Ref<const Eigen::VectorXd>& times);

struct CoherenceMetrics {
  std::optional<double> decay_time;  // s; nullopt = contrast never reaches 1/e
  double hopping_frequency = 0.0;    // rad/s, κ − χ n̄
  std::optional<double> num_oscillations;
};

CoherenceMetrics coherence_metrics(double kappa, double chi, double mean_n);

}  // namespace phonon_hop
