#pragma once

// Trap-derived quantities for a two-ion linear chain: axial separation, collective
// mode frequencies, local-phonon hopping rate, Doppler limit and thermal occupations.
// Everything is a pure function templated on the floating-point scalar.

#include <cmath>
#include <string>
#include <string_view>

#include "phonon_hop/constants.hpp"
#include "phonon_hop/errors.hpp"

namespace phonon_hop {

/// How the inter-ion distance d₀ is tied to the axial trap frequency.
///   Exact       d₀ = 2^{1/3} ℓ, the true equilibrium separation
///   LengthScale d₀ = ℓ, reproduces the tabulated (d₀, ω_z) pairs of the experiment
///   JamesFit    d₀ = ℓ · 2.018 / 2^{0.559}
/// with ℓ = (e² / (4π ε₀ m ω_z²))^{1/3}.
enum class DistanceConvention { Exact, LengthScale, JamesFit };

inline std::string_view to_string(DistanceConvention c) {
  switch (c) {
    case DistanceConvention::Exact: return "exact";
    case DistanceConvention::LengthScale: return "length_scale";
    case DistanceConvention::JamesFit: return "james_fit";
  }
  return "exact";
}

inline DistanceConvention distance_convention_from_string(std::string_view s) {
  if (s == "exact") return DistanceConvention::Exact;
  if (s == "length_scale") return DistanceConvention::LengthScale;
  if (s == "james_fit") return DistanceConvention::JamesFit;
  throw DomainError("unknown distance convention '" + std::string(s) +
                    "' (expected exact, length_scale or james_fit)");
}

template <typename Scalar>
Scalar distance_factor(DistanceConvention c) {
  using std::cbrt;
  using std::pow;
  switch (c) {
    case DistanceConvention::Exact: return cbrt(Scalar(2));
    case DistanceConvention::LengthScale: return Scalar(1);
    case DistanceConvention::JamesFit: return Scalar(2.018) / pow(Scalar(2), Scalar(0.559));
  }
  return Scalar(1);
}

template <typename Scalar>
Scalar doppler_temperature(Scalar gamma);

/// Trap parameter set. All frequencies are angular (rad/s).
template <typename Scalar>
struct BasicTrapConfig {
  Scalar mass = Scalar(kConstants.ca40_mass);
  Scalar omega_y = Scalar(0);
  Scalar omega_z = Scalar(0);
  Scalar axial_temperature = doppler_temperature(Scalar(kTwoPi * kCa40LinewidthHz));

  /// Throws ConfigurationError unless omega_y > omega_z > 0, mass > 0 and T >= 0.
  void validate() const {
    if (!(mass > Scalar(0))) throw ConfigurationError("mass must be positive");
    if (!(omega_z > Scalar(0))) throw ConfigurationError("omega_z must be positive");
    if (!(omega_y > omega_z))
      throw ConfigurationError(
          "omega_y must exceed omega_z (zigzag instability / imaginary rocking frequency)");
    if (!(axial_temperature >= Scalar(0)))
      throw ConfigurationError("axial_temperature must be non-negative");
  }
};

using TrapConfig = BasicTrapConfig<double>;

/// Collective-mode angular frequencies of the two-ion chain plus the hopping rate.
template <typename Scalar>
struct BasicModeSpectrum {
  Scalar omega_com_z;
  Scalar omega_stretch;
  Scalar omega_com_y;
  Scalar omega_rock;
  Scalar kappa;
};

using ModeSpectrum = BasicModeSpectrum<double>;

/// ℓ = (e² / (4π ε₀ m ω_z²))^{1/3}.
template <typename Scalar>
Scalar axial_length_scale(Scalar omega_z, Scalar mass) {
  using std::cbrt;
  if (!(omega_z > Scalar(0)) || !(mass > Scalar(0)))
    throw DomainError("axial length scale needs positive omega_z and mass");
  return cbrt(Scalar(kConstants.coulomb_constant()) / (mass * omega_z * omega_z));
}

template <typename Scalar>
Scalar axial_freq_to_distance(Scalar omega_z, Scalar mass,
                              DistanceConvention convention = DistanceConvention::Exact) {
  return distance_factor<Scalar>(convention) * axial_length_scale(omega_z, mass);
}

template <typename Scalar>
Scalar distance_to_axial_freq(Scalar d0, Scalar mass,
                              DistanceConvention convention = DistanceConvention::Exact) {
  using std::sqrt;
  if (!(d0 > Scalar(0)) || !(mass > Scalar(0)))
    throw DomainError("distance_to_axial_freq needs positive d0 and mass");
  const Scalar l = d0 / distance_factor<Scalar>(convention);
  return sqrt(Scalar(kConstants.coulomb_constant()) / (mass * l * l * l));
}

/// κ = e² / (4π ε₀ m ω_y d₀³) at an arbitrary separation.
template <typename Scalar>
Scalar hopping_rate_at_distance(Scalar omega_y, Scalar d0, Scalar mass) {
  if (!(omega_y > Scalar(0)) || !(d0 > Scalar(0)) || !(mass > Scalar(0)))
    throw DomainError("hopping rate needs positive omega_y, d0 and mass");
  return Scalar(kConstants.coulomb_constant()) / (mass * omega_y * d0 * d0 * d0);
}

/// Hopping rate at the equilibrium separation; algebraically ω_z² / (2 ω_y).
template <typename Scalar>
Scalar hopping_rate(const BasicTrapConfig<Scalar>& config) {
  config.validate();
  const Scalar d0 = axial_freq_to_distance(config.omega_z, config.mass, DistanceConvention::Exact);
  return hopping_rate_at_distance(config.omega_y, d0, config.mass);
}

template <typename Scalar>
BasicModeSpectrum<Scalar> mode_spectrum(const BasicTrapConfig<Scalar>& config) {
  using std::sqrt;
  config.validate();
  BasicModeSpectrum<Scalar> s;
  s.omega_com_z = config.omega_z;
  s.omega_stretch = sqrt(Scalar(3)) * config.omega_z;
  s.omega_com_y = config.omega_y;
  s.omega_rock = sqrt(config.omega_y * config.omega_y - config.omega_z * config.omega_z);
  s.kappa = hopping_rate(config);
  return s;
}

/// T_D = ħ Γ / (2 k_B).
template <typename Scalar>
Scalar doppler_temperature(Scalar gamma) {
  if (!(gamma > Scalar(0))) throw DomainError("linewidth must be positive");
  return Scalar(kConstants.reduced_planck) * gamma / (Scalar(2) * Scalar(kConstants.boltzmann));
}

/// Per-ion rms axial velocity from m v_rms² = k_B T.
template <typename Scalar>
Scalar rms_velocity(Scalar temperature, Scalar mass) {
  using std::sqrt;
  if (!(temperature >= Scalar(0))) throw DomainError("temperature must be non-negative");
  if (!(mass > Scalar(0))) throw DomainError("mass must be positive");
  return sqrt(Scalar(kConstants.boltzmann) * temperature / mass);
}

/// ⟨n_s⟩ = m v_rms² / (ħ ω_s).
template <typename Scalar>
Scalar mean_stretch_occupation(Scalar v_rms, Scalar omega_s, Scalar mass) {
  if (!(omega_s > Scalar(0))) throw DomainError("stretch frequency must be positive");
  return mass * v_rms * v_rms / (Scalar(kConstants.reduced_planck) * omega_s);
}

/// Equipartition occupation k_B T / (ħ ω) of any mode.
template <typename Scalar>
Scalar thermal_occupation(Scalar temperature, Scalar omega) {
  if (!(omega > Scalar(0))) throw DomainError("mode frequency must be positive");
  if (!(temperature >= Scalar(0))) throw DomainError("temperature must be non-negative");
  return Scalar(kConstants.boltzmann) * temperature / (Scalar(kConstants.reduced_planck) * omega);
}

/// η √n̄ with η = k cosθ √(ħ / (2 m ω)).
template <typename Scalar>
Scalar modified_lamb_dicke(Scalar wavenumber, Scalar projection_cosine, Scalar omega, Scalar mass,
                           Scalar mean_n) {
  using std::abs;
  using std::sqrt;
  if (!(omega > Scalar(0))) throw DomainError("mode frequency must be positive");
  if (!(abs(projection_cosine) <= Scalar(1))) throw DomainError("|projection_cosine| must be <= 1");
  if (!(mean_n >= Scalar(0))) throw DomainError("mean occupation must be non-negative");
  if (!(mass > Scalar(0))) throw DomainError("mass must be positive");
  const Scalar eta = wavenumber * projection_cosine *
                     sqrt(Scalar(kConstants.reduced_planck) / (Scalar(2) * mass * omega));
  return eta * sqrt(mean_n);
}

}  // namespace phonon_hop
