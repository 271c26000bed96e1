#pragma once

// Brute-force cross-checks for the analytic model:
//  * exact unitary evolution of one local phonon on two sites,
//  * a seeded Monte Carlo estimate of the thermal average over stretch occupations,
//  * classical small-oscillation modes from a finite-difference Hessian of the
//    full two-ion potential.

#include <complex>
#include <cstdint>

#include <Eigen/Core>

#include "phonon_hop/kerr_model.hpp"

namespace phonon_hop {

struct SinglePhononState {
  std::complex<double> amplitude_ion1{1.0, 0.0};
  std::complex<double> amplitude_ion2{0.0, 0.0};

  double norm_squared() const { return std::norm(amplitude_ion1) + std::norm(amplitude_ion2); }
};

/// H/ħ restricted to one phonon in the site basis {|1,0⟩, |0,1⟩}: on-site energy on the
/// diagonal, exchange amplitude (κ − χ n_s)/2 off the diagonal.
Eigen::Matrix2cd single_phonon_hamiltonian(double kappa, double chi, long n_s, double onsite = 0.0);

/// Exact propagation of `initial` under the single-phonon Hamiltonian via its
/// eigendecomposition.
SinglePhononState evolve_single_phonon_state(double kappa, double chi, long n_s, double t,
                                             const SinglePhononState& initial = {},
                                             double onsite = 0.0);

/// Probability |a₂(t)|² that the phonon started on ion 1 is found on ion 2.
double evolve_single_phonon(double kappa, double chi, long n_s, double t, double onsite = 0.0);

/// Thermal average estimated from `samples` i.i.d. stretch occupations drawn with Rng(seed).
HoppingTrace monte_carlo_signal(double kappa, double chi, double mean_n,
                                const Eigen::Ref<const Eigen::VectorXd>& times, long samples,
                                std::uint64_t seed);

/// Pointwise standard-error bound for a probability estimated from `samples` draws.
inline double monte_carlo_error_bound(long samples) {
  return 0.5 / std::sqrt(static_cast<double>(samples));
}

/// Two ions: positions row i = (x, y, z) of ion i; trap_frequencies = (ω_x, ω_y, ω_z).
/// ω_x is carried for completeness only; x motion is not part of the Hessian.
struct IonCrystal {
  Eigen::Matrix<double, 2, 3> positions = Eigen::Matrix<double, 2, 3>::Zero();
  Eigen::Vector3d trap_frequencies = Eigen::Vector3d::Zero();
  double mass = kConstants.ca40_mass;

  /// Symmetric equilibrium z = ∓d₀/2 with the exact separation.
  static IonCrystal at_equilibrium(const TrapConfig& config, double omega_x = 0.0);

  /// Largest net force on either ion relative to the axial trap force m ω_z² d₀/2.
  double force_balance_residual() const;

  /// Total potential with (y₁, y₂, z₁, z₂) displaced from the stored positions.
  double potential(const Eigen::Vector4d& displacement) const;
};

struct HessianResult {
  Eigen::Matrix4d raw;        // central differences as evaluated
  Eigen::Matrix4d symmetric;  // (raw + rawᵀ) / 2
  double asymmetry = 0.0;     // max |raw − rawᵀ| / max |raw|
};

/// Second-order central-difference Hessian in (y₁, y₂, z₁, z₂).
HessianResult potential_hessian(const IonCrystal& crystal, double step = 1e-9);

/// √(eigenvalue / m) of the potential Hessian, ascending.
Eigen::Vector4d classical_normal_modes(const IonCrystal& crystal, double step = 1e-9);

}  // namespace phonon_hop
