#include "phonon_hop/quantum_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "phonon_hop/random.hpp"

namespace phonon_hop {

Eigen::Matrix2cd single_phonon_hamiltonian(double kappa, double chi, long n_s, double onsite) {
  if (n_s < 0) throw DomainError("stretch quantum number must be non-negative");
  const double exchange = 0.5 * (kappa - chi * static_cast<double>(n_s));
  Eigen::Matrix2cd h;
  h << onsite, exchange, exchange, onsite;
  return h;
}

SinglePhononState evolve_single_phonon_state(double kappa, double chi, long n_s, double t,
                                             const SinglePhononState& initial, double onsite) {
  if (!(t >= 0.0)) throw DomainError("evolution time must be non-negative");
  const Eigen::Matrix2cd h = single_phonon_hamiltonian(kappa, chi, n_s, onsite);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(h);

  // U = V diag(e^{−iλt}) V†
  Eigen::Vector2cd phases;
  for (int k = 0; k < 2; ++k) phases[k] = std::polar(1.0, -eig.eigenvalues()[k] * t);
  const Eigen::Matrix2cd& v = eig.eigenvectors();
  const Eigen::Matrix2cd u = v * phases.asDiagonal() * v.adjoint();

  const Eigen::Vector2cd psi0(initial.amplitude_ion1, initial.amplitude_ion2);
  const Eigen::Vector2cd psi = u * psi0;
  return {psi[0], psi[1]};
}

double evolve_single_phonon(double kappa, double chi, long n_s, double t, double onsite) {
  return std::norm(evolve_single_phonon_state(kappa, chi, n_s, t, {}, onsite).amplitude_ion2);
}

HoppingTrace monte_carlo_signal(double kappa, double chi, double mean_n,
                                const Eigen::Ref<const Eigen::VectorXd>& times, long samples,
                                std::uint64_t seed) {
  if (samples < 1) throw DomainError("monte carlo needs at least one sample");
  validate_time_grid(times);

  Rng rng(seed);
  std::map<long, long> counts;
  for (long s = 0; s < samples; ++s) ++counts[rng.geometric(mean_n)];

  HoppingTrace trace;
  trace.times = times;
  trace.values = Eigen::VectorXd::Zero(times.size());
  trace.metadata.kappa = kappa;
  trace.metadata.chi = chi;
  trace.metadata.mean_n = mean_n;

  // Averaging per-sample oracle values equals weighting each distinct n_s by its count.
  const double inv = 1.0 / static_cast<double>(samples);
  for (const auto& [n, count] : counts) {
    const double w = static_cast<double>(count) * inv;
    for (Eigen::Index i = 0; i < times.size(); ++i)
      trace.values[i] += w * evolve_single_phonon(kappa, chi, n, times[i]);
  }
  trace.values = trace.values.cwiseMax(0.0).cwiseMin(1.0);
  return trace;
}

IonCrystal IonCrystal::at_equilibrium(const TrapConfig& config, double omega_x) {
  config.validate();
  IonCrystal c;
  const double d0 = axial_freq_to_distance(config.omega_z, config.mass, DistanceConvention::Exact);
  c.positions(0, 2) = -0.5 * d0;
  c.positions(1, 2) = 0.5 * d0;
  c.trap_frequencies = Eigen::Vector3d(omega_x, config.omega_y, config.omega_z);
  c.mass = config.mass;
  return c;
}

double IonCrystal::force_balance_residual() const {
  const Eigen::Vector3d sep = positions.row(1) - positions.row(0);
  const double r = sep.norm();
  const double ke = kConstants.coulomb_constant();
  const Eigen::Vector3d w2 = trap_frequencies.cwiseProduct(trap_frequencies);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector3d pos = positions.row(i);
    const double sign = i == 1 ? 1.0 : -1.0;
    Eigen::Vector3d force = -mass * w2.cwiseProduct(pos) + sign * ke / (r * r * r) * sep;
    worst = std::max(worst, force.norm());
  }
  const double scale = mass * w2[2] * 0.5 * r;
  return worst / scale;
}

double IonCrystal::potential(const Eigen::Vector4d& displacement) const {
  const double y1 = positions(0, 1) + displacement[0];
  const double y2 = positions(1, 1) + displacement[1];
  const double z1 = positions(0, 2) + displacement[2];
  const double z2 = positions(1, 2) + displacement[3];
  const double x1 = positions(0, 0);
  const double x2 = positions(1, 0);
  const double wx2 = trap_frequencies[0] * trap_frequencies[0];
  const double wy2 = trap_frequencies[1] * trap_frequencies[1];
  const double wz2 = trap_frequencies[2] * trap_frequencies[2];

  const double trap = 0.5 * mass *
                      (wx2 * (x1 * x1 + x2 * x2) + wy2 * (y1 * y1 + y2 * y2) +
                       wz2 * (z1 * z1 + z2 * z2));
  const double dx = x1 - x2;
  const double dy = y1 - y2;
  const double dz = z1 - z2;
  return trap + kConstants.coulomb_constant() / std::sqrt(dx * dx + dy * dy + dz * dz);
}

HessianResult potential_hessian(const IonCrystal& crystal, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  HessianResult out;
  const double v0 = crystal.potential(Eigen::Vector4d::Zero());
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector4d ei = step * Eigen::Vector4d::Unit(i);
    for (int j = 0; j < 4; ++j) {
      if (i == j) {
        out.raw(i, i) = (crystal.potential(ei) - 2.0 * v0 + crystal.potential(-ei)) / (step * step);
        continue;
      }
      const Eigen::Vector4d ej = step * Eigen::Vector4d::Unit(j);
      out.raw(i, j) = (crystal.potential(ei + ej) - crystal.potential(ei - ej) -
                       crystal.potential(-ei + ej) + crystal.potential(-ei - ej)) /
                      (4.0 * step * step);
    }
  }
  const double largest = out.raw.cwiseAbs().maxCoeff();
  out.asymmetry = (out.raw - out.raw.transpose()).cwiseAbs().maxCoeff() / largest;
  out.symmetric = 0.5 * (out.raw + out.raw.transpose());
  return out;
}

Eigen::Vector4d classical_normal_modes(const IonCrystal& crystal, double step) {
  if (!(crystal.mass > 0.0)) throw DomainError("mass must be positive");
  if (!(crystal.force_balance_residual() < 1e-10))
    throw PreconditionError("ion crystal is not at equilibrium");
  const HessianResult h = potential_hessian(crystal, step);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(h.symmetric, Eigen::EigenvaluesOnly);
  Eigen::Vector4d freqs;
  for (int k = 0; k < 4; ++k) {
    const double lambda = eig.eigenvalues()[k];
    if (lambda < 0.0) throw InstabilityError("negative Hessian eigenvalue: crystal is unstable");
    freqs[k] = std::sqrt(lambda / crystal.mass);
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

}  // namespace phonon_hop
