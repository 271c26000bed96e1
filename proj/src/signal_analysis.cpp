#include "phonon_hop/signal_analysis.hpp"

#include <complex>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "phonon_hop/constants.hpp"
#include "phonon_hop/errors.hpp"

namespace phonon_hop {

namespace {

using Vector6d = Eigen::Matrix<double, kNumFitParams, 1>;
using Matrix6d = Eigen::Matrix<double, kNumFitParams, kNumFitParams>;
using JacobianMatrix = Eigen::Matrix<double, Eigen::Dynamic, kNumFitParams>;

double wrap_phase(double d) {
  return d - kTwoPi * std::floor((d + kConstants.pi) / kTwoPi);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  const double xm = x.mean();
  const double ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  LinearFit fit;
  fit.slope = sxx > 0.0 ? ((x.array() - xm) * (y.array() - ym)).sum() / sxx : 0.0;
  fit.intercept = ym - fit.slope * xm;
  return fit;
}

bool is_uniform(const Eigen::VectorXd& t) {
  const Eigen::Index n = t.size();
  const double dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt) return false;
  return true;
}

Eigen::VectorXd resample_linear(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& grid) {
  Eigen::VectorXd out(grid.size());
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    while (j + 2 < t.size() && t[j + 1] < grid[i]) ++j;
    const double w = (grid[i] - t[j]) / (t[j + 1] - t[j]);
    out[i] = y[j] + std::clamp(w, 0.0, 1.0) * (y[j + 1] - y[j]);
  }
  return out;
}

// Internal coordinates: (a, ln b, ln c, d, f, offset).
Vector6d to_internal(const FitParameters& p) {
  Vector6d q = p;
  q[kDecay] = std::log(p[kDecay]);
  q[kFrequency] = std::log(p[kFrequency]);
  return q;
}

FitParameters to_physical(const Vector6d& q) {
  FitParameters p = q;
  p[kDecay] = std::exp(q[kDecay]);
  p[kFrequency] = std::exp(q[kFrequency]);
  return p;
}

struct Evaluation {
  Eigen::VectorXd residual;
  JacobianMatrix jacobian;  // ∂model/∂(physical parameters)
  double cost = 0.0;
};

Evaluation evaluate(const TimeSeries& data, const Eigen::VectorXd& weights, const FitParameters& p,
                    bool with_jacobian) {
  const Eigen::Index n = data.times.size();
  Evaluation ev;
  ev.residual.resize(n);
  if (with_jacobian) ev.jacobian.resize(n, kNumFitParams);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = data.times[i];
    ev.residual[i] = data.values[i] - damped_sine(t, p);
    if (with_jacobian) ev.jacobian.row(i) = damped_sine_gradient(t, p);
  }
  ev.cost = (weights.array() * ev.residual.array().square()).sum();
  return ev;
}

// Inverse of a symmetric positive semi-definite matrix restricted to `free` indices,
// computed on the diagonally scaled matrix. Sets `degenerate` when it is numerically singular.
Matrix6d restricted_inverse(const Matrix6d& a, const std::vector<Eigen::Index>& free,
                            bool& degenerate) {
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = a(free[i], free[j]);

  Eigen::VectorXd scale(m);
  degenerate = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(sub(i, i) > 0.0)) {
      degenerate = true;
      scale[i] = 1.0;
    } else {
      scale[i] = 1.0 / std::sqrt(sub(i, i));
    }
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * sub * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lambda.maxCoeff(), 0.0);
  Eigen::VectorXd inv_lambda(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (lambda[k] > cutoff && lambda[k] > 0.0) {
      inv_lambda[k] = 1.0 / lambda[k];
    } else {
      inv_lambda[k] = 0.0;
      degenerate = true;
    }
  }
  const Eigen::MatrixXd scaled_inv =
      eig.eigenvectors() * inv_lambda.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd sub_inv = scale.asDiagonal() * scaled_inv * scale.asDiagonal();

  Matrix6d out = Matrix6d::Zero();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(free[i], free[j]) = sub_inv(i, j);
  return out;
}

}  // namespace

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw DomainError("times and values differ in length");
  if (times.size() < kMinPoints)
    throw DomainError("time series needs at least " + std::to_string(kMinPoints) + " points");
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw DomainError("time series contains non-finite entries");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw DomainError("time series times must be strictly increasing");
  }
  if (sigma) {
    if (sigma->size() != times.size()) throw DomainError("sigma differs in length from times");
    if (!((sigma->array() > 0.0).all())) throw DomainError("sigma entries must be positive");
  }
}

InitialGuess initial_guess(const TimeSeries& data) {
  data.validate();
  InitialGuess guess;
  const Eigen::Index n = data.times.size();
  const double t0 = data.times[0];
  const double span = data.times[n - 1] - t0;

  const LinearFit trend = fit_line(data.times, data.values);
  guess.params[kDrift] = trend.slope;
  guess.params[kOffset] = trend.intercept;

  Eigen::VectorXd grid = data.times;
  Eigen::VectorXd detrended =
      data.values.array() - trend.slope * data.times.array() - trend.intercept;
  if (!is_uniform(data.times)) {
    grid = Eigen::VectorXd::LinSpaced(n, t0, data.times[n - 1]);
    detrended = resample_linear(data.times, detrended, grid);
  }
  detrended.array() -= detrended.mean();
  const double dt = span / static_cast<double>(n - 1);
  guess.bin_width = kTwoPi / (static_cast<double>(n) * dt);

  const double rms = std::sqrt(detrended.squaredNorm() / static_cast<double>(n));
  const double scale = data.values.cwiseAbs().maxCoeff();
  if (!(rms > 1e-10 * scale)) {
    guess.warnings.push_back("no dominant frequency bin: series has no oscillating component");
    guess.params[kAmplitude] = 0.0;
    guess.params[kDecay] = 1.0 / span;
    guess.params[kFrequency] = kTwoPi / span;
    guess.params[kPhase] = 0.0;
    return guess;
  }

  std::vector<double> samples(detrended.data(), detrended.data() + n);
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, samples);

  const Eigen::Index half = n / 2;
  Eigen::Index peak = 1;
  for (Eigen::Index k = 2; k <= half; ++k)
    if (std::abs(spectrum[k]) > std::abs(spectrum[peak])) peak = k;

  double frac = 0.0;
  if (peak > 1 && peak < half) {
    const double lo = std::abs(spectrum[peak - 1]);
    const double mid = std::abs(spectrum[peak]);
    const double hi = std::abs(spectrum[peak + 1]);
    const double denom = lo - 2.0 * mid + hi;
    if (denom < 0.0) frac = std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
  }
  const double bins = static_cast<double>(peak) + frac;
  const double c = bins * guess.bin_width;
  guess.params[kFrequency] = c;

  const double cycles = c * span / kTwoPi;
  if (cycles < 2.0)
    guess.warnings.push_back("fewer than 2 oscillation periods in the record; guess is unreliable");

  // Per-period peaks of |detrended| give the envelope.
  const auto period_samples =
      std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::lround(kTwoPi / (c * dt))));
  std::vector<double> peak_t;
  std::vector<double> peak_log;
  for (Eigen::Index start = 0; start + period_samples <= n; start += period_samples) {
    Eigen::Index arg = 0;
    const double top = detrended.segment(start, period_samples).cwiseAbs().maxCoeff(&arg);
    if (top > 0.0) {
      peak_t.push_back(grid[start + arg]);
      peak_log.push_back(std::log(top));
    }
  }
  double b = 0.0;
  if (peak_t.size() >= 2) {
    const LinearFit env = fit_line(Eigen::Map<const Eigen::VectorXd>(peak_t.data(), peak_t.size()),
                                   Eigen::Map<const Eigen::VectorXd>(peak_log.data(), peak_log.size()));
    b = -env.slope;
  }
  if (!(b > 0.0) || !std::isfinite(b)) b = 1e-3 / span;
  guess.params[kDecay] = b;

  // rms of a e^{-b(t-t0)} sin(...) is a·sqrt(mean e^{-2b(t-t0)} / 2)
  const double mean_decay = ((-2.0 * b) * (grid.array() - t0)).exp().mean();
  const double amplitude_t0 = std::sqrt(2.0) * rms / std::sqrt(mean_decay);
  guess.params[kAmplitude] = amplitude_t0 * std::exp(b * t0);

  // Bin phase is the sine phase at t0 minus π/2, shifted by the off-bin leakage.
  const double phase_t0 = std::arg(spectrum[peak]) + 0.5 * kConstants.pi -
                          kConstants.pi * frac * static_cast<double>(n - 1) / static_cast<double>(n);
  guess.params[kPhase] = wrap_phase(phase_t0 - c * t0);
  return guess;
}

DampedSineFit fit_damped_sine(const TimeSeries& data, const FitParameters& guess,
                              const FitOptions& options) {
  data.validate();
  if (!guess.allFinite()) throw DomainError("initial guess must be finite");
  if (!(options.max_iter > 0) || !(options.tol > 0.0))
    throw DomainError("fit options must be positive");

  FitParameters start = guess;
  const double span = data.times[data.times.size() - 1] - data.times[0];
  if (!(start[kDecay] > 0.0)) start[kDecay] = 1e-6 / span;
  if (!(start[kFrequency] > 0.0)) start[kFrequency] = kTwoPi / span;

  const Eigen::Index n = data.times.size();
  const Eigen::VectorXd weights =
      data.sigma ? Eigen::VectorXd(data.sigma->array().square().inverse()) : Eigen::VectorXd::Ones(n);

  std::vector<Eigen::Index> free = {kAmplitude, kDecay, kFrequency, kPhase, kDrift};
  if (options.fit_offset) free.push_back(kOffset);

  auto internal_jacobian = [](JacobianMatrix j, const FitParameters& p) {
    j.col(kDecay) *= p[kDecay];
    j.col(kFrequency) *= p[kFrequency];
    return j;
  };

  DampedSineFit fit;
  Vector6d q = to_internal(start);
  FitParameters p = start;
  Evaluation ev = evaluate(data, weights, p, true);
  fit.cost_history.push_back(ev.cost);
  double lambda = 1e-3;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    fit.iterations = iter + 1;
    if (ev.cost == 0.0) {
      fit.converged = true;
      break;
    }
    const JacobianMatrix j = internal_jacobian(ev.jacobian, p);
    Matrix6d normal = j.transpose() * weights.asDiagonal() * j;
    Vector6d gradient = j.transpose() * (weights.array() * ev.residual.array()).matrix();
    if (!options.fit_offset) {
      normal.row(kOffset).setZero();
      normal.col(kOffset).setZero();
      gradient[kOffset] = 0.0;
    }
    const double diag_floor = 1e-15 * std::max(normal.diagonal().maxCoeff(), 1e-300);
    Matrix6d damped = normal;
    for (Eigen::Index k = 0; k < kNumFitParams; ++k)
      damped(k, k) += lambda * std::max(normal(k, k), diag_floor);
    if (!options.fit_offset) damped(kOffset, kOffset) = 1.0;

    const Vector6d step = damped.ldlt().solve(gradient);
    const Vector6d q_new = q + step;
    const FitParameters p_new = to_physical(q_new);
    const bool small_step = step.norm() < options.tol * (q.norm() + options.tol);

    Evaluation trial = p_new.allFinite() ? evaluate(data, weights, p_new, true) : Evaluation{};
    if (p_new.allFinite() && std::isfinite(trial.cost) && trial.cost < ev.cost) {
      const double rel = (ev.cost - trial.cost) / ev.cost;
      q = q_new;
      p = p_new;
      ev = std::move(trial);
      fit.cost_history.push_back(ev.cost);
      lambda = std::max(lambda / 10.0, 1e-15);
      if (rel < options.tol || small_step) {
        fit.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (small_step || lambda > 1e30) {
        fit.converged = true;
        break;
      }
    }
  }

  // Covariance from the physical-parameter Jacobian (chain rule back from log b, log c).
  const Matrix6d normal = ev.jacobian.transpose() * weights.asDiagonal() * ev.jacobian;
  bool degenerate = false;
  const Matrix6d inverse = restricted_inverse(normal, free, degenerate);
  const auto dof = static_cast<double>(std::max<Eigen::Index>(
      n - static_cast<Eigen::Index>(free.size()), 1));
  fit.covariance = (ev.cost / dof) * inverse;
  fit.degenerate = degenerate;

  fit.a = p[kAmplitude];
  fit.b = p[kDecay];
  fit.c = p[kFrequency];
  fit.d = p[kPhase];
  fit.f = p[kDrift];
  fit.offset = p[kOffset];
  if (fit.a < 0.0) {
    fit.a = -fit.a;
    fit.d += kConstants.pi;
    fit.covariance.row(kAmplitude) *= -1.0;
    fit.covariance.col(kAmplitude) *= -1.0;
  }
  fit.d = wrap_phase(fit.d);
  fit.residual_rms = std::sqrt(ev.residual.squaredNorm() / static_cast<double>(n));
  return fit;
}

DampedSineFit fit_damped_sine(const TimeSeries& data, const FitOptions& options) {
  return fit_damped_sine(data, initial_guess(data).params, options);
}

FitMetrics metrics_from_fit(const DampedSineFit& fit) {
  if (!fit.converged) throw PreconditionError("metrics need a converged fit");
  if (!(fit.b >= 0.0) || !(fit.c > 0.0)) throw DomainError("fit has negative decay or frequency");

  FitMetrics m;
  m.hopping_frequency_hz = fit.c / kTwoPi;
  m.hopping_frequency_hz_sigma = fit.sigma(kFrequency) / kTwoPi;
  if (fit.b == 0.0) return m;

  const double sb = fit.sigma(kDecay);
  const double sc = fit.sigma(kFrequency);
  m.decay_time = 1.0 / fit.b;
  m.decay_time_sigma = sb / (fit.b * fit.b);
  m.num_oscillations = fit.c / (kTwoPi * fit.b);
  // σ(N)/N = sqrt((σ_c/c)² + (σ_b/b)² − 2 cov(b,c)/(bc))
  const double rel2 = (sc / fit.c) * (sc / fit.c) + (sb / fit.b) * (sb / fit.b) -
                      2.0 * fit.covariance(kDecay, kFrequency) / (fit.b * fit.c);
  m.num_oscillations_sigma = *m.num_oscillations * std::sqrt(std::max(rel2, 0.0));
  return m;
}

}  // namespace phonon_hop
