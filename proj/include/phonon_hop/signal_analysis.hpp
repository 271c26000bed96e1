#pragma once

// Damped-sinusoid fitting of hopping traces:
//
//   y(t) = a e^{−bt} sin(ct + d) + f t + offset
//
// The offset is a free parameter by default (hopping traces oscillate about 1/2) and
// can be pinned through FitOptions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace phonon_hop {

struct TimeSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  std::optional<Eigen::VectorXd> sigma;

  static constexpr Eigen::Index kMinPoints = 8;

  /// Throws DomainError on fewer than kMinPoints samples, non-increasing times,
  /// size mismatches, non-finite values or non-positive sigma.
  void validate() const;
};

enum FitParam : Eigen::Index { kAmplitude = 0, kDecay, kFrequency, kPhase, kDrift, kOffset };
inline constexpr Eigen::Index kNumFitParams = 6;

template <typename Scalar>
using DampedSineParams = Eigen::Matrix<Scalar, kNumFitParams, 1>;
using FitParameters = DampedSineParams<double>;

template <typename Scalar>
Scalar damped_sine(Scalar t, const DampedSineParams<Scalar>& p) {
  using std::exp;
  using std::sin;
  return p[kAmplitude] * exp(-p[kDecay] * t) * sin(p[kFrequency] * t + p[kPhase]) + p[kDrift] * t +
         p[kOffset];
}

/// ∂y/∂(a, b, c, d, f, offset) at time t.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, kNumFitParams> damped_sine_gradient(Scalar t,
                                                             const DampedSineParams<Scalar>& p) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Scalar e = exp(-p[kDecay] * t);
  const Scalar arg = p[kFrequency] * t + p[kPhase];
  const Scalar s = sin(arg);
  const Scalar c = cos(arg);
  Eigen::Matrix<Scalar, 1, kNumFitParams> g;
  g << e * s, -p[kAmplitude] * t * e * s, p[kAmplitude] * t * e * c, p[kAmplitude] * e * c, t,
      Scalar(1);
  return g;
}

struct InitialGuess {
  FitParameters params = FitParameters::Zero();
  double bin_width = 0.0;  // rad/s, Fourier resolution of the record
  std::vector<std::string> warnings;
};

/// Heuristic starting point: drift and offset from a linear fit, frequency and phase
/// from the dominant DFT bin, decay from per-period peaks, amplitude from the rms.
InitialGuess initial_guess(const TimeSeries& data);

struct FitOptions {
  int max_iter = 200;
  double tol = 1e-10;
  bool fit_offset = true;
};

struct DampedSineFit {
  double a = 0.0;
  double b = 0.0;  // 1/s
  double c = 0.0;  // rad/s
  double d = 0.0;  // rad, in [−π, π)
  double f = 0.0;  // 1/s
  double offset = 0.0;
  Eigen::Matrix<double, kNumFitParams, kNumFitParams> covariance =
      Eigen::Matrix<double, kNumFitParams, kNumFitParams>::Zero();
  double residual_rms = 0.0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  std::vector<double> cost_history;  // weighted cost after each accepted step, starting point first

  FitParameters params() const {
    FitParameters p;
    p << a, b, c, d, f, offset;
    return p;
  }
  double sigma(FitParam k) const { return std::sqrt(std::max(covariance(k, k), 0.0)); }
};

/// Levenberg-Marquardt minimization of Σ w_i (y_i − y(t_i))², with w_i = 1/σ_i² when
/// the series carries sigma. Decay and frequency are optimized as logarithms.
DampedSineFit fit_damped_sine(const TimeSeries& data, const FitParameters& guess,
                              const FitOptions& options = {});

/// Same, starting from initial_guess(data).
DampedSineFit fit_damped_sine(const TimeSeries& data, const FitOptions& options = {});

struct FitMetrics {
  std::optional<double> decay_time;  // s, 1/b; nullopt when b == 0
  double hopping_frequency_hz = 0.0;
  std::optional<double> num_oscillations;
  double decay_time_sigma = 0.0;
  double hopping_frequency_hz_sigma = 0.0;
  double num_oscillations_sigma = 0.0;
};

FitMetrics metrics_from_fit(const DampedSineFit& fit);

}  // namespace phonon_hop
