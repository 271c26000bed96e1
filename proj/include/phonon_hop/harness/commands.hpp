#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phonon_hop/harness/config.hpp"
#include "phonon_hop/kerr_model.hpp"
#include "phonon_hop/signal_analysis.hpp"

namespace phonon_hop::harness {

/// Everything trap_physics / kerr_model derive for one (ω_y, ω_z) point.
struct DerivedRecord {
  SweepPoint point;
  double d0_exact = 0.0;
  double d0_length_scale = 0.0;
  double d0_james_fit = 0.0;
  ModeSpectrum spectrum{};
  double chi = 0.0;
  double axial_temperature = 0.0;
  double doppler_temperature = 0.0;
  double mean_n = 0.0;
  double lamb_dicke = 0.0;  // η √n̄ for the configured laser and mode
};

DerivedRecord derive_point(const RunConfig& config, const SweepPoint& point);
std::vector<DerivedRecord> cmd_derive(const RunConfig& config);
void write_derive(std::ostream& out, const RunConfig& config,
                  const std::vector<DerivedRecord>& records);

struct SimulateOptions {
  double t_max = 5e-3;
  long points = 2001;
  bool chi_zero = false;
};

struct SimulatedTrace {
  HoppingTrace trace;
  std::optional<Eigen::VectorXd> sigma;  // present when noise was added
};

/// Thermally averaged hopping trace at the [trap] point on a uniform grid [0, t_max], with seeded
/// binomial (synth.shots) or Gaussian (synth.noise_sigma) noise when configured.
SimulatedTrace cmd_simulate(const RunConfig& config, const SimulateOptions& options);
void write_simulation(std::ostream& out, const RunConfig& config, const SimulatedTrace& sim);

struct FitReport {
  InitialGuess guess;
  DampedSineFit fit;
  std::optional<FitMetrics> metrics;  // only for converged fits with b > 0
};

FitReport cmd_fit(const TimeSeries& data, const RunConfig& config);
nlohmann::ordered_json fit_report_json(const RunConfig& config, const FitReport& report);

struct SweepRecord {
  SweepPoint point;
  double d0_exact = 0.0;
  double d0_length_scale = 0.0;
  double kappa = 0.0;
  double chi = 0.0;
  double mean_n = 0.0;
  CoherenceMetrics model;
  std::optional<double> decay_time_fit;
  std::optional<double> n_osc_fit;
  bool fit_attempted = false;
};

/// Fit-pipeline metrics for one point from a noiseless trace over [0, 2τ_model].
void add_fit_metrics(const RunConfig& config, SweepRecord& record);

SweepRecord sweep_point(const RunConfig& config, const SweepPoint& point);

/// Sorted by d0 ascending, then ω_y ascending. Results do not depend on `threads`.
std::vector<SweepRecord> cmd_sweep(const RunConfig& config, unsigned threads = 1);

struct TrendCheck {
  std::string name;   // e.g. "decay_time_model increases with d0"
  std::string group;  // e.g. "omega_y_hz=2870000"
  bool pass = false;
};

/// The four monotonicity checks, evaluated on every group of records sharing ω_y
/// (d₀ trends) or ω_z (ω_y trends) with at least two members.
std::vector<TrendCheck> sweep_trends(const std::vector<SweepRecord>& records);
void write_sweep(std::ostream& out, const RunConfig& config, const std::vector<SweepRecord>& records);

struct VerifyOptions {
  double kappa_scale = 1.0;  // fault injection: scales the production κ
  long mc_samples = 20000;
  std::uint64_t seed = 20240601;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string where;  // parameter set of the worst deviation
};

std::vector<CheckResult> cmd_verify(const VerifyOptions& options = {});
void write_verification(std::ostream& out, const std::vector<CheckResult>& results);

/// PHONON_HOP_THREADS if set to a positive integer, else hardware concurrency (>= 1).
unsigned worker_count();

}  // namespace phonon_hop::harness
