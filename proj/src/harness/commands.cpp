#include "phonon_hop/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <ostream>
#include <thread>

#include "phonon_hop/harness/csv.hpp"
#include "phonon_hop/quantum_oracle.hpp"
#include "phonon_hop/random.hpp"

namespace phonon_hop::harness {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::string optional_cell(std::optional<double> v, bool attempted, bool unbounded_is_inf) {
  if (v) return format_double(*v);
  if (unbounded_is_inf && attempted) return "inf";
  return "";
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["trap"] = {{"mass_kg", c.mass_kg},
               {"omega_y_hz", c.omega_y_hz},
               {"omega_z_hz", c.omega_z_hz},
               {"axial_temperature_k", c.axial_temperature()},
               {"doppler_linewidth_hz", c.doppler_linewidth_hz}};
  ordered_json points = ordered_json::array();
  for (const auto& p : c.sweep) points.push_back({p.omega_y_hz, p.omega_z_hz});
  j["sweep"] = {{"points", points}, {"fit", c.sweep_fit}};
  j["model"] = {{"tail_tol", c.model.tail_tol},
                {"distance_convention", std::string(to_string(c.model.distance_convention))}};
  j["fit"] = {{"max_iter", c.fit.max_iter}, {"tol", c.fit.tol}};
  j["synth"] = {{"noise_sigma", c.synth.noise_sigma}, {"shots", c.synth.shots}, {"seed", c.synth.seed}};
  j["lamb_dicke"] = {{"wavelength_m", c.lamb_dicke.wavelength_m},
                     {"projection_cosine", c.lamb_dicke.projection_cosine},
                     {"mode", c.lamb_dicke.mode}};
  return j;
}

std::string point_label(const SweepPoint& p) {
  return "omega_y_hz=" + format_double(p.omega_y_hz) + ",omega_z_hz=" + format_double(p.omega_z_hz);
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("PHONON_HOP_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- derive

DerivedRecord derive_point(const RunConfig& config, const SweepPoint& point) {
  const TrapConfig trap = config.trap_at(point);
  DerivedRecord r;
  r.point = point;
  r.d0_exact = axial_freq_to_distance(trap.omega_z, trap.mass, DistanceConvention::Exact);
  r.d0_length_scale = axial_freq_to_distance(trap.omega_z, trap.mass, DistanceConvention::LengthScale);
  r.d0_james_fit = axial_freq_to_distance(trap.omega_z, trap.mass, DistanceConvention::JamesFit);
  r.spectrum = mode_spectrum(trap);
  r.chi = kerr_chi(r.spectrum, trap.omega_z, trap.mass).chi;
  r.axial_temperature = trap.axial_temperature;
  r.doppler_temperature = doppler_temperature(kTwoPi * config.doppler_linewidth_hz);
  r.mean_n = mean_stretch_occupation(rms_velocity(trap.axial_temperature, trap.mass),
                                     r.spectrum.omega_stretch, trap.mass);
  const double mode_omega =
      config.lamb_dicke.mode == "com" ? r.spectrum.omega_com_z : r.spectrum.omega_stretch;
  r.lamb_dicke = modified_lamb_dicke(kTwoPi / config.lamb_dicke.wavelength_m,
                                     config.lamb_dicke.projection_cosine, mode_omega, trap.mass,
                                     thermal_occupation(trap.axial_temperature, mode_omega));
  return r;
}

std::vector<DerivedRecord> cmd_derive(const RunConfig& config) {
  std::vector<DerivedRecord> out;
  out.reserve(config.sweep.size());
  for (const auto& p : config.sweep) out.push_back(derive_point(config, p));
  return out;
}

void write_derive(std::ostream& out, const RunConfig& config,
                  const std::vector<DerivedRecord>& records) {
  if (config.output.format == OutputFormat::Json) {
    ordered_json j;
    j["config"] = config_json(config);
    j["records"] = ordered_json::array();
    for (const auto& r : records) {
      j["records"].push_back({{"omega_y_hz", r.point.omega_y_hz},
                              {"omega_z_hz", r.point.omega_z_hz},
                              {"d0_exact_m", r.d0_exact},
                              {"d0_length_scale_m", r.d0_length_scale},
                              {"d0_james_fit_m", r.d0_james_fit},
                              {"omega_com_z_rad_s", r.spectrum.omega_com_z},
                              {"omega_stretch_rad_s", r.spectrum.omega_stretch},
                              {"omega_com_y_rad_s", r.spectrum.omega_com_y},
                              {"omega_rock_rad_s", r.spectrum.omega_rock},
                              {"kappa_rad_s", r.spectrum.kappa},
                              {"chi_rad_s", r.chi},
                              {"axial_temperature_k", r.axial_temperature},
                              {"doppler_temperature_k", r.doppler_temperature},
                              {"mean_n_stretch", r.mean_n},
                              {"lamb_dicke_eta_sqrt_n", r.lamb_dicke}});
    }
    out << j.dump(2) << '\n';
    return;
  }
  if (records.empty()) return;
  out << "omega_y_hz,omega_z_hz,d0_exact_m,d0_length_scale_m,d0_james_fit_m,omega_com_z_rad_s,"
         "omega_stretch_rad_s,omega_com_y_rad_s,omega_rock_rad_s,kappa_rad_s,chi_rad_s,"
         "axial_temperature_k,doppler_temperature_k,mean_n_stretch,lamb_dicke_eta_sqrt_n\n";
  for (const auto& r : records) {
    const double cells[] = {r.point.omega_y_hz,       r.point.omega_z_hz,     r.d0_exact,
                            r.d0_length_scale,        r.d0_james_fit,         r.spectrum.omega_com_z,
                            r.spectrum.omega_stretch, r.spectrum.omega_com_y, r.spectrum.omega_rock,
                            r.spectrum.kappa,         r.chi,                  r.axial_temperature,
                            r.doppler_temperature,    r.mean_n,               r.lamb_dicke};
    for (std::size_t k = 0; k < std::size(cells); ++k) out << (k ? "," : "") << format_double(cells[k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------- simulate

SimulatedTrace cmd_simulate(const RunConfig& config, const SimulateOptions& options) {
  if (!(options.t_max > 0.0) || !std::isfinite(options.t_max))
    throw DomainError("--t-max must be positive");
  if (options.points < 2) throw DomainError("--points must be at least 2");

  const TrapConfig trap = config.trap();
  const ModeSpectrum spectrum = mode_spectrum(trap);
  const double chi = options.chi_zero ? 0.0 : kerr_chi(spectrum, trap.omega_z, trap.mass).chi;
  const double mean_n = mean_stretch_occupation(rms_velocity(trap.axial_temperature, trap.mass),
                                                spectrum.omega_stretch, trap.mass);
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(options.points, 0.0, options.t_max);

  SimulatedTrace sim;
  sim.trace = hopping_signal(spectrum.kappa, chi, thermal_distribution(mean_n, config.model.tail_tol),
                             times);

  const auto& synth = config.synth;
  if (synth.shots > 0 || synth.noise_sigma > 0.0) {
    Rng rng(synth.seed, 1);
    Eigen::VectorXd sigma(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      const double p = sim.trace.values[i];
      if (synth.shots > 0) {
        const auto shots = static_cast<double>(synth.shots);
        const auto k = static_cast<double>(rng.binomial(synth.shots, p));
        sim.trace.values[i] = k / shots;
        const double smoothed = (k + 1.0) / (shots + 2.0);
        sigma[i] = std::sqrt(smoothed * (1.0 - smoothed) / shots);
      } else {
        sim.trace.values[i] = std::clamp(p + synth.noise_sigma * rng.normal(), 0.0, 1.0);
        sigma[i] = synth.noise_sigma;
      }
    }
    sim.sigma = sigma;
  }
  return sim;
}

void write_simulation(std::ostream& out, const RunConfig& config, const SimulatedTrace& sim) {
  if (config.output.format == OutputFormat::Csv) {
    write_trace_csv(out, sim.trace.times, sim.trace.values, sim.sigma);
    return;
  }
  ordered_json j;
  j["config"] = config_json(config);
  const auto& md = sim.trace.metadata;
  j["metadata"] = {{"kappa_rad_s", number_or_null(md.kappa)},
                   {"chi_rad_s", number_or_null(md.chi)},
                   {"mean_n", number_or_null(md.mean_n)},
                   {"convention", md.convention}};
  j["time_s"] = std::vector<double>(sim.trace.times.begin(), sim.trace.times.end());
  j["p_excited"] = std::vector<double>(sim.trace.values.begin(), sim.trace.values.end());
  if (sim.sigma) j["sigma"] = std::vector<double>(sim.sigma->begin(), sim.sigma->end());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- fit

FitReport cmd_fit(const TimeSeries& data, const RunConfig& config) {
  FitReport r;
  r.guess = initial_guess(data);
  FitOptions opts;
  opts.max_iter = config.fit.max_iter;
  opts.tol = config.fit.tol;
  r.fit = fit_damped_sine(data, r.guess.params, opts);
  if (r.fit.converged) r.metrics = metrics_from_fit(r.fit);
  return r;
}

ordered_json fit_report_json(const RunConfig& config, const FitReport& report) {
  const auto& f = report.fit;
  ordered_json j;
  j["config"] = config_json(config);
  std::vector<double> cov;
  for (Eigen::Index r = 0; r < kOffset; ++r)
    for (Eigen::Index c = 0; c < kOffset; ++c) cov.push_back(f.covariance(r, c));
  j["fit"] = {{"a", f.a},
              {"b", f.b},
              {"c", f.c},
              {"d", f.d},
              {"f", f.f},
              {"covariance", cov},
              {"offset", f.offset},
              {"offset_sigma", f.sigma(kOffset)},
              {"residual_rms", f.residual_rms},
              {"iterations", f.iterations},
              {"degenerate", f.degenerate}};
  if (report.metrics) {
    const auto& m = *report.metrics;
    j["metrics"] = {{"decay_time_s", number_or_null(m.decay_time)},
                    {"decay_time_sigma_s", m.decay_time_sigma},
                    {"hopping_frequency_hz", m.hopping_frequency_hz},
                    {"hopping_frequency_hz_sigma", m.hopping_frequency_hz_sigma},
                    {"num_oscillations", number_or_null(m.num_oscillations)},
                    {"num_oscillations_sigma", m.num_oscillations_sigma}};
  } else {
    j["metrics"] = nullptr;
  }
  j["converged"] = f.converged;
  j["warnings"] = report.guess.warnings;
  return j;
}

// ---------------------------------------------------------------- sweep

SweepRecord sweep_point(const RunConfig& config, const SweepPoint& point) {
  const TrapConfig trap = config.trap_at(point);
  const ModeSpectrum spectrum = mode_spectrum(trap);
  SweepRecord r;
  r.point = point;
  r.d0_exact = axial_freq_to_distance(trap.omega_z, trap.mass, DistanceConvention::Exact);
  r.d0_length_scale = axial_freq_to_distance(trap.omega_z, trap.mass, DistanceConvention::LengthScale);
  r.kappa = spectrum.kappa;
  r.chi = kerr_chi(spectrum, trap.omega_z, trap.mass).chi;
  r.mean_n = mean_stretch_occupation(rms_velocity(trap.axial_temperature, trap.mass),
                                     spectrum.omega_stretch, trap.mass);
  r.model = coherence_metrics(r.kappa, r.chi, r.mean_n);
  if (config.sweep_fit) add_fit_metrics(config, r);
  return r;
}

void add_fit_metrics(const RunConfig& config, SweepRecord& r) {
  r.fit_attempted = true;
  if (!r.model.decay_time) return;
  const double window = 2.0 * *r.model.decay_time;
  const double periods = r.model.hopping_frequency * window / kTwoPi;
  const auto points = static_cast<Eigen::Index>(std::clamp(std::ceil(16.0 * periods), 400.0, 400000.0));
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(points, 0.0, window);
  const HoppingTrace trace =
      hopping_signal(r.kappa, r.chi, thermal_distribution(r.mean_n, config.model.tail_tol), times);

  TimeSeries series;
  series.times = trace.times;
  series.values = trace.values;
  FitOptions opts;
  opts.max_iter = config.fit.max_iter;
  opts.tol = config.fit.tol;
  const DampedSineFit fit = fit_damped_sine(series, opts);
  if (!fit.converged || !(fit.b > 0.0)) return;
  r.decay_time_fit = 1.0 / fit.b;
  r.n_osc_fit = fit.c / (kTwoPi * fit.b);
}

std::vector<SweepRecord> cmd_sweep(const RunConfig& config, unsigned threads) {
  if (config.sweep.empty()) throw ConfigError("sweep list is empty", 0, "sweep.point");
  std::vector<SweepRecord> records(config.sweep.size());
  parallel_for(records.size(), threads,
               [&](std::size_t i) { records[i] = sweep_point(config, config.sweep[i]); });
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.d0_exact != b.d0_exact) return a.d0_exact < b.d0_exact;
    return a.point.omega_y_hz < b.point.omega_y_hz;
  });
  return records;
}

std::vector<TrendCheck> sweep_trends(const std::vector<SweepRecord>& records) {
  auto value = [](std::optional<double> v) {
    return v ? *v : std::numeric_limits<double>::infinity();
  };
  auto strictly = [](const std::vector<double>& v, bool increasing) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
    return true;
  };

  std::vector<TrendCheck> checks;
  std::map<double, std::vector<const SweepRecord*>> by_omega_y;
  std::map<double, std::vector<const SweepRecord*>> by_omega_z;
  for (const auto& r : records) {
    by_omega_y[r.point.omega_y_hz].push_back(&r);
    by_omega_z[r.point.omega_z_hz].push_back(&r);
  }

  for (auto& [fy, group] : by_omega_y) {
    if (group.size() < 2) continue;
    std::stable_sort(group.begin(), group.end(),
                     [](auto* a, auto* b) { return a->d0_exact < b->d0_exact; });
    std::vector<double> tau;
    std::vector<double> nosc;
    for (const auto* r : group) {
      tau.push_back(value(r->model.decay_time));
      nosc.push_back(value(r->model.num_oscillations));
    }
    const std::string g = "omega_y_hz=" + format_double(fy);
    checks.push_back({"decay_time_model increases with d0", g, strictly(tau, true)});
    checks.push_back({"n_osc_model decreases with d0", g, strictly(nosc, false)});
  }
  for (auto& [fz, group] : by_omega_z) {
    if (group.size() < 2) continue;
    std::stable_sort(group.begin(), group.end(),
                     [](auto* a, auto* b) { return a->point.omega_y_hz < b->point.omega_y_hz; });
    std::vector<double> tau;
    std::vector<double> nosc;
    for (const auto* r : group) {
      tau.push_back(value(r->model.decay_time));
      nosc.push_back(value(r->model.num_oscillations));
    }
    const std::string g = "omega_z_hz=" + format_double(fz);
    checks.push_back({"decay_time_model increases with omega_y", g, strictly(tau, true)});
    checks.push_back({"n_osc_model increases with omega_y", g, strictly(nosc, true)});
  }
  return checks;
}

void write_sweep(std::ostream& out, const RunConfig& config, const std::vector<SweepRecord>& records) {
  const auto trends = sweep_trends(records);
  if (config.output.format == OutputFormat::Json) {
    ordered_json j;
    j["config"] = config_json(config);
    j["records"] = ordered_json::array();
    for (const auto& r : records) {
      j["records"].push_back({{"omega_y_hz", r.point.omega_y_hz},
                              {"omega_z_hz", r.point.omega_z_hz},
                              {"d0_exact_m", r.d0_exact},
                              {"d0_length_scale_m", r.d0_length_scale},
                              {"kappa_rad_s", r.kappa},
                              {"chi_rad_s", r.chi},
                              {"mean_n", r.mean_n},
                              {"decay_time_model_s", number_or_null(r.model.decay_time)},
                              {"n_osc_model", number_or_null(r.model.num_oscillations)},
                              {"decay_time_fit_s", number_or_null(r.decay_time_fit)},
                              {"n_osc_fit", number_or_null(r.n_osc_fit)}});
    }
    j["trends"] = ordered_json::array();
    for (const auto& t : trends)
      j["trends"].push_back({{"check", t.name}, {"group", t.group}, {"pass", t.pass}});
    out << j.dump(2) << '\n';
    return;
  }
  out << "omega_y_hz,omega_z_hz,d0_exact_m,d0_length_scale_m,kappa_rad_s,chi_rad_s,mean_n,"
         "decay_time_model_s,n_osc_model,decay_time_fit_s,n_osc_fit\n";
  for (const auto& r : records) {
    out << format_double(r.point.omega_y_hz) << ',' << format_double(r.point.omega_z_hz) << ','
        << format_double(r.d0_exact) << ',' << format_double(r.d0_length_scale) << ','
        << format_double(r.kappa) << ',' << format_double(r.chi) << ',' << format_double(r.mean_n)
        << ',' << optional_cell(r.model.decay_time, true, true) << ','
        << optional_cell(r.model.num_oscillations, true, true) << ','
        << optional_cell(r.decay_time_fit, false, false) << ','
        << optional_cell(r.n_osc_fit, false, false) << '\n';
  }
  for (const auto& t : trends)
    out << "# trend " << t.name << " [" << t.group << "]: " << (t.pass ? "PASS" : "FAIL") << '\n';
}

// ---------------------------------------------------------------- verify

std::vector<CheckResult> cmd_verify(const VerifyOptions& options) {
  std::vector<CheckResult> checks = {
      {"hessian_modes", true, 0.0, 1e-6, ""},
      {"hessian_symmetry", true, 0.0, 1e-6, ""},
      {"kappa_consistency/closed_form", true, 0.0, 1e-10, ""},
      {"kappa_consistency/hessian_splitting", true, 0.0, 1e-2, ""},
      {"unitary_vs_closed_form", true, 0.0, 1e-10, ""},
      {"unitary_norm", true, 0.0, 1e-12, ""},
      {"envelope_vs_truncated_sum", true, 0.0, 1e-9, ""},
      {"monte_carlo_vs_eq13", true, 0.0, 5.0, ""},  // deviation in units of the SE bound
  };
  auto record = [&](std::size_t k, double dev, const std::string& where) {
    auto& c = checks[k];
    if (c.where.empty() || !std::isfinite(dev) || dev > c.deviation) {
      c.deviation = dev;
      c.where = where;
    }
    if (!(dev <= c.tolerance)) c.pass = false;
  };

  const auto sets = experiment_parameter_sets();
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const SweepPoint& point = sets[s];
    const std::string where = point_label(point);
    TrapConfig trap;
    trap.omega_y = kTwoPi * point.omega_y_hz;
    trap.omega_z = kTwoPi * point.omega_z_hz;
    const ModeSpectrum spectrum = mode_spectrum(trap);
    const double kappa = options.kappa_scale * hopping_rate(trap);
    const double chi = kerr_chi(spectrum, trap.omega_z, trap.mass).chi;
    const double mean_n = mean_stretch_occupation(rms_velocity(trap.axial_temperature, trap.mass),
                                                  spectrum.omega_stretch, trap.mass);

    const IonCrystal crystal = IonCrystal::at_equilibrium(trap);
    const Eigen::Vector4d modes = classical_normal_modes(crystal);
    Eigen::Vector4d analytic(spectrum.omega_com_z, spectrum.omega_stretch, spectrum.omega_rock,
                             spectrum.omega_com_y);
    std::sort(analytic.begin(), analytic.end());
    record(0, ((modes - analytic).array() / analytic.array()).abs().maxCoeff(), where);
    record(1, potential_hessian(crystal).asymmetry, where);

    const double kappa_closed = trap.omega_z * trap.omega_z / (2.0 * trap.omega_y);
    record(2, std::abs(kappa - kappa_closed) / kappa_closed, where);
    record(3, std::abs((modes[3] - modes[2]) - kappa) / kappa, where);

    Rng rng(options.seed, s);
    double unitary_dev = 0.0;
    double norm_dev = 0.0;
    for (long n = 0; n <= 5; ++n) {
      for (int k = 0; k < 32; ++k) {
        const double t = rng.uniform() * 10.0 * kTwoPi / kappa;
        const auto state = evolve_single_phonon_state(kappa, chi, n, t);
        const double s2 = std::sin(0.5 * (kappa - chi * static_cast<double>(n)) * t);
        unitary_dev = std::max(unitary_dev, std::abs(std::norm(state.amplitude_ion2) - s2 * s2));
        norm_dev = std::max(norm_dev, std::abs(state.norm_squared() - 1.0));
      }
    }
    record(4, unitary_dev, where);
    record(5, norm_dev, where);

    const double revival = kTwoPi / std::abs(chi);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(2000, 0.0, revival);
    const HoppingTrace eq13 = hopping_signal(kappa, chi, thermal_distribution(mean_n, 1e-12), grid);
    double env_dev = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      env_dev = std::max(env_dev,
                         std::abs(eq13.values[i] - hopping_closed_form(kappa, chi, mean_n, grid[i])));
    record(6, env_dev, where);

    const Eigen::VectorXd mc_grid = Eigen::VectorXd::LinSpaced(200, 0.0, revival);
    const HoppingTrace mc = monte_carlo_signal(kappa, chi, mean_n, mc_grid, options.mc_samples,
                                               stream_seed(options.seed, 100 + s));
    const HoppingTrace mc_ref =
        hopping_signal(kappa, chi, thermal_distribution(mean_n, 1e-12), mc_grid);
    const double mc_dev = (mc.values - mc_ref.values).cwiseAbs().maxCoeff();
    record(7, mc_dev / monte_carlo_error_bound(options.mc_samples), where);
  }
  return checks;
}

void write_verification(std::ostream& out, const std::vector<CheckResult>& results) {
  std::size_t passed = 0;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s %-38s max_dev=%.6e tol=%.1e at %s\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.deviation, r.tolerance,
                  r.where.c_str());
    out << line;
    if (r.pass) ++passed;
  }
  out << "verify: " << passed << "/" << results.size() << " checks passed\n";
}

}  // namespace phonon_hop::harness
