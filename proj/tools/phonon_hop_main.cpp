// phonon-hop: derive, simulate, fit, sweep and verify radial local-phonon hopping.
//
// Exit codes: 0 success, 1 verification failure, 2 input error, 3 fit not converged.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phonon_hop/errors.hpp"
#include "phonon_hop/harness/commands.hpp"
#include "phonon_hop/harness/config.hpp"
#include "phonon_hop/harness/csv.hpp"

namespace {

using namespace phonon_hop;
using namespace phonon_hop::harness;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

// Writes to `path`, or stdout when it is empty. Binary mode keeps LF line endings.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial local-phonon hopping: Kerr decoherence model, fitting and oracles"};
  app.set_version_flag("--version", "phonon-hop 1.0.0");

  std::string command;
  std::string config_path;
  std::string out_path;
  std::string input_path;
  std::string format;
  std::string export_path;
  std::optional<std::uint64_t> seed;
  SimulateOptions sim;

  app.add_option("command", command, "derive | simulate | fit | sweep | verify")
      ->required()
      ->check(CLI::IsMember({"derive", "simulate", "fit", "sweep", "verify"}));
  app.add_option("input", input_path, "input trace CSV (fit)");
  app.add_option("--config", config_path, "run configuration file (defaults to the built-in experimental sets)");
  app.add_option("--out", out_path, "output file (default stdout, or output.path from the config)");
  app.add_option("--seed", seed, "override synth.seed");
  app.add_option("--t-max", sim.t_max, "simulate: trace length in seconds")->capture_default_str();
  app.add_option("--points", sim.points, "simulate: number of grid points")->capture_default_str();
  app.add_flag("--chi-zero", sim.chi_zero, "simulate: switch off the Kerr coupling");
  app.add_option("--format", format, "override output.format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--export-config", export_path, "write the effective configuration to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  RunConfig config;
  try {
    config = config_path.empty() ? default_config() : load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << (config_path.empty() ? "<default>" : config_path);
    if (e.line() > 0) std::cerr << ':' << e.line();
    std::cerr << ": " << e.what() << '\n';
    return kExitInput;
  }
  if (seed) config.synth.seed = *seed;
  if (!format.empty()) config.output.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (!out_path.empty()) config.output.path = out_path;

  try {
    if (!export_path.empty()) {
      std::ofstream ex(export_path, std::ios::binary);
      if (!ex) throw std::runtime_error("cannot open '" + export_path + "'");
      ex << export_config(config);
    }

    if (command == "derive") {
      const auto records = cmd_derive(config);
      emit(config.output.path, [&](std::ostream& o) { write_derive(o, config, records); });
      return kExitOk;
    }
    if (command == "simulate") {
      const auto trace = cmd_simulate(config, sim);
      emit(config.output.path, [&](std::ostream& o) { write_simulation(o, config, trace); });
      return kExitOk;
    }
    if (command == "sweep") {
      const auto records = cmd_sweep(config, worker_count());
      emit(config.output.path, [&](std::ostream& o) { write_sweep(o, config, records); });
      return kExitOk;
    }
    if (command == "fit") {
      if (input_path.empty()) {
        std::cerr << "fit: missing input CSV\n";
        return kExitInput;
      }
      std::ifstream in(input_path, std::ios::binary);
      if (!in) {
        std::cerr << "fit: cannot open '" << input_path << "'\n";
        return kExitInput;
      }
      TimeSeries data;
      try {
        data = read_time_series_csv(in);
      } catch (const CsvError& e) {
        std::cerr << input_path;
        if (e.row() > 0) std::cerr << ": row " << e.row();
        std::cerr << ": " << e.what() << '\n';
        return kExitInput;
      }
      const auto report = cmd_fit(data, config);
      const auto json = fit_report_json(config, report);
      emit(config.output.path, [&](std::ostream& o) { o << json.dump(2) << '\n'; });
      return report.fit.converged ? kExitOk : kExitNotConverged;
    }
    // verify
    const auto results = cmd_verify();
    emit(config.output.path, [&](std::ostream& o) { write_verification(o, results); });
    for (const auto& r : results)
      if (!r.pass) return kExitVerifyFailed;
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
