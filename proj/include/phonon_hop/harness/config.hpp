#pragma once

// Run configuration: a flat `key = value` file with `[section]` headers and `#`
// comments. Frequencies are entered as ordinary frequencies (Hz).
//
//   [trap]       mass_kg, omega_y_hz, omega_z_hz, axial_temperature_k, doppler_linewidth_hz
//   [sweep]      point = <omega_y_hz>, <omega_z_hz>     (repeatable)
//                point_d0 = <omega_y_hz>, <d0_m>        (repeatable, uses model.distance_convention)
//                fit = true|false
//   [model]      tail_tol, distance_convention = exact|length_scale|james_fit
//   [fit]        max_iter, tol
//   [synth]      noise_sigma, shots, seed
//   [lamb_dicke] wavelength_m, projection_cosine, mode = stretch|com
//   [output]     format = csv|json, path

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonon_hop/trap_physics.hpp"

namespace phonon_hop::harness {

enum class OutputFormat { Csv, Json };

/// Parse or validation failure. `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {})
      : std::runtime_error(message), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

struct SweepPoint {
  double omega_y_hz = 0.0;
  double omega_z_hz = 0.0;
  int line = 0;  // source line, for error messages
};

struct ModelSettings {
  double tail_tol = 1e-12;
  DistanceConvention distance_convention = DistanceConvention::Exact;
};

struct FitSettings {
  int max_iter = 200;
  double tol = 1e-10;
};

struct SynthSettings {
  double noise_sigma = 0.0;
  long shots = 0;
  std::uint64_t seed = 1;
};

struct LambDickeSettings {
  double wavelength_m = 729e-9;
  double projection_cosine = 1.0;
  std::string mode = "stretch";
};

struct OutputSettings {
  OutputFormat format = OutputFormat::Csv;
  std::string path;
};

struct RunConfig {
  double mass_kg = kConstants.ca40_mass;
  double omega_y_hz = 2.87e6;
  double omega_z_hz = 213e3;
  std::optional<double> axial_temperature_k;  // defaults to the Doppler limit
  double doppler_linewidth_hz = kCa40LinewidthHz;

  std::vector<SweepPoint> sweep;
  bool sweep_fit = false;
  ModelSettings model;
  FitSettings fit;
  SynthSettings synth;
  LambDickeSettings lamb_dicke;
  OutputSettings output;

  double axial_temperature() const;
  /// Trap at the [trap] section frequencies.
  TrapConfig trap() const;
  /// Trap at one sweep point; other fields from [trap].
  TrapConfig trap_at(const SweepPoint& point) const;
};

/// The eight parameter sets of the experiment: ω_y/2π = 2.87 MHz with
/// ω_z/2π ∈ {213, 140, 105, 50} kHz, and ω_z/2π = 140 kHz with
/// ω_y/2π ∈ {2.43, 2.64, 2.87, 3.11} MHz. (2.87 MHz, 140 kHz) appears in both.
std::vector<SweepPoint> experiment_parameter_sets();

/// Built-in configuration: [trap] at (2.87 MHz, 213 kHz), sweep over the seven distinct
/// experimental sets.
RunConfig default_config();

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

/// Serializes the effective configuration so that parse_config(export_config(c)) == c.
std::string export_config(const RunConfig& config);

}  // namespace phonon_hop::harness
