#include "phonon_hop/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "phonon_hop/harness/csv.hpp"

namespace phonon_hop::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

double to_number(std::string_view value, int line, const std::string& key) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v))
    throw ConfigError("'" + std::string(value) + "' is not a finite number", line, key);
  return *v;
}

long to_integer(std::string_view value, int line, const std::string& key) {
  long out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("'" + std::string(value) + "' is not an integer", line, key);
  return out;
}

std::uint64_t to_unsigned(std::string_view value, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("'" + std::string(value) + "' is not a non-negative integer", line, key);
  return out;
}

bool to_bool(std::string_view value, int line, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("expected true or false, got '" + std::string(value) + "'", line, key);
}

std::pair<double, double> to_pair(std::string_view value, int line, const std::string& key) {
  const auto comma = value.find(',');
  if (comma == std::string_view::npos)
    throw ConfigError("expected two comma-separated numbers", line, key);
  return {to_number(trim(value.substr(0, comma)), line, key),
          to_number(trim(value.substr(comma + 1)), line, key)};
}

struct PendingD0 {
  double omega_y_hz;
  double d0_m;
  int line;
  std::size_t index;
};

}  // namespace

double RunConfig::axial_temperature() const {
  if (axial_temperature_k) return *axial_temperature_k;
  return doppler_temperature(kTwoPi * doppler_linewidth_hz);
}

TrapConfig RunConfig::trap() const {
  return trap_at(SweepPoint{omega_y_hz, omega_z_hz, 0});
}

TrapConfig RunConfig::trap_at(const SweepPoint& point) const {
  TrapConfig t;
  t.mass = mass_kg;
  t.omega_y = kTwoPi * point.omega_y_hz;
  t.omega_z = kTwoPi * point.omega_z_hz;
  t.axial_temperature = axial_temperature();
  return t;
}

std::vector<SweepPoint> experiment_parameter_sets() {
  std::vector<SweepPoint> sets;
  for (double fz : {213e3, 140e3, 105e3, 50e3}) sets.push_back({2.87e6, fz, 0});
  for (double fy : {2.43e6, 2.64e6, 2.87e6, 3.11e6}) sets.push_back({fy, 140e3, 0});
  return sets;
}

RunConfig default_config() {
  RunConfig c;
  for (const auto& p : experiment_parameter_sets()) {
    bool seen = false;
    for (const auto& q : c.sweep)
      seen = seen || (q.omega_y_hz == p.omega_y_hz && q.omega_z_hz == p.omega_z_hz);
    if (!seen) c.sweep.push_back(p);
  }
  return c;
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::vector<PendingD0> pending;
  std::string section;
  std::string raw;
  int line_no = 0;
  std::map<std::string, int> key_lines;

  using Setter = std::function<void(std::string_view, int, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"trap.mass_kg", [&](auto v, int l, auto& k) { c.mass_kg = to_number(v, l, k); }},
      {"trap.omega_y_hz", [&](auto v, int l, auto& k) { c.omega_y_hz = to_number(v, l, k); }},
      {"trap.omega_z_hz", [&](auto v, int l, auto& k) { c.omega_z_hz = to_number(v, l, k); }},
      {"trap.axial_temperature_k",
       [&](auto v, int l, auto& k) { c.axial_temperature_k = to_number(v, l, k); }},
      {"trap.doppler_linewidth_hz",
       [&](auto v, int l, auto& k) { c.doppler_linewidth_hz = to_number(v, l, k); }},
      {"sweep.point",
       [&](auto v, int l, auto& k) {
         const auto [fy, fz] = to_pair(v, l, k);
         c.sweep.push_back({fy, fz, l});
       }},
      {"sweep.point_d0",
       [&](auto v, int l, auto& k) {
         const auto [fy, d0] = to_pair(v, l, k);
         pending.push_back({fy, d0, l, c.sweep.size()});
         c.sweep.push_back({fy, 0.0, l});
       }},
      {"sweep.fit", [&](auto v, int l, auto& k) { c.sweep_fit = to_bool(v, l, k); }},
      {"model.tail_tol", [&](auto v, int l, auto& k) { c.model.tail_tol = to_number(v, l, k); }},
      {"model.distance_convention",
       [&](auto v, int l, auto& k) {
         try {
           c.model.distance_convention = distance_convention_from_string(v);
         } catch (const DomainError& e) {
           throw ConfigError(e.what(), l, k);
         }
       }},
      {"fit.max_iter",
       [&](auto v, int l, auto& k) { c.fit.max_iter = static_cast<int>(to_integer(v, l, k)); }},
      {"fit.tol", [&](auto v, int l, auto& k) { c.fit.tol = to_number(v, l, k); }},
      {"synth.noise_sigma", [&](auto v, int l, auto& k) { c.synth.noise_sigma = to_number(v, l, k); }},
      {"synth.shots", [&](auto v, int l, auto& k) { c.synth.shots = to_integer(v, l, k); }},
      {"synth.seed", [&](auto v, int l, auto& k) { c.synth.seed = to_unsigned(v, l, k); }},
      {"lamb_dicke.wavelength_m",
       [&](auto v, int l, auto& k) { c.lamb_dicke.wavelength_m = to_number(v, l, k); }},
      {"lamb_dicke.projection_cosine",
       [&](auto v, int l, auto& k) { c.lamb_dicke.projection_cosine = to_number(v, l, k); }},
      {"lamb_dicke.mode", [&](auto v, int, auto&) { c.lamb_dicke.mode = std::string(v); }},
      {"output.format",
       [&](auto v, int l, auto& k) {
         if (v == "csv")
           c.output.format = OutputFormat::Csv;
         else if (v == "json")
           c.output.format = OutputFormat::Json;
         else
           throw ConfigError("expected csv or json, got '" + std::string(v) + "'", l, k);
       }},
      {"output.path", [&](auto v, int, auto&) { c.output.path = std::string(v); }},
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"trap", "sweep", "model", "fit", "synth", "lamb_dicke", "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ConfigError("unknown section [" + section + "]", line_no, section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = qualified(section, std::string(trim(line.substr(0, eq))));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'", line_no, key);
    it->second(value, line_no, key);
    key_lines[key] = line_no;
  }

  for (const auto& p : pending) {
    if (!(p.d0_m > 0.0)) throw ConfigError("d0 must be positive", p.line, "sweep.point_d0");
    c.sweep[p.index].omega_z_hz =
        distance_to_axial_freq(p.d0_m, c.mass_kg, c.model.distance_convention) / kTwoPi;
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    const auto it = key_lines.find(e.key());
    if (e.line() == 0 && it != key_lines.end()) throw ConfigError(e.what(), it->second, e.key());
    throw;
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive", 0, key);
  };
  positive(c.mass_kg, "trap.mass_kg");
  positive(c.omega_z_hz, "trap.omega_z_hz");
  positive(c.doppler_linewidth_hz, "trap.doppler_linewidth_hz");
  if (!(c.omega_y_hz > c.omega_z_hz))
    throw ConfigError("trap.omega_y_hz must exceed trap.omega_z_hz (zigzag instability)", 0,
                      "trap.omega_y_hz");
  if (c.axial_temperature_k && !(*c.axial_temperature_k >= 0.0))
    throw ConfigError("trap.axial_temperature_k must be non-negative", 0, "trap.axial_temperature_k");
  for (const auto& p : c.sweep) {
    if (!(p.omega_z_hz > 0.0))
      throw ConfigError("sweep.point omega_z_hz must be positive", p.line, "sweep.point");
    if (!(p.omega_y_hz > p.omega_z_hz))
      throw ConfigError("sweep.point omega_y_hz must exceed omega_z_hz (zigzag instability)", p.line,
                        "sweep.point");
  }
  if (!(c.model.tail_tol > 0.0 && c.model.tail_tol < 1.0))
    throw ConfigError("model.tail_tol must lie in (0, 1)", 0, "model.tail_tol");
  if (!(c.fit.max_iter > 0)) throw ConfigError("fit.max_iter must be positive", 0, "fit.max_iter");
  positive(c.fit.tol, "fit.tol");
  if (!(c.synth.noise_sigma >= 0.0))
    throw ConfigError("synth.noise_sigma must be non-negative", 0, "synth.noise_sigma");
  if (c.synth.shots < 0) throw ConfigError("synth.shots must be non-negative", 0, "synth.shots");
  positive(c.lamb_dicke.wavelength_m, "lamb_dicke.wavelength_m");
  if (!(std::abs(c.lamb_dicke.projection_cosine) <= 1.0))
    throw ConfigError("lamb_dicke.projection_cosine must lie in [-1, 1]", 0,
                      "lamb_dicke.projection_cosine");
  if (c.lamb_dicke.mode != "stretch" && c.lamb_dicke.mode != "com")
    throw ConfigError("lamb_dicke.mode must be stretch or com", 0, "lamb_dicke.mode");
}

std::string export_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[trap]\n"
      << "mass_kg = " << format_double(c.mass_kg) << '\n'
      << "omega_y_hz = " << format_double(c.omega_y_hz) << '\n'
      << "omega_z_hz = " << format_double(c.omega_z_hz) << '\n';
  if (c.axial_temperature_k)
    out << "axial_temperature_k = " << format_double(*c.axial_temperature_k) << '\n';
  out << "doppler_linewidth_hz = " << format_double(c.doppler_linewidth_hz) << "\n\n";

  out << "[sweep]\n";
  for (const auto& p : c.sweep)
    out << "point = " << format_double(p.omega_y_hz) << ", " << format_double(p.omega_z_hz) << '\n';
  out << "fit = " << (c.sweep_fit ? "true" : "false") << "\n\n";

  out << "[model]\n"
      << "tail_tol = " << format_double(c.model.tail_tol) << '\n'
      << "distance_convention = " << to_string(c.model.distance_convention) << "\n\n";
  out << "[fit]\n"
      << "max_iter = " << c.fit.max_iter << '\n'
      << "tol = " << format_double(c.fit.tol) << "\n\n";
  out << "[synth]\n"
      << "noise_sigma = " << format_double(c.synth.noise_sigma) << '\n'
      << "shots = " << c.synth.shots << '\n'
      << "seed = " << c.synth.seed << "\n\n";
  out << "[lamb_dicke]\n"
      << "wavelength_m = " << format_double(c.lamb_dicke.wavelength_m) << '\n'
      << "projection_cosine = " << format_double(c.lamb_dicke.projection_cosine) << '\n'
      << "mode = " << c.lamb_dicke.mode << "\n\n";
  out << "[output]\n"
      << "format = " << (c.output.format == OutputFormat::Json ? "json" : "csv") << '\n';
  if (!c.output.path.empty()) out << "path = " << c.output.path << '\n';
  return out.str();
}

}  // namespace phonon_hop::harness
