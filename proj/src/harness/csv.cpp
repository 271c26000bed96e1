#include "phonon_hop/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

namespace phonon_hop::harness {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void write_trace_csv(std::ostream& out, const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                     const std::optional<Eigen::VectorXd>& sigma) {
  out << (sigma ? "time_s,p_excited,sigma\n" : "time_s,p_excited\n");
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    out << format_double(times[i]) << ',' << format_double(values[i]);
    if (sigma) out << ',' << format_double((*sigma)[i]);
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

TimeSeries read_time_series_csv(std::istream& in) {
  std::string line;
  int row = 0;
  std::size_t columns = 0;
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> s;

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (columns == 0) {
      if (line == "time_s,p_excited")
        columns = 2;
      else if (line == "time_s,p_excited,sigma")
        columns = 3;
      else
        throw CsvError("expected header 'time_s,p_excited[,sigma]'", row);
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != columns)
      throw CsvError("expected " + std::to_string(columns) + " columns, found " +
                         std::to_string(fields.size()),
                     row);
    double parsed[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < columns; ++k) {
      const auto v = parse_double(fields[k]);
      if (!v || !std::isfinite(*v)) throw CsvError("not a finite number: '" + std::string(fields[k]) + "'", row);
      parsed[k] = *v;
    }
    if (!t.empty() && !(parsed[0] > t.back()))
      throw CsvError("time column must be strictly increasing", row);
    if (columns == 3 && !(parsed[2] > 0.0)) throw CsvError("sigma must be positive", row);
    t.push_back(parsed[0]);
    y.push_back(parsed[1]);
    if (columns == 3) s.push_back(parsed[2]);
  }
  if (columns == 0) throw CsvError("missing header 'time_s,p_excited[,sigma]'", row);
  if (static_cast<Eigen::Index>(t.size()) < TimeSeries::kMinPoints)
    throw CsvError("need at least " + std::to_string(TimeSeries::kMinPoints) + " data rows, found " +
                       std::to_string(t.size()),
                   0);

  TimeSeries series;
  series.times = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  series.values = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  if (columns == 3)
    series.sigma = Eigen::VectorXd(
        Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())));
  return series;
}

}  // namespace phonon_hop::harness
