#pragma once

// Trace files: header `time_s,p_excited[,sigma]`, LF line endings, shortest
// round-trip decimal floats. Lines starting with '#' are comments.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "phonon_hop/signal_analysis.hpp"

namespace phonon_hop::harness {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& message, int row) : std::runtime_error(message), row_(row) {}
  /// 1-based line number in the file (0 for whole-file problems).
  int row() const { return row_; }

 private:
  int row_;
};

/// Shortest decimal string that parses back to the same double; "inf", "-inf", "nan".
std::string format_double(double value);

/// Locale-independent parse of a whole string; nullopt if it is not a number.
std::optional<double> parse_double(std::string_view text);

void write_trace_csv(std::ostream& out, const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                     const std::optional<Eigen::VectorXd>& sigma = std::nullopt);

/// Reads and validates a trace file (>= 8 rows, strictly increasing time).
TimeSeries read_time_series_csv(std::istream& in);

}  // namespace phonon_hop::harness
