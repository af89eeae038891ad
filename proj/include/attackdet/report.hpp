#pragma once

#include "attackdet/model.hpp"
#include "attackdet/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace attackdet {

/// Column names of the trajectory CSV, 1-based node and component indices:
/// t, x[k], xhat<i>[k], r<i>[k], xcorr<i>[k], f<i>[k], err<i>, errcorr<i>, rnorm<i>.
std::vector<std::string> trajectory_columns(const Trajectory& traj);

/// One row per recorded sample, 12 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column, or -1.
  int find(const std::string& name) const;
  std::vector<double> column(int index) const;
};

/// Throws ConfigError-compatible std::runtime_error on malformed input.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// Line chart of the selected columns against column 0. Byte-identical output
/// for identical input. Throws std::invalid_argument on an empty selection
/// or an unknown column.
std::string render_svg(const CsvTable& table, const std::vector<std::string>& columns, const std::string& title = "");

struct Interval {
  double start;
  double end;
};

/// Maximal intervals with value >= threshold; gaps shorter than `debounce`
/// are bridged.
std::vector<Interval> flag_intervals(const std::vector<double>& t, const std::vector<double>& value, double threshold,
                                     double debounce = 0.1);

/// flag_intervals applied to every rnorm<i> column, in node order.
std::vector<std::vector<Interval>> flag_residuals(const CsvTable& table, double threshold, double debounce = 0.1);

/// Peak and final error norms and residual tail errors per node.
struct NodeSummary {
  double peak_error, final_error;
  double peak_corrected_error, final_corrected_error;
  double peak_residual, tail_error;
};

std::vector<NodeSummary> summarize(const Trajectory& traj, const std::vector<AttackSignal>& attacks);
void print_summary(std::ostream& out, const std::vector<NodeSummary>& summary);

}  // namespace attackdet
