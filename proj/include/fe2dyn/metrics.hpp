#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fe2dyn/types.hpp"

namespace fe2dyn {

/// Nodal displacement table over time: values[j] holds the field at times[j]
/// on the node_x grid.
struct FieldSeries {
  std::vector<double> times;
  std::vector<double> node_x;
  std::vector<Eigen::VectorXd> values;
  std::string source;

  int n_times() const { return static_cast<int>(times.size()); }
  int n_nodes() const { return static_cast<int>(node_x.size()); }
  void validate() const;
};

/// Mean absolute nodal difference at one time index, evaluated on a's nodes;
/// b is linearly interpolated onto them. Throws ComparisonError if a node of
/// a lies outside b's span or the time grids disagree.
double epsilon(const FieldSeries& a, const FieldSeries& b, int t_index);

/// Time average of epsilon over the shared time grid.
double epsilon_time(const FieldSeries& a, const FieldSeries& b);

/// Linear interpolation of one field onto new node positions.
Eigen::VectorXd resample_linear(const std::vector<double>& from_x,
                                const Eigen::VectorXd& from_values,
                                const std::vector<double>& to_x);

struct OrderEstimate {
  bool defined = false;
  double p = 0.0;
};

/// Least-squares slope of log r_{k+1} vs log r_k over the final (up to 3)
/// pairs of a decreasing residual-norm tail; undefined when fewer than three
/// entries exist or the tail stagnates.
OrderEstimate convergence_order(const std::vector<double>& residuals);

/// One row of the Table-1-style robustness tally.
struct RunOutcome {
  std::string unit_cell;
  std::string constraint;
  int n_cells = 0;
  int steps_completed = 0;
  int steps_requested = 0;
  bool crashed = false;
};

}  // namespace fe2dyn
