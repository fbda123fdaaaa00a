#include "fe2dyn/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fe2dyn {

void FieldSeries::validate() const {
  if (times.size() != values.size())
    throw ComparisonError("field series: times and values length mismatch");
  for (const Eigen::VectorXd& v : values)
    if (v.size() != static_cast<Eigen::Index>(node_x.size()))
      throw ComparisonError("field series: ragged value table");
  for (size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1]))
      throw ComparisonError("field series: times must be strictly increasing");
}

Eigen::VectorXd resample_linear(const std::vector<double>& from_x,
                                const Eigen::VectorXd& from_values,
                                const std::vector<double>& to_x) {
  const double span = from_x.back() - from_x.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  Eigen::VectorXd out(to_x.size());
  for (size_t i = 0; i < to_x.size(); ++i) {
    const double x = to_x[i];
    if (x < from_x.front() - slack || x > from_x.back() + slack)
      throw ComparisonError("resample target node outside source support");
    auto hi = std::lower_bound(from_x.begin(), from_x.end(), x);
    if (hi == from_x.begin()) {
      out(i) = from_values(0);
      continue;
    }
    if (hi == from_x.end()) {
      out(i) = from_values(from_values.size() - 1);
      continue;
    }
    const auto k = std::distance(from_x.begin(), hi);
    const double x0 = from_x[k - 1];
    const double x1 = from_x[k];
    const double t = (x - x0) / (x1 - x0);
    out(i) = (1.0 - t) * from_values(k - 1) + t * from_values(k);
  }
  return out;
}

namespace {

void check_time_grids(const FieldSeries& a, const FieldSeries& b) {
  if (a.times.size() != b.times.size())
    throw ComparisonError("field series have different numbers of time steps");
  for (size_t j = 0; j < a.times.size(); ++j) {
    const double scale = std::max({1e-12, std::abs(a.times[j]), std::abs(b.times[j])});
    if (std::abs(a.times[j] - b.times[j]) > 1e-9 * scale)
      throw ComparisonError("field series time grids do not match");
  }
}

}  // namespace

double epsilon(const FieldSeries& a, const FieldSeries& b, int t_index) {
  check_time_grids(a, b);
  if (t_index < 0 || t_index >= a.n_times())
    throw ComparisonError("epsilon: time index out of range");
  const Eigen::VectorXd b_on_a = resample_linear(b.node_x, b.values[t_index], a.node_x);
  return (a.values[t_index] - b_on_a).cwiseAbs().mean();
}

double epsilon_time(const FieldSeries& a, const FieldSeries& b) {
  check_time_grids(a, b);
  double sum = 0.0;
  for (int j = 0; j < a.n_times(); ++j) sum += epsilon(a, b, j);
  return sum / a.n_times();
}

OrderEstimate convergence_order(const std::vector<double>& residuals) {
  if (residuals.size() < 3) return {};
  // Use the last up-to-4 entries, i.e. at most 3 consecutive pairs.
  const int n = static_cast<int>(residuals.size());
  const int first = std::max(0, n - 4);
  std::vector<double> tail(residuals.begin() + first, residuals.end());
  for (size_t k = 0; k + 1 < tail.size(); ++k)
    if (!(tail[k] > 0.0) || !(tail[k + 1] > 0.0) || !(tail[k + 1] < tail[k])) return {};

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int m = static_cast<int>(tail.size()) - 1;
  for (int k = 0; k < m; ++k) {
    const double x = std::log(tail[k]);
    const double y = std::log(tail[k + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) return {};
  return {true, (m * sxy - sx * sy) / denom};
}

}  // namespace fe2dyn
