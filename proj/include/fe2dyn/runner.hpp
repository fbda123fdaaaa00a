#pragma once

#include <filesystem>
#include <optional>

#include "fe2dyn/dns.hpp"
#include "fe2dyn/homogenize.hpp"
#include "fe2dyn/metrics.hpp"
#include "fe2dyn/runio.hpp"
#include "fe2dyn/scenario.hpp"

namespace fe2dyn {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: keep results in memory only
  int threads = 1;
  double macro_tol = 1e-8;
  int macro_max_iterations = 20;
  MicroSolveOptions micro;
};

struct RunArtifacts {
  FieldSeries series;
  std::vector<StepReport> reports;
  int steps_completed = 0;
  int steps_requested = 0;
  bool crashed = false;
  std::string crash_reason;
};

/// Full FE2 run of a scenario. Solver failures do not throw; they end the
/// run early and are reported in the artifacts (Table-1 semantics).
RunArtifacts run_fe2(const ScenarioConfig& config, const RunOptions& options = {});

/// Single-scale reference run of the same scenario.
RunArtifacts run_dns_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct CompareResult {
  std::vector<double> times;
  std::vector<double> eps;
  double eps_time = 0.0;
};

/// epsilon(t) and its time average of two runs, evaluated on a's node grid.
CompareResult compare_series(const FieldSeries& a, const FieldSeries& b);

struct AuditRow {
  double time = 0.0;
  int gp = 0;
  TangentAudit audit;
};

struct TangentCheckResult {
  std::vector<AuditRow> rows;
  double max_rel_err = 0.0;
};

/// Runs the scenario to `at_step`, leaves that step uncommitted and audits
/// the `n_gps` most dynamically loaded Gauss points against central finite
/// differences.
TangentCheckResult check_tangents(const ScenarioConfig& config, int at_step, int n_gps,
                                  const RunOptions& options = {});

struct SweepEpsRow {
  std::string constraint;
  int n_cells = 0;
  double eps_time_ab = 0.0;
  bool valid = false;  // both runs finished all steps
};

struct SweepResult {
  std::vector<RunOutcome> outcomes;
  std::vector<SweepEpsRow> eps_rows;
  std::vector<SweepEpsRow> eps_vs_dns_rows;  // constraint field holds "A"/"B" tag
};

/// Unit-cell study: unit cells {A, B} x n_cells x constraint modes, with the
/// A-vs-B displacement error per configuration and the robustness tally.
SweepResult sweep_rve(const ScenarioConfig& base, const std::vector<int>& cells,
                      const std::vector<ConstraintMode>& constraints, bool with_dns,
                      const RunOptions& options = {});

std::string sweep_summary_markdown(const SweepResult& result);

}  // namespace fe2dyn
