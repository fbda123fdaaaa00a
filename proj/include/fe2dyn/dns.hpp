#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fe2dyn/macro.hpp"
#include "fe2dyn/metrics.hpp"
#include "fe2dyn/rve.hpp"

namespace fe2dyn {

/// Single-scale reference problem: the full bar with every microstructural
/// layer meshed, same material laws, Newmark scheme and impact load as the
/// FE2 runs.
struct DnsModel {
  Mesh1D mesh;
  std::vector<MaterialPhase> phases;
  NewmarkParams params;
  ImpactLoad load;
};

struct DnsOptions {
  double tol = 1e-8;
  int max_iterations = 20;
};

struct DnsResult {
  FieldSeries series;
  std::vector<StepReport> reports;
  int steps_completed = 0;
};

/// Implicit Newmark-Newton time stepping of the standard dynamic FE problem
/// (the micro element assembler without any constraint machinery).
/// Throws MacroDivergenceError if a step fails to converge.
DnsResult run_dns(const DnsModel& model, int n_steps, const DnsOptions& options = {});

/// Spatial average of a piecewise-linear nodal field over
/// [center - window/2, center + window/2]; exact for the FE interpolant.
double window_average(const std::vector<double>& node_x, const Eigen::VectorXd& values,
                      double center, double window);

}  // namespace fe2dyn
