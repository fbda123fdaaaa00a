#include "fe2dyn/dns.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <chrono>

namespace fe2dyn {

DnsResult run_dns(const DnsModel& model, int n_steps, const DnsOptions& options) {
  model.mesh.validate();
  model.params.validate();
  const Mesh1D& mesh = model.mesh;
  const int n_nodes = mesh.n_nodes();
  const int n_el = mesh.n_elements();
  const int n_free = n_nodes - 2;
  const double c = model.params.accel_coeff();

  std::vector<ElementBasis> basis(n_el);
  for (int e = 0; e < n_el; ++e) basis[e] = element_basis(mesh, e);

  Eigen::VectorXd D = Eigen::VectorXd::Zero(n_nodes);
  KinematicHistory hist = KinematicHistory::zero(n_nodes);

  DnsResult result;
  result.series.node_x = mesh.node_x;
  result.series.source = "dns";
  result.series.times.push_back(0.0);
  result.series.values.push_back(D);

  auto free_dof = [&](int node) { return (node == 0 || node == n_nodes - 1) ? -1 : node - 1; };

  for (int step_idx = 1; step_idx <= n_steps; ++step_idx) {
    const auto start = std::chrono::steady_clock::now();
    const double t = step_idx * model.params.dt;
    D(0) = 0.0;
    D(n_nodes - 1) = model.load.displacement(t);

    StepReport report;
    bool converged = false;
    for (int it = 0; it < options.max_iterations && !converged; ++it) {
      const Eigen::VectorXd accel = newmark_acceleration(D, hist, model.params);

      std::vector<Eigen::Triplet<double>> triplets;
      triplets.reserve(4 * n_el);
      Eigen::VectorXd residual = Eigen::VectorXd::Zero(n_free);
      for (int e = 0; e < n_el; ++e) {
        const Element& el = mesh.elements[e];
        const ElementDynamics ed = element_dynamics(
            model.phases[el.phase], basis[e], 1.0, {0.0, 0.0},
            Eigen::Vector2d(D(el.node_a), D(el.node_b)),
            Eigen::Vector2d(accel(el.node_a), accel(el.node_b)), c);
        const int dofs[2] = {free_dof(el.node_a), free_dof(el.node_b)};
        for (int i = 0; i < 2; ++i) {
          if (dofs[i] < 0) continue;
          residual(dofs[i]) += ed.r_hat(i);
          for (int j = 0; j < 2; ++j)
            if (dofs[j] >= 0) triplets.emplace_back(dofs[i], dofs[j], ed.k_hat(i, j));
        }
      }

      Eigen::SparseMatrix<double> k_global(n_free, n_free);
      k_global.setFromTriplets(triplets.begin(), triplets.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
      solver.compute(k_global);
      if (solver.info() != Eigen::Success)
        throw MacroDivergenceError("dns tangent factorization failed", step_idx - 1);
      const Eigen::VectorXd delta = solver.solve(-residual);

      const double norm = delta.norm();
      report.update_norms.push_back(norm);
      report.iterations = it + 1;
      if (norm < options.tol)
        converged = true;
      else
        for (int node = 1; node + 1 < n_nodes; ++node) D(node) += delta(node - 1);
    }
    if (!converged)
      throw MacroDivergenceError("dns Newton did not converge at step " +
                                     std::to_string(step_idx),
                                 step_idx - 1);

    commit(hist, D, model.params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.series.times.push_back(t);
    result.series.values.push_back(D);
    result.reports.push_back(report);
    result.steps_completed = step_idx;
  }
  return result;
}

double window_average(const std::vector<double>& node_x, const Eigen::VectorXd& values,
                      double center, double window) {
  const double lo = center - 0.5 * window;
  const double hi = center + 0.5 * window;
  if (window <= 0.0) throw ComparisonError("window must be positive");
  if (lo < node_x.front() - 1e-12 || hi > node_x.back() + 1e-12)
    throw ComparisonError("averaging window outside the field support");

  // Exact integral of the piecewise-linear interpolant over [lo, hi].
  auto value_at = [&](double x) {
    return resample_linear(node_x, values, {x})(0);
  };
  double integral = 0.0;
  double x_prev = lo;
  double v_prev = value_at(lo);
  for (size_t i = 0; i < node_x.size(); ++i) {
    if (node_x[i] <= lo) continue;
    if (node_x[i] >= hi) break;
    integral += 0.5 * (v_prev + values(i)) * (node_x[i] - x_prev);
    x_prev = node_x[i];
    v_prev = values(i);
  }
  integral += 0.5 * (v_prev + value_at(hi)) * (hi - x_prev);
  return integral / window;
}

}  // namespace fe2dyn
