#include "fe2dyn/macro.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <chrono>
#include <thread>

namespace fe2dyn {

MacroState make_macro_state(const MacroModel& model) {
  model.mesh.validate();
  model.params.validate();
  if (!model.rve_template) throw ConfigError("macro model needs an RVE template");
  MacroState state;
  const int n = model.mesh.n_nodes();
  state.D = Eigen::VectorXd::Zero(n);
  state.hist = KinematicHistory::zero(n);
  state.gps.resize(2 * model.mesh.n_elements());
  for (GpState& gp : state.gps) gp.rve = make_state(*model.rve_template);
  return state;
}

GpKinematics macro_gp_kinematics(const ElementBasis& basis, const Eigen::Vector2d& d_el,
                                 const Eigen::Vector2d& accel_el, int gp) {
  GpKinematics out;
  out.F_bar = 1.0 + basis.shape_gradients[gp][0] * d_el(0) +
              basis.shape_gradients[gp][1] * d_el(1);
  out.u_bar_ddot =
      basis.shape_values[gp][0] * accel_el(0) + basis.shape_values[gp][1] * accel_el(1);
  return out;
}

Eigen::Matrix2d macro_element_stiffness(const TangentSet& gp0, const TangentSet& gp1,
                                        const ElementBasis& basis,
                                        const NewmarkParams& macro_params) {
  const double c = macro_params.accel_coeff();
  Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
  const TangentSet* ts[2] = {&gp0, &gp1};
  for (int g = 0; g < 2; ++g) {
    const double w = basis.weights[g];
    const double B[2] = {basis.shape_gradients[g][0], basis.shape_gradients[g][1]};
    const double N[2] = {basis.shape_values[g][0], basis.shape_values[g][1]};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        k(i, j) += w * (B[i] * ts[g]->A_PF * B[j] + c * B[i] * ts[g]->A_Pu * N[j] +
                        N[i] * ts[g]->A_fF * B[j] + c * N[i] * ts[g]->A_fu * N[j]);
  }
  return k;
}

Eigen::Vector2d macro_element_residual(const TangentSet& gp0, const TangentSet& gp1,
                                       const ElementBasis& basis) {
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  const TangentSet* ts[2] = {&gp0, &gp1};
  for (int g = 0; g < 2; ++g) {
    const double w = basis.weights[g];
    for (int i = 0; i < 2; ++i)
      r(i) += w * (basis.shape_gradients[g][i] * ts[g]->P_bar +
                   basis.shape_values[g][i] * ts[g]->f_rho_bar);
  }
  return r;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      const int chunk = (n + threads - 1) / threads;
      const int begin = t * chunk;
      const int end = std::min(n, begin + chunk);
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& err : errors)
    if (err) std::rethrow_exception(err);
}

StepReport step(const MacroModel& model, MacroState& state, double t_next,
                const MacroOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Mesh1D& mesh = model.mesh;
  const int n_nodes = mesh.n_nodes();
  const int n_el = mesh.n_elements();
  const int n_free = n_nodes - 2;

  // node -> free dof (left end fixed, right end displacement-driven)
  auto free_dof = [&](int node) { return (node == 0 || node == n_nodes - 1) ? -1 : node - 1; };

  std::vector<ElementBasis> basis(n_el);
  for (int e = 0; e < n_el; ++e) basis[e] = element_basis(mesh, e);

  Eigen::VectorXd D = state.D;
  D(0) = 0.0;
  D(n_nodes - 1) = model.load.displacement(t_next);

  std::vector<TangentSet> tangents(2 * n_el);
  StepReport report;
  bool converged = false;

  for (int it = 0; it < options.max_iterations && !converged; ++it) {
    const Eigen::VectorXd accel = newmark_acceleration(D, state.hist, model.params);

    // Micro problems: independent per Gauss point.
    parallel_for(2 * n_el, options.threads, [&](int q) {
      const int e = q / 2;
      const int g = q % 2;
      const Element& el = mesh.elements[e];
      const Eigen::Vector2d d_el(D(el.node_a), D(el.node_b));
      const Eigen::Vector2d a_el(accel(el.node_a), accel(el.node_b));
      const GpKinematics kin = macro_gp_kinematics(basis[e], d_el, a_el, g);
      GpState& gp = state.gps[q];
      MicroLoad load;
      load.F_bar = kin.F_bar;
      load.u_bar_ddot = kin.u_bar_ddot;
      load.F_bar_ddot = newmark_acceleration(kin.F_bar, gp.F_n, gp.F_dot_n, gp.F_ddot_n,
                                             model.params);
      solve_micro(*model.rve_template, gp.rve, load, options.micro);
      tangents[q] = homogenize(*model.rve_template, gp.rve, model.params);
    });

    // Global system over free DOFs.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(4 * n_el);
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(n_free);
    for (int e = 0; e < n_el; ++e) {
      const Element& el = mesh.elements[e];
      const int dofs[2] = {free_dof(el.node_a), free_dof(el.node_b)};
      const Eigen::Matrix2d ke =
          macro_element_stiffness(tangents[2 * e], tangents[2 * e + 1], basis[e], model.params);
      const Eigen::Vector2d re =
          macro_element_residual(tangents[2 * e], tangents[2 * e + 1], basis[e]);
      for (int i = 0; i < 2; ++i) {
        if (dofs[i] < 0) continue;
        residual(dofs[i]) += re(i);
        for (int j = 0; j < 2; ++j)
          if (dofs[j] >= 0) triplets.emplace_back(dofs[i], dofs[j], ke(i, j));
      }
    }

    Eigen::SparseMatrix<double> k_global(n_free, n_free);
    k_global.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(k_global);
    if (solver.info() != Eigen::Success)
      throw MacroDivergenceError("macro tangent factorization failed",
                                 state.steps_completed);
    const Eigen::VectorXd delta = solver.solve(-residual);

    const double norm = delta.norm();
    report.update_norms.push_back(norm);
    report.iterations = it + 1;
    if (norm < options.tol) {
      // Converged: the micro states already match the current D, so commit
      // without applying the sub-tolerance update.
      converged = true;
    } else {
      for (int node = 1; node + 1 < n_nodes; ++node) D(node) += delta(node - 1);
    }
  }

  if (!converged)
    throw MacroDivergenceError("macro Newton did not converge within " +
                                   std::to_string(options.max_iterations) + " iterations",
                               state.steps_completed);

  if (!options.commit) {
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }

  // Commit: nodal histories, Gauss-point F histories, RVE histories.
  state.D = D;
  commit(state.hist, D, model.params);
  for (int e = 0; e < n_el; ++e) {
    const Element& el = mesh.elements[e];
    const Eigen::Vector2d d_el(D(el.node_a), D(el.node_b));
    for (int g = 0; g < 2; ++g) {
      GpState& gp = state.gps[2 * e + g];
      const double F_bar = 1.0 + basis[e].shape_gradients[g][0] * d_el(0) +
                           basis[e].shape_gradients[g][1] * d_el(1);
      const double F_ddot =
          newmark_acceleration(F_bar, gp.F_n, gp.F_dot_n, gp.F_ddot_n, model.params);
      gp.F_dot_n = newmark_velocity(F_ddot, gp.F_dot_n, gp.F_ddot_n, model.params);
      gp.F_ddot_n = F_ddot;
      gp.F_n = F_bar;
      commit_state(*model.rve_template, gp.rve);
    }
  }
  state.time = t_next;
  ++state.steps_completed;

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace fe2dyn
