#include "fe2dyn/homogenize.hpp"

#include <algorithm>
#include <cmath>

namespace fe2dyn {

namespace {

Eigen::VectorXd padded(const Eigen::VectorXd& head, int total) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total);
  out.head(head.size()) = head;
  return out;
}

double relative_diff(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / denom;
}

}  // namespace

Eigen::VectorXd SensitivityMatrices::l_star(const RveModel& model,
                                            double micro_accel_coeff) const {
  return padded(L + micro_accel_coeff * Z, model.n_total());
}

Eigen::VectorXd SensitivityMatrices::l_bar_star(const RveModel& model,
                                                double macro_accel_coeff) const {
  return padded(L + macro_accel_coeff * Z, model.n_total());
}

Eigen::VectorXd SensitivityMatrices::w_star(const RveModel& model) const {
  return padded(W, model.n_total());
}

SensitivityMatrices assemble_sensitivity(const RveModel& model, const RveState& state) {
  const int nf = model.n_dofs();
  SensitivityMatrices mats;
  mats.K = Eigen::MatrixXd::Zero(nf, nf);
  mats.M = Eigen::MatrixXd::Zero(nf, nf);
  mats.L = Eigen::VectorXd::Zero(nf);
  mats.Z = Eigen::VectorXd::Zero(nf);
  mats.W = Eigen::VectorXd::Zero(nf);
  mats.volume = model.volume();

  const Mesh1D& mesh = model.mesh();
  const double F_bar = state.last_inputs.F_bar;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    const MaterialPhase& phase = model.phase_of(e);
    const int dofs[2] = {model.dof_of_node(mesh.elements[e].node_a),
                         model.dof_of_node(mesh.elements[e].node_b)};
    const double u[2] = {dofs[0] >= 0 ? state.fluct(dofs[0]) : 0.0,
                         dofs[1] >= 0 ? state.fluct(dofs[1]) : 0.0};
    for (int g = 0; g < 2; ++g) {
      const double w = b.weights[g];
      const double B[2] = {b.shape_gradients[g][0], b.shape_gradients[g][1]};
      const double N[2] = {b.shape_values[g][0], b.shape_values[g][1]};
      const double X = b.gauss_x[g];
      const double F = F_bar + B[0] * u[0] + B[1] * u[1];
      const double A = tangent(phase, F);
      const double rho = phase.density;

      mats.avg_tangent += w * A;
      mats.avg_rho_x += w * rho * X;
      mats.avg_rho_xx += w * rho * X * X;
      mats.avg_rho += w * rho;

      for (int i = 0; i < 2; ++i) {
        if (dofs[i] < 0) continue;
        mats.L(dofs[i]) += w * B[i] * A;
        mats.Z(dofs[i]) += w * rho * N[i] * X;
        mats.W(dofs[i]) += w * rho * N[i];
        for (int j = 0; j < 2; ++j) {
          if (dofs[j] < 0) continue;
          mats.K(dofs[i], dofs[j]) += w * B[i] * A * B[j];
          mats.M(dofs[i], dofs[j]) += w * N[i] * rho * N[j];
        }
      }
    }
  }
  mats.avg_tangent /= mats.volume;
  mats.avg_rho_x /= mats.volume;
  mats.avg_rho_xx /= mats.volume;
  mats.avg_rho /= mats.volume;
  return mats;
}

double macro_stress(const RveModel& model, const RveState& state) {
  const Mesh1D& mesh = model.mesh();
  const MicroLoad& load = state.last_inputs;
  const Eigen::VectorXd fluct = nodal_fluctuations(model, state.fluct);
  const Eigen::VectorXd fluct_accel = nodal_fluctuations(
      model, newmark_acceleration(state.fluct, state.hist, model.params()));

  double integral = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    const MaterialPhase& phase = model.phase_of(e);
    const int na = mesh.elements[e].node_a;
    const int nb = mesh.elements[e].node_b;
    for (int g = 0; g < 2; ++g) {
      const double X = b.gauss_x[g];
      const double F = load.F_bar + b.shape_gradients[g][0] * fluct(na) +
                       b.shape_gradients[g][1] * fluct(nb);
      const double accel = load.u_bar_ddot + load.F_bar_ddot * X +
                           b.shape_values[g][0] * fluct_accel(na) +
                           b.shape_values[g][1] * fluct_accel(nb);
      integral += b.weights[g] * (stress(phase, F) + phase.density * accel * X);
    }
  }
  return integral / model.volume();
}

double macro_inertia(const RveModel& model, const RveState& state) {
  const Mesh1D& mesh = model.mesh();
  const MicroLoad& load = state.last_inputs;
  const Eigen::VectorXd fluct_accel = nodal_fluctuations(
      model, newmark_acceleration(state.fluct, state.hist, model.params()));

  double integral = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    const double rho = model.phase_of(e).density;
    const int na = mesh.elements[e].node_a;
    const int nb = mesh.elements[e].node_b;
    for (int g = 0; g < 2; ++g) {
      const double accel = load.u_bar_ddot + load.F_bar_ddot * b.gauss_x[g] +
                           b.shape_values[g][0] * fluct_accel(na) +
                           b.shape_values[g][1] * fluct_accel(nb);
      integral += b.weights[g] * rho * accel;
    }
  }
  return integral / model.volume();
}

SensitivitySolves sensitivity_solves(const RveModel& model, const RveState& state,
                                     const SensitivityMatrices& mats,
                                     const NewmarkParams& macro_params) {
  if (!state.k_star_lu)
    throw IllPosedError("sensitivity solves need the factorization of a converged solve");
  SensitivitySolves out;
  out.dD_dF = -state.k_star_lu->solve(mats.l_bar_star(model, macro_params.accel_coeff()));
  out.dD_du = -state.k_star_lu->solve(mats.w_star(model));
  return out;
}

TangentSet homogenize(const RveModel& model, const RveState& state,
                      const NewmarkParams& macro_params) {
  const SensitivityMatrices mats = assemble_sensitivity(model, state);
  const SensitivitySolves solves = sensitivity_solves(model, state, mats, macro_params);

  const double c_micro = model.params().accel_coeff();
  const double c_macro = macro_params.accel_coeff();
  const double inv_v = 1.0 / mats.volume;
  const Eigen::VectorXd ls = mats.l_star(model, c_micro);
  const Eigen::VectorXd ws = mats.w_star(model);

  TangentSet t;
  t.P_bar = macro_stress(model, state);
  t.f_rho_bar = macro_inertia(model, state);
  t.A_PF = mats.avg_tangent + c_macro * mats.avg_rho_xx + inv_v * ls.dot(solves.dD_dF);
  t.A_Pu = mats.avg_rho_x + inv_v * ls.dot(solves.dD_du);
  t.A_fF = c_macro * mats.avg_rho_x + inv_v * c_micro * ws.dot(solves.dD_dF);
  t.A_fu = mats.avg_rho + inv_v * c_micro * ws.dot(solves.dD_du);
  return t;
}

double hill_mandel_gap(const RveModel& model, const RveState& state, double d_F_bar,
                       double d_u_bar, const Eigen::VectorXd& d_fluct) {
  const Mesh1D& mesh = model.mesh();
  const MicroLoad& load = state.last_inputs;
  const Eigen::VectorXd fluct = nodal_fluctuations(model, state.fluct);
  const Eigen::VectorXd fluct_accel = nodal_fluctuations(
      model, newmark_acceleration(state.fluct, state.hist, model.params()));
  Eigen::VectorXd d_fluct_nodal = d_fluct.size() > 0
                                      ? nodal_fluctuations(model, d_fluct)
                                      : Eigen::VectorXd::Zero(mesh.n_nodes());

  double micro_power = 0.0;
  double scale = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    const MaterialPhase& phase = model.phase_of(e);
    const int na = mesh.elements[e].node_a;
    const int nb = mesh.elements[e].node_b;
    for (int g = 0; g < 2; ++g) {
      const double X = b.gauss_x[g];
      const double F = load.F_bar + b.shape_gradients[g][0] * fluct(na) +
                       b.shape_gradients[g][1] * fluct(nb);
      const double P = stress(phase, F);
      const double accel = load.u_bar_ddot + load.F_bar_ddot * X +
                           b.shape_values[g][0] * fluct_accel(na) +
                           b.shape_values[g][1] * fluct_accel(nb);
      const double d_F = d_F_bar + b.shape_gradients[g][0] * d_fluct_nodal(na) +
                         b.shape_gradients[g][1] * d_fluct_nodal(nb);
      const double d_u = d_u_bar + d_F_bar * X + b.shape_values[g][0] * d_fluct_nodal(na) +
                         b.shape_values[g][1] * d_fluct_nodal(nb);
      // f = -rho accel, so P dF - f du = P dF + rho accel du.
      micro_power += b.weights[g] * (P * d_F + phase.density * accel * d_u);
      scale += b.weights[g] * (std::abs(P * d_F) + std::abs(phase.density * accel * d_u));
    }
  }
  micro_power /= model.volume();
  scale /= model.volume();

  const double P_bar = macro_stress(model, state);
  const double f_rho_bar = macro_inertia(model, state);
  const double macro_power = P_bar * d_F_bar + f_rho_bar * d_u_bar;

  const double denom =
      std::max({std::abs(P_bar * d_F_bar), std::abs(f_rho_bar * d_u_bar), scale});
  if (denom < 1e-300) return 0.0;
  return std::abs(macro_power - micro_power) / denom;
}

double TangentAudit::max_rel_err() const {
  return std::max({rel_err_PF, rel_err_Pu, rel_err_fF, rel_err_fu});
}

namespace {

struct FdEstimates {
  double A_PF, A_Pu, A_fF, A_fu;
};

FdEstimates fd_probe(const RveModel& model, const RveState& state,
                     const NewmarkParams& macro_params, double h_F, double h_u,
                     const MicroSolveOptions& opts) {
  const MicroLoad base = state.last_inputs;
  const double c_macro = macro_params.accel_coeff();

  auto evaluate = [&](const MicroLoad& load) {
    RveState probe = state;  // identical fluctuations, multipliers and history
    solve_micro(model, probe, load, opts);
    return std::pair<double, double>{macro_stress(model, probe),
                                     macro_inertia(model, probe)};
  };

  // Perturbing F_bar drags F_bar_ddot along via the macroscale Newmark rule.
  MicroLoad fp = base, fm = base;
  fp.F_bar += h_F;
  fp.F_bar_ddot += c_macro * h_F;
  fm.F_bar -= h_F;
  fm.F_bar_ddot -= c_macro * h_F;
  const auto [P_fp, f_fp] = evaluate(fp);
  const auto [P_fm, f_fm] = evaluate(fm);

  MicroLoad up = base, um = base;
  up.u_bar_ddot += h_u;
  um.u_bar_ddot -= h_u;
  const auto [P_up, f_up] = evaluate(up);
  const auto [P_um, f_um] = evaluate(um);

  return {(P_fp - P_fm) / (2.0 * h_F), (P_up - P_um) / (2.0 * h_u),
          (f_fp - f_fm) / (2.0 * h_F), (f_up - f_um) / (2.0 * h_u)};
}

}  // namespace

TangentAudit audit_tangents(const RveModel& model, const RveState& state,
                            const NewmarkParams& macro_params, const AuditOptions& options) {
  TangentAudit audit;
  audit.closed = homogenize(model, state, macro_params);

  const MicroLoad& base = state.last_inputs;
  const double h_F = options.h_rel * std::max(1.0, std::abs(base.F_bar));
  const double accel_scale = std::max(
      {std::abs(base.u_bar_ddot), std::abs(base.F_bar_ddot) * 0.25 * model.volume(), 1.0});
  const double h_u = options.h_rel * accel_scale;

  MicroSolveOptions opts;
  opts.tol_rel = options.micro_tol;
  opts.max_iterations = options.micro_max_iterations;

  FdEstimates best = fd_probe(model, state, macro_params, h_F, h_u, opts);
  if (options.h_sweep) {
    const FdEstimates f1 = fd_probe(model, state, macro_params, 0.1 * h_F, 0.1 * h_u, opts);
    const FdEstimates f2 =
        fd_probe(model, state, macro_params, 0.01 * h_F, 0.01 * h_u, opts);
    auto pick = [](double fd0, double fd1, double fd2) {
      return relative_diff(fd0, fd1) <= relative_diff(fd1, fd2) ? fd1 : fd2;
    };
    best = {pick(best.A_PF, f1.A_PF, f2.A_PF), pick(best.A_Pu, f1.A_Pu, f2.A_Pu),
            pick(best.A_fF, f1.A_fF, f2.A_fF), pick(best.A_fu, f1.A_fu, f2.A_fu)};
  }

  audit.fd_A_PF = best.A_PF;
  audit.fd_A_Pu = best.A_Pu;
  audit.fd_A_fF = best.A_fF;
  audit.fd_A_fu = best.A_fu;
  audit.rel_err_PF = relative_diff(audit.closed.A_PF, best.A_PF);
  audit.rel_err_Pu = relative_diff(audit.closed.A_Pu, best.A_Pu);
  audit.rel_err_fF = relative_diff(audit.closed.A_fF, best.A_fF);
  audit.rel_err_fu = relative_diff(audit.closed.A_fu, best.A_fu);
  return audit;
}

}  // namespace fe2dyn
