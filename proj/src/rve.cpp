#include "fe2dyn/rve.hpp"

#include <cmath>

namespace fe2dyn {

RveModel::RveModel(Mesh1D mesh, std::vector<MaterialPhase> phases,
                   ConstraintMode constraint, FLinkMode f_link, NewmarkParams params)
    : mesh_(std::move(mesh)),
      phases_(std::move(phases)),
      constraint_(constraint),
      f_link_(f_link),
      params_(params) {
  mesh_.validate();
  params_.validate();
  for (const Element& el : mesh_.elements)
    if (el.phase >= static_cast<int>(phases_.size()))
      throw ConfigError("element phase id out of range");
  if (f_link_ == FLinkMode::VolumeAverageF && constraint_ == ConstraintMode::FixedCorners)
    throw ConfigError(
        "volume-average <F> constraint combined with fixed corners is redundant "
        "and makes the bordered system singular");

  const int n = mesh_.n_nodes();
  dof_of_node_.assign(n, -1);
  if (constraint_ == ConstraintMode::FixedCorners) {
    for (int i = 1; i + 1 < n; ++i) dof_of_node_[i] = i - 1;
    n_dofs_ = n - 2;
    n_lagrange_ = 0;
  } else if (f_link_ == FLinkMode::PeriodicBC) {
    for (int i = 0; i + 1 < n; ++i) dof_of_node_[i] = i;
    dof_of_node_[n - 1] = 0;  // slave corner aliases the master
    n_dofs_ = n - 1;
    n_lagrange_ = 1;
  } else {
    for (int i = 0; i < n; ++i) dof_of_node_[i] = i;
    n_dofs_ = n;
    n_lagrange_ = 2;  // <u~> = 0 and <F~> = 0
  }

  basis_.reserve(mesh_.n_elements());
  for (int e = 0; e < mesh_.n_elements(); ++e) basis_.push_back(element_basis(mesh_, e));
  volume_ = mesh_.length();

  if (constraint_ == ConstraintMode::VolumeConstraint) {
    g_volume_ = Eigen::VectorXd::Zero(n_dofs_);
    for (int e = 0; e < mesh_.n_elements(); ++e) {
      const ElementBasis& b = basis_[e];
      Eigen::Vector2d ge = Eigen::Vector2d::Zero();
      for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 2; ++i) ge(i) += b.weights[g] * b.shape_values[g][i];
      const std::array<int, 2> dofs = {dof_of_node_[mesh_.elements[e].node_a],
                                       dof_of_node_[mesh_.elements[e].node_b]};
      assemble(g_volume_, ge, dofs);
    }
  }
  if (f_link_ == FLinkMode::VolumeAverageF) {
    g_defgrad_ = Eigen::VectorXd::Zero(n_dofs_);
    for (int e = 0; e < mesh_.n_elements(); ++e) {
      const ElementBasis& b = basis_[e];
      Eigen::Vector2d ge = Eigen::Vector2d::Zero();
      for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 2; ++i) ge(i) += b.weights[g] * b.shape_gradients[g][i];
      const std::array<int, 2> dofs = {dof_of_node_[mesh_.elements[e].node_a],
                                       dof_of_node_[mesh_.elements[e].node_b]};
      assemble(g_defgrad_, ge, dofs);
    }
  }
}

RveState make_state(const RveModel& model) {
  RveState state;
  state.fluct = Eigen::VectorXd::Zero(model.n_dofs());
  state.lambda = Eigen::VectorXd::Zero(model.n_lagrange());
  state.hist = KinematicHistory::zero(model.n_dofs());
  return state;
}

ElementDynamics element_dynamics(const MaterialPhase& phase, const ElementBasis& basis,
                                 double F_base, const std::array<double, 2>& accel_base,
                                 const Eigen::Vector2d& u_nodes,
                                 const Eigen::Vector2d& accel_nodes, double accel_coeff) {
  ElementDynamics out;
  out.k_hat.setZero();
  out.r_hat.setZero();
  out.mass.setZero();
  out.g.setZero();

  const double rho = phase.density;
  for (int g = 0; g < 2; ++g) {
    const double w = basis.weights[g];
    const double B0 = basis.shape_gradients[g][0];
    const double B1 = basis.shape_gradients[g][1];
    const double N0 = basis.shape_values[g][0];
    const double N1 = basis.shape_values[g][1];

    const double F = F_base + B0 * u_nodes(0) + B1 * u_nodes(1);
    const double P = stress(phase, F);
    const double A = tangent(phase, F);
    const double accel = accel_base[g] + N0 * accel_nodes(0) + N1 * accel_nodes(1);

    out.k_hat(0, 0) += w * B0 * A * B0;
    out.k_hat(0, 1) += w * B0 * A * B1;
    out.k_hat(1, 0) += w * B1 * A * B0;
    out.k_hat(1, 1) += w * B1 * A * B1;

    out.mass(0, 0) += w * N0 * rho * N0;
    out.mass(0, 1) += w * N0 * rho * N1;
    out.mass(1, 0) += w * N1 * rho * N0;
    out.mass(1, 1) += w * N1 * rho * N1;

    out.r_hat(0) += w * (B0 * P + N0 * rho * accel);
    out.r_hat(1) += w * (B1 * P + N1 * rho * accel);

    out.g(0) += w * N0;
    out.g(1) += w * N1;
  }
  out.k_hat += accel_coeff * out.mass;
  return out;
}

namespace {

Eigen::Vector2d gather(const Eigen::VectorXd& reduced, int dof_a, int dof_b) {
  return {dof_a >= 0 ? reduced(dof_a) : 0.0, dof_b >= 0 ? reduced(dof_b) : 0.0};
}

/// Assembles the bordered tangent and the out-of-balance force at the
/// current iterate. rhs convention: solve K* dD* = -force.
void assemble_system(const RveModel& model, const RveState& state, const MicroLoad& load,
                     const Eigen::VectorXd& fluct_accel, Eigen::MatrixXd& k_star,
                     Eigen::VectorXd& force) {
  const int nf = model.n_dofs();
  const int nl = model.n_lagrange();
  k_star.setZero(nf + nl, nf + nl);
  force.setZero(nf + nl);

  const Mesh1D& mesh = model.mesh();
  const double c = model.params().accel_coeff();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    const int dof_a = model.dof_of_node(mesh.elements[e].node_a);
    const int dof_b = model.dof_of_node(mesh.elements[e].node_b);
    const std::array<double, 2> accel_base = {
        load.u_bar_ddot + load.F_bar_ddot * b.gauss_x[0],
        load.u_bar_ddot + load.F_bar_ddot * b.gauss_x[1]};
    const ElementDynamics el = element_dynamics(
        model.phase_of(e), b, load.F_bar, accel_base, gather(state.fluct, dof_a, dof_b),
        gather(fluct_accel, dof_a, dof_b), c);

    const std::array<int, 2> dofs = {dof_a, dof_b};
    for (int i = 0; i < 2; ++i) {
      if (dofs[i] < 0) continue;
      force(dofs[i]) += el.r_hat(i);
      for (int j = 0; j < 2; ++j)
        if (dofs[j] >= 0) k_star(dofs[i], dofs[j]) += el.k_hat(i, j);
    }
  }

  // Constraint borders and their force contributions.
  int lag = nf;
  if (model.constraint_mode() == ConstraintMode::VolumeConstraint) {
    const Eigen::VectorXd& g = model.g_volume();
    k_star.block(0, lag, nf, 1) = g;
    k_star.block(lag, 0, 1, nf) = g.transpose();
    force.head(nf) += g * state.lambda(0);
    force(lag) = g.dot(state.fluct);
    ++lag;
  }
  if (model.f_link_mode() == FLinkMode::VolumeAverageF) {
    const Eigen::VectorXd& g = model.g_defgrad();
    k_star.block(0, lag, nf, 1) = g;
    k_star.block(lag, 0, 1, nf) = g.transpose();
    force.head(nf) += g * state.lambda(lag - nf);
    force(lag) = g.dot(state.fluct);
    ++lag;
  }
}

}  // namespace

MicroSolveReport solve_micro(const RveModel& model, RveState& state, const MicroLoad& load,
                             const MicroSolveOptions& options) {
  const int nf = model.n_dofs();
  const int nl = model.n_lagrange();
  MicroSolveReport report;

  Eigen::MatrixXd k_star;
  Eigen::VectorXd force;
  state.last_inputs = load;

  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd fluct_accel = newmark_acceleration(state.fluct, state.hist, model.params());
    try {
      assemble_system(model, state, load, fluct_accel, k_star, force);
    } catch (const MicroDivergenceError& err) {
      throw MicroDivergenceError(std::string("micro Newton aborted: ") + err.what(),
                                 report.update_norms);
    }

    auto lu = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(k_star);
    {
      const Eigen::VectorXd diag = lu->matrixLU().diagonal().cwiseAbs();
      if (diag.minCoeff() <= 1e-14 * std::max(1.0, diag.maxCoeff()))
        throw IllPosedError("bordered micro tangent is numerically singular");
    }
    const Eigen::VectorXd delta = lu->solve(-force);

    state.fluct += delta.head(nf);
    if (nl > 0) state.lambda += delta.tail(nl);
    state.k_star_lu = std::move(lu);
    state.last_increment = delta.head(nf);

    const double norm = delta.norm();
    report.update_norms.push_back(norm);
    report.iterations = it + 1;

    double state_norm = state.fluct.norm();
    if (nl > 0) state_norm = std::hypot(state_norm, state.lambda.norm());
    if (norm < options.tol_rel * std::max(1.0, state_norm)) {
      state.last_report = report;
      return report;
    }
  }
  throw MicroDivergenceError("micro Newton did not converge within " +
                                 std::to_string(options.max_iterations) + " iterations",
                             report.update_norms);
}

void commit_state(const RveModel& model, RveState& state) {
  commit(state.hist, state.fluct, model.params());
}

ElementDynamics micro_element(const RveModel& model, int element, const RveState& state,
                              const MicroLoad& load) {
  const ElementBasis& b = model.basis(element);
  const int dof_a = model.dof_of_node(model.mesh().elements[element].node_a);
  const int dof_b = model.dof_of_node(model.mesh().elements[element].node_b);
  const Eigen::VectorXd fluct_accel =
      newmark_acceleration(state.fluct, state.hist, model.params());
  const std::array<double, 2> accel_base = {
      load.u_bar_ddot + load.F_bar_ddot * b.gauss_x[0],
      load.u_bar_ddot + load.F_bar_ddot * b.gauss_x[1]};
  return element_dynamics(model.phase_of(element), b, load.F_bar, accel_base,
                          gather(state.fluct, dof_a, dof_b),
                          gather(fluct_accel, dof_a, dof_b),
                          model.params().accel_coeff());
}

Eigen::VectorXd nodal_fluctuations(const RveModel& model, const Eigen::VectorXd& reduced) {
  Eigen::VectorXd nodal = Eigen::VectorXd::Zero(model.mesh().n_nodes());
  for (int n = 0; n < model.mesh().n_nodes(); ++n) {
    const int dof = model.dof_of_node(n);
    if (dof >= 0) nodal(n) = reduced(dof);
  }
  return nodal;
}

double fluctuation_average(const RveModel& model, const RveState& state) {
  const Eigen::VectorXd nodal = nodal_fluctuations(model, state.fluct);
  const Mesh1D& mesh = model.mesh();
  double integral = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    for (int g = 0; g < 2; ++g)
      integral += b.weights[g] * (b.shape_values[g][0] * nodal(mesh.elements[e].node_a) +
                                  b.shape_values[g][1] * nodal(mesh.elements[e].node_b));
  }
  return integral / model.volume();
}

double deformation_average(const RveModel& model, const RveState& state, double F_bar) {
  const Eigen::VectorXd nodal = nodal_fluctuations(model, state.fluct);
  const Mesh1D& mesh = model.mesh();
  double integral = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementBasis& b = model.basis(e);
    for (int g = 0; g < 2; ++g)
      integral += b.weights[g] *
                  (F_bar + b.shape_gradients[g][0] * nodal(mesh.elements[e].node_a) +
                   b.shape_gradients[g][1] * nodal(mesh.elements[e].node_b));
  }
  return integral / model.volume();
}

Eigen::VectorXd nodal_accelerations(const RveModel& model, const RveState& state,
                                    const MicroLoad& load) {
  const Eigen::VectorXd fluct_accel =
      newmark_acceleration(state.fluct, state.hist, model.params());
  const Eigen::VectorXd nodal_fluct_accel = nodal_fluctuations(model, fluct_accel);
  Eigen::VectorXd accel(model.mesh().n_nodes());
  for (int n = 0; n < model.mesh().n_nodes(); ++n)
    accel(n) =
        load.u_bar_ddot + load.F_bar_ddot * model.mesh().node_x[n] + nodal_fluct_accel(n);
  return accel;
}

}  // namespace fe2dyn
