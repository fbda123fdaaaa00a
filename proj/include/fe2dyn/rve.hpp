#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "fe2dyn/core_fe.hpp"
#include "fe2dyn/material.hpp"
#include "fe2dyn/newmark.hpp"

namespace fe2dyn {

/// How the macroscopic displacement is linked to the RVE.
enum class ConstraintMode { VolumeConstraint, FixedCorners };

/// How <F> = F_bar is enforced.
enum class FLinkMode { PeriodicBC, VolumeAverageF };

/// Macroscopic inputs of one micro solve. The macroscopic displacement
/// itself never enters; only its second time derivative does.
struct MicroLoad {
  double F_bar = 1.0;       // macroscopic deformation gradient
  double F_bar_ddot = 0.0;  // 1/s^2
  double u_bar_ddot = 0.0;  // mm/s^2
};

/// Immutable description of the microscopic boundary value problem:
/// mesh, phases, constraint setup and the reduced DOF numbering.
///
/// Periodic BCs are realized by master-slave elimination (the last node's
/// fluctuation DOF aliases the first); the volume constraints are Lagrange
/// columns appended behind the fluctuation block.
class RveModel {
public:
  RveModel(Mesh1D mesh, std::vector<MaterialPhase> phases,
           ConstraintMode constraint, FLinkMode f_link, NewmarkParams params);

  const Mesh1D& mesh() const { return mesh_; }
  const std::vector<MaterialPhase>& phases() const { return phases_; }
  const MaterialPhase& phase_of(int element) const {
    return phases_[mesh_.elements[element].phase];
  }
  ConstraintMode constraint_mode() const { return constraint_; }
  FLinkMode f_link_mode() const { return f_link_; }
  const NewmarkParams& params() const { return params_; }

  int n_dofs() const { return n_dofs_; }        // fluctuation DOFs after elimination
  int n_lagrange() const { return n_lagrange_; }
  int n_total() const { return n_dofs_ + n_lagrange_; }
  int dof_of_node(int node) const { return dof_of_node_[node]; }
  const ElementBasis& basis(int element) const { return basis_[element]; }
  double volume() const { return volume_; }

  /// Assembled volume-constraint column (integral of N over the RVE), empty
  /// in FixedCorners mode.
  const Eigen::VectorXd& g_volume() const { return g_volume_; }
  /// Assembled <F>-constraint column (integral of B), VolumeAverageF only.
  const Eigen::VectorXd& g_defgrad() const { return g_defgrad_; }

private:
  Mesh1D mesh_;
  std::vector<MaterialPhase> phases_;
  ConstraintMode constraint_;
  FLinkMode f_link_;
  NewmarkParams params_;
  std::vector<int> dof_of_node_;
  std::vector<ElementBasis> basis_;
  int n_dofs_ = 0;
  int n_lagrange_ = 0;
  double volume_ = 0.0;
  Eigen::VectorXd g_volume_;
  Eigen::VectorXd g_defgrad_;
};

struct MicroSolveReport {
  int iterations = 0;
  std::vector<double> update_norms;
};

/// Mutable per-Gauss-point state: fluctuations, Lagrange multipliers and the
/// Newmark history of the fluctuation DOFs. The factorization of the bordered
/// tangent from the last accepted Newton update is kept for the sensitivity
/// solves of the homogenized moduli.
struct RveState {
  Eigen::VectorXd fluct;   // reduced fluctuation DOFs (mm)
  Eigen::VectorXd lambda;  // constraint force densities (N/mm^3)
  KinematicHistory hist;   // over reduced fluctuation DOFs
  MicroLoad last_inputs;

  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> k_star_lu;
  Eigen::VectorXd last_increment;  // fluctuation block of the final update
  MicroSolveReport last_report;
};

RveState make_state(const RveModel& model);

struct MicroSolveOptions {
  double tol_rel = 1e-10;  // on |dD*| relative to max(1, |D*|)
  int max_iterations = 25;
};

/// Newton iteration on the bordered system
///   [ K_hat  G ] [dD]       [ R_hat + R_u ]
///   [ G^T    0 ] [dl]   =   [ R_lambda    ]
/// with the right-hand side assembled as the negative out-of-balance force,
/// so updates are additive. History is left untouched until commit_state.
/// Throws MicroDivergenceError on iteration cap or element inversion.
MicroSolveReport solve_micro(const RveModel& model, RveState& state,
                             const MicroLoad& load,
                             const MicroSolveOptions& options = {});

/// Advance the Newmark history to the current converged fluctuations.
void commit_state(const RveModel& model, RveState& state);

/// Element contributions shared by the micro and single-scale assemblers:
///   k_hat = int(B^T A B) dV + accel_coeff * int(N rho N^T) dV
///   r_hat = int(B^T P + N rho accel) dV
///   mass  = int(N rho N^T) dV
///   g     = int(N) dV
/// with F(gp) = F_base + (u_b - u_a)/l and
/// accel(gp) = accel_base(gp) + N(gp) . accel_nodes.
struct ElementDynamics {
  Eigen::Matrix2d k_hat;
  Eigen::Vector2d r_hat;
  Eigen::Matrix2d mass;
  Eigen::Vector2d g;
};

ElementDynamics element_dynamics(const MaterialPhase& phase, const ElementBasis& basis,
                                 double F_base, const std::array<double, 2>& accel_base,
                                 const Eigen::Vector2d& u_nodes,
                                 const Eigen::Vector2d& accel_nodes, double accel_coeff);

/// Spec-level wrapper evaluating one element of the micro problem at the
/// current state and load.
ElementDynamics micro_element(const RveModel& model, int element, const RveState& state,
                              const MicroLoad& load);

/// Expand reduced fluctuation DOFs to nodal values (fixed corners -> 0,
/// periodic slave -> master value).
Eigen::VectorXd nodal_fluctuations(const RveModel& model, const Eigen::VectorXd& reduced);

/// Volume average of the fluctuation field, (1/V) int(u~) dV.
double fluctuation_average(const RveModel& model, const RveState& state);

/// Volume average of the deformation gradient at the converged state.
double deformation_average(const RveModel& model, const RveState& state, double F_bar);

/// Total micro acceleration u_dd = u_bar_dd + F_bar_dd X + u~_dd at nodes.
Eigen::VectorXd nodal_accelerations(const RveModel& model, const RveState& state,
                                    const MicroLoad& load);

}  // namespace fe2dyn
