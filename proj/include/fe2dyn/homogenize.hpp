#pragma once

#include <Eigen/Dense>

#include "fe2dyn/rve.hpp"

namespace fe2dyn {

/// Homogenized outputs at one macroscopic Gauss point: averaged stress and
/// inertia plus the four consistent moduli
///   A_PF = dP_bar/dF_bar   A_Pu = dP_bar/du_bar_dd
///   A_fF = df_bar/dF_bar   A_fu = df_bar/du_bar_dd
struct TangentSet {
  double P_bar = 0.0;      // N/mm^2
  double f_rho_bar = 0.0;  // N/mm^3, volume average of rho*u_dd
  double A_PF = 0.0;
  double A_Pu = 0.0;
  double A_fF = 0.0;
  double A_fu = 0.0;
};

/// Global sensitivity fields assembled at a converged micro state. Element
/// definitions:
///   k = int(B^T A B),  l = int(B^T A),  m = int(N rho N^T),  w = int(rho N),
///   z = int(rho N X),  g = int(N)
/// plus the pointwise averages <A>, <rho X> (V-form), <rho X^2> (Y-form)
/// and <rho> evaluated by the same quadrature.
struct SensitivityMatrices {
  Eigen::MatrixXd K, M;
  Eigen::VectorXd L, Z, W;
  double avg_tangent = 0.0;   // <A>
  double avg_rho_x = 0.0;     // <rho X>
  double avg_rho_xx = 0.0;    // <rho X^2>
  double avg_rho = 0.0;       // <rho>
  double volume = 0.0;

  /// Bordered composites, padded with zero rows for the Lagrange DOFs.
  Eigen::VectorXd l_star(const RveModel& model, double micro_accel_coeff) const;
  Eigen::VectorXd l_bar_star(const RveModel& model, double macro_accel_coeff) const;
  Eigen::VectorXd w_star(const RveModel& model) const;
};

SensitivityMatrices assemble_sensitivity(const RveModel& model, const RveState& state);

/// Effective macroscopic stress <P + rho u_dd X> at the converged state.
double macro_stress(const RveModel& model, const RveState& state);

/// Effective macroscopic inertia force density <rho u_dd>.
double macro_inertia(const RveModel& model, const RveState& state);

/// Solutions of the two bordered sensitivity systems
///   dD*/dF_bar = -K*^-1 L_bar*   and   dD*/du_bar_dd = -K*^-1 W*
/// reusing the factorization cached by the final micro Newton iteration.
struct SensitivitySolves {
  Eigen::VectorXd dD_dF;
  Eigen::VectorXd dD_du;
};

SensitivitySolves sensitivity_solves(const RveModel& model, const RveState& state,
                                     const SensitivityMatrices& mats,
                                     const NewmarkParams& macro_params);

/// All homogenized outputs for one converged micro state. macro_params
/// supplies the macroscale time-integration factor that enters L_bar* and
/// the leading V/Y terms.
TangentSet homogenize(const RveModel& model, const RveState& state,
                      const NewmarkParams& macro_params);

/// Normalized multiscale virtual-power gap
///   |P_bar dF - f_bar du - <P dF_tot - f du_tot>| / scale
/// for a virtual field du_tot = du + dF X + du~ consistent with the
/// constraint space. d_fluct is given on reduced DOFs (may be empty).
double hill_mandel_gap(const RveModel& model, const RveState& state, double d_F_bar,
                       double d_u_bar, const Eigen::VectorXd& d_fluct);

/// Central finite-difference audit of the four moduli. Perturbing F_bar
/// shifts F_bar_ddot by macro_accel_coeff * h (the macroscale Newmark chain
/// rule); every probe re-converges the micro problem from a copy of the
/// converged state with identical history.
struct TangentAudit {
  TangentSet closed;
  double fd_A_PF = 0.0, fd_A_Pu = 0.0, fd_A_fF = 0.0, fd_A_fu = 0.0;
  double rel_err_PF = 0.0, rel_err_Pu = 0.0, rel_err_fF = 0.0, rel_err_fu = 0.0;
  double max_rel_err() const;
};

struct AuditOptions {
  double h_rel = 1e-5;             // base FD step, scaled per input
  double micro_tol = 1e-13;        // tight tolerance for the FD re-solves
  int micro_max_iterations = 60;
  bool h_sweep = true;             // refine h by a consistency sweep (h, h/10, h/100)
};

TangentAudit audit_tangents(const RveModel& model, const RveState& state,
                            const NewmarkParams& macro_params,
                            const AuditOptions& options = {});

}  // namespace fe2dyn
