#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "fe2dyn/homogenize.hpp"
#include "fe2dyn/rve.hpp"

namespace fe2dyn {

/// Smooth displacement pulse 2^8 u_max / T^8 * t^4 (t-T)^4 on [0, T], zero
/// afterwards; value and slope vanish at both ends.
struct ImpactLoad {
  double u_max = 0.0;  // mm
  double T = 0.0;      // s

  double displacement(double t) const {
    if (t <= 0.0 || t >= T) return 0.0;
    const double s = t * (t - T);
    const double s2 = s * s;
    return 256.0 * u_max / std::pow(T, 8) * s2 * s2;
  }
};

/// Macroscopic bar: left node fixed, right node driven by the impact load.
/// Every macro Gauss point owns one RVE built from the shared template.
struct MacroModel {
  Mesh1D mesh;
  NewmarkParams params;
  ImpactLoad load;
  std::shared_ptr<const RveModel> rve_template;
};

/// Per-Gauss-point persistent data: the RVE state plus the Newmark history
/// of the local macroscopic deformation gradient (drives F_bar_ddot).
struct GpState {
  RveState rve;
  double F_n = 1.0;
  double F_dot_n = 0.0;
  double F_ddot_n = 0.0;
};

struct MacroState {
  Eigen::VectorXd D;
  KinematicHistory hist;
  std::vector<GpState> gps;  // 2 per element, element-major
  int steps_completed = 0;
  double time = 0.0;
};

MacroState make_macro_state(const MacroModel& model);

struct StepReport {
  int iterations = 0;
  std::vector<double> update_norms;
  double wall_seconds = 0.0;
};

struct MacroOptions {
  double tol = 1e-8;  // on |dD_bar| over free DOFs
  int max_iterations = 20;
  MicroSolveOptions micro;
  int threads = 1;
  /// When false the step converges but commits nothing: the Gauss-point
  /// states then hold the converged, uncommitted micro solutions, which is
  /// what the consistent-tangent audit needs.
  bool commit = true;
};

/// One implicit time step to t_next: Newton iteration in which every macro
/// iteration re-solves all Gauss-point RVEs, assembles the four-moduli
/// element stiffness and commits all histories only after convergence.
/// Throws MacroDivergenceError / MicroDivergenceError on failure; the state
/// is left uncommitted in that case.
StepReport step(const MacroModel& model, MacroState& state, double t_next,
                const MacroOptions& options = {});

/// (F_bar, u_bar_ddot) at one Gauss point of an element given current nodal
/// displacements and accelerations of that element.
struct GpKinematics {
  double F_bar = 1.0;
  double u_bar_ddot = 0.0;
};

GpKinematics macro_gp_kinematics(const ElementBasis& basis, const Eigen::Vector2d& d_el,
                                 const Eigen::Vector2d& accel_el, int gp);

/// Element tangent int(B A_PF B + c B A_Pu N + N A_fF B + c N A_fu N) dV with
/// c = alpha1_bar/dt^2; generally non-symmetric.
Eigen::Matrix2d macro_element_stiffness(const TangentSet& gp0, const TangentSet& gp1,
                                        const ElementBasis& basis,
                                        const NewmarkParams& macro_params);

/// Element out-of-balance force int(B^T P_bar + N f_rho_bar) dV.
Eigen::Vector2d macro_element_residual(const TangentSet& gp0, const TangentSet& gp1,
                                       const ElementBasis& basis);

/// Deterministic map over [0, n): partitions indices into contiguous chunks.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace fe2dyn
