#pragma once

#include <Eigen/Dense>

#include "fe2dyn/types.hpp"

namespace fe2dyn {

/// Newmark-beta parameters. alpha1 = 1/beta is the factor that appears in
/// every dynamic tangent as alpha1/dt^2.
struct NewmarkParams {
  double beta = 0.25;
  double gamma = 0.5;
  double dt = 0.0;

  double alpha1() const { return 1.0 / beta; }
  /// alpha1 / dt^2, the slope of the acceleration update in u_next.
  double accel_coeff() const { return 1.0 / (beta * dt * dt); }

  void validate() const {
    if (!(beta > 0.0 && beta <= 0.5)) throw ConfigError("newmark beta must be in (0, 0.5]");
    if (!(gamma >= 0.5 && gamma <= 1.0)) throw ConfigError("newmark gamma must be in [0.5, 1]");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  }
};

/// Converged kinematics of the previous time step, per DOF.
struct KinematicHistory {
  Eigen::VectorXd u, v, a;

  static KinematicHistory zero(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

/// a_next = (u_next - u_n - dt v_n)/(beta dt^2) - (1/(2 beta) - 1) a_n
inline double newmark_acceleration(double u_next, double u_n, double v_n, double a_n,
                                   const NewmarkParams& p) {
  return (u_next - u_n - p.dt * v_n) * p.accel_coeff() - (0.5 / p.beta - 1.0) * a_n;
}

/// v_next = v_n + dt ((1 - gamma) a_n + gamma a_next)
inline double newmark_velocity(double a_next, double v_n, double a_n,
                               const NewmarkParams& p) {
  return v_n + p.dt * ((1.0 - p.gamma) * a_n + p.gamma * a_next);
}

inline Eigen::VectorXd newmark_acceleration(const Eigen::VectorXd& u_next,
                                            const KinematicHistory& hist,
                                            const NewmarkParams& p) {
  return (u_next - hist.u - p.dt * hist.v) * p.accel_coeff() -
         (0.5 / p.beta - 1.0) * hist.a;
}

inline Eigen::VectorXd newmark_velocity(const Eigen::VectorXd& a_next,
                                        const KinematicHistory& hist,
                                        const NewmarkParams& p) {
  return hist.v + p.dt * ((1.0 - p.gamma) * hist.a + p.gamma * a_next);
}

/// Advance a history to the converged displacements of the current step.
inline void commit(KinematicHistory& hist, const Eigen::VectorXd& u_next,
                   const NewmarkParams& p) {
  Eigen::VectorXd a_next = newmark_acceleration(u_next, hist, p);
  hist.v = newmark_velocity(a_next, hist, p);
  hist.a = std::move(a_next);
  hist.u = u_next;
}

}  // namespace fe2dyn
