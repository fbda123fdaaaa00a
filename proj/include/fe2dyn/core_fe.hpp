#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "fe2dyn/types.hpp"

namespace fe2dyn {

enum class UnitCell { A, B };

struct Element {
  int node_a = 0;
  int node_b = 0;
  int phase = 0;
};

/// 1D line mesh with per-element phase ids. Node coordinates are strictly
/// increasing and every element joins adjacent nodes.
struct Mesh1D {
  std::vector<double> node_x;
  std::vector<Element> elements;

  int n_nodes() const { return static_cast<int>(node_x.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  double x_min() const { return node_x.front(); }
  double x_max() const { return node_x.back(); }
  double length() const { return node_x.back() - node_x.front(); }
  double element_length(int e) const {
    return node_x[elements[e].node_b] - node_x[elements[e].node_a];
  }

  /// Throws AssemblyError if ordering/adjacency invariants are violated.
  void validate() const;
};

/// Periodic RVE mesh of n_cells unit cells, length 2*l_m*n_cells, shifted so
/// the volume centroid sits at X = 0.  Phase layout per cell:
///   type A: [phase 0 | phase 1]
///   type B: [phase 1 half | phase 0 | phase 1 half]
/// i.e. B is the half-period shift of A. Element lengths are snapped per
/// phase segment to the nearest divisor of the segment length.
Mesh1D build_rve_mesh(UnitCell cell, int n_cells, double l_m, double l_e);

/// Single-scale bar mesh on [0, L]: alternating [phase 0 | phase 1] layers of
/// thickness l_m each, elements of ~l_e snapped per layer.
Mesh1D build_bar_mesh(double length, double l_m, double l_e);

/// Homogeneous mesh on [x0, x1] with n equal elements of the given phase.
Mesh1D build_uniform_mesh(double x0, double x1, int n_elements, int phase = 0);

/// Linear two-node element evaluated at the two-point Gauss rule.
/// Weights are pre-multiplied by the jacobian, so integrals are plain
/// weighted sums: integral f dV = sum_g weight[g] * f(g).
struct ElementBasis {
  std::array<std::array<double, 2>, 2> shape_values;     // [gp][node]
  std::array<std::array<double, 2>, 2> shape_gradients;  // [gp][node], 1/mm
  std::array<double, 2> gauss_x;                         // global X at gp
  std::array<double, 2> weights;                         // w * jacobian
  double jacobian = 0.0;                                 // l_e / 2
  double length = 0.0;
};

ElementBasis element_basis(const Mesh1D& mesh, int element);

inline constexpr std::array<double, 2> kGaussPoints = {-0.57735026918962576451,
                                                       0.57735026918962576451};

/// Additive assembly of 2x2 element matrices into a dense global matrix.
/// dof < 0 marks an eliminated row/column and is skipped.
void assemble(Eigen::MatrixXd& global, const Eigen::Matrix2d& local,
              std::span<const int, 2> dofs);
void assemble(Eigen::VectorXd& global, const Eigen::Vector2d& local,
              std::span<const int, 2> dofs);

}  // namespace fe2dyn
