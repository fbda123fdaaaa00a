#include "fe2dyn/core_fe.hpp"

#include <cmath>
#include <numeric>

namespace fe2dyn {

void Mesh1D::validate() const {
  if (n_nodes() < 2 || n_elements() < 1)
    throw AssemblyError("mesh needs at least one element");
  for (int i = 0; i + 1 < n_nodes(); ++i)
    if (!(node_x[i + 1] > node_x[i]))
      throw AssemblyError("node coordinates must be strictly increasing");
  for (int e = 0; e < n_elements(); ++e) {
    const Element& el = elements[e];
    if (el.node_a != e || el.node_b != e + 1)
      throw AssemblyError("elements must join adjacent nodes in order");
    if (el.phase < 0) throw AssemblyError("negative phase id");
  }
}

namespace {

struct Segment {
  double length;
  int phase;
};

// Mesh a chain of phase segments starting at x0; each segment gets
// round(length/l_e) equal elements (at least one), so phase interfaces
// always coincide with nodes.
Mesh1D mesh_segments(double x0, const std::vector<Segment>& segments, double l_e) {
  if (l_e <= 0.0) throw ConfigError("element length must be positive");
  Mesh1D mesh;
  mesh.node_x.push_back(x0);
  double seg_start = x0;
  for (const Segment& seg : segments) {
    if (seg.length <= 0.0) throw ConfigError("segment length must be positive");
    const int n = std::max(1, static_cast<int>(std::llround(seg.length / l_e)));
    const double h = seg.length / n;
    const double seg_end = seg_start + seg.length;
    for (int i = 0; i < n; ++i) {
      const int a = mesh.n_nodes() - 1;
      mesh.node_x.push_back(i + 1 == n ? seg_end : seg_start + (i + 1) * h);
      mesh.elements.push_back({a, a + 1, seg.phase});
    }
    seg_start = seg_end;
  }
  return mesh;
}

}  // namespace

Mesh1D build_rve_mesh(UnitCell cell, int n_cells, double l_m, double l_e) {
  if (l_m <= 0.0 || l_e <= 0.0) throw ConfigError("RVE lengths must be positive");
  if (n_cells < 1) throw ConfigError("n_cells must be >= 1");

  std::vector<Segment> segments;
  for (int c = 0; c < n_cells; ++c) {
    if (cell == UnitCell::A) {
      segments.push_back({l_m, 0});
      segments.push_back({l_m, 1});
    } else {
      segments.push_back({0.5 * l_m, 1});
      segments.push_back({l_m, 0});
      segments.push_back({0.5 * l_m, 1});
    }
  }
  // Centering the span at the origin puts the volume centroid at X = 0
  // (uniform cross section); the re-shift below makes x_min == -x_max exact.
  const double half = l_m * n_cells;
  Mesh1D mesh = mesh_segments(-half, segments, l_e);
  const double shift = 0.5 * (mesh.x_min() + mesh.x_max());
  for (double& x : mesh.node_x) x -= shift;
  mesh.validate();
  return mesh;
}

Mesh1D build_bar_mesh(double length, double l_m, double l_e) {
  if (length <= 0.0 || l_m <= 0.0) throw ConfigError("bar lengths must be positive");
  const int n_layers = static_cast<int>(std::llround(length / l_m));
  if (n_layers < 1 || std::abs(n_layers * l_m - length) > 1e-9 * length)
    throw ConfigError("bar length must be an integer number of phase layers");
  std::vector<Segment> segments;
  for (int i = 0; i < n_layers; ++i) segments.push_back({l_m, i % 2});
  Mesh1D mesh = mesh_segments(0.0, segments, l_e);
  mesh.validate();
  return mesh;
}

Mesh1D build_uniform_mesh(double x0, double x1, int n_elements, int phase) {
  if (!(x1 > x0)) throw ConfigError("mesh span must be positive");
  if (n_elements < 1) throw ConfigError("need at least one element");
  Mesh1D mesh = mesh_segments(x0, {{x1 - x0, phase}}, (x1 - x0) / n_elements);
  mesh.validate();
  return mesh;
}

ElementBasis element_basis(const Mesh1D& mesh, int element) {
  const Element& el = mesh.elements[element];
  const double xa = mesh.node_x[el.node_a];
  const double xb = mesh.node_x[el.node_b];
  const double l = xb - xa;

  ElementBasis basis;
  basis.length = l;
  basis.jacobian = 0.5 * l;
  for (int g = 0; g < 2; ++g) {
    const double xi = kGaussPoints[g];
    basis.shape_values[g] = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)};
    basis.shape_gradients[g] = {-1.0 / l, 1.0 / l};
    basis.gauss_x[g] = basis.shape_values[g][0] * xa + basis.shape_values[g][1] * xb;
    basis.weights[g] = basis.jacobian;  // unit Gauss weights
  }
  return basis;
}

void assemble(Eigen::MatrixXd& global, const Eigen::Matrix2d& local,
              std::span<const int, 2> dofs) {
  for (int i = 0; i < 2; ++i) {
    if (dofs[i] < 0) continue;
    if (dofs[i] >= global.rows()) throw AssemblyError("dof out of range");
    for (int j = 0; j < 2; ++j) {
      if (dofs[j] < 0) continue;
      if (dofs[j] >= global.cols()) throw AssemblyError("dof out of range");
      global(dofs[i], dofs[j]) += local(i, j);
    }
  }
}

void assemble(Eigen::VectorXd& global, const Eigen::Vector2d& local,
              std::span<const int, 2> dofs) {
  for (int i = 0; i < 2; ++i) {
    if (dofs[i] < 0) continue;
    if (dofs[i] >= global.size()) throw AssemblyError("dof out of range");
    global(dofs[i]) += local(i);
  }
}

}  // namespace fe2dyn
