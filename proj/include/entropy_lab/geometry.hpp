#pragma once

// Exact-metric model manifolds of dimension 1 and 2 with a finite-volume
// Laplace-Beltrami operator.
//
// Every grid is node-centered. Each node owns a cell whose volume is its
// quadrature weight, and neighbouring cells exchange flux through a face with
// weight w_e = |face| / |distance|. The discrete Laplacian is
//
//     (Lap f)_i = (1 / vol_i) * sum_{e = (i, j)} w_e (f_j - f_i)
//
// so that sum_i vol_i g_i (Lap f)_i = -sum_e w_e (f_j - f_i)(g_j - g_i) holds
// identically, which is the discrete Green identity on closed grids and on
// grids with no-flux (Neumann) boundaries.
//
// Curvature and Christoffel data are closed-form per model family, so all
// discretization error sits in derivatives of fields.

#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "entropy_lab/error.hpp"

namespace entropy_lab {

enum class GridKind { Circle, FlatTorus, WarpedSurface, EuclideanBox, EuclideanDisc };

const char* to_string(GridKind kind) noexcept;

/// Warp profile phi(r) of a surface dr^2 + phi(r)^2 dtheta^2.
struct WarpProfile {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> ddphi;

  static WarpProfile round_sphere();  // sin r, Gauss curvature 1
  static WarpProfile flat();          // r, the Euclidean plane in polar form
  static WarpProfile hyperbolic();    // sinh r, Gauss curvature -1
};

struct ManifoldDescriptor {
  GridKind kind = GridKind::FlatTorus;
  double length1 = 0.0;  // circle length, torus / box side along x
  double length2 = 0.0;  // torus / box side along y
  double radius = 0.0;   // warped-surface extent R or disc radius
  WarpProfile warp;
  bool pole_at_start = true;  // phi(0) = 0, phi'(0) = 1
  bool pole_at_end = false;   // phi(R) = 0, phi'(R) = -1 (closes the surface)

  static ManifoldDescriptor circle(double length);
  static ManifoldDescriptor torus(double l1, double l2);
  static ManifoldDescriptor warped(WarpProfile warp, double radius, bool pole_at_start,
                                   bool pole_at_end);
  static ManifoldDescriptor sphere();  // round unit sphere
  static ManifoldDescriptor box(double lx, double ly);
  static ManifoldDescriptor disc(double radius);
};

struct Resolution {
  int n1 = 0;
  int n2 = 1;  // ignored for the circle
};

/// Base point for distances and kernels. Flat grids take Euclidean
/// coordinates; warped surfaces only support their pole r = 0.
struct BasePoint {
  double x = 0.0;
  double y = 0.0;
  bool pole = false;

  static BasePoint at(double x, double y = 0.0) { return {x, y, false}; }
  static BasePoint north_pole() { return {0.0, 0.0, true}; }
};

struct Edge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
  int axis = 0;
};

/// Boundary face of a Neumann grid with outward normal (Euclidean frame) and
/// the second fundamental form of the boundary curve there.
struct BoundaryFace {
  int node = 0;
  double normal_x = 0.0;
  double normal_y = 0.0;
  double area = 0.0;
  double second_fundamental_form = 0.0;
};

class ManifoldGrid {
 public:
  static std::shared_ptr<const ManifoldGrid> build(const ManifoldDescriptor& desc,
                                                   Resolution res);

  const ManifoldDescriptor& descriptor() const { return desc_; }
  GridKind kind() const { return desc_.kind; }
  int dimension() const { return kind() == GridKind::Circle ? 1 : 2; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int node_count() const { return n1_ * n2_; }
  int index(int i, int j) const { return i * n2_ + j; }
  int i_of(int node) const { return node / n2_; }
  int j_of(int node) const { return node % n2_; }

  /// Grid spacing along an axis (radial spacing and angle step on warped grids).
  double spacing(int axis) const { return axis == 0 ? h1_ : h2_; }
  /// Largest geodesic cell width, the `h` in resolution criteria.
  double max_cell_width() const { return max_width_; }

  const std::vector<double>& node_volumes() const { return volumes_; }
  double total_volume() const { return total_volume_; }

  /// Native coordinates: (x, y) on flat grids, (r, theta) on warped surfaces.
  double coord(int node, int axis) const;
  /// Euclidean position for flat grids and the disc; (r cos, r sin) on
  /// warped surfaces.
  double euclid_x(int node) const;
  double euclid_y(int node) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<BoundaryFace>& boundary() const { return boundary_; }
  bool closed() const { return boundary_.empty(); }
  bool euclidean() const;
  bool periodic() const {
    return kind() == GridKind::Circle || kind() == GridKind::FlatTorus;
  }

  /// Closed-form Gauss curvature (Ricci = K g in dimension two); 0 on flat grids.
  double gauss_curvature(int node) const;
  /// phi and phi' at the node (1 and 0 on flat grids).
  double warp(int node) const;
  double warp_slope(int node) const;
  /// Christoffel symbols of (r, theta) coordinates: Gamma^r_{tt} = -phi phi',
  /// Gamma^t_{rt} = phi'/phi. Zero on flat grids.
  double christoffel_r_tt(int node) const { return -warp(node) * warp_slope(node); }
  double christoffel_t_rt(int node) const { return warp_slope(node) / warp(node); }

  /// Stencil neighbour with ghost handling: periodic wrap, mirror (Neumann)
  /// or the parity reflection through a pole.
  int neighbor(int node, int axis, int dir) const;

  /// Symmetric matrix K with (K f)_i = sum_e w_e (f_j - f_i).
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// Distance from the node to the cut locus of the base point, infinity
  /// where there is none (box, disc, open warped surfaces).
  double cut_locus_distance(int node, const BasePoint& base) const;

 private:
  ManifoldGrid() = default;
  void build_flat(Resolution res);
  void build_warped(Resolution res);
  void finish();

  ManifoldDescriptor desc_;
  int n1_ = 0;
  int n2_ = 1;
  double h1_ = 0.0;
  double h2_ = 0.0;
  double max_width_ = 0.0;
  std::vector<double> volumes_;
  double total_volume_ = 0.0;
  std::vector<double> c1_;
  std::vector<double> c2_;
  std::vector<double> phi_;
  std::vector<double> dphi_;
  std::vector<double> curvature_;
  std::vector<Edge> edges_;
  std::vector<BoundaryFace> boundary_;
  Eigen::SparseMatrix<double> stiffness_;
};

using GridPtr = std::shared_ptr<const ManifoldGrid>;

/// Real values on the nodes of one grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  /// Samples fn(node) at every node.
  static ScalarField from_nodes(GridPtr grid, const std::function<double(int)>& fn);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& vec() const { return values_; }

  bool all_finite() const;
  bool all_positive() const;
  double max() const;
  double min() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Orthonormal-frame components of the covariant Hessian: (e1, e1), (e1, e2),
/// (e2, e2) with e1 = d/dx or d/dr and e2 = d/dy or (1/phi) d/dtheta.
struct HessianField {
  std::vector<double> h11;
  std::vector<double> h12;
  std::vector<double> h22;
};

GridPtr build_grid(const ManifoldDescriptor& desc, Resolution res);

ScalarField laplace_beltrami(const ScalarField& f);
/// |grad f|^2 at nodes, averaged from the edge differences around each node.
ScalarField gradient_sq(const ScalarField& f);
/// <grad f, grad g> with the same edge averaging as gradient_sq.
ScalarField gradient_dot(const ScalarField& f, const ScalarField& g);
/// sum_e w_e (f_j - f_i)(g_j - g_i) = -int (Lap f) g dv.
double dirichlet_form(const ScalarField& f, const ScalarField& g);
HessianField hessian(const ScalarField& f);
/// |Hess f - g / (2 tau)|^2.
ScalarField hessian_quadratic(const ScalarField& f, double tau);
/// Ric(grad f, grad f) = K |grad f|^2 on surfaces, 0 on flat grids.
ScalarField ricci_quadratic(const ScalarField& f);
double integrate(const ScalarField& f);
ScalarField distance_field(const GridPtr& grid, const BasePoint& base);

/// Elementwise helpers used across modules.
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

}  // namespace entropy_lab
