#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

#include "hydrofrac/errors.hpp"

namespace hydrofrac {

using Point = Eigen::Vector2d;

struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 4>> elements;  // counter-clockwise
  std::vector<double> h_e;
  std::vector<std::array<Point, 4>> gauss_points;
  // grid lines of a structured mesh, empty otherwise
  std::vector<double> xs, ys;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_gauss() const { return 4 * num_elements(); }
  const Point& gauss_point(int gp) const { return gauss_points[gp / 4][gp % 4]; }
  Eigen::Matrix<double, 4, 2> element_coords(int e) const;
};

inline constexpr int kGaussPerElement = 4;
// 2x2 Gauss points ordered counter-clockwise from (-,-)
inline const std::array<std::array<double, 2>, 4>& gauss_rule() {
  static const double g = 0.57735026918962576451;
  static const std::array<std::array<double, 2>, 4> pts{{{-g, -g}, {g, -g}, {g, g}, {-g, g}}};
  return pts;
}

Mesh build_structured_mesh(double width, double height, int nx, int ny);
// tensor-product mesh over the given monotone grid lines
Mesh build_graded_mesh(const std::vector<double>& xs, const std::vector<double>& ys);
// arbitrary quads; h_e is the longest edge
Mesh build_mesh(std::vector<Point> nodes, std::vector<std::array<int, 4>> elements);

template <class S>
struct ShapeEval {
  Eigen::Matrix<S, 4, 1> N;
  Eigen::Matrix<S, 4, 2> dNdx;
  S detJ;
  S weight;
};

template <class S>
Eigen::Matrix<S, 4, 1> shape_functions(S xi, S eta) {
  Eigen::Matrix<S, 4, 1> N;
  N << (1 - xi) * (1 - eta) / 4, (1 + xi) * (1 - eta) / 4, (1 + xi) * (1 + eta) / 4,
      (1 - xi) * (1 + eta) / 4;
  return N;
}

template <class S>
ShapeEval<S> shape_eval(const Eigen::Matrix<S, 4, 2>& X, S xi, S eta, S weight = S(1)) {
  using std::abs;
  if (abs(xi) > S(1) + S(1e-12) || abs(eta) > S(1) + S(1e-12))
    throw InvalidArgument("shape_eval: local point outside the reference square");
  Eigen::Matrix<S, 4, 2> dNdxi;
  dNdxi << -(1 - eta), -(1 - xi), (1 - eta), -(1 + xi), (1 + eta), (1 + xi), -(1 + eta), (1 - xi);
  dNdxi /= S(4);
  const Eigen::Matrix<S, 2, 2> J = X.transpose() * dNdxi;  // J(i,a) = dx_i/dxi_a
  const S det = J.determinant();
  if (!(det > S(0))) throw MeshQualityError("shape_eval: non-positive Jacobian determinant");
  ShapeEval<S> se;
  se.N = shape_functions(xi, eta);
  se.dNdx = dNdxi * J.inverse();
  se.detJ = det;
  se.weight = weight;
  return se;
}

struct Edge {
  int element;
  int local;  // edge from local node `local` to `local + 1`
};

// closed axis-aligned region, bounds inclusive up to tol
struct Box {
  double xmin, xmax, ymin, ymax;
  bool contains(const Point& p, double tol = 1e-9) const {
    return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol && p.y() <= ymax + tol;
  }
};

std::vector<int> nodes_in(const Mesh& mesh, const Box& box, double tol = 1e-9);
// boundary edges (used by one element only) with both end nodes inside the box
std::vector<Edge> boundary_edges_in(const Mesh& mesh, const Box& box, double tol = 1e-9);
// elements whose centroid lies inside the box
std::vector<int> elements_in(const Mesh& mesh, const Box& box, double tol = 1e-9);

ShapeEval<double> shape_eval(const Mesh& mesh, int element, double xi, double eta);
// shape evaluation at the element's q-th Gauss point
ShapeEval<double> gauss_eval(const Mesh& mesh, int element, int q);

// engineering-shear strain operator, rows exx, eyy, gxy
template <class S>
Eigen::Matrix<S, 3, 8> b_matrix_u(const ShapeEval<S>& se) {
  Eigen::Matrix<S, 3, 8> B = Eigen::Matrix<S, 3, 8>::Zero();
  for (int a = 0; a < 4; ++a) {
    B(0, 2 * a) = se.dNdx(a, 0);
    B(1, 2 * a + 1) = se.dNdx(a, 1);
    B(2, 2 * a) = se.dNdx(a, 1);
    B(2, 2 * a + 1) = se.dNdx(a, 0);
  }
  return B;
}

// uniform bin grid over Gauss points holding only the qualifying subset
class GaussPointIndex {
 public:
  GaussPointIndex() = default;
  GaussPointIndex(const Mesh& mesh, const std::vector<double>& phi_gp,
                  const std::vector<Eigen::Vector2d>& grad_gp, double threshold = 1 - 1e-6);
  std::optional<int> nearest(const Point& q) const;
  bool empty() const { return count_ == 0; }

 private:
  const Mesh* mesh_ = nullptr;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nbx_ = 0, nby_ = 0, count_ = 0;
  std::vector<std::vector<int>> bins_;
};

std::optional<int> nearest_cracked_gauss_point(const Mesh& mesh, const Point& query,
                                               const std::vector<double>& phi_gp,
                                               const std::vector<Eigen::Vector2d>& grad_gp,
                                               double threshold = 1 - 1e-6);

}  // namespace hydrofrac
