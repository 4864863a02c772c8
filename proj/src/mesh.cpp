#include "hydrofrac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace hydrofrac {

Eigen::Matrix<double, 4, 2> Mesh::element_coords(int e) const {
  Eigen::Matrix<double, 4, 2> X;
  for (int a = 0; a < 4; ++a) X.row(a) = nodes[elements[e][a]].transpose();
  return X;
}

namespace {

void fill_gauss_points(Mesh& m) {
  m.gauss_points.resize(m.elements.size());
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto X = m.element_coords(e);
    for (int q = 0; q < 4; ++q) {
      const auto& g = gauss_rule()[q];
      m.gauss_points[e][q] = X.transpose() * shape_functions(g[0], g[1]);
    }
  }
}

void check_lines(const std::vector<double>& v, const char* name) {
  if (v.size() < 2) throw InvalidArgument(std::string("mesh: need at least two ") + name + " grid lines");
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw InvalidArgument(std::string("mesh: ") + name + " grid lines must increase");
}

}  // namespace

Mesh build_graded_mesh(const std::vector<double>& xs, const std::vector<double>& ys) {
  check_lines(xs, "x");
  check_lines(ys, "y");
  Mesh m;
  m.xs = xs;
  m.ys = ys;
  const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;
  m.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(xs[i], ys[j]);
  m.elements.reserve(nx * ny);
  m.h_e.reserve(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n0 = j * (nx + 1) + i;
      m.elements.push_back({n0, n0 + 1, n0 + nx + 2, n0 + nx + 1});
      m.h_e.push_back(std::max(xs[i + 1] - xs[i], ys[j + 1] - ys[j]));
    }
  fill_gauss_points(m);
  return m;
}

Mesh build_structured_mesh(double width, double height, int nx, int ny) {
  if (!(width > 0) || !(height > 0)) throw InvalidArgument("mesh: width and height must be positive");
  if (nx < 1 || ny < 1) throw InvalidArgument("mesh: nx and ny must be at least 1");
  std::vector<double> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i) xs[i] = width * i / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = height * j / ny;
  return build_graded_mesh(xs, ys);
}

Mesh build_mesh(std::vector<Point> nodes, std::vector<std::array<int, 4>> elements) {
  Mesh m;
  m.nodes = std::move(nodes);
  m.elements = std::move(elements);
  for (const auto& el : m.elements) {
    double h = 0;
    for (int a = 0; a < 4; ++a) {
      if (el[a] < 0 || el[a] >= m.num_nodes()) throw InvalidArgument("mesh: connectivity index out of range");
      h = std::max(h, (m.nodes[el[(a + 1) % 4]] - m.nodes[el[a]]).norm());
    }
    if (!(h > 0)) throw MeshQualityError("mesh: degenerate element");
    m.h_e.push_back(h);
  }
  fill_gauss_points(m);
  for (int e = 0; e < m.num_elements(); ++e)
    for (int q = 0; q < 4; ++q) gauss_eval(m, e, q);
  return m;
}

std::vector<int> nodes_in(const Mesh& mesh, const Box& box, double tol) {
  std::vector<int> out;
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (box.contains(mesh.nodes[n], tol)) out.push_back(n);
  return out;
}

std::vector<Edge> boundary_edges_in(const Mesh& mesh, const Box& box, double tol) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& el : mesh.elements)
    for (int a = 0; a < 4; ++a) {
      const int i = el[a], j = el[(a + 1) % 4];
      ++uses[{std::min(i, j), std::max(i, j)}];
    }
  std::vector<Edge> out;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    for (int a = 0; a < 4; ++a) {
      const int i = el[a], j = el[(a + 1) % 4];
      if (uses[{std::min(i, j), std::max(i, j)}] != 1) continue;
      if (box.contains(mesh.nodes[i], tol) && box.contains(mesh.nodes[j], tol)) out.push_back({e, a});
    }
  }
  return out;
}

std::vector<int> elements_in(const Mesh& mesh, const Box& box, double tol) {
  std::vector<int> out;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    Point c = Point::Zero();
    for (int n : mesh.elements[e]) c += mesh.nodes[n] / 4;
    if (box.contains(c, tol)) out.push_back(e);
  }
  return out;
}

ShapeEval<double> shape_eval(const Mesh& mesh, int element, double xi, double eta) {
  if (element < 0 || element >= mesh.num_elements()) throw InvalidArgument("shape_eval: element out of range");
  return shape_eval<double>(mesh.element_coords(element), xi, eta);
}

ShapeEval<double> gauss_eval(const Mesh& mesh, int element, int q) {
  const auto& g = gauss_rule()[q];
  return shape_eval<double>(mesh.element_coords(element), g[0], g[1], 1.0);
}

GaussPointIndex::GaussPointIndex(const Mesh& mesh, const std::vector<double>& phi_gp,
                                 const std::vector<Eigen::Vector2d>& grad_gp, double threshold)
    : mesh_(&mesh) {
  const int n = mesh.num_gauss();
  if (static_cast<int>(phi_gp.size()) != n || static_cast<int>(grad_gp.size()) != n)
    throw InvalidArgument("GaussPointIndex: field sizes do not match the mesh");
  double xmin = std::numeric_limits<double>::max(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (int g = 0; g < n; ++g) {
    const Point& p = mesh.gauss_point(g);
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  if (n == 0) return;
  const double w = std::max(xmax - xmin, 1e-300), h = std::max(ymax - ymin, 1e-300);
  cell_ = std::max(std::sqrt(w * h / n) * 2, std::max(w, h) / 1024);
  x0_ = xmin;
  y0_ = ymin;
  nbx_ = static_cast<int>(w / cell_) + 1;
  nby_ = static_cast<int>(h / cell_) + 1;
  bins_.assign(static_cast<size_t>(nbx_) * nby_, {});
  for (int g = 0; g < n; ++g) {
    if (!(phi_gp[g] >= threshold) || grad_gp[g].norm() == 0) continue;
    const Point& p = mesh.gauss_point(g);
    const int bx = std::min(nbx_ - 1, static_cast<int>((p.x() - x0_) / cell_));
    const int by = std::min(nby_ - 1, static_cast<int>((p.y() - y0_) / cell_));
    bins_[static_cast<size_t>(by) * nbx_ + bx].push_back(g);
    ++count_;
  }
}

std::optional<int> GaussPointIndex::nearest(const Point& q) const {
  if (count_ == 0) return std::nullopt;
  const int qx = std::clamp(static_cast<int>(std::floor((q.x() - x0_) / cell_)), 0, nbx_ - 1);
  const int qy = std::clamp(static_cast<int>(std::floor((q.y() - y0_) / cell_)), 0, nby_ - 1);
  int best = -1;
  double best_d = std::numeric_limits<double>::max();
  const int rmax = std::max(nbx_, nby_);
  for (int r = 0; r <= rmax; ++r) {
    for (int by = qy - r; by <= qy + r; ++by) {
      if (by < 0 || by >= nby_) continue;
      for (int bx = qx - r; bx <= qx + r; ++bx) {
        if (bx < 0 || bx >= nbx_) continue;
        if (std::max(std::abs(bx - qx), std::abs(by - qy)) != r) continue;
        for (int g : bins_[static_cast<size_t>(by) * nbx_ + bx]) {
          const double d = (mesh_->gauss_point(g) - q).squaredNorm();
          if (d < best_d || (d == best_d && g < best)) {
            best_d = d;
            best = g;
          }
        }
      }
    }
    // anything in ring r+1 or beyond lies at least r cells away
    if (best >= 0 && std::sqrt(best_d) <= r * cell_) break;
  }
  return best;
}

std::optional<int> nearest_cracked_gauss_point(const Mesh& mesh, const Point& query,
                                               const std::vector<double>& phi_gp,
                                               const std::vector<Eigen::Vector2d>& grad_gp, double threshold) {
  return GaussPointIndex(mesh, phi_gp, grad_gp, threshold).nearest(query);
}

}  // namespace hydrofrac
