#include "hydrofrac/crack_normal.hpp"

#include <cmath>

namespace hydrofrac {

std::optional<Eigen::Vector2d> crack_normal(int gp, const Mesh& mesh, const std::vector<double>& phi_gp,
                                            const std::vector<Eigen::Vector2d>& grad_gp,
                                            const GaussPointIndex& index) {
  const Eigen::Vector2d& own = grad_gp[gp];
  const double own_norm = own.norm();
  if (phi_gp[gp] <= 0.5 && own_norm > 0) return Eigen::Vector2d(own / own_norm);
  const auto nb = index.nearest(mesh.gauss_point(gp));
  if (!nb) return std::nullopt;
  const Eigen::Vector2d dn = grad_gp[*nb].normalized();
  if (own_norm == 0) return dn;
  // normals are unsigned, so opposite gradients count as aligned
  const double cos_t = std::abs(own.dot(dn)) / own_norm;
  if (cos_t >= kNormalCosine) return Eigen::Vector2d(own / own_norm);
  return dn;
}

std::vector<std::optional<Eigen::Vector2d>> crack_normals(const Mesh& mesh, const std::vector<double>& phi_gp,
                                                          const std::vector<Eigen::Vector2d>& grad_gp,
                                                          double threshold) {
  const GaussPointIndex index(mesh, phi_gp, grad_gp, threshold);
  std::vector<std::optional<Eigen::Vector2d>> out(mesh.num_gauss());
  for (int g = 0; g < mesh.num_gauss(); ++g) out[g] = crack_normal(g, mesh, phi_gp, grad_gp, index);
  return out;
}

}  // namespace hydrofrac
