#pragma once

#include <optional>
#include <vector>

#include "hydrofrac/mesh.hpp"

namespace hydrofrac {

inline constexpr double kNormalCosine = 0.866;

// unit crack normal at Gauss point gp, or none when no cracked donor exists
std::optional<Eigen::Vector2d> crack_normal(int gp, const Mesh& mesh, const std::vector<double>& phi_gp,
                                            const std::vector<Eigen::Vector2d>& grad_gp,
                                            const GaussPointIndex& index);

std::vector<std::optional<Eigen::Vector2d>> crack_normals(const Mesh& mesh, const std::vector<double>& phi_gp,
                                                          const std::vector<Eigen::Vector2d>& grad_gp,
                                                          double threshold = 1 - 1e-6);

}  // namespace hydrofrac
