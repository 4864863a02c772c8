#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

#include "hydrofrac/constitutive.hpp"
#include "hydrofrac/mesh.hpp"
#include "hydrofrac/poro.hpp"

namespace hydrofrac {

enum class Field { u, phi, p };

// ux, uy, p, phi are Dirichlet values; tx, ty, pressure act on edges;
// flux is inflow mass rate per area on edges; source is q_m on elements
enum class BcField { ux, uy, p, phi, tx, ty, pressure, flux, source };

BcField parse_bc_field(const std::string& s);
std::string to_string(BcField f);
bool is_dirichlet(BcField f);

struct BoundarySet {
  std::string name;
  BcField field = BcField::ux;
  std::vector<int> nodes;
  std::vector<Edge> edges;
  std::vector<int> elements;
};

// Dirichlet fields select nodes, source selects elements, the rest select boundary edges
BoundarySet boundary_set(const Mesh& mesh, std::string name, BcField field, const Box& box);

struct Model {
  Mesh mesh;
  MaterialParams mat;
  PoroFluidParams fluid;
  SplitKind split = SplitKind::none;
  Eigen::Vector2d body_force = Eigen::Vector2d::Zero();
  std::vector<BoundarySet> bcs;
  std::vector<int> crack_nodes;
  std::vector<char> crack_gp;
  // AT1 penalty; non-positive selects the calibrated default
  double penalty_gamma = 0;

  // filled by finalize()
  std::vector<ShapeEval<double>> gp_shape;
  std::vector<std::vector<std::pair<int, int>>> element_edges;    // (bc index, local edge)
  std::vector<std::vector<int>> element_sources;                  // bc indices

  void finalize();
  double gamma() const;
  // history seed that keeps prescribed cracks open
  double crack_seed() const { return 1e3 * mat.Gc / mat.ell; }
  int num_dofs(Field f) const { return f == Field::u ? 2 * mesh.num_nodes() : mesh.num_nodes(); }
  // constrained dof -> index of the controlling bc, or -2 for a crack node
  std::vector<int> constraint_sources(Field f) const;
};

struct State {
  Eigen::VectorXd u, phi, p;
  std::vector<double> H, eps_vol, eps_vol_rate, psi_d;
  double time = 0;

  static State zeros(const Model& m);
};

// per-Gauss-point field samples
struct GpSample {
  Eigen::Vector3d strain;  // exx, eyy, gxy
  double phi = 0;
  Eigen::Vector2d grad_phi = Eigen::Vector2d::Zero();
  double p = 0;
  Eigen::Vector2d grad_p = Eigen::Vector2d::Zero();
};

GpSample sample_gp(const Model& m, int gp, const Eigen::VectorXd* u, const Eigen::VectorXd* phi,
                   const Eigen::VectorXd* p);
Eigen::Vector3d gp_strain(const Model& m, int gp, const Eigen::VectorXd& u);
double clamp01(double x);
Mat2<double> in_plane_strain(const Eigen::Vector3d& ev);

template <int N>
struct ElementContrib {
  Eigen::Matrix<double, N, 1> R;      // internal minus external
  Eigen::Matrix<double, N, N> K;
  Eigen::Matrix<double, N, 1> F_ext;
};

// psi_d_out, when given, receives the four Gauss-point crack driving energies
ElementContrib<8> element_contrib_u(const Model& m, int e, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                                    const Eigen::VectorXd& p, const std::vector<double>& bc_values,
                                    double* psi_d_out = nullptr);

// H holds the four Gauss-point history values used by the crack driving term
ElementContrib<4> element_contrib_phi(const Model& m, int e, const Eigen::VectorXd& phi, const double* H,
                                      const Eigen::VectorXd& phi_prev);

struct FlowInputs {
  const Eigen::VectorXd* p = nullptr;
  const Eigen::VectorXd* p_n = nullptr;
  const Eigen::VectorXd* phi = nullptr;
  const Eigen::VectorXd* u = nullptr;      // strain for the opening and the rate
  const std::vector<double>* eps_vol_n = nullptr;
  const std::vector<double>* eps_vol_rate = nullptr;  // when set, overrides the rate from u
  const std::vector<std::optional<Eigen::Vector2d>>* normals = nullptr;
  double dt = 1;
};

ElementContrib<4> element_contrib_p(const Model& m, int e, const FlowInputs& in, const std::vector<double>& bc_values);

// crack normals for every Gauss point from a nodal phase field
std::vector<std::optional<Eigen::Vector2d>> gauss_normals(const Model& m, const Eigen::VectorXd& phi);

struct GpFluid {
  Mat2<double> K;
  double alpha = 0, n_p = 0, chi_r = 1, storage = 0;
};
GpFluid gp_fluid(const Model& m, double phi, const std::optional<Eigen::Vector2d>& n, const Eigen::Vector3d& strain,
                 double h_e);

// sparse block with a fixed pattern over the free dofs of one field
class BlockSystem {
 public:
  BlockSystem() = default;
  BlockSystem(const Model& m, Field f);

  Field field() const { return field_; }
  int num_free() const { return nfree_; }
  const std::vector<int>& equation() const { return eq_; }
  const std::vector<char>& constrained() const { return fixed_; }

  template <int N>
  void assemble(const std::vector<ElementContrib<N>>& contribs);

  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd R;      // all dofs
  Eigen::VectorXd F_ext;  // all dofs

  Eigen::VectorXd free_residual() const;
  double residual_norm() const;
  double reference_norm() const;

 private:
  Field field_ = Field::u;
  int nfree_ = 0;
  int per_node_ = 1;
  std::vector<int> eq_;
  std::vector<char> fixed_;
  std::vector<std::vector<int>> elem_dofs_;
  std::vector<std::vector<int>> value_index_;
};

}  // namespace hydrofrac
