#include "hydrofrac/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "hydrofrac/crack_normal.hpp"

namespace hydrofrac {

BcField parse_bc_field(const std::string& s) {
  static const std::pair<const char*, BcField> table[] = {
      {"ux", BcField::ux},   {"uy", BcField::uy},           {"p", BcField::p},
      {"phi", BcField::phi}, {"tx", BcField::tx},           {"ty", BcField::ty},
      {"pressure", BcField::pressure}, {"flux", BcField::flux}, {"source", BcField::source}};
  for (const auto& [name, f] : table)
    if (s == name) return f;
  throw InvalidArgument("unknown boundary field '" + s + "'");
}

std::string to_string(BcField f) {
  switch (f) {
    case BcField::ux: return "ux";
    case BcField::uy: return "uy";
    case BcField::p: return "p";
    case BcField::phi: return "phi";
    case BcField::tx: return "tx";
    case BcField::ty: return "ty";
    case BcField::pressure: return "pressure";
    case BcField::flux: return "flux";
    case BcField::source: return "source";
  }
  return "?";
}

bool is_dirichlet(BcField f) {
  return f == BcField::ux || f == BcField::uy || f == BcField::p || f == BcField::phi;
}

BoundarySet boundary_set(const Mesh& mesh, std::string name, BcField field, const Box& box) {
  BoundarySet b;
  b.name = std::move(name);
  b.field = field;
  if (is_dirichlet(field))
    b.nodes = nodes_in(mesh, box);
  else if (field == BcField::source)
    b.elements = elements_in(mesh, box);
  else
    b.edges = boundary_edges_in(mesh, box);
  return b;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

Mat2<double> in_plane_strain(const Eigen::Vector3d& ev) {
  Mat2<double> e;
  e << ev(0), ev(2) / 2, ev(2) / 2, ev(1);
  return e;
}

void Model::finalize() {
  mat.validate();
  fluid.validate();
  const int ng = mesh.num_gauss();
  gp_shape.resize(ng);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int q = 0; q < 4; ++q) gp_shape[4 * e + q] = gauss_eval(mesh, e, q);
  if (crack_gp.empty()) crack_gp.assign(ng, 0);
  if (static_cast<int>(crack_gp.size()) != ng) throw InvalidArgument("model: crack seed size does not match the mesh");
  element_edges.assign(mesh.num_elements(), {});
  element_sources.assign(mesh.num_elements(), {});
  for (int b = 0; b < static_cast<int>(bcs.size()); ++b) {
    const auto& bc = bcs[b];
    for (int n : bc.nodes)
      if (n < 0 || n >= mesh.num_nodes()) throw InvalidArgument("model: bc '" + bc.name + "' node out of range");
    for (const auto& ed : bc.edges) {
      if (ed.element < 0 || ed.element >= mesh.num_elements() || ed.local < 0 || ed.local > 3)
        throw InvalidArgument("model: bc '" + bc.name + "' edge out of range");
      element_edges[ed.element].emplace_back(b, ed.local);
    }
    for (int e : bc.elements) {
      if (e < 0 || e >= mesh.num_elements()) throw InvalidArgument("model: bc '" + bc.name + "' element out of range");
      element_sources[e].push_back(b);
    }
  }
}

double Model::gamma() const {
  if (penalty_gamma > 0) return penalty_gamma;
  const double tol_ir = 1e-2;
  return 27 * mat.Gc / (64 * mat.ell * tol_ir * tol_ir);
}

std::vector<int> Model::constraint_sources(Field f) const {
  std::vector<int> src(num_dofs(f), -1);
  for (int b = 0; b < static_cast<int>(bcs.size()); ++b) {
    const auto& bc = bcs[b];
    for (int n : bc.nodes) {
      if (f == Field::u && bc.field == BcField::ux) src[2 * n] = b;
      if (f == Field::u && bc.field == BcField::uy) src[2 * n + 1] = b;
      if (f == Field::p && bc.field == BcField::p) src[n] = b;
      if (f == Field::phi && bc.field == BcField::phi) src[n] = b;
    }
  }
  if (f == Field::phi)
    for (int n : crack_nodes) src[n] = -2;
  return src;
}

State State::zeros(const Model& m) {
  State s;
  s.u = Eigen::VectorXd::Zero(2 * m.mesh.num_nodes());
  s.phi = Eigen::VectorXd::Zero(m.mesh.num_nodes());
  s.p = Eigen::VectorXd::Zero(m.mesh.num_nodes());
  const int ng = m.mesh.num_gauss();
  s.H.assign(ng, 0);
  s.eps_vol.assign(ng, 0);
  s.eps_vol_rate.assign(ng, 0);
  s.psi_d.assign(ng, 0);
  const double seed = m.crack_seed();
  for (int g = 0; g < ng; ++g)
    if (m.crack_gp[g]) s.H[g] = seed;
  for (int n : m.crack_nodes) s.phi(n) = 1;
  return s;
}

Eigen::Vector3d gp_strain(const Model& m, int gp, const Eigen::VectorXd& u) {
  const auto& el = m.mesh.elements[gp / 4];
  const auto& se = m.gp_shape[gp];
  Eigen::Vector3d ev = Eigen::Vector3d::Zero();
  for (int a = 0; a < 4; ++a) {
    const double ux = u(2 * el[a]), uy = u(2 * el[a] + 1);
    ev(0) += se.dNdx(a, 0) * ux;
    ev(1) += se.dNdx(a, 1) * uy;
    ev(2) += se.dNdx(a, 1) * ux + se.dNdx(a, 0) * uy;
  }
  return ev;
}

GpSample sample_gp(const Model& m, int gp, const Eigen::VectorXd* u, const Eigen::VectorXd* phi,
                   const Eigen::VectorXd* p) {
  const auto& el = m.mesh.elements[gp / 4];
  const auto& se = m.gp_shape[gp];
  GpSample s;
  s.strain = u ? gp_strain(m, gp, *u) : Eigen::Vector3d::Zero();
  for (int a = 0; a < 4; ++a) {
    if (phi) {
      s.phi += se.N(a) * (*phi)(el[a]);
      s.grad_phi += se.dNdx.row(a).transpose() * (*phi)(el[a]);
    }
    if (p) {
      s.p += se.N(a) * (*p)(el[a]);
      s.grad_p += se.dNdx.row(a).transpose() * (*p)(el[a]);
    }
  }
  return s;
}

GpFluid gp_fluid(const Model& m, double phi, const std::optional<Eigen::Vector2d>& n, const Eigen::Vector3d& strain,
                 double h_e) {
  GpFluid f;
  const auto bp = biot_porosity(phi, m.fluid);
  f.alpha = bp.alpha;
  f.n_p = bp.n_p;
  f.chi_r = m.fluid.coupling == Coupling::modified_darcy ? 1.0 : indicator_functions(phi, m.fluid.c1, m.fluid.c2).chi_r;
  f.storage = storage_coefficient(f.alpha, f.n_p, m.mat.K, m.fluid.C_fl);
  f.K = permeability<double>(phi, n, in_plane_strain(strain), h_e, m.fluid);
  return f;
}

namespace {

struct EdgeGauss {
  double s[2];
  double w[2];
};

const EdgeGauss& edge_rule() {
  static const double g = 0.57735026918962576451;
  static const EdgeGauss r{{0.5 - 0.5 * g, 0.5 + 0.5 * g}, {0.5, 0.5}};
  return r;
}

}  // namespace

ElementContrib<8> element_contrib_u(const Model& m, int e, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
                                    const Eigen::VectorXd& p, const std::vector<double>& bc_values,
                                    double* psi_d_out) {
  ElementContrib<8> c;
  c.R.setZero();
  c.K.setZero();
  c.F_ext.setZero();
  const auto& el = m.mesh.elements[e];
  Eigen::Matrix<double, 8, 1> ue;
  for (int a = 0; a < 4; ++a) {
    ue(2 * a) = u(2 * el[a]);
    ue(2 * a + 1) = u(2 * el[a] + 1);
  }
  const bool body = m.body_force.squaredNorm() > 0;
  for (int q = 0; q < 4; ++q) {
    const auto& se = m.gp_shape[4 * e + q];
    const double dv = se.detJ * se.weight;
    const auto B = b_matrix_u(se);
    const Eigen::Vector3d strain = B * ue;
    double ph = 0, pq = 0;
    for (int a = 0; a < 4; ++a) {
      ph += se.N(a) * phi(el[a]);
      pq += se.N(a) * p(el[a]);
    }
    ph = clamp01(ph);
    const auto ev = evaluate_split<double>(plane_strain<double>(strain), ph, m.split, m.mat);
    if (psi_d_out) psi_d_out[q] = ev.psi_d;
    const double alpha = biot_porosity(ph, m.fluid).alpha;
    Eigen::Vector3d sig = ev.sigma_eff;
    sig(0) -= alpha * pq;
    sig(1) -= alpha * pq;
    c.R.noalias() += dv * B.transpose() * sig;
    c.K.noalias() += dv * B.transpose() * ev.tangent * B;
    if (body)
      for (int a = 0; a < 4; ++a) c.F_ext.segment<2>(2 * a) += dv * se.N(a) * m.body_force;
  }
  const auto& er = edge_rule();
  for (const auto& [b, a] : m.element_edges[e]) {
    const auto& bc = m.bcs[b];
    const int a2 = (a + 1) % 4;
    const Eigen::Vector2d d = m.mesh.nodes[el[a2]] - m.mesh.nodes[el[a]];
    const double L = d.norm();
    const Eigen::Vector2d nrm(d.y() / L, -d.x() / L);
    Eigen::Vector2d t = Eigen::Vector2d::Zero();
    const double v = bc_values[b];
    if (bc.field == BcField::tx)
      t.x() = v;
    else if (bc.field == BcField::ty)
      t.y() = v;
    else if (bc.field == BcField::pressure)
      t = -v * nrm;
    else
      continue;
    for (int k = 0; k < 2; ++k) {
      const double w = er.w[k] * L;
      c.F_ext.segment<2>(2 * a) += w * (1 - er.s[k]) * t;
      c.F_ext.segment<2>(2 * a2) += w * er.s[k] * t;
    }
  }
  c.R -= c.F_ext;
  return c;
}

ElementContrib<4> element_contrib_phi(const Model& m, int e, const Eigen::VectorXd& phi, const double* H,
                                      const Eigen::VectorXd& phi_prev) {
  ElementContrib<4> c;
  c.R.setZero();
  c.K.setZero();
  c.F_ext.setZero();
  const auto& el = m.mesh.elements[e];
  const double cw = m.mat.c_w();
  const double lap = m.mat.ell * m.mat.Gc / (2 * cw);
  const double local = m.mat.Gc / (4 * cw * m.mat.ell);
  const bool at1 = m.mat.model == CrackModel::AT1;
  const double gamma = at1 ? m.gamma() : 0;
  for (int q = 0; q < 4; ++q) {
    const auto& se = m.gp_shape[4 * e + q];
    const double dv = se.detJ * se.weight;
    double ph = 0, ph_prev = 0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int a = 0; a < 4; ++a) {
      ph += se.N(a) * phi(el[a]);
      ph_prev += se.N(a) * phi_prev(el[a]);
      grad += se.dNdx.row(a).transpose() * phi(el[a]);
    }
    // unclamped: both crack functions are polynomials, and clamping here would break the tangent
    const auto ms = microstress<double>(ph, grad, H[q], m.mat);
    const auto g = degradation(ph, m.mat.kappa);
    const auto w = crack_function(ph, m.mat.model);
    double omega = ms.omega;
    double domega = g.d2 * H[q] + local * w.d2;
    if (at1) {
      if (ph < ph_prev) omega += gamma * (ph - ph_prev);
      if (ph <= ph_prev) domega += gamma;
    }
    c.R.noalias() += dv * (omega * se.N + se.dNdx * ms.xi);
    c.K.noalias() += dv * (domega * se.N * se.N.transpose() + lap * se.dNdx * se.dNdx.transpose());
  }
  return c;
}

ElementContrib<4> element_contrib_p(const Model& m, int e, const FlowInputs& in, const std::vector<double>& bc_values) {
  if (!(in.dt > 0)) throw InvalidArgument("element_contrib_p: dt must be positive");
  ElementContrib<4> c;
  c.R.setZero();
  c.K.setZero();
  c.F_ext.setZero();
  const auto& el = m.mesh.elements[e];
  const double rho = m.fluid.rho_fl;
  const double mob = rho / m.fluid.mu_fl;
  Eigen::Vector4d mass = Eigen::Vector4d::Zero();
  Eigen::Vector4d pe, pn;
  for (int a = 0; a < 4; ++a) {
    pe(a) = (*in.p)(el[a]);
    pn(a) = (*in.p_n)(el[a]);
  }
  for (int q = 0; q < 4; ++q) {
    const int gp = 4 * e + q;
    const auto& se = m.gp_shape[gp];
    const double dv = se.detJ * se.weight;
    double ph = 0;
    for (int a = 0; a < 4; ++a) ph += se.N(a) * (*in.phi)(el[a]);
    ph = clamp01(ph);
    const Eigen::Vector3d strain = gp_strain(m, gp, *in.u);
    const std::optional<Eigen::Vector2d> nrm = in.normals ? (*in.normals)[gp] : std::nullopt;
    const GpFluid f = gp_fluid(m, ph, nrm, strain, m.mesh.h_e[e]);
    const double rate =
        in.eps_vol_rate ? (*in.eps_vol_rate)[gp] : (strain(0) + strain(1) - (*in.eps_vol_n)[gp]) / in.dt;
    const Eigen::Vector2d grad_p = se.dNdx.transpose() * pe;
    mass += dv * rho * f.storage * se.N;
    c.R.noalias() += dv * (rho * f.alpha * f.chi_r * rate * se.N + se.dNdx * (mob * f.K * grad_p));
    c.K.noalias() += dv * se.dNdx * (mob * f.K) * se.dNdx.transpose();
    for (int b : m.element_sources[e]) c.F_ext += dv * bc_values[b] * se.N;
  }
  c.R += mass.cwiseProduct(pe - pn) / in.dt;
  c.K.diagonal() += mass / in.dt;
  const auto& er = edge_rule();
  for (const auto& [b, a] : m.element_edges[e]) {
    if (m.bcs[b].field != BcField::flux) continue;
    const int a2 = (a + 1) % 4;
    const double L = (m.mesh.nodes[el[a2]] - m.mesh.nodes[el[a]]).norm();
    for (int k = 0; k < 2; ++k) {
      const double w = er.w[k] * L * bc_values[b];
      c.F_ext(a) += w * (1 - er.s[k]);
      c.F_ext(a2) += w * er.s[k];
    }
  }
  c.R -= c.F_ext;
  return c;
}

std::vector<std::optional<Eigen::Vector2d>> gauss_normals(const Model& m, const Eigen::VectorXd& phi) {
  const int ng = m.mesh.num_gauss();
  if (m.fluid.coupling == Coupling::domain_decomposition) return std::vector<std::optional<Eigen::Vector2d>>(ng);
  std::vector<double> phi_gp(ng);
  std::vector<Eigen::Vector2d> grad_gp(ng);
  for (int g = 0; g < ng; ++g) {
    const auto s = sample_gp(m, g, nullptr, &phi, nullptr);
    phi_gp[g] = s.phi;
    grad_gp[g] = s.grad_phi;
  }
  return crack_normals(m.mesh, phi_gp, grad_gp, m.fluid.normal_threshold);
}

BlockSystem::BlockSystem(const Model& m, Field f) : field_(f) {
  per_node_ = f == Field::u ? 2 : 1;
  const auto src = m.constraint_sources(f);
  const int nd = static_cast<int>(src.size());
  eq_.assign(nd, -1);
  fixed_.assign(nd, 0);
  for (int d = 0; d < nd; ++d) {
    if (src[d] == -1)
      eq_[d] = nfree_++;
    else
      fixed_[d] = 1;
  }
  const int ne = m.mesh.num_elements();
  const int N = 4 * per_node_;
  elem_dofs_.assign(ne, std::vector<int>(N));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(ne) * N * N);
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < per_node_; ++k) elem_dofs_[e][per_node_ * a + k] = per_node_ * m.mesh.elements[e][a] + k;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const int r = eq_[elem_dofs_[e][i]], col = eq_[elem_dofs_[e][j]];
        if (r >= 0 && col >= 0) trip.emplace_back(r, col, 0.0);
      }
  }
  K.resize(nfree_, nfree_);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  value_index_.assign(ne, std::vector<int>(N * N, -1));
  const int* outer = K.outerIndexPtr();
  const int* inner = K.innerIndexPtr();
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const int r = eq_[elem_dofs_[e][i]], col = eq_[elem_dofs_[e][j]];
        if (r < 0 || col < 0) continue;
        const int* lo = inner + outer[col];
        const int* hi = inner + outer[col + 1];
        value_index_[e][i * N + j] = static_cast<int>(std::lower_bound(lo, hi, r) - inner);
      }
  R = Eigen::VectorXd::Zero(nd);
  F_ext = Eigen::VectorXd::Zero(nd);
}

template <int N>
void BlockSystem::assemble(const std::vector<ElementContrib<N>>& contribs) {
  if (static_cast<int>(contribs.size()) != static_cast<int>(elem_dofs_.size()) || N != 4 * per_node_)
    throw std::logic_error("BlockSystem::assemble: contribution layout mismatch");
  R.setZero();
  F_ext.setZero();
  double* vals = K.valuePtr();
  std::fill(vals, vals + K.nonZeros(), 0.0);
  for (size_t e = 0; e < contribs.size(); ++e) {
    const auto& c = contribs[e];
    const auto& dofs = elem_dofs_[e];
    const auto& vi = value_index_[e];
    for (int i = 0; i < N; ++i) {
      R(dofs[i]) += c.R(i);
      F_ext(dofs[i]) += c.F_ext(i);
      for (int j = 0; j < N; ++j) {
        const int k = vi[i * N + j];
        if (k >= 0) vals[k] += c.K(i, j);
      }
    }
  }
}

template void BlockSystem::assemble<4>(const std::vector<ElementContrib<4>>&);
template void BlockSystem::assemble<8>(const std::vector<ElementContrib<8>>&);

Eigen::VectorXd BlockSystem::free_residual() const {
  Eigen::VectorXd r(nfree_);
  for (int d = 0; d < static_cast<int>(eq_.size()); ++d)
    if (eq_[d] >= 0) r(eq_[d]) = R(d);
  return r;
}

double BlockSystem::residual_norm() const { return free_residual().norm(); }

double BlockSystem::reference_norm() const {
  double s = 0;
  for (int d = 0; d < static_cast<int>(eq_.size()); ++d) s += fixed_[d] ? R(d) * R(d) : F_ext(d) * F_ext(d);
  return std::sqrt(s);
}

}  // namespace hydrofrac
