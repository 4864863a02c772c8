#include "hydrofrac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hydrofrac {

Scheme parse_scheme(const std::string& s) {
  if (s == "monolithic") return Scheme::monolithic;
  if (s == "single_pass_staggered") return Scheme::single_pass_staggered;
  if (s == "multi_pass_staggered") return Scheme::multi_pass_staggered;
  if (s == "mixed_monolithic") return Scheme::mixed_monolithic;
  if (s == "mixed_staggered") return Scheme::mixed_staggered;
  throw InvalidArgument("unknown scheme '" + s + "'");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::monolithic: return "monolithic";
    case Scheme::single_pass_staggered: return "single_pass_staggered";
    case Scheme::multi_pass_staggered: return "multi_pass_staggered";
    case Scheme::mixed_monolithic: return "mixed_monolithic";
    case Scheme::mixed_staggered: return "mixed_staggered";
  }
  return "?";
}

void SolverSettings::validate() const {
  if (!(tol > 0)) throw InvalidArgument("solver: tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("solver: max_iter must be at least 1");
  if (!(dt > 0)) throw InvalidArgument("solver: dt must be positive");
  if (max_halvings < 0) throw InvalidArgument("solver: max_halvings must be non-negative");
}

namespace {

double backward_error(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double r = (A * x - b).norm();
  double anorm = 0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double col = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) col += std::abs(it.value());
    anorm = std::max(anorm, col);
  }
  const double scale = b.norm() + anorm * x.norm();
  return scale == 0 ? 0 : r / scale;
}

constexpr double kLinearTol = 1e-10;

Eigen::VectorXd lu_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, double* err) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    *err = INFINITY;
    return Eigen::VectorXd();
  }
  Eigen::VectorXd x = lu.solve(b);
  *err = x.allFinite() ? backward_error(A, x, b) : INFINITY;
  return x;
}

}  // namespace

Eigen::VectorXd LinearSolver::solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  if (A.rows() == 0) return Eigen::VectorXd();
  if (!analyzed_) {
    ldlt_.analyzePattern(A);
    analyzed_ = true;
  }
  ldlt_.factorize(A);
  if (ldlt_.info() == Eigen::Success) {
    Eigen::VectorXd x = ldlt_.solve(b);
    if (x.allFinite()) {
      if (backward_error(A, x, b) <= kLinearTol) return x;
      x += ldlt_.solve(b - A * x);
      if (x.allFinite() && backward_error(A, x, b) <= kLinearTol) return x;
    }
  }
  double err = 0;
  Eigen::VectorXd x = lu_solve(A, b, &err);
  if (err <= kLinearTol) return x;
  std::ostringstream msg;
  msg << "linear solve failed: n = " << A.rows() << ", backward error " << err;
  throw SolverFailure(msg.str());
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw InvalidArgument("solve_linear: dimension mismatch");
  LinearSolver s;
  return s.solve(A, b);
}

void enforce_irreversibility(State& s, const Model& m, const State& prev, double dt) {
  for (int i = 0; i < s.phi.size(); ++i) s.phi(i) = clamp01(s.phi(i));
  const int ng = m.mesh.num_gauss();
  for (int g = 0; g < ng; ++g) {
    const Eigen::Vector3d e = gp_strain(m, g, s.u);
    const double psi = stored_part<double>(plane_strain<double>(e), m.split, m.mat).psi_d;
    s.psi_d[g] = psi;
    // AT1 relies on the penalty alone, so its driving energy follows the current state
    if (m.mat.model == CrackModel::AT1)
      s.H[g] = m.crack_gp[g] ? std::max(psi, m.crack_seed()) : psi;
    else
      s.H[g] = update_history(psi, prev.H[g]);
    const double ev = e(0) + e(1);
    s.eps_vol_rate[g] = (ev - prev.eps_vol[g]) / dt;
    s.eps_vol[g] = ev;
  }
}

Solver::Solver(const Model& m, SolverSettings settings)
    : m_(m),
      settings_(settings),
      sys_u_(m, Field::u),
      sys_phi_(m, Field::phi),
      sys_p_(m, Field::p) {
  settings_.validate();
}

void Solver::apply_dirichlet(State& s, const std::vector<double>& values) const {
  if (values.size() != m_.bcs.size()) throw InvalidArgument("apply_dirichlet: one value per boundary set expected");
  for (size_t b = 0; b < m_.bcs.size(); ++b) {
    const auto& bc = m_.bcs[b];
    for (int n : bc.nodes) {
      switch (bc.field) {
        case BcField::ux: s.u(2 * n) = values[b]; break;
        case BcField::uy: s.u(2 * n + 1) = values[b]; break;
        case BcField::p: s.p(n) = values[b]; break;
        case BcField::phi: s.phi(n) = values[b]; break;
        default: break;
      }
    }
  }
  for (int n : m_.crack_nodes) s.phi(n) = 1;
}

namespace {

void scatter(Eigen::VectorXd& x, const BlockSystem& sys, const Eigen::VectorXd& dx) {
  const auto& eq = sys.equation();
  for (int d = 0; d < static_cast<int>(eq.size()); ++d)
    if (eq[d] >= 0) x(d) += dx(eq[d]);
}

}  // namespace

IncrementReport Solver::newton_increment(State& state, const LoadFn& loads, double dt) {
  if (!(dt > 0)) throw InvalidArgument("newton_increment: dt must be positive");
  const Scheme sc = settings_.scheme;
  const bool single = sc == Scheme::single_pass_staggered;
  const bool multi = sc == Scheme::multi_pass_staggered;
  const bool mono = sc == Scheme::monolithic;
  const bool mixed = sc == Scheme::mixed_monolithic || sc == Scheme::mixed_staggered;
  const bool H_current = mono || sc == Scheme::mixed_monolithic;
  const bool at1 = m_.mat.model == CrackModel::AT1;

  IncrementReport rep;
  rep.dt = dt;
  rep.time = state.time + dt;
  const std::vector<double> vals = loads(rep.time);
  State x = state;
  x.time = rep.time;
  apply_dirichlet(x, vals);

  const int ne = m_.mesh.num_elements();
  const int ng = m_.mesh.num_gauss();
  Eigen::VectorXd u_lag = x.u, phi_lag = x.phi, p_lag = x.p;
  std::vector<double> psi_cur(ng, 0), psi_lag(ng, 0), H(ng, 0);
  std::vector<ElementContrib<8>> cu(ne);
  std::vector<ElementContrib<4>> cphi(ne), cp(ne);

  Eigen::VectorXd normals_phi;
  std::vector<std::optional<Eigen::Vector2d>> normals;
  auto assemble_p = [&](const Eigen::VectorXd& u_arg, const Eigen::VectorXd& phi_arg) {
    if (normals_phi.size() != phi_arg.size() || normals_phi != phi_arg) {
      normals = gauss_normals(m_, phi_arg);
      normals_phi = phi_arg;
    }
    FlowInputs in;
    in.p = &x.p;
    in.p_n = &state.p;
    in.phi = &phi_arg;
    in.u = &u_arg;
    in.eps_vol_n = &state.eps_vol;
    in.eps_vol_rate = single ? &state.eps_vol_rate : nullptr;
    in.normals = &normals;
    in.dt = dt;
    for (int e = 0; e < ne; ++e) cp[e] = element_contrib_p(m_, e, in, vals);
    sys_p_.assemble(cp);
  };

  // lagged arguments are refreshed before accepting so the converged state is judged on its own values
  auto stale = [&]() {
    if (multi) return u_lag != x.u || phi_lag != x.phi || p_lag != x.p;
    if (mixed) return p_lag != x.p;
    return false;
  };
  for (int k = 0;; ++k) {
    const BlockSystem* systems[3] = {&sys_u_, &sys_phi_, &sys_p_};
    std::array<bool, 3> ok{};
    bool finite = true;
    for (bool refreshed = false;; refreshed = true) {
      const Eigen::VectorXd& phi_u = single ? state.phi : (multi ? phi_lag : x.phi);
      const Eigen::VectorXd& p_u = single ? state.p : (mono ? x.p : p_lag);
      for (int e = 0; e < ne; ++e) cu[e] = element_contrib_u(m_, e, x.u, phi_u, p_u, vals, &psi_cur[4 * e]);
      sys_u_.assemble(cu);
      if (k == 0 && !refreshed) psi_lag = psi_cur;

      for (int g = 0; g < ng; ++g) {
        H[g] = state.H[g];
        const double* psi = H_current ? &psi_cur[g] : (multi ? &psi_lag[g] : nullptr);
        if (psi) H[g] = at1 ? *psi : std::max(H[g], *psi);
        if (at1 && m_.crack_gp[g]) H[g] = std::max(H[g], m_.crack_seed());
      }
      for (int e = 0; e < ne; ++e) cphi[e] = element_contrib_phi(m_, e, x.phi, &H[4 * e], state.phi);
      sys_phi_.assemble(cphi);

      if (single)
        assemble_p(state.u, state.phi);
      else if (multi)
        assemble_p(u_lag, phi_lag);
      else
        assemble_p(x.u, x.phi);

      finite = true;
      for (int f = 0; f < 3; ++f) {
        rep.residual[f] = systems[f]->residual_norm();
        rep.reference[f] = systems[f]->reference_norm();
        ok[f] = rep.residual[f] <= settings_.tol * std::max(rep.reference[f], 1.0);
        finite = finite && std::isfinite(rep.residual[f]);
      }
      if (refreshed || !(ok[0] && ok[1] && ok[2]) || !stale()) break;
      u_lag = x.u;
      phi_lag = x.phi;
      p_lag = x.p;
      psi_lag = psi_cur;
    }
    rep.iterations = k;
    if (ok[0] && ok[1] && ok[2] && !stale()) {
      rep.converged = true;
      rep.phi_min = x.phi.size() ? x.phi.minCoeff() : 0;
      rep.phi_max = x.phi.size() ? x.phi.maxCoeff() : 0;
      enforce_irreversibility(x, m_, state, dt);
      state = std::move(x);
      return rep;
    }
    if (!finite || k >= settings_.max_iter) return rep;

    u_lag = x.u;
    phi_lag = x.phi;
    p_lag = x.p;
    psi_lag = psi_cur;
    try {
      if (!ok[0]) scatter(x.u, sys_u_, lin_u_.solve(sys_u_.K, -sys_u_.free_residual()));
      if (!ok[1]) scatter(x.phi, sys_phi_, lin_phi_.solve(sys_phi_.K, -sys_phi_.free_residual()));
      if (mixed) {
        assemble_p(x.u, x.phi);
        if (sys_p_.residual_norm() > settings_.tol * std::max(sys_p_.reference_norm(), 1.0))
          scatter(x.p, sys_p_, lin_p_.solve(sys_p_.K, -sys_p_.free_residual()));
      } else if (!ok[2]) {
        scatter(x.p, sys_p_, lin_p_.solve(sys_p_.K, -sys_p_.free_residual()));
      }
    } catch (const SolverFailure&) {
      return rep;
    }
  }
}

void Solver::try_interval(State& state, const LoadFn& loads, double dt, int depth, const AcceptFn& on_accept) {
  const IncrementReport rep = newton_increment(state, loads, dt);
  if (rep.converged) {
    if (on_accept) on_accept(state, rep);
    return;
  }
  if (depth >= settings_.max_halvings) {
    std::ostringstream msg;
    msg << "increment to t = " << rep.time << " did not converge after " << depth
        << " halvings (residuals u " << rep.residual[0] << ", phi " << rep.residual[1] << ", p " << rep.residual[2]
        << ")";
    throw SolverFailure(msg.str());
  }
  try_interval(state, loads, dt / 2, depth + 1, on_accept);
  try_interval(state, loads, dt / 2, depth + 1, on_accept);
}

void Solver::advance(State& state, const LoadFn& loads, double t_end, const AcceptFn& on_accept) {
  const double eps = 1e-9 * std::max(1.0, std::abs(t_end));
  while (state.time < t_end - eps) {
    double dt = std::min(settings_.dt, t_end - state.time);
    if (t_end - state.time - dt < eps) dt = t_end - state.time;
    try_interval(state, loads, dt, 0, on_accept);
  }
}

}  // namespace hydrofrac
