#include "hydrofrac/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hydrofrac/solver.hpp"

namespace hydrofrac {

namespace {

using LD = long double;

const SplitKind kSplits[] = {SplitKind::none, SplitKind::voldev, SplitKind::spectral, SplitKind::no_tension,
                             SplitKind::drucker_prager};

MaterialParams oracle_rock(double B) {
  return MaterialParams::from_engineering(50e9, 0.25, 100.0, 0.1, CrackModel::AT2, B);
}

LD psi0(const Mat3<LD>& e, const MaterialParams& m) {
  const LD tr = e.trace();
  return LD(m.lambda) / 2 * tr * tr + LD(m.mu) * e.cwiseProduct(e).sum();
}

LD degraded(const Vec3<LD>& ev, LD phi, SplitKind k, const MaterialParams& m) {
  const auto s = stored_part<LD>(plane_strain(ev), k, m);
  return degradation(phi, m.kappa).v * s.psi_d + s.psi_s;
}

// relative distance of a strain from the kinks of a split, where finite differences straddle branches
LD kink_distance(const Vec3<LD>& ev, SplitKind k, const MaterialParams& m) {
  const Mat3<LD> e = plane_strain(ev);
  const LD n = ev.norm();
  const LD I1 = e.trace();
  const LD s = std::sqrt(j2_invariant(e));
  const auto pr = principal_decomposition(e);
  switch (k) {
    case SplitKind::voldev:
      return std::abs(I1) / n;
    case SplitKind::spectral: {
      LD d = std::abs(I1) / n;
      for (int i = 0; i < 3; ++i)
        if (pr.values(i) != 0) d = std::min(d, std::abs(pr.values(i)) / n);
      return d;
    }
    case SplitKind::no_tension: {
      const LD nu = m.nu, e1 = pr.values(0), e2 = pr.values(1), e3 = pr.values(2);
      return std::min({std::abs(e1) + (e1 == 0 ? LD(1) : LD(0)), std::abs(e2 + nu * e1),
                       std::abs((1 - nu) * e3 + nu * (e1 + e2))}) /
             n;
    }
    case SplitKind::drucker_prager:
      return std::min(std::abs(I1 + 6 * LD(m.B) * s), std::abs(2 * LD(m.mu) * s - 3 * LD(m.B) * LD(m.K) * I1) /
                                                          (3 * LD(m.K))) /
             n;
    default:
      return 1;
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

VerifyResult verify_split_oracles(int samples, unsigned seed) {
  VerifyResult r;
  r.name = "split oracles";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3), u01(0, 1);
  double worst_energy = 0, worst_stress = 0, worst_tangent = 0, worst_dp = 0;
  const auto m = oracle_rock(-0.2);
  for (auto k : kSplits) {
    for (int t = 0; t < samples;) {
      const Vec3<LD> ev(d(rng), d(rng), d(rng));
      const LD phi = u01(rng);
      const auto sp = stored_part<LD>(plane_strain(ev), k, m);
      const LD p0 = psi0(plane_strain(ev), m);
      worst_energy = std::max(worst_energy, double(std::abs(sp.psi_d + sp.psi_s - p0) / p0));
      if (kink_distance(ev, k, m) < 1e-4) continue;
      const auto ev_out = evaluate_split<LD>(plane_strain(ev), phi, k, m);
      const LD h = LD(1e-7) * ev.norm();
      Vec3<LD> fs;
      Mat3<LD> fc;
      for (int a = 0; a < 3; ++a) {
        Vec3<LD> p = ev, q = ev;
        p(a) += h;
        q(a) -= h;
        fs(a) = (degraded(p, phi, k, m) - degraded(q, phi, k, m)) / (2 * h);
        fc.col(a) = (evaluate_split<LD>(plane_strain(p), phi, k, m).sigma_eff -
                     evaluate_split<LD>(plane_strain(q), phi, k, m).sigma_eff) /
                    (2 * h);
      }
      worst_stress = std::max(worst_stress, double((ev_out.sigma_eff - fs).norm() / fs.norm()));
      worst_tangent = std::max(worst_tangent, double((ev_out.tangent - fc).norm() / fc.norm()));
      ++t;
    }
  }
  const auto m0 = oracle_rock(0.0);
  for (int t = 0; t < samples; ++t) {
    const Vec3<double> ev(d(rng), d(rng), d(rng));
    const double phi = u01(rng);
    const auto a = evaluate_split(plane_strain(ev), phi, SplitKind::drucker_prager, m0);
    const auto b = evaluate_split(plane_strain(ev), phi, SplitKind::voldev, m0);
    const double scale = a.psi_d + a.psi_s;
    worst_dp = std::max({worst_dp, std::abs(a.psi_d - b.psi_d) / scale, std::abs(a.psi_s - b.psi_s) / scale,
                         (a.sigma_eff - b.sigma_eff).norm() / b.sigma_eff.norm(),
                         (a.tangent - b.tangent).norm() / b.tangent.norm()});
  }
  r.pass = worst_energy <= 1e-10 && worst_stress <= 1e-5 && worst_tangent <= 1e-5 && worst_dp <= 1e-12;
  r.detail = "energy " + fmt_double(worst_energy) + " (1e-10), stress " + fmt_double(worst_stress) +
             " (1e-5), tangent " + fmt_double(worst_tangent) + " (1e-5), DP(B=0) vs voldev " + fmt_double(worst_dp) +
             " (1e-12)";
  return r;
}

VerifyResult verify_drucker_prager_regions(int samples, unsigned seed) {
  VerifyResult r;
  r.name = "Drucker-Prager regions";
  const auto m = oracle_rock(-0.2);
  const double B = m.B, K = m.K, mu = m.mu;
  // e = I1/3 I + s D with J2(D) = 1
  Mat3<double> D = Mat3<double>::Zero();
  D(0, 0) = 1;
  D(1, 1) = -1;
  auto strain = [&](double I1, double s) -> Mat3<double> {
    return I1 / 3 * Mat3<double>::Identity() + s * D;
  };
  auto expected = [&](double I1, double s) {
    if (-6 * B * s < I1) return int(kFracture);
    if (2 * mu * s >= 3 * B * K * I1) return int(kFrictional);
    return int(kElastic);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0, M_PI);
  int mismatches = 0, counted = 0;
  for (int t = 0; t < samples; ++t) {
    const double th = ang(rng);
    const double I1 = 1e-3 * std::cos(th), s = 1e-3 * std::sin(th);
    // exclude points within rounding of a boundary line
    const double g1 = std::abs(I1 + 6 * B * s), g2 = std::abs(2 * mu * s - 3 * B * K * I1) / (3 * K);
    if (std::min(g1, g2) < 1e-12) continue;
    ++counted;
    if (stored_part(strain(I1, s), SplitKind::drucker_prager, m).region != expected(I1, s)) ++mismatches;
  }
  // continuity across each boundary ray
  double worst = 0;
  const double boundary_dirs[][2] = {{-6 * B, 1}, {2 * mu / (3 * B * K), 1}};
  for (const auto& bd : boundary_dirs) {
    const Eigen::Vector2d dir = Eigen::Vector2d(bd[0], bd[1]).normalized();
    const Eigen::Vector2d nrm(-dir.y(), dir.x());
    for (double scale : {1e-4, 1e-3, 1e-2}) {
      const Eigen::Vector2d on = scale * dir;
      const double eps = 1e-10 * scale;
      const Eigen::Vector2d a = on + eps * nrm, b = on - eps * nrm;
      const auto pa = stored_part(strain(a.x(), a.y()), SplitKind::drucker_prager, m);
      const auto pb = stored_part(strain(b.x(), b.y()), SplitKind::drucker_prager, m);
      const double ref = pa.psi_d + pa.psi_s;
      worst = std::max({worst, std::abs(pa.psi_d - pb.psi_d) / ref, std::abs(pa.psi_s - pb.psi_s) / ref});
      if (pa.region == pb.region) ++mismatches;  // the pair must straddle the boundary
    }
  }
  r.pass = mismatches == 0 && worst <= 1e-8;
  r.detail = std::to_string(counted) + " samples, " + std::to_string(mismatches) +
             " misclassified, energy jump " + fmt_double(worst) + " (1e-8)";
  return r;
}

VerifyResult verify_darcy_column() {
  VerifyResult r;
  r.name = "steady Darcy column";
  Model m;
  const double H = 2;
  m.mesh = build_structured_mesh(0.1, H, 1, 20);
  m.mat = MaterialParams::from_engineering(1e9, 0.25, 1, 0.1);
  m.fluid.alpha_r = 0;
  m.fluid.n_pr = 0;
  m.fluid.K_r = 1e-12;
  m.fluid.coupling = Coupling::domain_decomposition;
  m.bcs.push_back(boundary_set(m.mesh, "fix_x", BcField::ux, Box{0, 0.1, 0, H}));
  m.bcs.push_back(boundary_set(m.mesh, "fix_y", BcField::uy, Box{0, 0.1, 0, H}));
  m.bcs.push_back(boundary_set(m.mesh, "bottom", BcField::p, Box{0, 0.1, 0, 0}));
  m.bcs.push_back(boundary_set(m.mesh, "top", BcField::p, Box{0, 0.1, H, H}));
  m.finalize();
  SolverSettings st;
  st.scheme = Scheme::monolithic;
  st.tol = 1e-12;
  st.dt = 1;
  Solver solver(m, st);
  State s = State::zeros(m);
  const double p_bot = 3e5, p_top = 1e5;
  solver.advance(s, [&](double) { return std::vector<double>{0, 0, p_bot, p_top}; }, 1);
  double worst = 0;
  for (int n = 0; n < m.mesh.num_nodes(); ++n) {
    const double want = p_bot + (p_top - p_bot) * m.mesh.nodes[n].y() / H;
    worst = std::max(worst, std::abs(s.p(n) - want) / (p_bot - p_top));
  }
  r.pass = worst <= 1e-8;
  r.detail = "max relative error " + fmt_double(worst) + " (1e-8)";
  return r;
}

VerifyResult verify_consolidation() {
  VerifyResult r;
  r.name = "consolidation series";
  const double height = 1, width = 0.05, load = 1e5, alpha = 0.5, n_p = 0.2, C_fl = 1e-8, K = 1e-12, mu_fl = 1e-3;
  Model m;
  m.mesh = build_structured_mesh(width, height, 1, 40);
  m.mat = MaterialParams::from_engineering(1e8, 0.25, 1, 0.1);
  // block iterations without coupling blocks need alpha^2 / (Mv S) < 1
  m.fluid.alpha_r = alpha;
  m.fluid.n_pr = n_p;
  m.fluid.C_fl = C_fl;
  m.fluid.K_r = K;
  m.fluid.mu_fl = mu_fl;
  m.fluid.coupling = Coupling::domain_decomposition;
  m.bcs.push_back(boundary_set(m.mesh, "sides", BcField::ux, Box{0, width, 0, height}));
  m.bcs.push_back(boundary_set(m.mesh, "base", BcField::uy, Box{0, width, 0, 0}));
  m.bcs.push_back(boundary_set(m.mesh, "drain", BcField::p, Box{0, width, height, height}));
  m.bcs.push_back(boundary_set(m.mesh, "load", BcField::ty, Box{0, width, height, height}));
  m.bcs.push_back(boundary_set(m.mesh, "intact", BcField::phi, Box{0, width, 0, height}));
  m.finalize();
  const double Mv = m.mat.lambda + 2 * m.mat.mu;
  const double S = storage_coefficient(alpha, n_p, m.mat.K, C_fl);
  const double p0 = alpha * load / (Mv * S + alpha * alpha);
  const double cv = (K / mu_fl) / (S + alpha * alpha / Mv);
  const double T = height * height / cv;
  auto exact = [&](double z, double t) {
    double p = 0;
    for (int k = 0; k < 400; ++k) {
      const double M = M_PI * (2 * k + 1) / 2;
      p += 2 * p0 / M * std::sin(M * z / height) * std::exp(-M * M * t / T);
    }
    return p;
  };
  const LoadFn loads = [&](double t) { return std::vector<double>{0, 0, 0, t > 0 ? -load : 0.0, 0}; };
  SolverSettings st;
  st.scheme = Scheme::monolithic;
  st.tol = 1e-10;
  st.dt = 1e-6 * T;
  Solver solver(m, st);
  State s = State::zeros(m);
  solver.advance(s, loads, st.dt);
  solver.settings().dt = 1e-3 * T;
  r.pass = true;
  for (double tv : {0.05, 0.2, 0.5}) {
    solver.advance(s, loads, tv * T);
    double num = 0, den = 0;
    for (int n = 0; n < m.mesh.num_nodes(); ++n) {
      const double want = exact(height - m.mesh.nodes[n].y(), s.time);
      num += (s.p(n) - want) * (s.p(n) - want);
      den += want * want;
    }
    const double err = std::sqrt(num / den);
    r.pass = r.pass && err <= 0.01;
    r.detail += (r.detail.empty() ? "" : ", ") + std::string("Tv ") + fmt_double(tv) + ": L2 " + fmt_double(err);
  }
  r.detail += " (0.01)";
  return r;
}

std::vector<VerifyResult> verify_all() {
  return {verify_split_oracles(), verify_drucker_prager_regions(), verify_darcy_column(), verify_consolidation()};
}

}  // namespace hydrofrac
