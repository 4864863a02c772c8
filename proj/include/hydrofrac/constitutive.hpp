#pragma once

#include <cmath>
#include <string>

#include "hydrofrac/errors.hpp"
#include "hydrofrac/tensor.hpp"

namespace hydrofrac {

enum class CrackModel { AT1, AT2 };
enum class SplitKind { none, voldev, spectral, no_tension, drucker_prager };

SplitKind parse_split_kind(const std::string& s);
std::string to_string(SplitKind k);
CrackModel parse_crack_model(const std::string& s);
std::string to_string(CrackModel m);

struct MaterialParams {
  double E = 0;
  double nu = 0;
  double K = 0;
  double mu = 0;
  double lambda = 0;
  double Gc = 0;
  double ell = 0;
  double kappa = 1e-7;
  CrackModel model = CrackModel::AT2;
  double beta_f = 0;
  // signed; the printed region conditions need B < 0 for a frictional cone
  double B = 0;

  static MaterialParams from_engineering(double E, double nu, double Gc, double ell,
                                         CrackModel model = CrackModel::AT2, double B = 0);
  double c_w() const { return model == CrackModel::AT2 ? 0.5 : 2.0 / 3.0; }
  void validate() const;
};

template <class S>
struct Scalar3 {
  S v, d1, d2;
};

template <class S>
Scalar3<S> degradation(S phi, double kappa = 1e-7) {
  const S one_m = S(1) - phi;
  return {one_m * one_m + S(kappa), -2 * one_m, S(2)};
}

template <class S>
Scalar3<S> crack_function(S phi, CrackModel model) {
  switch (model) {
    case CrackModel::AT2:
      return {phi * phi, 2 * phi, S(2)};
    case CrackModel::AT1:
      return {phi, S(1), S(0)};
  }
  throw InvalidArgument("crack_function: unknown model");
}

inline double drucker_prager_B(double beta_f) {
  return 2 * std::sin(beta_f) / (std::sqrt(3.0) * (3 + std::sin(beta_f)));
}

// Drucker-Prager region ids
enum DpRegion { kNoRegion = 0, kFracture = 1, kFrictional = 2, kElastic = 3 };

template <class S>
struct StoredPart {
  S psi_d = 0;
  S psi_s = 0;
  Mat3<S> sigma_s = Mat3<S>::Zero();
  Mat6<S> C_s = Mat6<S>::Zero();
  int region = kNoRegion;
};

template <class S>
struct SplitEvaluation {
  S psi_d = 0;
  S psi_s = 0;
  Vec3<S> sigma_eff = Vec3<S>::Zero();  // xx, yy, xy
  S sigma_zz = 0;
  Mat3<S> tangent = Mat3<S>::Zero();    // plane strain, engineering shear
  Mat3<S> stress = Mat3<S>::Zero();     // full effective stress tensor
  Mat6<S> tangent3d = Mat6<S>::Zero();
  int region = kNoRegion;
};

namespace detail {

template <class S>
S pos(S x) {
  return x > S(0) ? x : S(0);
}
template <class S>
S neg(S x) {
  return x < S(0) ? x : S(0);
}

template <class S>
StoredPart<S> voldev_part(const Mat3<S>& e, const MaterialParams& m) {
  const S K = S(m.K), mu = S(m.mu);
  const S I1 = e.trace();
  const S J2 = j2_invariant(e);
  StoredPart<S> r;
  r.psi_d = K * pos(I1) * pos(I1) / 2 + 2 * mu * J2;
  r.psi_s = K * neg(I1) * neg(I1) / 2;
  if (I1 <= S(0)) {
    r.sigma_s = K * I1 * Mat3<S>::Identity();
    r.C_s.template topLeftCorner<3, 3>().setConstant(K);
  }
  return r;
}

template <class S>
StoredPart<S> drucker_prager_part(const Mat3<S>& e, const MaterialParams& m) {
  using std::sqrt;
  const S K = S(m.K), mu = S(m.mu), B = S(m.B);
  const S I1 = e.trace();
  const Mat3<S> dev = e - I1 / S(3) * Mat3<S>::Identity();
  const S J2 = dev.squaredNorm() / 2;
  const S s = sqrt(J2);
  const S psi0 = K * I1 * I1 / 2 + 2 * mu * J2;
  StoredPart<S> r;
  if (-6 * B * s < I1) {
    r.region = kFracture;
    r.psi_d = psi0;
    return r;
  }
  if (2 * mu * s >= 3 * B * K * I1) {
    r.region = kFrictional;
    const S D = 18 * B * B * K + 2 * mu;
    const S t = -3 * B * K * I1 + 2 * mu * s;
    const S f = I1 + 6 * B * s;
    r.psi_d = t * t / D;
    r.psi_s = K * mu / D * f * f;
    const S A = 2 * K * mu / D;
    const bool singular = s == S(0) || J2 < S(1e-24) * I1 * I1;
    const Mat3<S> dir = s == S(0) ? Mat3<S>::Zero() : Mat3<S>((dev / s).eval());
    const Mat3<S> n = Mat3<S>::Identity() + 3 * B * dir;
    r.sigma_s = A * f * n;
    const Vec6<S> nv = stress_to_voigt(n);
    r.C_s = A * nv * nv.transpose();
    if (!singular) {
      Mat6<S> Pdev = Mat6<S>::Zero();
      Pdev.template topLeftCorner<3, 3>().setConstant(S(-1) / S(3));
      for (int a = 0; a < 3; ++a) Pdev(a, a) += S(1);
      for (int a = 3; a < 6; ++a) Pdev(a, a) = S(1) / S(2);
      const Vec6<S> ev = stress_to_voigt(dev);
      r.C_s += (3 * B * A * f / s) * (Pdev - ev * ev.transpose() / (2 * J2));
    }
    return r;
  }
  r.region = kElastic;
  r.psi_s = psi0;
  r.sigma_s = K * I1 * Mat3<S>::Identity() + 2 * mu * dev;
  r.C_s = isotropic_elasticity(S(m.lambda), S(m.mu));
  return r;
}

template <class S>
StoredPart<S> spectral_part(const Mat3<S>& e, const MaterialParams& m) {
  const S lam = S(m.lambda), mu = S(m.mu);
  const Principal<S> pr = principal_decomposition(e);
  const S I1 = pr.values.sum();
  StoredPart<S> r;
  r.psi_d = lam * pos(I1) * pos(I1) / 2;
  r.psi_s = lam * neg(I1) * neg(I1) / 2;
  Vec3<S> s;
  Mat3<S> h = Mat3<S>::Zero();
  const S hI = I1 <= S(0) ? lam : S(0);
  for (int i = 0; i < 3; ++i) {
    const S ei = pr.values(i);
    r.psi_d += mu * pos(ei) * pos(ei);
    r.psi_s += mu * neg(ei) * neg(ei);
    s(i) = lam * neg(I1) + 2 * mu * neg(ei);
    for (int j = 0; j < 3; ++j) h(i, j) = hI;
    if (ei <= S(0)) h(i, i) += 2 * mu;
  }
  r.sigma_s = from_principal(pr, s);
  r.C_s = principal_tangent(pr, s, h);
  return r;
}

template <class S>
StoredPart<S> no_tension_part(const Mat3<S>& e, const MaterialParams& m) {
  const S E = S(m.E), nu = S(m.nu), lam = S(m.lambda), mu = S(m.mu);
  const Principal<S> pr = principal_decomposition(e);
  const S e1 = pr.values(0), e2 = pr.values(1), e3 = pr.values(2);
  StoredPart<S> r;
  Vec3<S> s = Vec3<S>::Zero();
  Mat3<S> h = Mat3<S>::Zero();
  if (e1 > S(0)) {
    const S I1 = e1 + e2 + e3;
    r.psi_d = lam * I1 * I1 / 2 + mu * (e1 * e1 + e2 * e2 + e3 * e3);
  } else if (e2 + nu * e1 > S(0)) {
    const S a = e3 + e2 + 2 * nu * e1;
    const S b3 = e3 + nu * e1, b2 = e2 + nu * e1;
    r.psi_d = lam * a * a / 2 + mu * (b3 * b3 + b2 * b2);
    r.psi_s = E * e1 * e1 / 2;
    s(0) = E * e1;
    h(0, 0) = E;
  } else if ((1 - nu) * e3 + nu * (e1 + e2) > S(0)) {
    const S a = (1 - nu) * e3 + nu * e1 + nu * e2;
    const S c = E / (1 - nu * nu);
    r.psi_d = E / (2 * (1 - nu * nu) * (1 - 2 * nu)) * a * a;
    r.psi_s = c / 2 * (e1 * e1 + e2 * e2 + 2 * nu * e1 * e2);
    s(0) = c * (e1 + nu * e2);
    s(1) = c * (e2 + nu * e1);
    h(0, 0) = h(1, 1) = c;
    h(0, 1) = h(1, 0) = c * nu;
  } else {
    const S I1 = e1 + e2 + e3;
    r.psi_s = lam * I1 * I1 / 2 + mu * (e1 * e1 + e2 * e2 + e3 * e3);
    for (int i = 0; i < 3; ++i) {
      s(i) = lam * I1 + 2 * mu * pr.values(i);
      for (int j = 0; j < 3; ++j) h(i, j) = lam;
      h(i, i) += 2 * mu;
    }
  }
  r.sigma_s = from_principal(pr, s);
  r.C_s = principal_tangent(pr, s, h);
  return r;
}

}  // namespace detail

template <class S>
StoredPart<S> stored_part(const Mat3<S>& e, SplitKind kind, const MaterialParams& m) {
  switch (kind) {
    case SplitKind::none: {
      StoredPart<S> r;
      r.psi_d = S(m.lambda) * e.trace() * e.trace() / 2 + S(m.mu) * e.squaredNorm();
      return r;
    }
    case SplitKind::voldev:
      return detail::voldev_part(e, m);
    case SplitKind::spectral:
      return detail::spectral_part(e, m);
    case SplitKind::no_tension:
      return detail::no_tension_part(e, m);
    case SplitKind::drucker_prager:
      return detail::drucker_prager_part(e, m);
  }
  throw InvalidArgument("stored_part: unknown split kind");
}

template <class S>
S undamaged_energy(const Mat3<S>& e, const MaterialParams& m) {
  const S I1 = e.trace();
  return S(m.K) * I1 * I1 / 2 + 2 * S(m.mu) * j2_invariant(e);
}

template <class S>
SplitEvaluation<S> evaluate_split(const Mat3<S>& e, S phi, SplitKind kind, const MaterialParams& m) {
  if (!e.allFinite()) throw InvalidArgument("evaluate_split: non-finite strain");
  const S ph = phi < S(0) ? S(0) : (phi > S(1) ? S(1) : phi);
  const S g = degradation(ph, m.kappa).v;
  const StoredPart<S> sp = stored_part(e, kind, m);
  const Mat3<S> sigma0 = S(m.lambda) * e.trace() * Mat3<S>::Identity() + 2 * S(m.mu) * e;
  const Mat6<S> C0 = isotropic_elasticity(S(m.lambda), S(m.mu));
  SplitEvaluation<S> out;
  out.psi_d = sp.psi_d;
  out.psi_s = sp.psi_s;
  out.region = sp.region;
  out.stress = g * (sigma0 - sp.sigma_s) + sp.sigma_s;
  out.sigma_eff = plane_stress_voigt(out.stress);
  out.sigma_zz = out.stress(2, 2);
  out.tangent3d = g * C0 + (S(1) - g) * sp.C_s;
  out.tangent = condense_plane(out.tangent3d);
  return out;
}

template <class S>
Mat3<S> tangent_stiffness(const Mat3<S>& e, S phi, SplitKind kind, const MaterialParams& m) {
  return evaluate_split(e, phi, kind, m).tangent;
}

template <class S>
struct MicroStress {
  S omega;
  Vec2<S> xi;
};

template <class S>
MicroStress<S> microstress(S phi, const Vec2<S>& grad_phi, S H, const MaterialParams& m) {
  const S cw = S(m.c_w());
  const S Gc = S(m.Gc), ell = S(m.ell);
  return {degradation(phi, m.kappa).d1 * H + Gc * crack_function(phi, m.model).d1 / (4 * cw * ell),
          ell * Gc / (2 * cw) * grad_phi};
}

template <class S>
S update_history(S psi_d, S H_prev) {
  return psi_d > H_prev ? psi_d : H_prev;
}

}  // namespace hydrofrac
