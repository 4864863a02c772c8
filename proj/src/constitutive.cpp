#include "hydrofrac/constitutive.hpp"

namespace hydrofrac {

SplitKind parse_split_kind(const std::string& s) {
  if (s == "none") return SplitKind::none;
  if (s == "voldev") return SplitKind::voldev;
  if (s == "spectral") return SplitKind::spectral;
  if (s == "no_tension") return SplitKind::no_tension;
  if (s == "drucker_prager") return SplitKind::drucker_prager;
  throw InvalidArgument("unknown split kind '" + s + "'");
}

std::string to_string(SplitKind k) {
  switch (k) {
    case SplitKind::none: return "none";
    case SplitKind::voldev: return "voldev";
    case SplitKind::spectral: return "spectral";
    case SplitKind::no_tension: return "no_tension";
    case SplitKind::drucker_prager: return "drucker_prager";
  }
  return "?";
}

CrackModel parse_crack_model(const std::string& s) {
  if (s == "AT1") return CrackModel::AT1;
  if (s == "AT2") return CrackModel::AT2;
  throw InvalidArgument("unknown crack model '" + s + "'");
}

std::string to_string(CrackModel m) { return m == CrackModel::AT1 ? "AT1" : "AT2"; }

MaterialParams MaterialParams::from_engineering(double E, double nu, double Gc, double ell,
                                                CrackModel model, double B) {
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  m.K = E / (3 * (1 - 2 * nu));
  m.mu = E / (2 * (1 + nu));
  m.lambda = E * nu / ((1 + nu) * (1 - 2 * nu));
  m.Gc = Gc;
  m.ell = ell;
  m.model = model;
  m.B = B;
  m.validate();
  return m;
}

void MaterialParams::validate() const {
  if (!(E > 0)) throw InvalidArgument("material: E must be positive");
  if (!(nu > -1 && nu < 0.5)) throw InvalidArgument("material: nu must lie in (-1, 0.5)");
  const double tol = 1e-9;
  if (std::abs(K - E / (3 * (1 - 2 * nu))) > tol * K || std::abs(mu - E / (2 * (1 + nu))) > tol * mu ||
      std::abs(lambda - (K - 2 * mu / 3)) > tol * K)
    throw InvalidArgument("material: K, mu, lambda inconsistent with E, nu");
  if (!(Gc > 0) || !(ell > 0)) throw InvalidArgument("material: Gc and ell must be positive");
  if (!(kappa > 0 && kappa < 1e-2)) throw InvalidArgument("material: residual stiffness must satisfy 0 < kappa << 1");
}

}  // namespace hydrofrac
