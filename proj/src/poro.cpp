#include "hydrofrac/poro.hpp"

#include <algorithm>
#include <sstream>

namespace hydrofrac {

Coupling parse_coupling(const std::string& s) {
  if (s == "domain_decomposition") return Coupling::domain_decomposition;
  if (s == "modified_darcy") return Coupling::modified_darcy;
  if (s == "hybrid") return Coupling::hybrid;
  throw InvalidArgument("unknown coupling '" + s + "'");
}

std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::domain_decomposition: return "domain_decomposition";
    case Coupling::modified_darcy: return "modified_darcy";
    case Coupling::hybrid: return "hybrid";
  }
  return "?";
}

void PoroFluidParams::validate() const {
  if (!(alpha_r >= 0 && alpha_r <= 1)) throw InvalidArgument("fluid: reservoir Biot coefficient must lie in [0, 1]");
  if (!(n_pr >= 0 && n_pr <= 1)) throw InvalidArgument("fluid: reservoir porosity must lie in [0, 1]");
  if (!(c1 >= 0 && c1 < c2 && c2 <= 1)) throw InvalidArgument("fluid: need 0 <= c1 < c2 <= 1");
  if (!(b >= 0)) throw InvalidArgument("fluid: permeability exponent must be non-negative");
  if (!(rho_fl >= 0) || !(C_fl >= 0) || !(K_r >= 0) || !(K_f >= 0))
    throw InvalidArgument("fluid: physical constants must be non-negative");
  if (!(mu_fl > 0)) throw InvalidArgument("fluid: viscosity must be positive");
  if (!(normal_threshold > 0 && normal_threshold <= 1))
    throw InvalidArgument("fluid: normal threshold must lie in (0, 1]");
}

PoroelasticConstants PoroelasticConstants::from_moduli(double K_bsigma, double K_m, double n_p) {
  if (!(K_bsigma > 0) || !(n_p > 0)) throw InvalidArgument("PoroelasticConstants: need K_bsigma > 0 and n_p > 0");
  PoroelasticConstants c;
  c.K_bsigma = K_bsigma;
  c.K_m = K_m;
  c.n_p = n_p;
  c.C_bsigma = 1 / K_bsigma;
  c.C_m = K_m > 0 ? 1 / K_m : 0;
  c.C_bp = c.C_bsigma - c.C_m;
  c.C_psigma = (c.C_bsigma - c.C_m) / n_p;
  c.C_pp = (c.C_bsigma - (1 + n_p) * c.C_m) / n_p;
  return c;
}

CheckResult compressibility_check(const PoroelasticConstants& c, double tol) {
  CheckResult r;
  auto rel = [](double got, double want) {
    const double d = std::abs(got - want);
    const double s = std::max(std::abs(want), std::abs(got));
    return s == 0 ? 0.0 : d / s;
  };
  const double checks[3] = {rel(c.C_bp, c.C_bsigma - c.C_m), rel(c.C_psigma, (c.C_bsigma - c.C_m) / c.n_p),
                            rel(c.C_pp, (c.C_bsigma - (1 + c.n_p) * c.C_m) / c.n_p)};
  const char* names[3] = {"C_bp", "C_psigma", "C_pp"};
  std::ostringstream msg;
  for (int i = 0; i < 3; ++i) {
    r.worst = std::max(r.worst, checks[i]);
    if (!(checks[i] <= tol)) {
      r.pass = false;
      msg << names[i] << " off by " << checks[i] << "; ";
    }
  }
  r.message = r.pass ? "ok" : msg.str();
  return r;
}

}  // namespace hydrofrac
