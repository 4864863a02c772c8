#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "hydrofrac/errors.hpp"
#include "hydrofrac/tensor.hpp"

namespace hydrofrac {

enum class Coupling { domain_decomposition, modified_darcy, hybrid };

Coupling parse_coupling(const std::string& s);
std::string to_string(Coupling c);

struct PoroFluidParams {
  double alpha_r = 1;
  double n_pr = 0;
  double rho_fl = 1000;
  double mu_fl = 1e-3;
  double C_fl = 0;
  double K_r = 0;
  double K_f = 0;
  double c1 = 0.5;
  double c2 = 1;
  double b = 1;
  Coupling coupling = Coupling::hybrid;
  // phi level a Gauss point must reach to donate its gradient as crack normal
  double normal_threshold = 1 - 1e-6;

  void validate() const;
};

template <class S>
struct Indicators {
  S chi_r, chi_f;
};

template <class S>
Indicators<S> indicator_functions(S phi, double c1, double c2) {
  if (!(c1 >= 0 && c1 < c2 && c2 <= 1)) throw InvalidArgument("indicator_functions: need 0 <= c1 < c2 <= 1");
  S chi_f;
  if (phi <= S(c1))
    chi_f = S(0);
  else if (phi >= S(c2))
    chi_f = S(1);
  else
    chi_f = (phi - S(c1)) / S(c2 - c1);
  return {S(1) - chi_f, chi_f};
}

template <class S>
struct BiotPorosity {
  S alpha, n_p;
};

template <class S>
BiotPorosity<S> biot_porosity(S phi, const PoroFluidParams& p) {
  if (p.coupling == Coupling::modified_darcy) return {S(p.alpha_r), S(p.n_pr)};
  const auto ind = indicator_functions(phi, p.c1, p.c2);
  return {ind.chi_r * S(p.alpha_r) + ind.chi_f, ind.chi_r * S(p.n_pr) + ind.chi_f};
}

inline double biot_coefficient(double K_bsigma, double K_m) {
  if (!(K_bsigma > 0) || K_bsigma > K_m) throw InvalidArgument("biot_coefficient: need 0 < K_bsigma <= K_m");
  return 1 - K_bsigma / K_m;
}

template <class S>
S storage_coefficient(S alpha, S n_p, S K_bsigma, S C_fl) {
  return (1 - alpha) * (alpha - n_p) / K_bsigma + n_p * C_fl;
}

// n^T eps n with eps the in-plane strain tensor
template <class S>
S crack_opening(S h_e, const Mat2<S>& eps, const Vec2<S>& n) {
  const S w = h_e * (S(1) + n.dot(eps * n));
  return w > S(0) ? w : S(0);
}

template <class S>
S pow_b(S phi, double b) {
  using std::pow;
  if (b == 0) return S(1);
  return phi <= S(0) ? S(0) : pow(phi, S(b));
}

template <class S>
Mat2<S> permeability(S phi, const std::optional<Vec2<S>>& n, const Mat2<S>& eps, S h_e, const PoroFluidParams& p) {
  const auto ind = indicator_functions(phi, p.c1, p.c2);
  const Mat2<S> I = Mat2<S>::Identity();
  auto poiseuille = [&]() -> Mat2<S> {
    if (!n) return Mat2<S>::Zero();
    const S w = crack_opening(h_e, eps, *n);
    return pow_b(phi, p.b) * (w * w / S(12)) * (I - *n * n->transpose());
  };
  switch (p.coupling) {
    case Coupling::domain_decomposition:
      return (ind.chi_r * S(p.K_r) + ind.chi_f * S(p.K_f)) * I;
    case Coupling::modified_darcy:
      return S(p.K_r) * I + poiseuille();
    case Coupling::hybrid:
      return ind.chi_r * S(p.K_r) * I + ind.chi_f * poiseuille();
  }
  throw InvalidArgument("permeability: unknown coupling");
}

template <class S>
Vec2<S> darcy_flux(const Mat2<S>& K, const Vec2<S>& grad_p, const PoroFluidParams& p) {
  return -S(p.rho_fl) / S(p.mu_fl) * (K * grad_p);
}

template <class S>
S fluid_mass_rate(S storage, S alpha, S chi_r, S p_dot, S eps_vol_dot, S rho_fl) {
  return rho_fl * (storage * p_dot + alpha * chi_r * eps_vol_dot);
}

struct PoroelasticConstants {
  double C_bsigma = 0, C_bp = 0, C_psigma = 0, C_pp = 0, C_m = 0;
  double K_bsigma = 0, K_m = 0;
  double n_p = 0;

  // K_m <= 0 means incompressible grains
  static PoroelasticConstants from_moduli(double K_bsigma, double K_m, double n_p);
};

struct CheckResult {
  bool pass = true;
  double worst = 0;  // largest relative mismatch
  std::string message;
};

CheckResult compressibility_check(const PoroelasticConstants& c, double tol = 1e-12);

}  // namespace hydrofrac
