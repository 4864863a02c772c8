#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

#include "hydrofrac/errors.hpp"

namespace hydrofrac {

template <class S> using Vec2 = Eigen::Matrix<S, 2, 1>;
template <class S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S> using Vec6 = Eigen::Matrix<S, 6, 1>;
template <class S> using Mat2 = Eigen::Matrix<S, 2, 2>;
template <class S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <class S> using Mat6 = Eigen::Matrix<S, 6, 6>;
// fourth-order tensor, row (3i+j), column (3k+l)
template <class S> using Tensor4 = Eigen::Matrix<S, 9, 9>;

// Voigt order xx, yy, zz, xy, yz, xz; strains carry engineering shear
inline constexpr std::array<int, 6> kVoigtI{0, 1, 2, 0, 1, 0};
inline constexpr std::array<int, 6> kVoigtJ{0, 1, 2, 1, 2, 2};
// in-plane rows of the 6-vector: xx, yy, xy
inline constexpr std::array<int, 3> kPlane{0, 1, 3};

template <class S>
Vec6<S> strain_to_voigt(const Mat3<S>& e) {
  Vec6<S> v;
  v << e(0, 0), e(1, 1), e(2, 2), 2 * e(0, 1), 2 * e(1, 2), 2 * e(0, 2);
  return v;
}

template <class S>
Vec6<S> stress_to_voigt(const Mat3<S>& s) {
  Vec6<S> v;
  v << s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(1, 2), s(0, 2);
  return v;
}

// plane strain tensor from (exx, eyy, gxy)
template <class S>
Mat3<S> plane_strain(const Vec3<S>& ev) {
  Mat3<S> e = Mat3<S>::Zero();
  e(0, 0) = ev(0);
  e(1, 1) = ev(1);
  e(0, 1) = e(1, 0) = ev(2) / 2;
  return e;
}

template <class S>
Vec3<S> plane_stress_voigt(const Mat3<S>& s) {
  return Vec3<S>(s(0, 0), s(1, 1), s(0, 1));
}

template <class S>
Mat3<S> condense_plane(const Mat6<S>& D) {
  Mat3<S> c;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) c(a, b) = D(kPlane[a], kPlane[b]);
  return c;
}

template <class S>
Mat6<S> tensor4_to_voigt(const Tensor4<S>& C) {
  Mat6<S> D;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      D(a, b) = C(3 * kVoigtI[a] + kVoigtJ[a], 3 * kVoigtI[b] + kVoigtJ[b]);
  return D;
}

// expands a tangent with minor symmetries
template <class S>
Tensor4<S> voigt_to_tensor4(const Mat6<S>& D) {
  Tensor4<S> C;
  for (int a = 0; a < 6; ++a) {
    const int i = kVoigtI[a], j = kVoigtJ[a];
    for (int b = 0; b < 6; ++b) {
      const int k = kVoigtI[b], l = kVoigtJ[b];
      C(3 * i + j, 3 * k + l) = C(3 * j + i, 3 * k + l) = C(3 * i + j, 3 * l + k) =
          C(3 * j + i, 3 * l + k) = D(a, b);
    }
  }
  return C;
}

template <class S>
S trace_invariant(const Mat3<S>& t) {
  return t.trace();
}

template <class S>
S j2_invariant(const Mat3<S>& t) {
  const Mat3<S> dev = t - t.trace() / S(3) * Mat3<S>::Identity();
  return dev.squaredNorm() / 2;
}

// C_qrst = a_qi a_rj a_sk a_tl C'_ijkl with a = columns of principal directions
template <class S>
Tensor4<S> rotate_tensor4(const Tensor4<S>& Cp, const Mat3<S>& a) {
  using std::abs;
  if ((a.transpose() * a - Mat3<S>::Identity()).cwiseAbs().maxCoeff() > S(1e-10))
    throw InvalidArgument("rotate_tensor4: directions are not orthonormal");
  Tensor4<S> Q;
  for (int q = 0; q < 3; ++q)
    for (int r = 0; r < 3; ++r)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Q(3 * q + r, 3 * i + j) = a(q, i) * a(r, j);
  return Q * Cp * Q.transpose();
}

template <class S>
Mat6<S> isotropic_elasticity(S lambda, S mu) {
  Mat6<S> D = Mat6<S>::Zero();
  D.template topLeftCorner<3, 3>().setConstant(lambda);
  for (int a = 0; a < 3; ++a) D(a, a) += 2 * mu;
  for (int a = 3; a < 6; ++a) D(a, a) = mu;
  return D;
}

template <class S>
struct Principal {
  Vec3<S> values;   // ascending
  Mat3<S> vectors;  // columns
};

template <class S>
Principal<S> principal_decomposition(const Mat3<S>& e) {
  using std::atan2;
  using std::cos;
  using std::isfinite;
  using std::sin;
  using std::sqrt;
  if (!e.allFinite()) throw InvalidArgument("principal_decomposition: non-finite tensor");
  Principal<S> p;
  if (e(0, 2) == S(0) && e(1, 2) == S(0) && e(2, 0) == S(0) && e(2, 1) == S(0)) {
    // decoupled out-of-plane direction
    const S m = (e(0, 0) + e(1, 1)) / 2;
    const S hd = (e(0, 0) - e(1, 1)) / 2;
    const S r = sqrt(hd * hd + e(0, 1) * e(0, 1));
    const S th = atan2(e(0, 1), hd) / 2;
    Vec3<S> vals(m + r, m - r, e(2, 2));
    Mat3<S> vecs;
    vecs << cos(th), -sin(th), S(0), sin(th), cos(th), S(0), S(0), S(0), S(1);
    std::array<int, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return vals(x) < vals(y); });
    for (int k = 0; k < 3; ++k) {
      p.values(k) = vals(idx[k]);
      p.vectors.col(k) = vecs.col(idx[k]);
    }
    return p;
  }
  Eigen::SelfAdjointEigenSolver<Mat3<S>> es(e);
  if (es.info() != Eigen::Success) throw NumericError("principal_decomposition: eigen solver did not converge");
  p.values = es.eigenvalues();
  p.vectors = es.eigenvectors();
  return p;
}

// tangent of an isotropic tensor function from principal gradient s and Hessian h
template <class S>
Mat6<S> principal_tangent(const Principal<S>& pr, const Vec3<S>& s, const Mat3<S>& h) {
  using std::abs;
  Tensor4<S> Cp = Tensor4<S>::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Cp(4 * i, 4 * j) = h(i, j);
  const S scale = pr.values.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const S de = pr.values(i) - pr.values(j);
      const S th = abs(de) > S(1e-8) * scale ? (s(i) - s(j)) / (2 * de) : (h(i, i) - h(i, j)) / 2;
      Cp(3 * i + j, 3 * i + j) += th;
      Cp(3 * i + j, 3 * j + i) += th;
    }
  return tensor4_to_voigt(rotate_tensor4(Cp, pr.vectors));
}

template <class S>
Mat3<S> from_principal(const Principal<S>& pr, const Vec3<S>& s) {
  return pr.vectors * s.asDiagonal() * pr.vectors.transpose();
}

}  // namespace hydrofrac
