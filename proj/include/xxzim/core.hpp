// Model parameters, the XXZ R-matrix and the structural identities it obeys.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace xxzim {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};

#define XXZIM_ERROR(Name)                                    \
  struct Name : std::runtime_error {                         \
    using std::runtime_error::runtime_error;                 \
  };
XXZIM_ERROR(PoleError)
XXZIM_ERROR(CapacityError)
XXZIM_ERROR(DimensionError)
XXZIM_ERROR(DegenerateError)
XXZIM_ERROR(PrecisionError)
XXZIM_ERROR(NotEigenvalueError)
XXZIM_ERROR(LogBranchError)
XXZIM_ERROR(ConvergenceError)
XXZIM_ERROR(RangeError)
#undef XXZIM_ERROR

inline constexpr double POLE_TOL = 1e-14;

inline cplx free_fermion_eta() { return {0.0, std::numbers::pi / 2}; }

struct ModelParams {
  cplx eta = free_fermion_eta();
  cplx u = 0.5;
  double q_weight = 1.0;
  int n_half = 1;
  cplx epsilon = 1e-4;
  int precision_digits = 50;

  int sites() const { return 4 * n_half; }
  double sech_u() const { return std::real(1.0 / std::cosh(u)); }
  bool free_fermion() const { return std::abs(eta - free_fermion_eta()) < 1e-12; }

  void validate() const {
    if (n_half < 1) throw RangeError("n_half must be positive");
    if (!(q_weight > 0)) throw RangeError("q must be positive");
    if (std::abs(std::sinh(eta)) < POLE_TOL) throw PoleError("sinh(eta) = 0");
    if (std::abs(std::sinh(u + eta)) < POLE_TOL) throw PoleError("sinh(u+eta) = 0");
  }
};

inline cplx safe_div_sinh(cplx num, cplx arg) {
  cplx d = std::sinh(arg);
  if (std::abs(d) < POLE_TOL) throw PoleError("sinh pole");
  return num / d;
}

// basis |uu>,|ud>,|du>,|dd>, |u> = (1,0)
inline Mat4 r_matrix(cplx eta, cplx w) {
  cplx b = safe_div_sinh(std::sinh(w), w + eta);
  cplx c = safe_div_sinh(std::sinh(eta), w + eta);
  Mat4 r = Mat4::Zero();
  r(0, 0) = r(3, 3) = 1.0;
  r(1, 1) = r(2, 2) = b;
  r(1, 2) = r(2, 1) = c;
  return r;
}
inline Mat4 r_matrix(const ModelParams& p, cplx w) { return r_matrix(p.eta, w); }

inline Mat4 swap_gate() {
  Mat4 s = Mat4::Zero();
  s(0, 0) = s(3, 3) = s(1, 2) = s(2, 1) = 1.0;
  return s;
}

// Rcheck = SWAP * R, the physical two-site gate
inline Mat4 gate(cplx eta, cplx w) { return swap_gate() * r_matrix(eta, w); }

inline Mat4 transpose_second(const Mat4& m) {
  Mat4 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + b, 2 * c + d) = m(2 * a + d, 2 * c + b);
  return out;
}

inline Mat4 transpose_first(const Mat4& m) {
  Mat4 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + b, 2 * c + d) = m(2 * c + b, 2 * a + d);
  return out;
}

inline Mat2 sigma_y() {
  Mat2 s;
  s << 0, -I_UNIT, I_UNIT, 0;
  return s;
}
inline Mat2 sigma_z() {
  Mat2 s;
  s << 1, 0, 0, -1;
  return s;
}
inline Mat2 sigma_x() {
  Mat2 s;
  s << 0, 1, 1, 0;
  return s;
}

// q^{sz}/(q+1/q)
inline Mat2 rho_q(double q) {
  Mat2 r = Mat2::Zero();
  r(0, 0) = q / (q + 1 / q);
  r(1, 1) = (1 / q) / (q + 1 / q);
  return r;
}

inline Mat4 kron2(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

inline bool conserves_magnetization(const Mat4& m) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      int mi = (i >> 1) + (i & 1), mj = (j >> 1) + (j & 1);
      if (mi != mj && m(i, j) != cplx(0)) return false;
    }
  return true;
}

// two-site operator on sites (i,j) of three, site 0 most significant
inline Mat8 embed3(const Mat4& g, int i, int j) {
  Mat8 out = Mat8::Zero();
  int k = 3 - i - j;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      auto bit = [](int x, int s) { return (x >> (2 - s)) & 1; };
      if (bit(a, k) != bit(b, k)) continue;
      out(a, b) = g(2 * bit(a, i) + bit(a, j), 2 * bit(b, i) + bit(b, j));
    }
  return out;
}

inline Mat8 transpose_site(const Mat8& m, int site) {
  Mat8 out;
  int mask = 1 << (2 - site);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      int a2 = (a & ~mask) | (b & mask), b2 = (b & ~mask) | (a & mask);
      out(a2, b2) = m(a, b);
    }
  return out;
}

inline double max_abs(const MatX& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double yang_baxter_residual(const ModelParams& p, cplx v1, cplx v2, cplx v3) {
  Mat8 r12 = embed3(r_matrix(p, v1 - v2), 0, 1);
  Mat8 r13 = embed3(r_matrix(p, v1 - v3), 0, 2);
  Mat8 r23 = embed3(r_matrix(p, v2 - v3), 1, 2);
  double yb = max_abs(r12 * r13 * r23 - r23 * r13 * r12);
  Mat8 r13t = transpose_site(r13, 2), r23t = transpose_site(r23, 2);
  double ybt = max_abs(r12 * r23t * r13t - r13t * r23t * r12);
  return std::max(yb, ybt);
}

// R^{t_k}_{k,0}(-v) against sinh v / sinh(v-eta) sy_k R_{0,k}(v-eta) sy_k
inline double crossing_residual(const ModelParams& p, cplx v) {
  Mat4 lhs = transpose_first(r_matrix(p, -v));  // site k first
  cplx pref = safe_div_sinh(std::sinh(v), v - p.eta);
  Mat4 sy = kron2(sigma_y(), Mat2::Identity());
  Mat4 rhs = pref * sy * r_matrix(p, v - p.eta) * sy;  // R symmetric under site exchange
  return max_abs(lhs - rhs);
}

inline double unitarity_residual(const ModelParams& p, cplx w) {
  return max_abs(r_matrix(p, w) * r_matrix(p, -w) - Mat4::Identity());
}

// R01(v) R02(v-eta) keeps the singlet of (1,2) invariant and R02(v-eta) R01(v) keeps the
// symmetric subspace invariant; both follow from the YB relation with R12(eta).
inline double degeneracy_projector_check(const ModelParams& p, cplx v) {
  Mat8 r12 = embed3(r_matrix(p, p.eta), 1, 2);
  Mat8 r01 = embed3(r_matrix(p, v), 0, 1);
  Mat8 r02 = embed3(r_matrix(p, v - p.eta), 0, 2);
  double yb = max_abs(r12 * r01 * r02 - r02 * r01 * r12);
  Mat4 anti = 0.5 * (Mat4::Identity() - swap_gate());
  Mat8 pa = Mat8::Zero(), ps;
  pa.topLeftCorner<4, 4>() = anti;
  pa.bottomRightCorner<4, 4>() = anti;
  ps = Mat8::Identity() - pa;
  double singlet = max_abs(ps * (r01 * r02) * pa);
  double sym = max_abs(pa * (r02 * r01) * ps);
  return std::max({yb, singlet, sym});
}

}  // namespace xxzim
