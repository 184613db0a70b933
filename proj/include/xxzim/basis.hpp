// Explicit bases of the single-particle invariant subspaces: adjugate Jordan vectors,
// Jacobi-polynomial vectors, the causal orthogonal basis, and fits of their tails.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "core.hpp"
#include "mp.hpp"

namespace xxzim {

enum class Sector { cl, q };
enum class Family { adjugate, jacobi, orthogonal };

inline const char* sector_name(Sector s) { return s == Sector::cl ? "cl" : "q"; }
inline const char* family_name(Family f) {
  return f == Family::adjugate ? "adjugate" : f == Family::jacobi ? "jacobi" : "orth";
}

// rows are vectors J_m (m = 1..N) over the 2N sites of a half sector
struct BasisFamily {
  Eigen::MatrixXd rows;
  Family family = Family::jacobi;
  Sector sector = Sector::cl;
  double s = 0.5;
  int n() const { return int(rows.rows()); }
};

namespace detail {

inline mpreal gbinom(long a, long j) {
  mpreal r = 1;
  for (long t = 0; t < j; ++t) r = r * mpreal(a - t) / mpreal(t + 1);
  return r;
}

inline mpreal ipow(const mpreal& x, long e) {
  if (e >= 0) return pow(x, mpreal(e));
  return 1 / pow(x, mpreal(-e));
}

// [y^n] (c1 + y)^a (c2 + y)^b for integer a, b
inline mpreal coef_prod(long a, const mpreal& c1, long b, const mpreal& c2, long n) {
  mpreal tot = 0;
  for (long j = 0; j <= n; ++j) tot += gbinom(a, j) * ipow(c1, a - j) * gbinom(b, n - j) * ipow(c2, b - (n - j));
  return tot;
}

inline int basis_digits(int n) { return 40 + 2 * n; }

inline void check_s(double s) {
  if (!(s > 0 && s < 1)) throw RangeError("s = sech(u) must lie in (0,1)");
}

}  // namespace detail

// derivatives of the adjugate applied to the vacuum; exponentially large entries, so N <= 12 in use
inline BasisFamily adjugate_vectors(int n, double s_in, Sector sector) {
  detail::check_s(s_in);
  if (n < 1) throw RangeError("N must be positive");
  PrecisionScope scope{unsigned(detail::basis_digits(n))};
  const mpreal s = s_in, c = s * s - 1, one = 1, mone = -1;
  BasisFamily b;
  b.family = Family::adjugate;
  b.sector = sector;
  b.s = s_in;
  b.rows = Eigen::MatrixXd::Zero(n, 2 * n);
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= n; ++k) {
      if (sector == Sector::cl && k >= m) {
        b.rows(m - 1, 2 * k - 2) = detail::coef_prod(n + 1 - k, mone, k - 1, c, k - m).convert_to<double>();
        b.rows(m - 1, 2 * k - 1) = (-s * detail::coef_prod(n - k, mone, k - 1, c, k - m)).convert_to<double>();
      }
      if (sector == Sector::q && m >= k) {
        b.rows(m - 1, 2 * k - 2) = (s * detail::coef_prod(k - 1, one, n - k, s * s, m - k)).convert_to<double>();
        b.rows(m - 1, 2 * k - 1) = (s * s * detail::coef_prod(k, one, n - k - 1, s * s, m - k)).convert_to<double>();
      }
    }
  return b;
}

// Jacobi polynomials P^{(-2,0)}, P^{(-1,0)} (cl) and P^{(0,-1)}, P^{(-1,-1)} (q) at 1-2s^2,
// expanded from the derivative definition; heavy cancellation, hence MPFR
inline BasisFamily jacobi_vectors(int n, double s_in, Sector sector) {
  detail::check_s(s_in);
  if (n < 1) throw RangeError("N must be positive");
  PrecisionScope scope{unsigned(detail::basis_digits(n))};
  const mpreal s = s_in, c = s * s - 1, one = 1, mone = -1;
  BasisFamily b;
  b.family = Family::jacobi;
  b.sector = sector;
  b.s = s_in;
  b.rows = Eigen::MatrixXd::Zero(n, 2 * n);
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= n; ++k) {
      if (sector == Sector::cl && k >= m) {
        long d = k - m;
        b.rows(m - 1, 2 * k - 2) = (-detail::coef_prod(m - k + 1, mone, d, c, d)).convert_to<double>();
        b.rows(m - 1, 2 * k - 1) = (s * detail::coef_prod(m - k, mone, d, c, d)).convert_to<double>();
      }
      if (sector == Sector::q && m >= k) {
        long d = m - k;
        b.rows(m - 1, 2 * k - 2) = (s * detail::coef_prod(k - m, one, d, s * s, d)).convert_to<double>();
        b.rows(m - 1, 2 * k - 1) = (s * s * detail::coef_prod(k - m + 1, one, d - 1, s * s, d)).convert_to<double>();
      }
    }
  return b;
}

// orthogonalise from the most local vector outward (J_N for cl, J_1 for q), twice per vector;
// the diagonal entry is renormalised to one, which keeps the triangular support
inline BasisFamily gram_schmidt_causal(const BasisFamily& in) {
  const int n = in.n();
  BasisFamily out = in;
  out.family = Family::orthogonal;
  std::vector<Eigen::VectorXd> done;
  for (int t = 0; t < n; ++t) {
    int m = in.sector == Sector::cl ? n - 1 - t : t;
    Eigen::VectorXd v = in.rows.row(m).transpose();
    double n0 = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& w : done) v -= (w.dot(v) / w.squaredNorm()) * w;
    if (v.norm() < 1e-13 * n0) throw DegenerateError("linearly dependent basis rows");
    done.push_back(v);
    int diag = in.sector == Sector::cl ? 2 * m : 2 * m + 1;
    out.rows.row(m) = v.transpose() / v(diag);
  }
  return out;
}

// max |<a_i, a_j>| / (|a_i||a_j|), i != j
inline double orthogonality_defect(const BasisFamily& b) {
  double r = 0;
  for (int i = 0; i < b.n(); ++i)
    for (int j = i + 1; j < b.n(); ++j)
      r = std::max(r, std::abs(b.rows.row(i).dot(b.rows.row(j))) / (b.rows.row(i).norm() * b.rows.row(j).norm()));
  return r;
}

// residual of projecting the rows of a onto the row span of b
inline double span_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b.transpose());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(b.cols(), b.rows());
  Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd res = at - q * (q.transpose() * at);
  double scale = std::max(at.cwiseAbs().maxCoeff(), 1e-300);
  return res.cwiseAbs().maxCoeff() / scale;
}

enum class TailModel { half_power, threehalf_power_with_edge };

struct TailComponent {
  double a = 0, phi = 0;  // A k^{-e} sin(w k - phi)
  double b = 0, big_phi = 0;
  double residual = 0;
};

struct TailFit {
  TailModel model;
  int lo = 0, hi = 0;
  double omega = 0;
  TailComponent odd, even;  // components J_{1,2k-1} and J_{1,2k}
  double omega_free_odd = 0, omega_free_even = 0;
  double exponent_odd = 0, exponent_even = 0;
};

inline double wrap_phase(double x) {
  const double tp = 2 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, tp);
  if (x < 0) x += tp;
  return x - std::numbers::pi;
}

namespace detail {

// linear least squares for fixed omega and exponent; returns relative rms residual
inline TailComponent fit_component(const Eigen::VectorXd& y, int n, int lo, int hi, double w, double e,
                                   bool edge) {
  const int m = hi - lo + 1, p = edge ? 4 : 2;
  Eigen::MatrixXd a(m, p);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    double k = lo + i, wt = std::pow(k, e);  // residuals relative to the envelope
    double env = std::pow(k, -e);
    a(i, 0) = env * std::sin(w * k) * wt;
    a(i, 1) = -env * std::cos(w * k) * wt;
    if (edge) {
      double env2 = env / (n - k + 1);
      a(i, 2) = env2 * std::sin(w * k) * wt;
      a(i, 3) = -env2 * std::cos(w * k) * wt;
    }
    rhs(i) = y(lo - 1 + i) * wt;
  }
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
  TailComponent t;
  // A sin(wk - phi) = A cos(phi) sin(wk) - A sin(phi) cos(wk)
  t.a = std::hypot(c(0), c(1));
  t.phi = wrap_phase(std::atan2(c(1), c(0)));
  if (edge) {
    t.b = std::hypot(c(2), c(3));
    t.big_phi = wrap_phase(std::atan2(c(3), c(2)));
  }
  t.residual = (a * c - rhs).norm() / std::max(rhs.norm(), 1e-300);
  return t;
}

// golden-section minimisation of a unimodal function on [a, b] after a coarse scan
template <class F>
double scan_minimize(F f, double a, double b, int grid = 200) {
  double best = a, fb = f(a);
  for (int i = 1; i <= grid; ++i) {
    double x = a + (b - a) * i / grid, fx = f(x);
    if (fx < fb) {
      fb = fx;
      best = x;
    }
  }
  double h = (b - a) / grid, lo = std::max(a, best - h), hi = std::min(b, best + h);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo), f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// fits of the first row: half_power A k^{-1/2} sin(wk - phi) (jacobi tails),
// threehalf_power_with_edge A/k^{3/2} sin(wk - phi) + B/(k^{3/2}(N-k+1)) sin(wk - Phi);
// w = 2 arcsin(s) is fixed, free-w and free-exponent refits are reported alongside
inline TailFit tail_fit(const BasisFamily& b, TailModel model, int lo = 0, int hi = 0) {
  const int n = b.n();
  TailFit f;
  f.model = model;
  if (lo <= 0) lo = model == TailModel::half_power ? 20 : 8;
  if (hi <= 0) hi = model == TailModel::half_power ? n : n - 8;
  if (lo < 1 || hi > n || hi - lo < 4) throw RangeError("fit window too small");
  f.lo = lo;
  f.hi = hi;
  f.omega = 2 * std::asin(b.s);
  const bool edge = model == TailModel::threehalf_power_with_edge;
  const double e0 = edge ? 1.5 : 0.5;
  // the cl tail of row 1 extends to the right, the q tail of row N to the left
  Eigen::VectorXd yo(n), ye(n);
  for (int k = 1; k <= n; ++k) {
    if (b.sector == Sector::cl) {
      yo(k - 1) = b.rows(0, 2 * k - 2);
      ye(k - 1) = b.rows(0, 2 * k - 1);
    } else {
      yo(k - 1) = b.rows(n - 1, 2 * n - 2 * k);
      ye(k - 1) = b.rows(n - 1, 2 * n - 2 * k + 1);
    }
  }
  f.odd = detail::fit_component(yo, n, lo, hi, f.omega, e0, edge);
  f.even = detail::fit_component(ye, n, lo, hi, f.omega, e0, edge);
  auto free_w = [&](const Eigen::VectorXd& y) {
    return detail::scan_minimize(
        [&](double w) { return detail::fit_component(y, n, lo, hi, w, e0, edge).residual; }, f.omega - 0.3,
        f.omega + 0.3);
  };
  auto free_e = [&](const Eigen::VectorXd& y) {
    return detail::scan_minimize(
        [&](double e) {
          // residual measured in the fixed-exponent weighting so that fits are comparable
          const int m = hi - lo + 1;
          TailComponent t = detail::fit_component(y, n, lo, hi, f.omega, e, edge);
          double r = 0, s = 0;
          for (int i = 0; i < m; ++i) {
            double k = lo + i, env = std::pow(k, -e);
            double mod = t.a * env * std::sin(f.omega * k - t.phi);
            if (edge) mod += t.b * env / (n - k + 1) * std::sin(f.omega * k - t.big_phi);
            double wt = std::pow(k, e0);
            r += std::pow((mod - y(lo - 1 + i)) * wt, 2);
            s += std::pow(y(lo - 1 + i) * wt, 2);
          }
          return std::sqrt(r / s);
        },
        e0 - 1.0, e0 + 1.0);
  };
  f.omega_free_odd = free_w(yo);
  f.omega_free_even = free_w(ye);
  f.exponent_odd = free_e(yo);
  f.exponent_even = free_e(ye);
  return f;
}

// amplitude and phase predicted for the jacobi cl tail of row 1
struct HalfPowerPrediction {
  double amplitude, phi_odd, phi_even;
};

inline HalfPowerPrediction jacobi_tail_prediction(double s) {
  const double as = std::asin(s), pi = std::numbers::pi;
  // sin((2k-3) as - 3pi/4) = sin(wk - (3 as + 3pi/4)), sin((2k-2) as + 3pi/4) = sin(wk - (2 as - 3pi/4))
  return {std::sqrt(s * s * s / (pi * std::sqrt(1 - s * s))), wrap_phase(3 * as + 3 * pi / 4),
          wrap_phase(2 * as - 3 * pi / 4)};
}

// pointwise deviation |J - prediction| relative to the predicted envelope, k >= lo
inline double jacobi_tail_envelope_error(const BasisFamily& b, int lo = 20) {
  if (b.sector != Sector::cl) throw RangeError("tail law is stated for the cl sector");
  auto pr = jacobi_tail_prediction(b.s);
  const double w = 2 * std::asin(b.s);
  double err = 0;
  for (int k = lo; k <= b.n(); ++k) {
    double env = pr.amplitude / std::sqrt(double(k));
    err = std::max(err, std::abs(b.rows(0, 2 * k - 2) - env * std::sin(w * k - pr.phi_odd)) / env);
    err = std::max(err, std::abs(b.rows(0, 2 * k - 1) - env * std::sin(w * k - pr.phi_even)) / env);
  }
  return err;
}

}  // namespace xxzim
