// The IM as the epsilon -> 0 limit of a Bethe vector with explicit roots, in MPFR arithmetic.
#pragma once

#include <cmath>
#include <vector>

#include "im.hpp"
#include "mp.hpp"
#include "thread.hpp"
#include "transfer.hpp"

namespace xxzim {

struct BetheRoots {
  std::vector<MpComplex> roots;
  MpComplex epsilon;
};

inline int bethe_min_digits(int n, double eps_abs) {
  return 30 + int(std::ceil(n * n * std::log10(1.0 / eps_abs)));
}
inline int bethe_policy_digits(int n, double eps_abs) { return bethe_min_digits(n, eps_abs) + 10 * n; }

inline mpreal mp_pi() { return acos(mpreal(-1)); }

// x_k = u + eps/(1 - Q^{1/N} e^{2 pi i (k-1/2)/N}) for k <= N, the same around 0 for k > N;
// Q = q^2 is the value for which the vector is an eigenvector
inline BetheRoots bethe_roots_exact(const ModelParams& p, const MpComplex& eps) {
  const int n = p.n_half;
  BetheRoots r;
  r.epsilon = eps;
  mpreal qn = pow(mpreal(p.q_weight) * mpreal(p.q_weight), mpreal(1) / n);
  for (int k = 1; k <= 2 * n; ++k) {
    int kk = k <= n ? k : k - n;
    mpreal ph = 2 * mp_pi() * (mpreal(kk) - mpreal(0.5)) / n;
    MpComplex den = MpComplex(1.0) - MpComplex(qn * cos(ph), qn * sin(ph));
    if (abs(den) < mpreal(1e-30)) throw DegenerateError("vanishing root denominator");
    MpComplex x = eps / den;
    if (k <= n) x += MpComplex(p.u);
    r.roots.push_back(x);
  }
  return r;
}

inline MpComplex mp_div_sinh(const MpComplex& num, const MpComplex& arg) {
  MpComplex d = sinh(arg);
  if (abs(d) < mpreal(POLE_TOL)) throw PoleError("sinh pole");
  return num / d;
}

inline AuxFactor<MpComplex> mp_r_factor(const MpComplex& eta, const MpComplex& w, int site) {
  AuxFactor<MpComplex> f;
  f.site = site;
  MpComplex b = mp_div_sinh(sinh(w), w + eta), c = mp_div_sinh(sinh(eta), w + eta);
  for (auto& z : f.m) z = MpComplex();
  f.m[0] = f.m[15] = MpComplex(1.0);
  f.m[5] = f.m[10] = b;
  f.m[6] = f.m[9] = c;
  return f;
}

// monodromy of the epsilon-deformed tilde TM without scalar prefactor
inline std::vector<AuxFactor<MpComplex>> mp_monodromy(const ModelParams& p, const MpComplex& x,
                                                      const MpComplex& eps) {
  const int n = p.n_half, L = p.sites();
  const MpComplex eta(p.eta), u(p.u);
  std::vector<AuxFactor<MpComplex>> fs;
  for (int k = 1; k <= 2 * n; ++k)
    fs.push_back(mp_r_factor(eta, k % 2 ? x - u : x - eta - eps, k - 1));
  AuxFactor<MpComplex> rho;
  for (auto& z : rho.m) z = MpComplex();
  double q = 1.0 / p.q_weight;
  rho.m[0] = MpComplex(mpreal(q) / (mpreal(q) + 1 / mpreal(q)));
  rho.m[5] = MpComplex((1 / mpreal(q)) / (mpreal(q) + 1 / mpreal(q)));
  fs.push_back(rho);
  for (int k = 2 * n + 1; k <= L; ++k)
    fs.push_back(mp_r_factor(eta, k % 2 ? x : x - u - eta - eps, k - 1));
  return fs;
}

using MpState = std::vector<MpComplex>;

inline MpState mp_vacuum(int L) {
  MpState s(std::size_t(1) << L);
  s[0] = MpComplex(1.0);
  return s;
}

// B(x) = <up| L(x) |down>_aux, lowers the magnetization by one
inline MpState apply_b_operator(const ModelParams& p, const MpComplex& x, const MpComplex& eps,
                                const MpState& st) {
  return thread_ket(mp_monodromy(p, x, eps), st, 0, 1, p.sites(), MpComplex());
}

// row vector times C(x) = <down| L(x) |up>_aux
inline MpState apply_c_operator_left(const ModelParams& p, const MpComplex& x, const MpComplex& eps,
                                     const MpState& row) {
  return thread_bra(mp_monodromy(p, x, eps), row, 1, 0, p.sites(), MpComplex());
}

// Neville table at eps = 0; returns the last two diagonal extrapolants
template <class V>
std::pair<V, V> richardson_zero(const std::vector<double>& eps, std::vector<V> vals) {
  const std::size_t n = vals.size();
  V prev = vals[0];
  for (std::size_t m = 1; m < n; ++m) {
    prev = vals[0];
    for (std::size_t i = 0; i + m < n; ++i)
      vals[i] = (eps[i] * vals[i + 1] - eps[i + m] * vals[i]) / (eps[i] - eps[i + m]);
  }
  if (n == 1) return {vals[0], vals[0]};
  return {vals[0], prev};
}

struct BetheOptions {
  std::vector<double> ladder;  // empty: eps, eps/2, eps/4, eps/8
  int digits = 0;              // 0: precision policy
  double agreement = 1e-8;
};

inline std::vector<double> default_ladder(const ModelParams& p) {
  double e = std::abs(p.epsilon);
  return {e, e / 2, e / 4, e / 8};
}

inline int resolve_digits(const ModelParams& p, const BetheOptions& o, const std::vector<double>& ladder) {
  double emin = *std::min_element(ladder.begin(), ladder.end());
  int digits = o.digits > 0 ? o.digits : bethe_policy_digits(p.n_half, emin);
  if (digits < bethe_min_digits(p.n_half, emin))
    throw PrecisionError("requested digits below the cancellation floor");
  return digits;
}

namespace detail {

inline VecX extrapolate(const std::vector<double>& ladder, const std::vector<VecX>& vals, double tol,
                        double& err) {
  auto [best, prev] = richardson_zero(ladder, vals);
  double scale = std::max(best.cwiseAbs().maxCoeff(), 1e-300);
  err = (best - prev).cwiseAbs().maxCoeff() / scale;
  if (err > tol) throw ConvergenceError("Richardson extrapolants disagree: " + std::to_string(err));
  return best;
}

inline VecX to_vecx(const MpState& s, const MpComplex& scale) {
  VecX v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v(i) = (s[i] * scale).to_double();
  return v;
}

// literal prefactor (1+q^2)^{-2N} (eps/sinh eta)^{N^2}
inline MpComplex literal_prefactor(const ModelParams& p, double eps) {
  const int n = p.n_half;
  mpreal q2 = mpreal(p.q_weight) * mpreal(p.q_weight);
  MpComplex e = MpComplex(mpreal(eps)) / sinh(MpComplex(p.eta));
  return pow_int(e, long(n) * n) * MpComplex(pow(1 + q2, -2 * n));
}

}  // namespace detail

// B(x_1)...B(x_2N)|up...up>, extrapolated to eps = 0 and mapped to the IM ordering; the trace
// functional fixes the remaining scalar, whose value is reported in extrapolation metadata
inline InfluenceMatrix im_bethe_limit(const ModelParams& p, const BetheOptions& o = {}) {
  p.validate();
  check_capacity(p.sites());
  auto ladder = o.ladder.empty() ? default_ladder(p) : o.ladder;
  int digits = resolve_digits(p, o, ladder);
  PrecisionScope scope{unsigned(digits)};
  std::vector<VecX> vals;
  for (double e : ladder) {
    MpComplex eps{mpreal(e)};
    auto roots = bethe_roots_exact(p, eps);
    MpState st = mp_vacuum(p.sites());
    for (auto it = roots.roots.rbegin(); it != roots.roots.rend(); ++it)
      st = apply_b_operator(p, *it, eps, st);
    vals.push_back(detail::to_vecx(st, detail::literal_prefactor(p, e)));
  }
  InfluenceMatrix im;
  im.n_half = p.n_half;
  im.params = p;
  im.method = "bethe";
  im.digits = digits;
  im.eps_ladder = ladder;
  im.amp = sigma_y_odd_sites(detail::extrapolate(ladder, vals, o.agreement, im.extrapolation_error));
  cplx z = reduction_cascade(im).scalar;
  if (std::abs(z) < 1e-300) throw DegenerateError("Bethe vector has vanishing trace");
  im.amp /= z;
  return im;
}

// <up...up| C(x_1)...C(x_2N): left eigenvector of the tilde TM, mapped to the original TM and
// normalised by <l|I> = 1 against the Bethe IM
inline InfluenceMatrix dual_im_bethe(const ModelParams& p, const BetheOptions& o = {},
                                     const InfluenceMatrix* right = nullptr) {
  p.validate();
  check_capacity(p.sites());
  auto ladder = o.ladder.empty() ? default_ladder(p) : o.ladder;
  int digits = resolve_digits(p, o, ladder);
  std::vector<VecX> vals;
  {
    PrecisionScope scope{unsigned(digits)};
    for (double e : ladder) {
      MpComplex eps{mpreal(e)};
      auto roots = bethe_roots_exact(p, eps);
      MpState row = mp_vacuum(p.sites());
      for (const auto& x : roots.roots) row = apply_c_operator_left(p, x, eps, row);
      vals.push_back(detail::to_vecx(row, detail::literal_prefactor(p, e)));
    }
  }
  InfluenceMatrix out;
  out.n_half = p.n_half;
  out.params = p;
  out.method = "bethe-dual";
  out.digits = digits;
  out.eps_ladder = ladder;
  // row times S equals S applied to the row up to a sign, fixed below by the overlap
  VecX l = detail::extrapolate(ladder, vals, o.agreement, out.extrapolation_error);
  out.amp = sigma_y_odd_sites(l);
  InfluenceMatrix r = right ? *right : im_bethe_limit(p, o);
  cplx ov = (out.amp.transpose() * r.amp)(0);
  if (std::abs(ov) < 1e-300) throw DegenerateError("dual vector orthogonal to the IM");
  out.amp /= ov;
  return out;
}

// |delta(x_i) q^2 prod_{j!=i} sinh(x_i-x_j+eta)/sinh(x_i-x_j-eta) - 1| for each root
inline std::vector<double> bae_residual(const ModelParams& p, const std::vector<cplx>& roots, cplx eps) {
  const int n = p.n_half;
  const cplx eta = p.eta, u = p.u;
  auto sh = [](cplx z) {
    cplx s = std::sinh(z);
    if (std::abs(s) < POLE_TOL) throw PoleError("coinciding roots");
    return s;
  };
  std::vector<double> res;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    cplx x = roots[i];
    cplx d = std::sinh(x - u) / sh(x - u + eta) * std::sinh(x - eta - eps) / sh(x - eps) * std::sinh(x) /
             sh(x + eta) * std::sinh(x - u - eta - eps) / sh(x - u - eps);
    cplx lhs = std::pow(d, n) * p.q_weight * p.q_weight;
    for (std::size_t j = 0; j < roots.size(); ++j)
      if (j != i) lhs *= sh(x - roots[j] + eta) / sh(x - roots[j] - eta);
    res.push_back(std::abs(lhs - 1.0));
  }
  return res;
}

inline std::vector<cplx> bethe_roots_double(const ModelParams& p, double eps) {
  PrecisionScope scope(40);
  auto r = bethe_roots_exact(p, MpComplex(mpreal(eps)));
  std::vector<cplx> out;
  for (auto& x : r.roots) out.push_back(x.to_double());
  return out;
}

}  // namespace xxzim
