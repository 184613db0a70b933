// The free-fermion point: single-particle matrices, classical/quantum modes, local
// Hamiltonians, Gaussian form of the transfer matrix and the IM as a Slater determinant.
#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "basis.hpp"
#include "core.hpp"
#include "im.hpp"
#include "transfer.hpp"

namespace xxzim {

enum class Side { l, r };
enum class Parity { even, odd };

inline void require_free_fermion(const ModelParams& p) {
  if (!p.free_fermion()) throw RangeError("operation needs eta = i pi/2");
}

namespace detail {
inline cplx checked_inv(cplx z, const char* what) {
  if (std::abs(z) < POLE_TOL) throw PoleError(what);
  return 1.0 / z;
}
}  // namespace detail

// cl: lower triangular, q: upper triangular; indices below are 1-based.
// The odd-offset entries of the q matrix carry the sign that makes it commute with h^q.
inline MatX build_M(const ModelParams& p, cplx v, Sector sector) {
  const int n = 2 * p.n_half;
  const cplx u = p.u;
  const cplx tv = std::tanh(v), tuv = std::tanh(u - v);
  const cplx ctv = detail::checked_inv(tv, "tanh(v) = 0"), ctuv = detail::checked_inv(tuv, "tanh(u-v) = 0");
  const cplx chv = std::cosh(v), shv = std::sinh(v), chuv = std::cosh(u - v), shuv = std::sinh(u - v);
  detail::checked_inv(chv, "cosh(v) = 0");
  detail::checked_inv(chuv, "cosh(u-v) = 0");
  MatX m = MatX::Zero(n, n);
  if (sector == Sector::cl) {
    const cplx lam = tv * ctuv;
    for (int i = 1; i <= n; ++i) m(i - 1, i - 1) = i % 2 ? -I_UNIT * ctuv : I_UNIT * tv;
    for (int j = 1; j <= n; ++j)
      for (int i = j + 1; i <= n; ++i) {
        int d = i - j;
        if (d % 2 == 0) {
          cplx pw = std::pow(lam, d / 2 - 1);
          m(i - 1, j - 1) = j % 2 ? -I_UNIT * pw / (ctv * shuv * shuv) : -I_UNIT * pw / (tuv * chv * chv);
        } else {
          m(i - 1, j - 1) = -I_UNIT * std::pow(lam, (d + 1) / 2 - 1) / (chv * shuv);
        }
      }
  } else {
    const cplx lam = tuv * ctv;
    for (int i = 1; i <= n; ++i) m(i - 1, i - 1) = i % 2 ? -I_UNIT * tuv : I_UNIT * ctv;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) {
        int d = j - i;
        if (d % 2 == 0) {
          cplx pw = std::pow(lam, d / 2 - 1);
          m(i - 1, j - 1) = i % 2 ? I_UNIT * pw / (tv * chuv * chuv) : I_UNIT * pw / (ctuv * shv * shv);
        } else {
          m(i - 1, j - 1) = I_UNIT * std::pow(lam, (d + 1) / 2 - 1) / (shv * chuv);
        }
      }
  }
  return m;
}

// banded local generators; 1-based entries as in the comments
inline Eigen::MatrixXd build_h(const ModelParams& p, Side side, Sector sector) {
  const int nh = p.n_half, n = 2 * nh;
  const double s = p.sech_u();
  if (!std::isfinite(s)) throw PoleError("cosh(u) = 0");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (side == Side::l && sector == Sector::cl) {
    for (int i = 1; i <= nh; ++i) h(2 * i - 1, 2 * i - 1) = 1;  // (2i,2i)
    for (int i = 1; i < n; ++i) h(i, i - 1) = -s;               // (i+1,i)
    for (int i = 1; i < nh; ++i) h(2 * i, 2 * i - 2) = 1;       // (2i+1,2i-1)
  } else if (side == Side::l && sector == Sector::q) {
    for (int i = 1; i <= nh; ++i) h(2 * i - 1, 2 * i - 1) = 1;
    for (int i = 1; i < n; ++i) h(i - 1, i) = s;
    for (int i = 1; i < nh; ++i) h(2 * i - 2, 2 * i) = 1;
  } else if (side == Side::r && sector == Sector::cl) {
    for (int i = 1; i <= nh; ++i) h(2 * i - 2, 2 * i - 2) = 1;
    for (int i = 1; i < n; ++i) h(i, i - 1) = s;
    for (int i = 1; i < nh; ++i) h(2 * i + 1, 2 * i - 1) = 1;
  } else {
    for (int i = 1; i <= nh; ++i) h(2 * i - 2, 2 * i - 2) = 1;
    for (int i = 1; i < n; ++i) h(i - 1, i) = -s;
    for (int i = 1; i < nh; ++i) h(2 * i - 1, 2 * i + 1) = 1;
  }
  return h;
}

// columns: new creation operators in terms of c^dag_x, first the 2N cl modes then the 2N q modes;
// annihilators are the rows of the inverse, so canonical anticommutators are kept
struct ClqTransform {
  MatX create;
  MatX annihilate;
};

inline ClqTransform clq_transform(const ModelParams& p, Parity parity) {
  const int n = 2 * p.n_half, L = 2 * n;
  const double q2 = p.q_weight * p.q_weight;
  const double nrm = std::sqrt(1 + 1 / q2);
  MatX b = MatX::Zero(L, L);
  for (int k = 0; k < n; ++k) {
    double d = k % 2 ? -1.0 : 1.0;
    b(k, k) = d / nrm;
    b(L - 1 - k, k) = d / (q2 * nrm);
    b(k, n + k) = d / nrm;
    b(L - 1 - k, n + k) = (parity == Parity::even ? -d : d) / nrm;
  }
  Eigen::FullPivLU<MatX> lu(b);
  if (!lu.isInvertible()) throw DegenerateError("classical/quantum modes are linearly dependent");
  return {b, lu.inverse()};
}

// single-particle action of the tilde TM in the site basis
inline MatX single_particle_M(const ModelParams& p, cplx v, Parity parity) {
  const int n = 2 * p.n_half;
  auto t = clq_transform(p, parity);
  MatX blk = MatX::Zero(2 * n, 2 * n);
  blk.topLeftCorner(n, n) = build_M(p, v, Sector::cl);
  blk.bottomRightCorner(n, n) = build_M(p, v, Sector::q);
  return t.create * blk * t.annihilate;
}

// pseudovacuum eigenvalue (tanh v tanh(u-v))^N
inline cplx vacuum_eigenvalue(const ModelParams& p, cplx v) {
  return std::pow(std::tanh(v) * std::tanh(p.u - v), p.n_half);
}

inline double odd_sector_ratio(const ModelParams& p) {
  double q2 = p.q_weight * p.q_weight;
  return (q2 - 1) / (q2 + 1);
}

// ---- single-particle Jordan structure ----

inline bool is_triangular(const MatX& a) {
  bool lower = true, upper = true;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > i && a(i, j) != cplx(0)) lower = false;
      if (j < i && a(i, j) != cplx(0)) upper = false;
    }
  return lower || upper;
}

inline int algebraic_multiplicity(const MatX& a, cplx lambda, double tol = 1e-9) {
  const double scale = std::max(1.0, max_abs(a));
  if (is_triangular(a)) {
    int c = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) c += std::abs(a(i, i) - lambda) <= tol * scale;
    return c;
  }
  Eigen::ComplexEigenSolver<MatX> es(a, false);
  int c = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) c += std::abs(es.eigenvalues()(i) - lambda) <= 1e-4 * scale;
  return c;
}

// rank (A - lambda)^k for k = 0..kmax
inline std::vector<int> rank_sequence(const MatX& a, cplx lambda, int kmax, double tol = 1e-8) {
  const Eigen::Index n = a.rows();
  MatX b = a - lambda * MatX::Identity(n, n), pw = MatX::Identity(n, n);
  std::vector<int> r{int(n)};
  for (int k = 1; k <= kmax; ++k) {
    pw = pw * b;
    r.push_back(numerical_rank(pw, tol));
  }
  return r;
}

struct ChainCertificate {
  cplx lambda;
  int algebraic = 0;
  int geometric = 0;
  int chain_length = 0;
  double gap = 0;          // second smallest over largest singular value of A - lambda
  std::vector<int> ranks;  // measured rank (A - lambda)^k, k = 0..kmax
  bool prefix_ok = false;  // measured ranks follow 2N - k
};

// geometric multiplicity one means a single block, so the chain is as long as the algebraic
// multiplicity; high powers are too ill-conditioned in double, only a prefix is measured
inline ChainCertificate chain_certificate(const MatX& a, cplx lambda, int kmax = 2, double tol = 1e-8) {
  const Eigen::Index n = a.rows();
  ChainCertificate c;
  c.lambda = lambda;
  c.algebraic = algebraic_multiplicity(a, lambda);
  Eigen::BDCSVD<MatX> svd(a - lambda * MatX::Identity(n, n));
  const auto& sv = svd.singularValues();
  int nullity = 0;
  for (Eigen::Index i = 0; i < n; ++i) nullity += sv(i) <= tol * std::max(1.0, sv(0));
  c.geometric = nullity;
  c.gap = n >= 2 ? sv(n - 2) / std::max(sv(0), 1e-300) : 1.0;
  c.chain_length = c.geometric == 1 ? c.algebraic : 0;
  c.ranks = rank_sequence(a, lambda, std::min(kmax, c.algebraic + 1), tol);
  c.prefix_ok = true;
  for (std::size_t k = 0; k < c.ranks.size(); ++k)
    c.prefix_ok = c.prefix_ok && c.ranks[k] == int(n) - std::min(int(k), c.algebraic);
  return c;
}

// distinct diagonal values of a triangular single-particle matrix, in order of appearance
inline std::vector<cplx> diagonal_values(const MatX& a, double tol = 1e-9) {
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    bool seen = false;
    for (auto z : out) seen = seen || std::abs(z - a(i, i)) <= tol * std::max(1.0, std::abs(z));
    if (!seen) out.push_back(a(i, i));
  }
  return out;
}

// (A - lambda) v_m = v_{m-1}, (A - lambda) v_1 = 0, from derivatives of adj(x - A) at lambda
inline std::vector<VecX> jordan_chain_single(const MatX& a, cplx lambda) {
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, max_abs(a));
  Eigen::JacobiSVD<MatX> svd(a - lambda * MatX::Identity(n, n));
  if (svd.singularValues()(n - 1) > 1e-8 * scale) throw NotEigenvalueError("lambda is not an eigenvalue");
  const int mult = algebraic_multiplicity(a, lambda);
  // adj(x - A) = sum_j x^{n-1-j} B_j with B_0 = 1, B_j = A B_{j-1} + a_j, a_j = -tr(A B_{j-1})/j
  std::vector<MatX> bs{MatX::Identity(n, n)};
  for (Eigen::Index j = 1; j < n; ++j) {
    MatX ab = a * bs.back();
    cplx aj = -ab.trace() / double(j);
    bs.push_back(ab + aj * MatX::Identity(n, n));
  }
  auto deriv = [&](int m) {
    MatX d = MatX::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      long e = n - 1 - j;
      if (e < m) continue;
      double bin = 1;
      for (int t = 0; t < m; ++t) bin = bin * double(e - t) / double(t + 1);
      cplx pw = 1;  // std::pow(0, 0.0) is nan for complex arguments
      for (long t = 0; t < e - m; ++t) pw *= lambda;
      d += bin * pw * bs[j];
    }
    return d;
  };
  std::vector<MatX> am;
  for (int m = 0; m < mult; ++m) am.push_back(deriv(m));
  Eigen::Index best = 0;
  double bn = -1;
  for (Eigen::Index j = 0; j < n; ++j) {
    double nj = am.back().col(j).norm();
    if (nj > bn) {
      bn = nj;
      best = j;
    }
  }
  std::vector<VecX> chain;
  for (int m = 0; m < mult; ++m) chain.push_back(am[m].col(best));
  return chain;
}

// ---- many-body side ----

inline std::vector<std::size_t> particle_configs(int L, int k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < (std::size_t(1) << L); ++i)
    if (__builtin_popcountll(i) == k) out.push_back(i);
  return out;
}

inline std::vector<int> occupied_sites(std::size_t cfg, int L) {
  std::vector<int> s;
  for (int p = 0; p < L; ++p)
    if ((cfg >> (L - 1 - p)) & 1) s.push_back(p);
  return s;
}

// K-th exterior power of a single-particle matrix on the K-particle configurations
inline MatX exterior_power(const MatX& m, int L, const std::vector<std::size_t>& cfgs) {
  const std::size_t nc = cfgs.size();
  std::vector<std::vector<int>> occ;
  for (auto c : cfgs) occ.push_back(occupied_sites(c, L));
  const int k = occ.empty() ? 0 : int(occ[0].size());
  MatX out(nc, nc);
  MatX sub(k, k);
  for (std::size_t b = 0; b < nc; ++b)
    for (std::size_t a = 0; a < nc; ++a) {
      if (k == 0) {
        out(a, b) = 1;
        continue;
      }
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = m(occ[a][i], occ[b][j]);
      out(a, b) = sub.determinant();
    }
  return out;
}

inline MatX restrict_to(const MatX& op, const std::vector<std::size_t>& cfgs) {
  MatX out(cfgs.size(), cfgs.size());
  for (std::size_t a = 0; a < cfgs.size(); ++a)
    for (std::size_t b = 0; b < cfgs.size(); ++b) out(a, b) = op(cfgs[a], cfgs[b]);
  return out;
}

// Q = log M on the principal branch
inline MatX checked_log(const MatX& m) {
  Eigen::ComplexEigenSolver<MatX> es(m, false);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    cplx z = es.eigenvalues()(i);
    if (z.real() <= 0 && std::abs(z.imag()) <= 1e-12 * std::abs(z))
      throw LogBranchError("eigenvalue on the branch cut of the logarithm");
  }
  return m.log();
}

struct GaussianReport {
  double even = 0, odd = 0;
  double vacuum = 0;      // |T Omega - a Omega|
  double odd_ratio = 0;   // measured one-particle prefactor over a(v)
  double off_sector = 0;  // particle-number violating entries
  double max() const { return std::max({even, odd, vacuum, off_sector}); }
};

// dense tilde TM against a(v) exp(dGamma(log M^+)) on even and a(v) r exp(dGamma(log M^-)) on odd
// particle numbers; exp(dGamma(Q)) acts on K particles as the K-th exterior power of exp Q
inline GaussianReport gaussian_form_check(const ModelParams& p, cplx v) {
  require_free_fermion(p);
  const int L = p.sites();
  if (L > 12) throw CapacityError("dense Gaussian check is limited to 4N <= 12");
  MatX t = dense_transfer(p, TransferKind::tilde, v);
  const cplx a = vacuum_eigenvalue(p, v);
  const double r = odd_sector_ratio(p);
  MatX gp = checked_log(single_particle_M(p, v, Parity::even)).exp();
  // at q = 1 the odd frame is singular (removable: r -> 0 while the frame blows up)
  MatX gm = checked_log(single_particle_M(p, v, Parity::odd)).exp();
  GaussianReport rep;
  const double scale = std::max(max_abs(t), 1e-300);
  for (std::size_t i = 0; i < std::size_t(t.rows()); ++i)
    for (std::size_t j = 0; j < std::size_t(t.cols()); ++j)
      if (__builtin_popcountll(i) != __builtin_popcountll(j))
        rep.off_sector = std::max(rep.off_sector, std::abs(t(i, j)) / scale);
  rep.vacuum = std::abs(t(0, 0) - a) / std::abs(a);
  for (int k = 1; k <= L; ++k) {
    auto cfgs = particle_configs(L, k);
    MatX blk = restrict_to(t, cfgs);
    MatX pred = (k % 2 ? a * r : a) * exterior_power(k % 2 ? gm : gp, L, cfgs);
    double d = max_abs(blk - pred) / std::max(max_abs(blk), 1e-300);
    (k % 2 ? rep.odd : rep.even) = std::max(k % 2 ? rep.odd : rep.even, d);
  }
  MatX one = restrict_to(t, particle_configs(L, 1));
  rep.odd_ratio = std::abs((one.trace() / single_particle_M(p, v, Parity::odd).trace() / a).real());
  return rep;
}

// dGamma of the single-particle generator h placed in one sector of the even clq frame
inline MatX many_body_H(const ModelParams& p, Side side, Sector sector) {
  require_free_fermion(p);
  const int L = p.sites(), n = 2 * p.n_half;
  if (L > 12) throw CapacityError("dense Hamiltonians are limited to 4N <= 12");
  auto t = clq_transform(p, Parity::even);
  MatX blk = MatX::Zero(L, L);
  MatX h = build_h(p, side, sector).cast<cplx>();
  if (sector == Sector::cl)
    blk.topLeftCorner(n, n) = h;
  else
    blk.bottomRightCorner(n, n) = h;
  MatX hsp = t.create * blk * t.annihilate;
  const std::size_t d = std::size_t(1) << L;
  MatX out = MatX::Zero(d, d);
  // c^dag_x c_y with the Jordan-Wigner sign of the sites strictly between x and y
  for (std::size_t j = 0; j < d; ++j)
    for (int y = 0; y < L; ++y) {
      std::size_t my = std::size_t(1) << (L - 1 - y);
      if (!(j & my)) continue;
      std::size_t j1 = j ^ my;
      for (int x = 0; x < L; ++x) {
        if (hsp(x, y) == cplx(0)) continue;
        std::size_t mx = std::size_t(1) << (L - 1 - x);
        if (j1 & mx) continue;
        int lo = std::min(x, y), hi = std::max(x, y), cnt = 0;
        for (int z = lo + 1; z < hi; ++z) cnt += (j1 >> (L - 1 - z)) & 1;
        out(j1 | mx, j) += (cnt % 2 ? -1.0 : 1.0) * hsp(x, y);
      }
    }
  return out;
}

// prod_i Psi^dag_{q,i} Psi^dag_{cl,i} |Omega> in the site basis, then sigma^y on odd sites;
// rows of jcl / jq are the block bases (default: Jacobi vectors at s = sech u)
inline InfluenceMatrix build_im_fermionic(const ModelParams& p, const Eigen::MatrixXd* jcl = nullptr,
                                          const Eigen::MatrixXd* jq = nullptr) {
  require_free_fermion(p);
  p.validate();
  const int nh = p.n_half, n = 2 * nh, L = p.sites();
  check_capacity(L);
  Eigen::MatrixXd jc = jcl ? *jcl : jacobi_vectors(nh, p.sech_u(), Sector::cl).rows;
  Eigen::MatrixXd jqq = jq ? *jq : jacobi_vectors(nh, p.sech_u(), Sector::q).rows;
  if (jc.rows() != nh || jc.cols() != n || jqq.rows() != nh || jqq.cols() != n)
    throw DimensionError("block bases have wrong shape");
  const double q2 = p.q_weight * p.q_weight, nrm = std::sqrt(1 + 1 / q2);
  MatX orbs = MatX::Zero(n, L);
  for (int i = 0; i < nh; ++i)
    for (int k = 0; k < n; ++k) {
      double d = k % 2 ? -1.0 : 1.0;
      orbs(2 * i, k) += d * jqq(i, k) / nrm;
      orbs(2 * i, L - 1 - k) -= d * jqq(i, k) / nrm;
      orbs(2 * i + 1, k) += d * jc(i, k) / nrm;
      orbs(2 * i + 1, L - 1 - k) += d * jc(i, k) / (q2 * nrm);
    }
  VecX psi = VecX::Zero(std::size_t(1) << L);
  MatX sub(n, n);
  for (std::size_t cfg = 0; cfg < std::size_t(psi.size()); ++cfg) {
    if (__builtin_popcountll(cfg) != n) continue;
    int c = 0;
    for (int pos = 0; pos < L; ++pos)
      if ((cfg >> (L - 1 - pos)) & 1) sub.col(c++) = orbs.col(pos);
    psi(cfg) = sub.determinant();
  }
  InfluenceMatrix im;
  im.n_half = nh;
  im.params = p;
  im.method = "fermion";
  im.amp = sigma_y_odd_sites(psi);
  return im;
}

}  // namespace xxzim
