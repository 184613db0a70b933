// Temporal transfer matrices acting on 4N temporal sites, and spectral probes of them.
#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <vector>

#include "core.hpp"
#include "im.hpp"
#include "thread.hpp"

namespace xxzim {

enum class TransferKind { original, tilde, tilde_epsilon };

inline AuxFactor<cplx> site_factor(const Mat4& m, int site) {
  AuxFactor<cplx> f;
  f.site = site;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) f.m[4 * r + c] = m(r, c);
  return f;
}

inline AuxFactor<cplx> aux_factor(const Mat2& m) {
  AuxFactor<cplx> f;
  f.m[0] = m(0, 0);
  f.m[1] = m(0, 1);
  f.m[4] = m(1, 0);
  f.m[5] = m(1, 1);
  return f;
}

struct TransferFactors {
  std::vector<AuxFactor<cplx>> factors;  // left to right
  cplx prefactor = 1.0;
};

// T(v) with the physical column at v = 0
inline TransferFactors original_factors(const ModelParams& p, cplx v) {
  const int n = p.n_half, L = p.sites();
  TransferFactors t;
  for (int k = L; k >= 2 * n + 1; --k)
    t.factors.push_back(site_factor(
        k % 2 == 0 ? r_matrix(p, p.u - v) : transpose_second(r_matrix(p, v)), k - 1));
  t.factors.push_back(aux_factor(rho_q(p.q_weight)));
  for (int k = 2 * n; k >= 1; --k)
    t.factors.push_back(site_factor(
        k % 2 == 0 ? r_matrix(p, -v) : transpose_second(r_matrix(p, v - p.u)), k - 1));
  return t;
}

// transpose-free form; eigenvectors relate to the original ones by sigma^y on odd sites
inline TransferFactors tilde_factors(const ModelParams& p, cplx v, cplx eps) {
  const int n = p.n_half, L = p.sites();
  TransferFactors t;
  cplx a = safe_div_sinh(std::sinh(v), v - p.eta);
  cplx b = safe_div_sinh(std::sinh(v - p.u), v - p.u - p.eta);
  t.prefactor = std::pow(a * b, n);
  for (int k = 1; k <= 2 * n; ++k)
    t.factors.push_back(site_factor(
        k % 2 ? r_matrix(p, v - p.u) : r_matrix(p, v - p.eta - eps), k - 1));
  t.factors.push_back(aux_factor(rho_q(1.0 / p.q_weight)));
  for (int k = 2 * n + 1; k <= L; ++k)
    t.factors.push_back(site_factor(
        k % 2 ? r_matrix(p, v) : r_matrix(p, v - p.u - p.eta - eps), k - 1));
  return t;
}

inline TransferFactors transfer_factors(const ModelParams& p, TransferKind kind, cplx v) {
  switch (kind) {
    case TransferKind::original: return original_factors(p, v);
    case TransferKind::tilde: return tilde_factors(p, v, 0.0);
    case TransferKind::tilde_epsilon: return tilde_factors(p, v, p.epsilon);
  }
  throw RangeError("unknown transfer kind");
}

inline VecX apply_transfer(const ModelParams& p, TransferKind kind, cplx v, const VecX& x) {
  const int L = p.sites();
  if (x.size() != (VecX::Index(1) << L)) throw DimensionError("state has wrong size");
  check_capacity(L);
  auto t = transfer_factors(p, kind, v);
  std::vector<cplx> in(x.data(), x.data() + x.size());
  auto out = thread_trace(t.factors, in, L, cplx(0));
  VecX y(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) y(i) = t.prefactor * out[i];
  return y;
}

// the physical temporal column
inline VecX apply_temporal_tm(const ModelParams& p, const VecX& x) {
  return apply_transfer(p, TransferKind::original, 0.0, x);
}

inline MatX dense_transfer(const ModelParams& p, TransferKind kind, cplx v) {
  const int L = p.sites();
  check_capacity(L);
  const std::size_t d = std::size_t(1) << L;
  MatX t(d, d);
  VecX e = VecX::Zero(d);
  for (std::size_t j = 0; j < d; ++j) {
    e(j) = 1;
    t.col(j) = apply_transfer(p, kind, v, e);
    e(j) = 0;
  }
  return t;
}

// max over random states of |[T(v1), T(v2)] x| / |x|
inline double commutator_residual(const ModelParams& p, TransferKind kind, cplx v1, cplx v2,
                                  int trials = 3, std::uint64_t seed = 7) {
  double res = 0;
  for (int t = 0; t < trials; ++t) {
    VecX x = random_state(p.sites(), seed + t);
    x /= x.norm();
    VecX a = apply_transfer(p, kind, v1, apply_transfer(p, kind, v2, x));
    VecX b = apply_transfer(p, kind, v2, apply_transfer(p, kind, v1, x));
    res = std::max(res, (a - b).norm() / std::max(1.0, a.norm()));
  }
  return res;
}

struct EigenCluster {
  cplx lambda;
  int algebraic = 0;
  int geometric = 0;
  std::vector<int> ranks;        // rank (T - lambda)^k, k = 0..algebraic
  std::vector<int> block_sizes;  // Jordan block sizes, descending
};

inline int numerical_rank(const MatX& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<MatX> svd(m);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, smax)) ++r;
  return r;
}

// Jordan structure from rank sequences; eigenvalues are clustered by single linkage
inline std::vector<EigenCluster> jordan_probe(const MatX& t, double cluster_tol = 1e-7,
                                              double rank_tol = 1e-8) {
  const Eigen::Index d = t.rows();
  Eigen::ComplexEigenSolver<MatX> es(t, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + d);
  std::vector<int> label(d, -1);
  int nc = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (label[i] >= 0) continue;
    label[i] = nc;
    std::vector<Eigen::Index> stack{i};
    while (!stack.empty()) {
      auto a = stack.back();
      stack.pop_back();
      for (Eigen::Index b = 0; b < d; ++b)
        if (label[b] < 0 &&
            std::abs(ev[a] - ev[b]) <= cluster_tol * std::max(1.0, std::abs(ev[a]))) {
          label[b] = nc;
          stack.push_back(b);
        }
    }
    ++nc;
  }
  std::vector<EigenCluster> out(nc);
  for (Eigen::Index i = 0; i < d; ++i) {
    out[label[i]].lambda += ev[i];
    out[label[i]].algebraic++;
  }
  const MatX id = MatX::Identity(d, d);
  for (auto& c : out) {
    c.lambda /= double(c.algebraic);
    MatX a = t - c.lambda * id, pw = id;
    c.ranks.push_back(int(d));
    for (int k = 1; k <= c.algebraic; ++k) {
      pw = pw * a;
      c.ranks.push_back(numerical_rank(pw, rank_tol));
      if (c.ranks[k] == c.ranks[k - 1]) break;
    }
    c.geometric = c.ranks[0] - c.ranks[1];
    // number of blocks of size >= k is r_{k-1} - r_k
    std::vector<int> ge;
    for (std::size_t k = 1; k < c.ranks.size(); ++k) ge.push_back(c.ranks[k - 1] - c.ranks[k]);
    for (std::size_t k = 0; k < ge.size(); ++k) {
      int exact = ge[k] - (k + 1 < ge.size() ? ge[k + 1] : 0);
      for (int j = 0; j < exact; ++j) c.block_sizes.push_back(int(k + 1));
    }
    std::sort(c.block_sizes.rbegin(), c.block_sizes.rend());
  }
  std::sort(out.begin(), out.end(),
            [](const EigenCluster& a, const EigenCluster& b) { return std::abs(a.lambda) > std::abs(b.lambda); });
  return out;
}

}  // namespace xxzim
