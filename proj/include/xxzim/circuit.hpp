// Influence matrix by direct contraction of the brickwork circuit with a finite bath,
// and a dense chain simulation used as an oracle for local correlators.
#pragma once

#include <functional>
#include <vector>

#include "core.hpp"
#include "im.hpp"

namespace xxzim {

// g acting on sites (a, a+1) of an L-site register
inline MatX dense_two_site(const Mat4& g, int a, int L) {
  const std::size_t d = std::size_t(1) << L;
  const int sh = L - 2 - a;
  MatX out = MatX::Zero(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    int in = (j >> sh) & 3;
    std::size_t base = j & ~(std::size_t(3) << sh);
    for (int o = 0; o < 4; ++o)
      if (g(o, in) != cplx(0)) out(base | (std::size_t(o) << sh), j) += g(o, in);
  }
  return out;
}

inline MatX dense_one_site(const Mat2& g, int a, int L) {
  const std::size_t d = std::size_t(1) << L;
  const int sh = L - 1 - a;
  MatX out = MatX::Zero(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    int in = (j >> sh) & 1;
    std::size_t base = j & ~(std::size_t(1) << sh);
    for (int o = 0; o < 2; ++o)
      if (g(o, in) != cplx(0)) out(base | (std::size_t(o) << sh), j) += g(o, in);
  }
  return out;
}

// column spin (first factor) fixed to out/in, acting on the adjacent bath spin
inline Mat2 column_slice(const Mat4& g, int so, int si) {
  Mat2 m;
  for (int bo = 0; bo < 2; ++bo)
    for (int bi = 0; bi < 2; ++bi) m(bo, bi) = g(2 * so + bo, 2 * si + bi);
  return m;
}

// bath of nb sites (default 2N, the light cone); bath site 0 touches the column
inline InfluenceMatrix im_circuit(const ModelParams& p, int nb = 0) {
  p.validate();
  const int n = p.n_half, m = 2 * n;
  if (nb <= 0) nb = m;
  check_capacity(std::max(nb * 2, p.sites()));
  const std::size_t d = std::size_t(1) << nb;
  const Mat4 u = gate(p.eta, p.u);
  const Mat4 ui = u.inverse();

  MatX bl = MatX::Identity(d, d), al = MatX::Identity(d, d);
  for (int a = 0; a + 1 < nb; a += 2) bl = dense_two_site(u, a, nb) * bl;
  for (int a = 1; a + 1 < nb; a += 2) al = dense_two_site(u, a, nb) * al;
  const MatX bal = bl * al, bali = bal.inverse();

  MatX rho = MatX::Identity(d, d);
  for (int a = 0; a < nb; ++a) rho = dense_one_site(rho_q(p.q_weight), a, nb) * rho;

  // F[a][b] advances one period with column out a, in b; G is the backward branch
  MatX f[2][2], g[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      f[a][b] = bal * dense_one_site(column_slice(u, a, b), 0, nb);
      g[a][b] = dense_one_site(column_slice(ui, a, b), 0, nb) * bali;
    }

  // rows: X_s = V_s rho flattened row-major, s_1 most significant
  const std::size_t ns = std::size_t(1) << m;
  MatX rows(ns, d * d);
  std::function<void(int, std::size_t, const MatX&)> fwd = [&](int k, std::size_t idx, const MatX& x) {
    if (k == n) {
      MatX xt = x.transpose();
      rows.row(idx) = Eigen::Map<const VecX>(xt.data(), d * d).transpose();
      return;
    }
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1) fwd(k + 1, (idx << 2) | (s0 << 1) | s1, f[s1][s0] * x);
  };
  fwd(0, 0, rho);

  InfluenceMatrix im;
  im.n_half = n;
  im.params = p;
  im.method = "circuit";
  im.amp = VecX::Zero(std::size_t(1) << (2 * m));
  std::vector<int> sb(m), s(m);
  std::function<void(int, std::size_t, const MatX&)> bwd = [&](int k, std::size_t idx, const MatX& w) {
    if (k == n) {
      VecX tr = rows * Eigen::Map<const VecX>(w.data(), d * d);
      for (int j = 0; j < m; ++j) sb[j] = (idx >> (m - 1 - j)) & 1;
      for (std::size_t a = 0; a < ns; ++a) {
        for (int j = 0; j < m; ++j) s[j] = (a >> (m - 1 - j)) & 1;
        im.amp(pair_index(m, sb.data(), s.data())) = tr(a);
      }
      return;
    }
    for (int b0 = 0; b0 < 2; ++b0)
      for (int b1 = 0; b1 < 2; ++b1) bwd(k + 1, (idx << 2) | (b0 << 1) | b1, w * g[b0][b1]);
  };
  bwd(0, 0, MatX::Identity(d, d));
  return im;
}

// left eigenvector of the temporal TM normalised by <l|I> = 1:
// rho(q) on slot 1, the IM shifted by one slot, and a trace on slot 2N
inline InfluenceMatrix mirrored_im(const InfluenceMatrix& im) {
  const int n = im.n_half, m = 2 * n;
  const Mat2 rho = rho_q(im.params.q_weight);
  InfluenceMatrix out = im;
  out.method = im.method + "-mirrored";
  out.amp = VecX::Zero(im.amp.size());
  VecX inner;
  if (n == 1) {
    inner = VecX::Ones(1);
  } else {
    ModelParams q = im.params;
    q.n_half = n - 1;
    inner = im_circuit(q).amp;
  }
  std::vector<int> sb(m), s(m);
  for (std::size_t i = 0; i < std::size_t(im.amp.size()); ++i) {
    unpack_pairs(m, i, sb.data(), s.data());
    if (sb[0] != s[0] || sb[m - 1] != s[m - 1]) continue;
    out.amp(i) = rho(s[0], s[0]) * inner(pair_index(m - 2, sb.data() + 1, s.data() + 1));
  }
  return out;
}

// <obs> after N periods on an open chain with the probe site in the middle,
// bath sites in rho(q) and the probe in rho1; rho <- U rho U^{-1} on the full register
inline bool is_unitary(const Mat4& g, double tol = 1e-12) {
  return max_abs(g * g.adjoint() - Mat4::Identity()) <= tol;
}

// unitary gates: the product initial state is split into weighted pure product states (site-wise
// eigenvectors), evolved in batches; needs L qubits instead of 2L
inline cplx dense_correlator_pure(const ModelParams& p, const Mat2& rho1, const Mat2& obs, int half_width = 0) {
  const int n = p.n_half;
  const int k = half_width > 0 ? half_width : 2 * n;
  const int L = 2 * k + 1, c = k;
  check_capacity(L);
  const Mat4 u = gate(p.eta, p.u);
  if (!is_unitary(u)) throw RangeError("pure-state oracle needs unitary gates");
  const std::size_t d = std::size_t(1) << L;

  // eigen-decomposition of each site's initial state
  struct Branch {
    double w;
    Eigen::Vector2cd v;
  };
  auto branches = [](const Mat2& r) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (r + r.adjoint()));
    std::vector<Branch> b;
    for (int i = 0; i < 2; ++i)
      if (std::abs(es.eigenvalues()(i)) > 0) b.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
    return b;
  };
  const auto bath = branches(rho_q(p.q_weight)), sys = branches(rho1);
  std::vector<std::vector<Branch>> site(L);
  for (int a = 0; a < L; ++a) site[a] = a == c ? sys : bath;
  std::size_t nterms = 1;
  for (auto& b : site) nterms *= b.size();

  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t batch = std::min<std::size_t>(nterms, 64);
  RowMat x(d, batch);
  std::vector<double> wt(batch);
  auto apply2 = [&](RowMat& r, int a, const Mat4& g) {
    const int sh = L - 2 - a;
    const Eigen::Index B = r.cols();
    std::vector<cplx> in(4 * B);
    for (std::size_t j = 0; j < d; ++j) {
      if ((j >> sh) & 3) continue;
      for (int o = 0; o < 4; ++o)
        for (Eigen::Index col = 0; col < B; ++col) in[o * B + col] = r(j | (std::size_t(o) << sh), col);
      for (int o = 0; o < 4; ++o) {
        cplx* out = &r(j | (std::size_t(o) << sh), 0);
        for (Eigen::Index col = 0; col < B; ++col) out[col] = 0;
        for (int i = 0; i < 4; ++i) {
          const cplx gi = g(o, i);
          if (gi == cplx(0)) continue;
          for (Eigen::Index col = 0; col < B; ++col) out[col] += gi * in[i * B + col];
        }
      }
    }
  };
  cplx total = 0;
  for (std::size_t start = 0; start < nterms; start += batch) {
    const std::size_t nb = std::min(batch, nterms - start);
    x.setZero(d, nb);
    for (std::size_t t = 0; t < nb; ++t) {
      std::size_t code = start + t;
      Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
      double w = 1;
      for (int a = 0; a < L; ++a) {
        const auto& br = site[a][code % site[a].size()];
        code /= site[a].size();
        w *= br.w;
        Eigen::VectorXcd next(psi.size() * 2);
        next.head(psi.size()) = psi * br.v(0);
        next.tail(psi.size()) = psi * br.v(1);
        psi = next;
      }
      x.col(t) = psi;
      wt[t] = w;
    }
    for (int step = 0; step < n; ++step)
      for (int parity : {1, 0})
        for (int a = 0; a + 1 < L; ++a)
          if (((a - c) % 2 + 2) % 2 == parity) apply2(x, a, u);
    const int sh = L - 1 - c;
    for (std::size_t t = 0; t < nb; ++t) {
      cplx e = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const int bj = (j >> sh) & 1;
        for (int bo = 0; bo < 2; ++bo) {
          cplx o = obs(bo, bj);
          if (o == cplx(0)) continue;
          std::size_t jo = (j & ~(std::size_t(1) << sh)) | (std::size_t(bo) << sh);
          e += std::conj(x(jo, t)) * o * x(j, t);
        }
      }
      total += wt[t] * e;
    }
  }
  return total;
}

inline cplx dense_correlator_mixed(const ModelParams& p, const Mat2& rho1, const Mat2& obs, int half_width = 0) {
  const int n = p.n_half;
  const int k = half_width > 0 ? half_width : 2 * n;
  const int L = 2 * k + 1, c = k;
  check_capacity(2 * L);
  const std::size_t d = std::size_t(1) << L;
  const Mat4 u = gate(p.eta, p.u), ui = u.inverse();

  // rows of r are kets; columns see U^{-1} from the right
  auto left2 = [&](MatX& r, int a, const Mat4& g) {
    const int sh = L - 2 - a;
    for (std::size_t j = 0; j < d; ++j) {
      if ((j >> sh) & 3) continue;
      std::size_t idx[4];
      for (int o = 0; o < 4; ++o) idx[o] = j | (std::size_t(o) << sh);
      for (Eigen::Index col = 0; col < r.cols(); ++col) {
        cplx in[4];
        for (int o = 0; o < 4; ++o) in[o] = r(idx[o], col);
        for (int o = 0; o < 4; ++o) {
          cplx acc = 0;
          for (int i = 0; i < 4; ++i) acc += g(o, i) * in[i];
          r(idx[o], col) = acc;
        }
      }
    }
  };
  auto layer = [&](MatX& r, int parity) {
    for (int a = 0; a + 1 < L; ++a)
      if (((a - c) % 2 + 2) % 2 == parity) {
        left2(r, a, u);
        r.transposeInPlace();
        left2(r, a, ui.transpose());
        r.transposeInPlace();
      }
  };

  MatX rho = MatX::Identity(1, 1);
  for (int a = 0; a < L; ++a) {
    Mat2 s = a == c ? rho1 : rho_q(p.q_weight);
    MatX next(rho.rows() * 2, rho.cols() * 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) next.block(i * rho.rows(), j * rho.cols(), rho.rows(), rho.cols()) = rho * s(i, j);
    rho = next;
  }
  // chain position x = site - c; odd layer first, then even
  for (int t = 0; t < n; ++t) {
    layer(rho, 1);
    layer(rho, 0);
  }
  return (dense_one_site(obs, c, L) * rho).trace();
}

// chooses the pure-state route for unitary gates
inline cplx dense_correlator(const ModelParams& p, const Mat2& rho1, const Mat2& obs, int half_width = 0) {
  if (is_unitary(gate(p.eta, p.u))) return dense_correlator_pure(p, rho1, obs, half_width);
  return dense_correlator_mixed(p, rho1, obs, half_width);
}

}  // namespace xxzim
