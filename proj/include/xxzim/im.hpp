// Influence-matrix container, temporal index conventions, physicality checks and IO.
//
// An IM over 2N half-steps is a vector over 4N temporal sites ordered
// (sbar_2N, ..., sbar_1, s_1, ..., s_2N), the first index being the most significant bit.
#pragma once

#include <Eigen/Eigenvalues>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"

namespace xxzim {

struct InfluenceMatrix {
  int n_half = 0;
  VecX amp;
  std::string method;
  ModelParams params;
  int digits = 0;                   // bethe route only
  std::vector<double> eps_ladder;   // bethe route only
  double extrapolation_error = 0;   // bethe route only
};

inline int default_cap_qubits() {
  if (const char* env = std::getenv("IM_CAP_QUBITS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 20;
}

inline void check_capacity(int qubits, int cap = default_cap_qubits()) {
  if (qubits > cap)
    throw CapacityError("state of " + std::to_string(qubits) + " qubits exceeds cap " +
                        std::to_string(cap));
}

inline int log2_dim(std::size_t dim) {
  int L = 0;
  while ((std::size_t(1) << L) < dim) ++L;
  if ((std::size_t(1) << L) != dim) throw DimensionError("dimension is not a power of two");
  return L;
}

// sb[k] = sbar_{k+1}, s[k] = s_{k+1}, k = 0..m-1 for m pairs
inline std::size_t pair_index(int m, const int* sb, const int* s) {
  std::size_t idx = 0;
  for (int k = m - 1; k >= 0; --k) idx = (idx << 1) | sb[k];
  for (int k = 0; k < m; ++k) idx = (idx << 1) | s[k];
  return idx;
}

inline void unpack_pairs(int m, std::size_t idx, int* sb, int* s) {
  for (int k = m - 1; k >= 0; --k) s[k] = (idx >> (m - 1 - k)) & 1;
  for (int k = 0; k < m; ++k) sb[k] = (idx >> (m + k)) & 1;
}

// sum over s_m = sbar_m of an m-pair object; these are the outermost bits
inline VecX trace_last_pair(const VecX& x, int m) {
  const std::size_t inner = std::size_t(1) << (2 * m - 2);
  const std::size_t top = std::size_t(1) << (2 * m - 1);
  VecX r = VecX::Zero(inner);
  for (std::size_t j = 0; j < inner; ++j) r(j) = x(j << 1) + x(top | (j << 1) | 1);
  return r;
}

struct ReductionStep {
  VecX reduced;     // m-2 pairs
  double residual;  // deviation of the traced object from delta x reduced
};

// sum_{s_m = sbar_m} I = delta_{s_{m-1}, sbar_{m-1}} I'
inline ReductionStep reduce_once(const VecX& x, int m, const VecX* reference = nullptr) {
  if (m < 2) throw DimensionError("reduction needs at least two pairs");
  VecX r = trace_last_pair(x, m);
  const int mm = m - 1;
  const std::size_t inner = std::size_t(1) << (2 * mm - 2);
  const std::size_t top = std::size_t(1) << (2 * mm - 1);
  VecX sub(inner);
  for (std::size_t j = 0; j < inner; ++j) sub(j) = r(j << 1);
  const VecX& ref = reference ? *reference : sub;
  if (ref.size() != VecX::Index(inner)) throw DimensionError("reference IM has wrong size");
  double res = 0;
  for (std::size_t j = 0; j < inner; ++j) {
    res = std::max(res, std::abs(r(j << 1) - ref(j)));
    res = std::max(res, std::abs(r(top | (j << 1) | 1) - ref(j)));
    res = std::max(res, std::abs(r(top | (j << 1))));
    res = std::max(res, std::abs(r((j << 1) | 1)));
  }
  return {sub, res};
}

// residual of the reduction identity at pair n (odd n is checked together with n+1);
// the cascade above n uses the IM's own reduced objects
inline double check_reduction(const InfluenceMatrix& im, int n, const VecX* reference = nullptr) {
  const int top = 2 * im.n_half;
  if (n < 1 || n > top) throw DimensionError("reduction index out of range");
  if (im.amp.size() != (VecX::Index(1) << (2 * top))) throw DimensionError("IM has wrong size");
  int level = (n % 2) ? n + 1 : n;
  VecX x = im.amp;
  for (int m = top; m > level; m -= 2) x = reduce_once(x, m).reduced;
  return reduce_once(x, level, reference).residual;
}

struct CascadeResult {
  cplx scalar;
  double max_residual;
};

inline CascadeResult reduction_cascade(const InfluenceMatrix& im) {
  VecX x = im.amp;
  double res = 0;
  for (int m = 2 * im.n_half; m >= 2; m -= 2) {
    auto st = reduce_once(x, m);
    res = std::max(res, st.residual);
    x = st.reduced;
  }
  return {x(0), res};
}

// rho^I[s, sbar] = 2^{-N} I, rows s and columns sbar, both with index 1 most significant
inline MatX choi_matrix(const InfluenceMatrix& im) {
  const int m = 2 * im.n_half;
  const std::size_t d = std::size_t(1) << m;
  MatX c(d, d);
  std::vector<int> sb(m), s(m);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      for (int k = 0; k < m; ++k) {
        s[k] = (a >> (m - 1 - k)) & 1;
        sb[k] = (b >> (m - 1 - k)) & 1;
      }
      c(a, b) = im.amp(pair_index(m, sb.data(), s.data()));
    }
  return c * std::ldexp(1.0, -im.n_half);
}

struct ChoiReport {
  double hermiticity;
  double min_eigenvalue;
  cplx trace;
};

inline ChoiReport choi_check(const InfluenceMatrix& im) {
  MatX c = choi_matrix(im);
  double herm = max_abs(c - c.adjoint());
  MatX h = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<MatX> es(h, Eigen::EigenvaluesOnly);
  return {herm, es.eigenvalues().minCoeff(), c.trace()};
}

// <I_l| O(2N+1) rho(1) |I_r>: the left IM sees temporal slots 2..2N+1
inline cplx correlator_one_point(const InfluenceMatrix& im_l, const InfluenceMatrix& im_r,
                                 const Mat2& rho1, const Mat2& obs) {
  if (im_l.n_half != im_r.n_half) throw DimensionError("IMs with different N");
  if (std::abs(rho1.trace() - 1.0) > 1e-12) throw RangeError("rho1 must have unit trace");
  const int m = 2 * im_r.n_half;
  const std::size_t cfg = std::size_t(1) << (m + 1);
  std::vector<int> sb(m + 1), s(m + 1);
  cplx tot = 0;
  for (std::size_t a = 0; a < cfg; ++a) {
    for (int k = 0; k <= m; ++k) sb[k] = (a >> k) & 1;
    for (std::size_t b = 0; b < cfg; ++b) {
      for (int k = 0; k <= m; ++k) s[k] = (b >> k) & 1;
      cplx w = rho1(s[0], sb[0]) * obs(s[m], sb[m]);
      if (w == cplx(0)) continue;
      cplx r = im_r.amp(pair_index(m, sb.data(), s.data()));
      if (r == cplx(0)) continue;
      tot += w * r * im_l.amp(pair_index(m, sb.data() + 1, s.data() + 1));
    }
  }
  return tot;
}

// sigma^y on every other temporal site (1-based odd): maps IMs to eigenvectors of the tilde TM
inline VecX sigma_y_odd_sites(const VecX& x) {
  const int L = log2_dim(x.size());
  std::size_t mask = 0;
  for (int p = 0; p < L; p += 2) mask |= std::size_t(1) << (L - 1 - p);
  VecX y = VecX::Zero(x.size());
  for (std::size_t i = 0; i < std::size_t(x.size()); ++i) {
    cplx ph = 1;
    for (int p = 0; p < L; p += 2) ph *= ((i >> (L - 1 - p)) & 1) ? -I_UNIT : I_UNIT;
    y(i ^ mask) = ph * x(i);
  }
  return y;
}

inline double normalized_distance(const VecX& a, const VecX& b) {
  double s = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / (s > 0 ? s : 1.0);
}

inline VecX random_state(int L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VecX x(std::size_t(1) << L);
  for (auto& z : x) z = cplx(g(rng), g(rng));
  return x;
}

inline nlohmann::json im_to_json(const InfluenceMatrix& im) {
  nlohmann::json j;
  j["n_half"] = im.n_half;
  j["ordering"] = "appendixC";
  std::vector<double> re(im.amp.size()), imag(im.amp.size());
  for (Eigen::Index i = 0; i < im.amp.size(); ++i) {
    re[i] = im.amp(i).real();
    imag[i] = im.amp(i).imag();
  }
  j["re"] = re;
  j["im"] = imag;
  if (!im.eps_ladder.empty()) {
    j["digits"] = im.digits;
    j["epsilon_ladder"] = im.eps_ladder;
  }
  return j;
}

inline InfluenceMatrix im_from_json(const nlohmann::json& j) {
  InfluenceMatrix im;
  im.n_half = j.at("n_half").get<int>();
  if (j.at("ordering").get<std::string>() != "appendixC")
    throw DimensionError("unsupported IM ordering");
  auto re = j.at("re").get<std::vector<double>>();
  auto imag = j.at("im").get<std::vector<double>>();
  if (re.size() != imag.size() || re.size() != (std::size_t(1) << (4 * im.n_half)))
    throw DimensionError("IM amplitude arrays have wrong length");
  im.amp.resize(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) im.amp(i) = cplx(re[i], imag[i]);
  if (j.contains("digits")) im.digits = j["digits"].get<int>();
  if (j.contains("epsilon_ladder")) im.eps_ladder = j["epsilon_ladder"].get<std::vector<double>>();
  im.method = "file";
  return im;
}

inline void save_im(const InfluenceMatrix& im, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << im_to_json(im).dump() << "\n";
}

inline InfluenceMatrix load_im(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return im_from_json(nlohmann::json::parse(f));
}

}  // namespace xxzim
