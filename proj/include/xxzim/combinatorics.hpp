// Exact Jordan-block statistics of the free-fermion transfer matrix and their saddle-point
// asymptotics. Integers are boost cpp_int throughout.
#pragma once

#include <array>
#include <boost/math/special_functions/zeta.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <vector>

#include "core.hpp"

namespace xxzim {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;
using Occupation = std::array<int, 4>;

struct GaussianBinomial {
  int M = 0, n = 0;
  std::vector<bigint> coeffs;  // V^[r], r = 0..n(M-n)
  bigint at(long r) const { return r < 0 || r >= long(coeffs.size()) ? bigint(0) : coeffs[r]; }
};

// [M n]_q = [M-1 n]_q + q^{M-n} [M-1 n-1]_q
inline GaussianBinomial gauss_binomial(int M, int n) {
  if (M < 0 || n < 0 || n > M) throw RangeError("gauss_binomial needs 0 <= n <= M");
  // row[k] holds [m k]_q for the current m
  std::vector<std::vector<bigint>> row(n + 1);
  row[0] = {1};
  for (int m = 1; m <= M; ++m)
    for (int k = std::min(m, n); k >= 1; --k) {
      std::vector<bigint> next(k * (m - k) + 1, 0);
      if (k <= m - 1)
        for (std::size_t r = 0; r < row[k].size(); ++r) next[r] += row[k][r];
      for (std::size_t r = 0; r < row[k - 1].size(); ++r) next[r + (m - k)] += row[k - 1][r];
      row[k] = std::move(next);
    }
  return {M, n, row[n]};
}

inline std::vector<bigint> poly_mul(const std::vector<bigint>& a, const std::vector<bigint>& b) {
  std::vector<bigint> c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline void check_occupation(int N, const Occupation& n) {
  if (N < 1) throw RangeError("N must be positive");
  for (int x : n)
    if (x < 0 || x > N) throw RangeError("occupation out of range");
}

// number of Jordan blocks of size d of the hopping operator on n particles in N sites
inline bigint block_count_sector(int N, int n, int d) {
  if (n < 0 || n > N || d < 1) throw RangeError("block_count_sector arguments out of range");
  const long top = long(n) * (N - n);
  if ((top - d) % 2 == 0) return 0;
  auto g = gauss_binomial(N, n);
  return g.at((top - (d - 1)) / 2) - g.at((top - (d + 1)) / 2);
}

// C^D for the tensor product of spin representations of dimensions d_1..d_4
inline std::map<int, bigint> su2_decomposition(const Occupation& d) {
  for (int x : d)
    if (x < 1) throw RangeError("representation dimensions must be >= 1");
  std::map<int, bigint> cur{{1, 1}};
  for (int da : d) {
    std::map<int, bigint> next;
    for (auto& [D, c] : cur)
      for (int e = std::abs(D - da) + 1; e <= D + da - 1; e += 2) next[e] += c;
    cur = std::move(next);
  }
  return cur;
}

inline bigint su2_multiplicity(int D, const Occupation& d) {
  if (D < 1) throw RangeError("D must be >= 1");
  auto m = su2_decomposition(d);
  auto it = m.find(D);
  return it == m.end() ? bigint(0) : it->second;
}

// Mult^D = sum_d C^D_d prod_alpha N^{d_alpha}_{n_alpha}; by linearity of the characters the
// sectors are folded in one at a time
inline std::map<int, bigint> multiplicity_table(int N, const Occupation& n) {
  check_occupation(N, n);
  std::map<int, bigint> cur{{1, 1}};
  for (int a = 0; a < 4; ++a) {
    std::map<int, bigint> next;
    for (int d = 1; d <= n[a] * (N - n[a]) + 1; ++d) {
      bigint c = block_count_sector(N, n[a], d);
      if (c == 0) continue;
      for (auto& [D, w] : cur)
        for (int e = std::abs(D - d) + 1; e <= D + d - 1; e += 2) next[e] += w * c;
    }
    cur = std::move(next);
  }
  return cur;
}

inline bigint total_multiplicity(int N, const Occupation& n, int D) {
  if (D < 1) throw RangeError("D must be >= 1");
  auto t = multiplicity_table(N, n);
  auto it = t.find(D);
  return it == t.end() ? bigint(0) : it->second;
}

inline long occupation_weight(int N, const Occupation& n) {
  long s = 0;
  for (int x : n) s += long(x) * (N - x);
  return s;
}

inline std::vector<bigint> product_polynomial(int N, const Occupation& n) {
  check_occupation(N, n);
  std::vector<bigint> p{1};
  for (int x : n) p = poly_mul(p, gauss_binomial(N, x).coeffs);
  return p;
}

// coefficient of q^{(S + D - sign)/2} in prod_alpha [N n_alpha]_q, sign = +1 or -1
inline bigint v_integral(int N, const Occupation& n, int D, int sign) {
  if (D < 1 || (sign != 1 && sign != -1)) throw RangeError("v_integral arguments out of range");
  const long k2 = occupation_weight(N, n) + D - sign;
  if (k2 % 2) return 0;
  auto p = product_polynomial(N, n);
  const long k = k2 / 2;
  return k < 0 || k >= long(p.size()) ? bigint(0) : p[k];
}

inline bigint binomial(int n, int k) {
  bigint r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline bigint dimension(int N, const Occupation& n) {
  bigint r = 1;
  for (int x : n) r *= binomial(N, x);
  return r;
}

// ---- saddle point ----

enum class SaddleOrder { leading, numeric };

inline double to_double(const bigint& x) { return x.convert_to<double>(); }

inline double saddle_leading(int N, const Occupation& n, int D) {
  const double S = double(occupation_weight(N, n)), w = S * (N + 1);
  if (S <= 0) throw RangeError("saddle point needs a nonempty occupation");
  return to_double(dimension(N, n)) * std::pow(std::cbrt(std::numbers::pi) / 6.0 * w, -1.5) * D *
         std::exp(-3.0 * D * D / (2.0 * w));
}

namespace detail {

// Bernoulli numbers B_0..B_m from sum_{k<m+1} binom(m+1,k) B_k = 0
inline std::vector<bigrat> bernoulli_numbers(int m) {
  std::vector<bigrat> b(m + 1);
  b[0] = 1;
  for (int j = 1; j <= m; ++j) {
    bigrat s = 0;
    for (int k = 0; k < j; ++k) s += bigrat(binomial(j + 1, k)) * b[k];
    b[j] = -s / (j + 1);
  }
  return b;
}

inline bigrat bernoulli_poly(int m, long x, const std::vector<bigrat>& b) {
  bigrat s = 0, xp = 1;
  // sum_k binom(m,k) B_k x^{m-k}, accumulated from k = m down
  for (int k = m; k >= 0; --k) {
    s += bigrat(binomial(m, k)) * b[k] * xp;
    xp *= x;
  }
  return s;
}

struct SaddleSeries {
  std::vector<double> coef;  // (-1)^{s+1} zeta(2s) A^(s) / (2s+1), s = 1..
};

// A^(s) = sum_alpha [B_{2s+1}(N+1) - B_{2s+1}(N-n+1) - B_{2s+1}(n+1)] / (N+1)^{2s}
inline SaddleSeries saddle_series(int N, const Occupation& n, int smax = 40) {
  auto b = bernoulli_numbers(2 * smax + 1);
  SaddleSeries out;
  for (int s = 1; s <= smax; ++s) {
    const bigrat den(boost::multiprecision::pow(bigint(N + 1), unsigned(2 * s)));
    const bigrat top = bernoulli_poly(2 * s + 1, N + 1, b);
    double ad = 0, amax = 0;
    for (int x : n) {
      double a = ((top - bernoulli_poly(2 * s + 1, N - x + 1, b) - bernoulli_poly(2 * s + 1, x + 1, b)) / den)
                     .convert_to<double>();
      ad += a;
      amax = std::max(amax, std::abs(a));
    }
    // the asymptotic tail starts where a sector coefficient reaches N+1
    if (amax >= N + 1) break;
    out.coef.push_back((s % 2 ? 1.0 : -1.0) * boost::math::zeta(2.0 * s) * ad / (2 * s + 1));
  }
  if (out.coef.empty()) throw ConvergenceError("no usable saddle series terms");
  return out;
}

// sum_s c_s x^{2s-1} and its x-derivative, truncated once terms drop below 1e-14 of the sum
inline std::pair<double, double> series_eval(const SaddleSeries& ser, double x) {
  double f = 0, df = 0;
  for (std::size_t i = 0; i < ser.coef.size(); ++i) {
    const int s = int(i) + 1;
    double t = ser.coef[i] * std::pow(x, 2 * s - 1);
    f += t;
    df += ser.coef[i] * (2 * s - 1) * (s > 1 ? std::pow(x, 2 * s - 2) : 1.0);
    if (s > 1 && std::abs(t) < 1e-14 * std::abs(f)) break;
  }
  return {f, df};
}

// V ~ P(q*) q*^{-k} / sqrt(2 pi phi''), q* = exp(2 pi x*/(N+1))
inline double v_saddle(int N, const Occupation& n, const SaddleSeries& ser, const std::vector<bigint>& poly,
                       int Dm) {
  const double target = std::numbers::pi * Dm / (2.0 * (N + 1));
  double x = 0;
  if (target > 0) {
    auto g = [&](double t) { return series_eval(ser, t).first - target; };
    if (g(0.999) < 0) throw ConvergenceError("saddle point outside the radius of convergence");
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(g, 0.0, 0.999, boost::math::tools::eps_tolerance<double>(50), it);
    if (it >= 200) throw ConvergenceError("saddle root finder did not converge");
    x = 0.5 * (r.first + r.second);
  }
  const double scale = (N + 1) / (2 * std::numbers::pi);
  const double phi2 = scale * scale * 2.0 * series_eval(ser, x).second;
  const double t = x / scale;  // log q*
  const double k = 0.5 * double(occupation_weight(N, n) + Dm);
  // log P(q*) summed stably
  double mx = -1e300;
  std::vector<double> lg(poly.size());
  for (std::size_t r = 0; r < poly.size(); ++r) {
    lg[r] = poly[r] == 0 ? -1e300 : std::log(to_double(poly[r])) + t * double(r);
    mx = std::max(mx, lg[r]);
  }
  double acc = 0;
  for (double l : lg) acc += std::exp(l - mx);
  return std::exp(mx + std::log(acc) - t * k) / std::sqrt(2 * std::numbers::pi * phi2);
}

}  // namespace detail

inline double saddle_multiplicity(int N, const Occupation& n, int D, SaddleOrder order) {
  check_occupation(N, n);
  if (D < 1) throw RangeError("D must be >= 1");
  if (order == SaddleOrder::leading) return saddle_leading(N, n, D);
  auto ser = detail::saddle_series(N, n);
  auto poly = product_polynomial(N, n);
  return detail::v_saddle(N, n, ser, poly, D - 1) - detail::v_saddle(N, n, ser, poly, D + 1);
}

// ---- brute-force oracle ----

// Jordan type of sum_alpha H_alpha, H_alpha hopping particles one site to the right inside
// sector alpha. The operator raises the total position by one, so rank(A^k) splits into blocks
// between grades r and r+k; ranks are computed modulo a large prime.
inline std::map<int, long> brute_force_jordan(int N, const Occupation& n) {
  check_occupation(N, n);
  if (N > 6) throw CapacityError("brute-force oracle is limited to N <= 6");
  constexpr std::uint64_t P = 2147483647ULL;
  std::vector<std::vector<unsigned>> cfg(4);
  for (int a = 0; a < 4; ++a)
    for (unsigned m = 0; m < (1u << N); ++m)
      if (__builtin_popcount(m) == n[a]) cfg[a].push_back(m);
  auto grade_of = [&](unsigned m) {
    int g = 0;
    for (int j = 0; j < N; ++j) g += ((m >> j) & 1) * j;
    return g;
  };
  // states grouped by grade
  using State = std::array<unsigned, 4>;
  std::map<int, std::vector<State>> by_grade;
  for (auto c0 : cfg[0])
    for (auto c1 : cfg[1])
      for (auto c2 : cfg[2])
        for (auto c3 : cfg[3]) {
          State s{c0, c1, c2, c3};
          int g = grade_of(c0) + grade_of(c1) + grade_of(c2) + grade_of(c3);
          by_grade[g].push_back(s);
        }
  const int gmin = by_grade.begin()->first, gmax = by_grade.rbegin()->first;
  std::map<int, std::map<State, std::size_t>> index;
  for (auto& [g, v] : by_grade)
    for (std::size_t i = 0; i < v.size(); ++i) index[g][v[i]] = i;
  using ModMat = std::vector<std::vector<std::uint64_t>>;
  // step[g]: grade g -> g+1, rows target
  std::map<int, ModMat> step;
  for (int g = gmin; g < gmax; ++g) {
    auto& src = by_grade[g];
    auto& dst = by_grade[g + 1];
    ModMat m(dst.size(), std::vector<std::uint64_t>(src.size(), 0));
    for (std::size_t i = 0; i < src.size(); ++i)
      for (int a = 0; a < 4; ++a)
        for (int j = 0; j + 1 < N; ++j) {
          unsigned c = src[i][a];
          if (((c >> j) & 1) && !((c >> (j + 1)) & 1)) {
            State t = src[i];
            t[a] = c ^ (1u << j) ^ (1u << (j + 1));
            m[index[g + 1][t]][i] += 1;
          }
        }
    step[g] = std::move(m);
  }
  auto mul = [&](const ModMat& a, const ModMat& b) {
    ModMat c(a.size(), std::vector<std::uint64_t>(b.empty() ? 0 : b[0].size(), 0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k) {
        if (!a[i][k]) continue;
        for (std::size_t j = 0; j < b[k].size(); ++j) c[i][j] = (c[i][j] + a[i][k] * b[k][j]) % P;
      }
    return c;
  };
  auto rank_mod = [&](ModMat m) {
    auto powmod = [&](std::uint64_t b, std::uint64_t e) {
      std::uint64_t r = 1;
      b %= P;
      while (e) {
        if (e & 1) r = r * b % P;
        b = b * b % P;
        e >>= 1;
      }
      return r;
    };
    long r = 0;
    const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && std::size_t(r) < rows; ++c) {
      std::size_t piv = r;
      while (piv < rows && !m[piv][c]) ++piv;
      if (piv == rows) continue;
      std::swap(m[piv], m[r]);
      std::uint64_t inv = powmod(m[r][c], P - 2);
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (!m[i][c]) continue;
        std::uint64_t f = m[i][c] * inv % P;
        for (std::size_t j = c; j < cols; ++j) m[i][j] = (m[i][j] + (P - f) * m[r][j]) % P;
      }
      ++r;
    }
    return r;
  };
  long total = 0;
  for (auto& [g, v] : by_grade) total += long(v.size());
  std::vector<long> ranks{total};
  // prod[g] = A^k restricted to grade g -> g+k
  std::map<int, ModMat> prod;
  for (int g = gmin; g <= gmax; ++g) {
    auto sz = by_grade.count(g) ? by_grade[g].size() : 0;
    ModMat id(sz, std::vector<std::uint64_t>(sz, 0));
    for (std::size_t i = 0; i < sz; ++i) id[i][i] = 1;
    prod[g] = std::move(id);
  }
  for (int k = 1; ranks.back() > 0; ++k) {
    long r = 0;
    std::map<int, ModMat> next;
    for (int g = gmin; g + k <= gmax; ++g) {
      next[g] = mul(step[g + k - 1], prod[g]);
      r += rank_mod(next[g]);
    }
    prod = std::move(next);
    ranks.push_back(r);
  }
  std::map<int, long> out;
  for (std::size_t k = 1; k < ranks.size(); ++k) {
    long ge = ranks[k - 1] - ranks[k];
    long ge_next = k + 1 < ranks.size() ? ranks[k] - ranks[k + 1] : 0;
    if (ge - ge_next) out[int(k)] = ge - ge_next;
  }
  return out;
}

// ---- tables ----

struct MultiplicityRow {
  int D;
  bigint exact;
  double leading, numeric, rel_err;
};

inline std::vector<MultiplicityRow> multiplicity_rows(int N, const Occupation& n, bool with_saddle,
                                                      SaddleOrder err_against = SaddleOrder::numeric) {
  std::vector<MultiplicityRow> rows;
  for (auto& [D, c] : multiplicity_table(N, n)) {
    if (c == 0) continue;
    MultiplicityRow r{D, c, NAN, NAN, NAN};
    if (with_saddle) {
      r.leading = saddle_multiplicity(N, n, D, SaddleOrder::leading);
      // far tails have no saddle inside the convergence radius
      try {
        r.numeric = saddle_multiplicity(N, n, D, SaddleOrder::numeric);
      } catch (const ConvergenceError&) {
      }
      double s = err_against == SaddleOrder::leading ? r.leading : r.numeric;
      if (!std::isnan(s)) r.rel_err = std::abs(s / to_double(c) - 1.0);
    }
    rows.push_back(r);
  }
  return rows;
}

// D range holding the central fraction of the multiplicity mass
inline std::pair<int, int> central_mass_window(const std::vector<MultiplicityRow>& rows, double frac = 0.5) {
  double tot = 0;
  for (auto& r : rows) tot += to_double(r.exact);
  const double lo = tot * (1 - frac) / 2, hi = tot * (1 + frac) / 2;
  double acc = 0;
  int dlo = rows.front().D, dhi = rows.back().D;
  bool lo_set = false;
  for (auto& r : rows) {
    double before = acc;
    acc += to_double(r.exact);
    if (!lo_set && acc >= lo) {
      dlo = r.D;
      lo_set = true;
    }
    if (before < hi) dhi = r.D;
  }
  return {dlo, dhi};
}

inline void write_multiplicity_csv(std::ostream& os, int N, const Occupation& n,
                                   const std::vector<MultiplicityRow>& rows) {
  os << "N,n1,n2,n3,n4,D,exact,saddle_leading,saddle_numeric,rel_err\n";
  char buf[128];
  for (auto& r : rows) {
    os << N << ',' << n[0] << ',' << n[1] << ',' << n[2] << ',' << n[3] << ',' << r.D << ',' << r.exact;
    if (std::isnan(r.leading)) {
      os << ",,,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, ",%.10e,%.10e,%.6e\n", r.leading, r.numeric, r.rel_err);
    os << buf;
  }
}

}  // namespace xxzim
