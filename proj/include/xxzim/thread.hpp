// Threading a 2-dim auxiliary space through a chain of two-site factors (aux, site).
// Site 0 is the most significant bit of a state index; bit 0 is spin up.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace xxzim {

template <class S>
struct AuxFactor {
  int site = -1;  // -1: acts on the auxiliary space only (2x2 in m[0],m[1],m[4],m[5])
  std::array<S, 16> m{};  // row-major 4x4, index 2*aux + site_bit
  S operator()(int r, int c) const { return m[4 * r + c]; }
};

template <class S>
struct AuxState {
  std::vector<S> a0, a1;  // auxiliary up / down components
};

inline bool is_zero(const std::complex<double>& z) { return z.real() == 0 && z.imag() == 0; }

// ket <- F ket
template <class S>
void apply_factor(AuxState<S>& st, const AuxFactor<S>& f, int L) {
  const std::size_t dim = st.a0.size();
  if (f.site < 0) {
    for (std::size_t i = 0; i < dim; ++i) {
      S x = st.a0[i], y = st.a1[i];
      st.a0[i] = f.m[0] * x + f.m[1] * y;
      st.a1[i] = f.m[4] * x + f.m[5] * y;
    }
    return;
  }
  const std::size_t mask = std::size_t(1) << (L - 1 - f.site);
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const std::size_t j = i | mask;
    S in[4] = {st.a0[i], st.a0[j], st.a1[i], st.a1[j]};
    if (is_zero(in[0]) && is_zero(in[1]) && is_zero(in[2]) && is_zero(in[3])) continue;
    S out[4];
    for (int r = 0; r < 4; ++r) {
      out[r] = f.m[4 * r] * in[0];
      for (int c = 1; c < 4; ++c)
        if (!is_zero(f.m[4 * r + c])) out[r] += f.m[4 * r + c] * in[c];
    }
    st.a0[i] = out[0];
    st.a0[j] = out[1];
    st.a1[i] = out[2];
    st.a1[j] = out[3];
  }
}

template <class S>
AuxFactor<S> transposed(const AuxFactor<S>& f) {
  AuxFactor<S> t = f;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) t.m[4 * r + c] = f.m[4 * c + r];
  return t;
}

// <aux_out| F_1 ... F_n |aux_in> applied to x
template <class S>
std::vector<S> thread_ket(const std::vector<AuxFactor<S>>& fs, const std::vector<S>& x, int aux_out,
                          int aux_in, int L, const S& zero) {
  AuxState<S> st;
  st.a0.assign(x.size(), zero);
  st.a1.assign(x.size(), zero);
  (aux_in == 0 ? st.a0 : st.a1) = x;
  for (auto it = fs.rbegin(); it != fs.rend(); ++it) apply_factor(st, *it, L);
  return aux_out == 0 ? std::move(st.a0) : std::move(st.a1);
}

// row vector y^T = x^T <aux_out| F_1 ... F_n |aux_in>
template <class S>
std::vector<S> thread_bra(const std::vector<AuxFactor<S>>& fs, const std::vector<S>& x, int aux_out,
                          int aux_in, int L, const S& zero) {
  AuxState<S> st;
  st.a0.assign(x.size(), zero);
  st.a1.assign(x.size(), zero);
  (aux_out == 0 ? st.a0 : st.a1) = x;
  for (const auto& f : fs) apply_factor(st, transposed(f), L);
  return aux_in == 0 ? std::move(st.a0) : std::move(st.a1);
}

// tr_0(F_1 ... F_n) x
template <class S>
std::vector<S> thread_trace(const std::vector<AuxFactor<S>>& fs, const std::vector<S>& x, int L,
                            const S& zero) {
  auto y0 = thread_ket(fs, x, 0, 0, L, zero);
  auto y1 = thread_ket(fs, x, 1, 1, L, zero);
  for (std::size_t i = 0; i < y0.size(); ++i) y0[i] += y1[i];
  return y0;
}

inline int popcount_sites(std::uint64_t x) { return __builtin_popcountll(x); }

}  // namespace xxzim
