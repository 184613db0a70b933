// Minimal arbitrary-precision complex numbers on top of MPFR reals.
#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <complex>

namespace xxzim {

using mpreal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                             boost::multiprecision::et_off>;

// sets the working precision of newly created mpreal values for its lifetime
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits) : saved_(mpreal::default_precision()) {
    mpreal::default_precision(digits);
  }
  ~PrecisionScope() { mpreal::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

struct MpComplex {
  mpreal re, im;
  MpComplex() : re(0), im(0) {}
  MpComplex(const mpreal& r, const mpreal& i = mpreal(0)) : re(r), im(i) {}
  MpComplex(const std::complex<double>& z) : re(z.real()), im(z.imag()) {}
  MpComplex(double r) : re(r), im(0) {}

  MpComplex& operator+=(const MpComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  MpComplex& operator-=(const MpComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  MpComplex& operator*=(const MpComplex& o) {
    mpreal r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  std::complex<double> to_double() const {
    return {re.convert_to<double>(), im.convert_to<double>()};
  }
};

inline MpComplex operator+(MpComplex a, const MpComplex& b) { return a += b; }
inline MpComplex operator-(MpComplex a, const MpComplex& b) { return a -= b; }
inline MpComplex operator*(MpComplex a, const MpComplex& b) { return a *= b; }
inline MpComplex operator-(const MpComplex& a) { return {-a.re, -a.im}; }
inline MpComplex operator/(const MpComplex& a, const MpComplex& b) {
  mpreal d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline mpreal abs(const MpComplex& a) { return sqrt(a.re * a.re + a.im * a.im); }
inline bool is_zero(const MpComplex& z) { return z.re.is_zero() && z.im.is_zero(); }

inline MpComplex sinh(const MpComplex& z) {
  return {sinh(z.re) * cos(z.im), cosh(z.re) * sin(z.im)};
}
inline MpComplex exp(const MpComplex& z) {
  mpreal e = exp(z.re);
  return {e * cos(z.im), e * sin(z.im)};
}
inline MpComplex pow_int(MpComplex z, long n) {
  if (n < 0) return MpComplex(1.0) / pow_int(z, -n);
  MpComplex r(1.0);
  while (n) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

}  // namespace xxzim
