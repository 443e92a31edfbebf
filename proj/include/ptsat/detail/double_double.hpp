#pragma once

// Double-double ("dd") arithmetic: an unevaluated sum hi + lo of two doubles
// carrying ~106 bits of significand. Only the handful of operations the
// power-series kernels need are provided.

#include <cmath>
#include <complex>

namespace ptsat::detail {

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DD() = default;
  constexpr DD(double h) : hi(h) {}  // NOLINT(google-explicit-constructor)
  constexpr DD(double h, double l) : hi(h), lo(l) {}

  [[nodiscard]] double value() const { return hi + lo; }
};

inline DD quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
#if defined(__FMA__) || defined(__FP_FAST_FMA)
  return {p, std::fma(a, b, -p)};
#else
  // Dekker split
  constexpr double kSplit = 134217729.0;  // 2^27 + 1
  const double ta = kSplit * a;
  const double ah = ta - (ta - a);
  const double al = a - ah;
  const double tb = kSplit * b;
  const double bh = tb - (tb - b);
  const double bl = b - bh;
  return {p, ((ah * bh - p) + ah * bl + al * bh) + al * bl};
#endif
}

inline DD operator+(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  const DD t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline DD operator*(DD a, double b) {
  DD p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline DD operator/(DD a, DD b) {
  const double q1 = a.hi / b.hi;
  DD r = a - b * q1;
  const double q2 = r.hi / b.hi;
  r = r - b * q2;
  const double q3 = r.hi / b.hi;
  return quick_two_sum(q1, q2) + DD(q3);
}

// Complex number with double-double components.
struct ComplexDD {
  DD re;
  DD im;

  constexpr ComplexDD() = default;
  constexpr ComplexDD(DD r, DD i) : re(r), im(i) {}
  ComplexDD(std::complex<double> z)  // NOLINT(google-explicit-constructor)
      : re(z.real()), im(z.imag()) {}

  [[nodiscard]] std::complex<double> value() const {
    return {re.value(), im.value()};
  }
};

inline ComplexDD operator+(const ComplexDD& a, const ComplexDD& b) {
  return {a.re + b.re, a.im + b.im};
}

inline ComplexDD operator-(const ComplexDD& a, const ComplexDD& b) {
  return {a.re - b.re, a.im - b.im};
}

inline ComplexDD operator*(const ComplexDD& a, const ComplexDD& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline ComplexDD operator*(const ComplexDD& a, DD s) {
  return {a.re * s, a.im * s};
}

inline ComplexDD operator/(const ComplexDD& a, const ComplexDD& b) {
  const DD norm = b.re * b.re + b.im * b.im;
  const ComplexDD num{a.re * b.re + a.im * b.im, a.im * b.re - a.re * b.im};
  return {num.re / norm, num.im / norm};
}

inline double abs_approx(const ComplexDD& z) { return std::abs(z.value()); }
inline double abs_approx(const std::complex<double>& z) { return std::abs(z); }

inline std::complex<double> to_complex(const ComplexDD& z) { return z.value(); }
inline std::complex<double> to_complex(const std::complex<double>& z) {
  return z;
}

// Machine epsilon of the accumulator type, used by the cancellation
// estimates of the series kernels.
template <class C>
constexpr double accumulator_epsilon();
template <>
constexpr double accumulator_epsilon<std::complex<double>>() {
  return 1.1102230246251565e-16;
}
template <>
constexpr double accumulator_epsilon<ComplexDD>() {
  return 1.2325951644078310e-32;
}

}  // namespace ptsat::detail
