#pragma once

// Special functions of complex argument and complex order.
//
// Power series are summed first in double precision; when the running
// cancellation estimate says the result cannot be trusted to ~1e-13 the sum
// is repeated in double-double. Large arguments switch to the standard
// asymptotic expansions (Hankel for J/I, exponential forms for Ai/Bi).
// Every public function is pure and thread-safe.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>

#include "ptsat/detail/double_double.hpp"
#include "ptsat/errors.hpp"

namespace ptsat {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

namespace detail {

inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline Complex ensure_finite(Complex z, const char* what) {
  if (!is_finite(z)) throw RangeError(std::string(what) + ": non-finite result");
  return z;
}

// Non-positive integer test with exact equality; poles are only exact.
inline bool is_nonpositive_integer(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// sin(pi*x) and cos(pi*x) with argument reduction, exact at integers.
inline double sinpi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < -1.0) r += 2.0;
  if (r > 1.0) r -= 2.0;
  if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
  if (r > 0.5) return std::sin(kPi * (1.0 - r));
  if (r < -0.5) return -std::sin(kPi * (1.0 + r));
  return std::sin(kPi * r);
}

inline double cospi(double x) { return sinpi(x + 0.5); }

inline Complex sinpi(Complex z) {
  const double py = kPi * z.imag();
  return {sinpi(z.real()) * std::cosh(py), cospi(z.real()) * std::sinh(py)};
}

// Lanczos approximation, g = 7, nine terms.
inline Complex ln_gamma_right(Complex z) {
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  const Complex x = z - 1.0;
  Complex series = kCoef[0];
  for (std::size_t i = 1; i < kCoef.size(); ++i) {
    series += kCoef[i] / (x + static_cast<double>(i));
  }
  const Complex t = x + kG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (x + 0.5) * std::log(t) - t +
         std::log(series);
}

}  // namespace detail

// Principal branch of log Gamma(z).
inline Complex ln_gamma(Complex z) {
  if (detail::is_nonpositive_integer(z)) {
    throw PoleError("ln_gamma: pole at non-positive integer");
  }
  if (z.real() >= 0.5) {
    return detail::ensure_finite(detail::ln_gamma_right(z), "ln_gamma");
  }
  // Reflection; the 2*pi*i shift keeps the branch continuous off the
  // negative real axis.
  const double sign = z.imag() > 0.0 ? 1.0 : (z.imag() < 0.0 ? -1.0 : 0.0);
  const double shift = sign * 2.0 * kPi * std::floor(0.5 * z.real() + 0.25);
  const Complex value = Complex(std::log(kPi), shift) -
                        std::log(detail::sinpi(z)) -
                        detail::ln_gamma_right(1.0 - z);
  return detail::ensure_finite(value, "ln_gamma");
}

/// A function value together with its derivative with respect to the
/// argument.
struct ValueDerivative {
  Complex value;
  Complex derivative;
};

namespace detail {

// Sum of the ascending Bessel series without the (z/2)^nu / Gamma(nu+1)
// prefactor:
//   sum   = sum_k w^k / (k! (nu+1)_k)
//   dsum  = sum_k (nu+2k) w^k / (k! (nu+1)_k)
// with w = -z^2/4 (J) or +z^2/4 (I). The derivative of the full function is
// prefactor * dsum / z.
struct SeriesResult {
  Complex sum;
  Complex dsum;
  double rel_error = 0.0;  // estimated relative error of the worse of the two
};

template <class C>
std::optional<SeriesResult> bessel_series_sum(Complex nu, Complex z,
                                              bool modified) {
  constexpr int kMaxTerms = 600;
  const double eps = accumulator_epsilon<C>();
  const C zc(z);
  C w = zc * zc * C(Complex(modified ? 0.25 : -0.25));
  const C nuc(nu);

  C term(Complex(1.0));
  C sum = term;
  C dsum = nuc;
  double max_term = 1.0;
  double max_dterm = std::max(std::abs(nu), 1e-300);
  const double wabs = std::abs(z) * std::abs(z) / 4.0;

  bool converged = false;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double kp1 = k + 1.0;
    const C denom = (nuc + C(Complex(kp1))) * C(Complex(kp1));
    term = term * w / denom;
    const C dterm = term * (nuc + C(Complex(2.0 * kp1)));
    sum = sum + term;
    dsum = dsum + dterm;
    const double ta = abs_approx(term);
    const double da = abs_approx(dterm);
    max_term = std::max(max_term, ta);
    max_dterm = std::max(max_dterm, da);
    // Terms decrease monotonically once (k+1)|nu+k+1| exceeds |w|.
    const bool shrinking = kp1 * std::abs(nu + kp1) > 2.0 * wabs;
    if (shrinking && ta <= eps * max_term * 1e-2 && da <= eps * max_dterm * 1e-2) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;

  SeriesResult out{to_complex(sum), to_complex(dsum), 0.0};
  const double sa = std::abs(out.sum);
  const double da = std::abs(out.dsum);
  const double rel_sum = sa > 0.0 ? 8.0 * eps * max_term / sa : 1.0;
  const double rel_dsum = da > 0.0 ? 8.0 * eps * max_dterm / da : 1.0;
  out.rel_error = std::max(rel_sum, rel_dsum) + 4e-16;
  return out;
}

// Asymptotic coefficients a_k(nu) = prod_{j=1..k} (4nu^2 - (2j-1)^2) / (k! 8^k).
// Sums sum_k (+-1)^k a_k / z^k, stopping at the smallest term.
struct HankelSums {
  Complex alternating;  // sum (-1)^k a_k / z^k
  Complex plain;        // sum a_k / z^k
  Complex p_part;       // sum_{k even} (-1)^{k/2} a_k / z^k
  Complex q_part;       // sum_{k odd} (-1)^{(k-1)/2} a_k / z^k
};

inline std::optional<HankelSums> hankel_sums(Complex nu, Complex z) {
  constexpr int kMaxTerms = 400;
  const Complex mu = 4.0 * nu * nu;
  HankelSums s{1.0, 1.0, 1.0, 0.0};
  Complex term = 1.0;
  double prev = 1.0;
  double scale = 1.0;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * z);
    const double ta = std::abs(term);
    if (ta > prev && k > 2) break;  // asymptotic series started to diverge
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.alternating += sign * term;
    s.plain += term;
    switch (k % 4) {
      case 0: s.p_part += term; break;
      case 1: s.q_part += term; break;
      case 2: s.p_part -= term; break;
      case 3: s.q_part -= term; break;
    }
    scale = std::max(scale, ta);
    prev = ta;
    if (ta == 0.0 || ta < 1e-17 * std::abs(s.alternating)) {
      return s;
    }
  }
  // Truncated at the smallest term; accept only if that term is negligible.
  if (prev < 1e-14 * scale) return s;
  return std::nullopt;
}

inline std::optional<Complex> hankel_value(Complex nu, Complex z, bool modified) {
  const auto sums = hankel_sums(nu, z);
  if (!sums) return std::nullopt;
  if (!modified) {
    const Complex omega = z - 0.5 * kPi * nu - 0.25 * kPi;
    return std::sqrt(2.0 / (kPi * z)) *
           (sums->p_part * std::cos(omega) - sums->q_part * std::sin(omega));
  }
  const double sign = z.imag() >= 0.0 ? 1.0 : -1.0;
  const Complex root = std::sqrt(2.0 * kPi * z);
  const Complex i(0.0, 1.0);
  return std::exp(z) / root * sums->alternating +
         sign * i * std::exp(sign * i * kPi * nu) * std::exp(-z) / root *
             sums->plain;
}

inline constexpr double kBesselSeriesRadius = 40.0;
inline constexpr double kSeriesTrust = 1e-13;

inline std::optional<ValueDerivative> bessel_from_series(Complex nu, Complex z,
                                                         bool modified,
                                                         double trust) {
  auto r = bessel_series_sum<Complex>(nu, z, modified);
  if (!r || r->rel_error > kSeriesTrust) {
    r = bessel_series_sum<ComplexDD>(nu, z, modified);
  }
  if (!r || r->rel_error > trust) return std::nullopt;
  const Complex prefactor =
      std::exp(nu * std::log(0.5 * z) - ln_gamma(nu + 1.0));
  return ValueDerivative{prefactor * r->sum, prefactor * r->dsum / z};
}

inline std::optional<ValueDerivative> bessel_from_hankel(Complex nu, Complex z,
                                                         bool modified) {
  const auto v = hankel_value(nu, z, modified);
  const auto vm1 = hankel_value(nu - 1.0, z, modified);
  if (!v || !vm1) return std::nullopt;
  // J'_nu = J_{nu-1} - (nu/z) J_nu, and the same for I.
  return ValueDerivative{*v, *vm1 - nu / z * *v};
}

inline ValueDerivative bessel_at_origin(Complex nu, bool modified) {
  // Only reached for nu not a negative integer.
  if (nu == Complex(0.0)) return {1.0, 0.0};
  if (nu == Complex(1.0)) return {0.0, 0.5};
  if (nu.real() > 1.0) return {0.0, 0.0};
  if (nu.real() > 0.0) {
    throw RangeError("bessel: derivative is infinite at z = 0 for 0 < Re nu < 1");
  }
  (void)modified;
  throw RangeError("bessel: value is infinite at z = 0 for Re nu <= 0, nu != 0");
}

inline ValueDerivative bessel_eval(Complex nu, Complex z, bool modified) {
  const char* name = modified ? "bessel_i" : "bessel_j";
  // Negative integer order: J_{-n} = (-1)^n J_n, I_{-n} = I_n.
  if (is_nonpositive_integer(nu) && nu != Complex(0.0)) {
    const double n = -nu.real();
    ValueDerivative r = bessel_eval(Complex(n), z, modified);
    if (!modified && std::fmod(n, 2.0) != 0.0) {
      r.value = -r.value;
      r.derivative = -r.derivative;
    }
    return r;
  }
  if (z == Complex(0.0)) return bessel_at_origin(nu, modified);

  std::optional<ValueDerivative> r;
  if (std::abs(z) <= kBesselSeriesRadius) {
    r = bessel_from_series(nu, z, modified, 1e-11);
    if (!r) r = bessel_from_hankel(nu, z, modified);
  } else {
    r = bessel_from_hankel(nu, z, modified);
    if (!r) r = bessel_from_series(nu, z, modified, 1e-11);
  }
  if (!r) {
    throw ConvergenceError(std::string(name) +
                           ": neither the ascending series nor the asymptotic "
                           "expansion converges for this (nu, z)");
  }
  ensure_finite(r->value, name);
  ensure_finite(r->derivative, name);
  return *r;
}

}  // namespace detail

/// Bessel function of the first kind J_nu(z) and its derivative d/dz.
inline ValueDerivative bessel_j_pair(Complex nu, Complex z) {
  return detail::bessel_eval(nu, z, false);
}

/// Modified Bessel function of the first kind I_nu(z) and its derivative.
inline ValueDerivative bessel_i_pair(Complex nu, Complex z) {
  return detail::bessel_eval(nu, z, true);
}

inline Complex bessel_j(Complex nu, Complex z, bool derivative = false) {
  const auto r = bessel_j_pair(nu, z);
  return derivative ? r.derivative : r.value;
}

inline Complex bessel_i(Complex nu, Complex z, bool derivative = false) {
  const auto r = bessel_i_pair(nu, z);
  return derivative ? r.derivative : r.value;
}

enum class AiryKind { Ai, Bi };

/// Ai, Ai', Bi, Bi' at one point.
struct AiryValues {
  Complex ai;
  Complex ai_prime;
  Complex bi;
  Complex bi_prime;
};

namespace detail {

// Ai(0), -Ai'(0), Bi(0), Bi'(0) split as double-double.
inline constexpr DD kAi0{0.3550280538878172, 2.05233632436212e-17};
inline constexpr DD kMinusAip0{0.2588194037928068, -2.522243111610832e-17};
inline constexpr DD kBi0{0.6149266274460007, 5.0899207794891416e-17};
inline constexpr DD kBip0{0.4482883573538264, -2.5363237774417305e-17};

inline constexpr double kAirySeriesRadius = 9.0;

template <class C>
C scale(const C& a, DD s) {
  if constexpr (std::is_same_v<C, ComplexDD>) {
    return a * s;
  } else {
    return a * s.value();
  }
}

// Maclaurin series: Ai = c1 f - c2 g, Bi = sqrt3 (c1 f + c2 g) with
//   f = sum 3^k (1/3)_k z^{3k} / (3k)!,  g = sum 3^k (2/3)_k z^{3k+1} / (3k+1)!
template <class C>
std::optional<std::pair<AiryValues, double>> airy_series(Complex z) {
  constexpr int kMaxTerms = 400;
  const double eps = accumulator_epsilon<C>();
  const C zc(z);
  const C z2 = zc * zc;
  const C z3 = z2 * zc;

  C tf(Complex(1.0));            // f terms
  C tg = zc;                     // g terms
  C tfp = z2 * C(Complex(0.5));  // f' terms, starting at k = 1
  C tgp(Complex(1.0));           // g' terms
  C f = tf, g = tg, fp = tfp, gp = tgp;
  double mf = 1.0, mg = std::abs(z), mfp = std::abs(z) * std::abs(z) / 2.0, mgp = 1.0;
  const double z3a = std::pow(std::abs(z), 3);

  bool converged = false;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double a = 3.0 * k;
    tf = tf * z3 / C(Complex((a + 2.0) * (a + 3.0)));
    tg = tg * z3 / C(Complex((a + 3.0) * (a + 4.0)));
    tgp = tgp * z3 / C(Complex((a + 1.0) * (a + 3.0)));
    // f' recurrence runs one index ahead: d_{k+1} = d_k z^3 / (3k (3k+2)).
    const double b = 3.0 * (k + 1);
    tfp = tfp * z3 / C(Complex(b * (b + 2.0)));
    f = f + tf;
    g = g + tg;
    fp = fp + tfp;
    gp = gp + tgp;
    const double af = abs_approx(tf), ag = abs_approx(tg);
    const double afp = abs_approx(tfp), agp = abs_approx(tgp);
    mf = std::max(mf, af);
    mg = std::max(mg, ag);
    mfp = std::max(mfp, afp);
    mgp = std::max(mgp, agp);
    if ((a + 2.0) * (a + 3.0) > 2.0 * z3a) {
      const double small = eps * 1e-2;
      if (af <= small * mf && ag <= small * std::max(mg, 1e-300) &&
          afp <= small * std::max(mfp, 1e-300) && agp <= small * mgp) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) return std::nullopt;

  const C c1f = scale(f, kAi0), c2g = scale(g, kMinusAip0);
  const C c1fp = scale(fp, kAi0), c2gp = scale(gp, kMinusAip0);
  const C b1f = scale(f, kBi0), b2g = scale(g, kBip0);
  const C b1fp = scale(fp, kBi0), b2gp = scale(gp, kBip0);

  AiryValues v{to_complex(c1f - c2g), to_complex(c1fp - c2gp),
               to_complex(b1f + b2g), to_complex(b1fp + b2gp)};

  const double c1 = kAi0.value(), c2 = kMinusAip0.value();
  const double d1 = kBi0.value(), d2 = kBip0.value();
  auto rel = [eps](double magnitude, Complex value) {
    const double a = std::abs(value);
    return a > 0.0 ? 8.0 * eps * magnitude / a : (magnitude > 0.0 ? 1.0 : 0.0);
  };
  const double err = std::max({rel(c1 * mf + c2 * mg, v.ai),
                               rel(c1 * mfp + c2 * mgp, v.ai_prime),
                               rel(d1 * mf + d2 * mg, v.bi),
                               rel(d1 * mfp + d2 * mgp, v.bi_prime)}) +
                     4e-16;
  return std::make_pair(v, err);
}

// Exponential asymptotic form, valid for |arg z| <= 2pi/3:
//   Ai(z)  ~ e^{-zeta} / (2 sqrt(pi) z^{1/4}) sum (-1)^k u_k zeta^{-k}
//   Ai'(z) ~ -z^{1/4} e^{-zeta} / (2 sqrt(pi)) sum (-1)^k v_k zeta^{-k}
inline ValueDerivative ai_asymptotic_direct(Complex z) {
  constexpr int kMaxTerms = 200;
  const Complex zeta = 2.0 / 3.0 * std::pow(z, 1.5);
  const Complex quarter = std::pow(z, 0.25);
  Complex su = 1.0, sv = 1.0;
  double u = 1.0;
  Complex inv_zeta_pow = 1.0;
  double prev = 1.0;
  for (int k = 1; k < kMaxTerms; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
         ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    inv_zeta_pow /= -zeta;
    const Complex tu = u * inv_zeta_pow;
    const double ta = std::abs(tu);
    if (ta > prev) break;
    su += tu;
    sv += v * inv_zeta_pow;
    prev = ta;
    if (ta < 1e-17 * std::abs(su)) break;
  }
  if (prev > 1e-14) {
    throw ConvergenceError("airy: asymptotic expansion outside its valid range");
  }
  const Complex e = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
  return {e / quarter * su, -quarter * e * sv};
}

inline ValueDerivative ai_asymptotic(Complex z) {
  if (std::abs(std::arg(z)) <= 2.0 * kPi / 3.0) return ai_asymptotic_direct(z);
  // Ai(z) + w Ai(wz) + w^2 Ai(w^2 z) = 0 with w = e^{2 pi i / 3}; both
  // rotated points land inside |arg| <= pi/3 + tiny.
  const Complex w = std::polar(1.0, 2.0 * kPi / 3.0);
  const Complex w2 = w * w;
  const auto a = ai_asymptotic_direct(w * z);
  const auto b = ai_asymptotic_direct(w2 * z);
  return {-(w * a.value + w2 * b.value), -(w2 * a.derivative + w * b.derivative)};
}

inline AiryValues airy_asymptotic(Complex z) {
  const auto a = ai_asymptotic(z);
  // Bi(z) = e^{i pi/6} Ai(w z) + e^{-i pi/6} Ai(conj(w) z)
  const Complex w = std::polar(1.0, 2.0 * kPi / 3.0);
  const Complex wc = std::conj(w);
  const auto p = ai_asymptotic(w * z);
  const auto m = ai_asymptotic(wc * z);
  const Complex ep = std::polar(1.0, kPi / 6.0);
  const Complex em = std::conj(ep);
  return {a.value, a.derivative, ep * p.value + em * m.value,
          ep * w * p.derivative + em * wc * m.derivative};
}

}  // namespace detail

/// Ai, Ai', Bi, Bi' at z.
inline AiryValues airy_all(Complex z) {
  AiryValues v;
  if (std::abs(z) <= detail::kAirySeriesRadius) {
    auto r = detail::airy_series<Complex>(z);
    if (!r || r->second > detail::kSeriesTrust) {
      r = detail::airy_series<detail::ComplexDD>(z);
    }
    if (!r || r->second > 1e-11) {
      throw ConvergenceError("airy: Maclaurin series lost too much precision");
    }
    v = r->first;
  } else {
    v = detail::airy_asymptotic(z);
  }
  detail::ensure_finite(v.ai, "airy");
  detail::ensure_finite(v.ai_prime, "airy");
  detail::ensure_finite(v.bi, "airy");
  detail::ensure_finite(v.bi_prime, "airy");
  return v;
}

inline Complex airy(Complex z, AiryKind kind, bool derivative = false) {
  const AiryValues v = airy_all(z);
  if (kind == AiryKind::Ai) return derivative ? v.ai_prime : v.ai;
  return derivative ? v.bi_prime : v.bi;
}

/// Jacobi polynomial P_n^{(alpha,beta)}(z) from the explicit finite sum
///   sum_s C(n+alpha, n-s) C(n+beta, s) ((z-1)/2)^s ((z+1)/2)^{n-s},
/// which has no singular denominators for any complex alpha, beta.
inline Complex jacobi_poly(int n, Complex alpha, Complex beta, Complex z) {
  if (n < 0) throw ConfigError("jacobi_poly: degree must be non-negative");
  const Complex lo = 0.5 * (z - 1.0);
  const Complex hi = 0.5 * (z + 1.0);
  auto ipow = [](Complex base, int e) {
    Complex r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  };
  auto binom = [](Complex top_offset, int s, int m) {
    // C(n + offset, m) with n + offset - m = offset + s, i.e.
    // prod_{j=1..m} (offset + s + j) / j.
    Complex c = 1.0;
    for (int j = 1; j <= m; ++j) c *= (top_offset + static_cast<double>(s + j)) / static_cast<double>(j);
    return c;
  };
  Complex total = 0.0;
  for (int s = 0; s <= n; ++s) {
    // C(n+alpha, n-s): offset alpha, lower index n-s  -> prod (alpha+s+j)/j
    // C(n+beta, s):    offset beta,  lower index s    -> prod (beta+n-s+j)/j
    const Complex ca = binom(alpha, s, n - s);
    const Complex cb = binom(beta, n - s, s);
    total += ca * cb * ipow(lo, s) * ipow(hi, n - s);
  }
  return detail::ensure_finite(total, "jacobi_poly");
}

}  // namespace ptsat
