#pragma once

// Piecewise eigenfunctions at a given energy, their matching residuals,
// current density, the |psi+(x)| = N |psi-(-x)| check and Milne-form helpers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <tuple>
#include <utility>
#include <string>
#include <vector>

#include "ptsat/errors.hpp"
#include "ptsat/models.hpp"
#include "ptsat/specfun.hpp"

namespace ptsat {

struct WavefunctionSample {
  std::vector<double> x;
  std::vector<Complex> psi;
  std::vector<Complex> dpsi;  // analytic derivative; empty when unavailable
  std::vector<double> current;

  [[nodiscard]] std::size_t size() const { return x.size(); }
  [[nodiscard]] std::vector<double> re_psi() const {
    std::vector<double> v(psi.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = psi[i].real();
    return v;
  }
  [[nodiscard]] std::vector<double> im_psi() const {
    std::vector<double> v(psi.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = psi[i].imag();
    return v;
  }
  [[nodiscard]] std::vector<double> abs_psi() const {
    std::vector<double> v(psi.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(psi[i]);
    return v;
  }
};

// Jumps are relative to the local size of the solution at the joint,
// max(|psi|, |psi'_left| / kappa, |psi'_right| / kappa) with kappa =
// max(|K1|, |K2|); derivative jumps are further divided by kappa. A global
// max|psi| would hide mismatches of states that peak far from the joint.
struct MatchReport {
  std::vector<double> joints;
  std::vector<double> value_jump;
  std::vector<double> derivative_jump;

  [[nodiscard]] double max_jump() const {
    double m = 0.0;
    for (double v : value_jump) m = std::max(m, v);
    for (double v : derivative_jump) m = std::max(m, v);
    return m;
  }
};

struct XGrid {
  double lo = -1.0;
  double hi = 1.0;
  int points = 2001;
};

struct Eigenstate {
  WavefunctionSample sample;
  MatchReport match;
};

// x in [-L, L] with L = max(5a, 12 / min(Re K1, Re K2)); a = 1 for Rosen-Morse.
inline XGrid default_grid(const ModelSpec& m, ComplexEnergy e) {
  const double a = std::visit(Overloaded{[](const Step&) { return 1.0; },
                                         [](const ExpStep& s) { return s.a; },
                                         [](const LinearStep& s) { return s.a; },
                                         [](const SquareWell& s) { return s.a; },
                                         [](const RosenMorse&) { return 1.0; }},
                              m);
  const double v1 = saturation(m);
  const double k = std::min(decay_k1(e, v1).real(), decay_k2(e, v1).real());
  double L = 5.0 * a;
  if (k > 0.0) L = std::max(L, 12.0 / k);
  L = std::min(L, 1e4);
  return {-L, L, 2001};
}

inline std::vector<double> current_density(const WavefunctionSample& s) {
  const std::size_t n = s.psi.size();
  std::vector<double> j(n, 0.0);
  auto flux = [](Complex psi, Complex d) { return psi.real() * d.imag() - psi.imag() * d.real(); };
  if (s.dpsi.size() == n && n > 0) {
    for (std::size_t i = 0; i < n; ++i) j[i] = flux(s.psi[i], s.dpsi[i]);
    return j;
  }
  if (n < 3) throw SupportError("current_density needs at least 3 samples");
  for (std::size_t i = 0; i < n; ++i) {
    Complex d;
    if (i == 0) {
      const double h = s.x[1] - s.x[0];
      d = (-3.0 * s.psi[0] + 4.0 * s.psi[1] - s.psi[2]) / (2.0 * h);
    } else if (i + 1 == n) {
      const double h = s.x[n - 1] - s.x[n - 2];
      d = (3.0 * s.psi[n - 1] - 4.0 * s.psi[n - 2] + s.psi[n - 3]) / (2.0 * h);
    } else {
      d = (s.psi[i + 1] - s.psi[i - 1]) / (s.x[i + 1] - s.x[i - 1]);
    }
    j[i] = flux(s.psi[i], d);
  }
  return j;
}

namespace detail {

inline std::vector<double> linspace(const XGrid& g) {
  if (g.points < 3) throw ConfigError("spatial grid needs at least 3 points");
  if (!(g.lo < g.hi)) throw ConfigError("spatial grid needs lo < hi");
  std::vector<double> x(g.points);
  for (int i = 0; i < g.points; ++i) x[i] = g.lo + (g.hi - g.lo) * i / (g.points - 1);
  return x;
}

// Scales psi (and dpsi) so that max|psi| = 1 and fills the current.
inline void finish(WavefunctionSample& s) {
  double peak = 0.0;
  for (const auto& v : s.psi) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0) || !std::isfinite(peak))
    throw DegenerateMatchError("wavefunction vanishes or overflows on the grid");
  for (auto& v : s.psi) v /= peak;
  for (auto& v : s.dpsi) v /= peak;
  s.current = current_density(s);
}

inline double kappa(ComplexEnergy e, double v1) {
  return std::max({std::abs(decay_k1(e, v1)), std::abs(decay_k2(e, v1)), 1e-300});
}

inline double derivative_jump(Complex psi, Complex d_left, Complex d_right, double kap) {
  const double local = std::max({std::abs(psi), std::abs(d_left) / kap, std::abs(d_right) / kap});
  if (!(local > 0.0) || !std::isfinite(local)) throw DegenerateMatchError("solution vanishes at the joint");
  return std::abs(d_right - d_left) / (kap * local);
}

inline Eigenstate assemble_step(const Step& m, ComplexEnergy e, const std::vector<double>& x) {
  const Complex k1 = decay_k1(e, m.V1), k2 = decay_k2(e, m.V1);
  Eigenstate st;
  for (double xi : x) {
    const Complex v = xi <= 0.0 ? std::exp(k1 * xi) : std::exp(-k2 * xi);
    st.sample.x.push_back(xi);
    st.sample.psi.push_back(v);
    st.sample.dpsi.push_back(xi <= 0.0 ? k1 * v : -k2 * v);
  }
  st.match = {{0.0}, {0.0}, {derivative_jump(1.0, k1, -k2, kappa(e, m.V1))}};
  finish(st.sample);
  return st;
}

// psi(x<=0) = J_{K2 a}(q) I_{K1 a}(q e^{x/a}), psi(x>0) = I_{K1 a}(q) J_{K2 a}(q e^{-x/a}).
// Values agree at 0 by construction; the derivative jump is (q/a) f(E).
inline Eigenstate assemble_expstep(const ExpStep& m, ComplexEnergy e, const std::vector<double>& x) {
  const Complex nu1 = decay_k1(e, m.V1) * m.a, nu2 = decay_k2(e, m.V1) * m.a;
  const Complex q = m.a * std::sqrt(Complex(0.0, m.V1));
  const auto i0 = bessel_i_pair(nu1, q);
  const auto j0 = bessel_j_pair(nu2, q);
  Eigenstate st;
  for (double xi : x) {
    Complex v, d;
    if (xi <= 0.0) {
      const Complex z = q * std::exp(xi / m.a);
      const auto w = bessel_i_pair(nu1, z);
      v = j0.value * w.value;
      d = j0.value * w.derivative * z / m.a;
    } else {
      const Complex z = q * std::exp(-xi / m.a);
      const auto w = bessel_j_pair(nu2, z);
      v = i0.value * w.value;
      d = -i0.value * w.derivative * z / m.a;
    }
    st.sample.x.push_back(xi);
    st.sample.psi.push_back(v);
    st.sample.dpsi.push_back(d);
  }
  const Complex at0 = j0.value * i0.value;
  const Complex d_left = j0.value * i0.derivative * q / m.a, d_right = -i0.value * j0.derivative * q / m.a;
  st.match = {{0.0}, {0.0}, {derivative_jump(at0, d_left, d_right, kappa(e, m.V1))}};
  finish(st.sample);
  return st;
}

// Three pieces with A = 1 on the left: the interior coefficients come from
// value and slope at -a, B from the value at +a, and the slope mismatch at
// +a is what remains.
template <class Interior>
Eigenstate assemble_three_piece(ComplexEnergy e, double v1, double a, const std::vector<double>& x,
                                Interior interior) {
  const Complex k1 = decay_k1(e, v1), k2 = decay_k2(e, v1);
  const auto [inner_v, inner_d] = interior(a);
  const Complex b = inner_v * std::exp(k2 * a);
  Eigenstate st;
  for (double xi : x) {
    Complex v, d;
    if (xi <= -a) {
      v = std::exp(k1 * xi);
      d = k1 * v;
    } else if (xi >= a) {
      v = b * std::exp(-k2 * xi);
      d = -k2 * v;
    } else {
      std::tie(v, d) = interior(xi);
    }
    st.sample.x.push_back(xi);
    st.sample.psi.push_back(v);
    st.sample.dpsi.push_back(d);
  }
  st.match = {{-a, a}, {0.0, 0.0}, {0.0, derivative_jump(inner_v, inner_d, -k2 * inner_v, kappa(e, v1))}};
  finish(st.sample);
  return st;
}

inline Eigenstate assemble_linear(const LinearStep& m, ComplexEnergy e, const std::vector<double>& x) {
  const double g = std::cbrt((m.V1 / m.a) * (m.V1 / m.a));
  const Complex h0{0.0, -std::sqrt(g)};  // dh/dx
  auto h = [&](double xi) { return (e - Complex(0.0, m.V1 * xi / m.a)) / g; };
  const Complex k1 = decay_k1(e, m.V1);
  const Complex v = std::exp(-k1 * m.a), d = k1 * v;
  const AiryValues w1 = airy_all(h(-m.a));
  // Wronskian Ai Bi' - Ai' Bi = 1/pi keeps this solve regular.
  const Complex c = kPi * (v * w1.bi_prime - d / h0 * w1.bi);
  const Complex dd = kPi * (d / h0 * w1.ai - v * w1.ai_prime);
  auto interior = [&](double xi) {
    const AiryValues w = airy_all(h(xi));
    return std::pair<Complex, Complex>{c * w.ai + dd * w.bi, h0 * (c * w.ai_prime + dd * w.bi_prime)};
  };
  return assemble_three_piece(e, m.V1, m.a, x, interior);
}

inline Eigenstate assemble_sqwell(const SquareWell& m, ComplexEnergy e, const std::vector<double>& x) {
  const Complex p = std::sqrt(e + m.V0);
  // Basis cos(px), sin(px)/p: unit Wronskian and regular at p = 0.
  auto sinc_p = [&](double xi) { return std::abs(p) < 1e-300 ? Complex(xi) : std::sin(p * xi) / p; };
  const Complex k1 = decay_k1(e, m.V1);
  const Complex v = std::exp(-k1 * m.a), d = k1 * v;
  const double xa = -m.a;
  const Complex u1 = std::cos(p * xa), u1d = -p * std::sin(p * xa);
  const Complex u2 = sinc_p(xa), u2d = std::cos(p * xa);
  const Complex alpha = v * u2d - d * u2;
  const Complex beta = d * u1 - v * u1d;
  auto interior = [&](double xi) {
    return std::pair<Complex, Complex>{alpha * std::cos(p * xi) + beta * sinc_p(xi),
                                       -alpha * p * std::sin(p * xi) + beta * std::cos(p * xi)};
  };
  return assemble_three_piece(e, m.V1, m.a, x, interior);
}

inline Eigenstate assemble_rosen_morse(const RosenMorse& m, ComplexEnergy e, const std::vector<double>& x) {
  const auto levels = rosen_morse_levels(m.s, m.c);
  int n = -1;
  for (std::size_t k = 0; k < levels.size(); ++k)
    if (std::abs(e - levels[k]) < 1e-6 * std::max(1.0, std::abs(levels[k]))) n = static_cast<int>(k);
  if (n < 0) throw DegenerateMatchError("energy is not a Rosen-Morse level");
  const double sn = m.s - n;
  const double w = m.c / sn;
  const Complex alpha{sn, w}, beta{sn, -w};
  const Complex i{0.0, 1.0};
  Eigenstate st;
  for (double xi : x) {
    const double t = std::tanh(xi), sech = 1.0 / std::cosh(xi);
    const Complex env = std::pow(sech, sn) * std::exp(-i * w * xi);
    const Complex poly = jacobi_poly(n, alpha, beta, t);
    const Complex dpoly =
        n == 0 ? Complex{} : 0.5 * (double(n) + alpha + beta + 1.0) * jacobi_poly(n - 1, alpha + 1.0, beta + 1.0, t);
    st.sample.x.push_back(xi);
    st.sample.psi.push_back(env * poly);
    st.sample.dpsi.push_back(env * ((-sn * t - i * w) * poly + sech * sech * dpoly));
  }
  finish(st.sample);
  return st;
}

}  // namespace detail

inline Eigenstate assemble(const ModelSpec& model, ComplexEnergy e, std::optional<XGrid> grid = std::nullopt) {
  validate(model);
  const auto x = detail::linspace(grid.value_or(default_grid(model, e)));
  return std::visit(Overloaded{[&](const Step& m) { return detail::assemble_step(m, e, x); },
                               [&](const ExpStep& m) { return detail::assemble_expstep(m, e, x); },
                               [&](const LinearStep& m) { return detail::assemble_linear(m, e, x); },
                               [&](const SquareWell& m) { return detail::assemble_sqwell(m, e, x); },
                               [&](const RosenMorse& m) { return detail::assemble_rosen_morse(m, e, x); }},
                    model);
}

struct ReflectionResult {
  double N = 0.0;
  double max_rel_dev = 0.0;
  std::size_t support = 0;
};

// Compares |psi+(x)| with |psi-(-x)|; both samples must share one grid that
// is symmetric about 0.
inline ReflectionResult reflection_property(const WavefunctionSample& plus, const WavefunctionSample& minus) {
  const std::size_t n = plus.x.size();
  if (minus.x.size() != n || n == 0) throw SupportError("reflection_property needs samples on the same grid");
  const double span = plus.x.back() - plus.x.front();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(plus.x[i] - minus.x[i]) > 1e-9 * span || std::abs(plus.x[i] + plus.x[n - 1 - i]) > 1e-9 * span)
      throw SupportError("reflection_property needs identical grids symmetric about x = 0");
  }
  double peak = 0.0;
  for (const auto& v : minus.psi) peak = std::max(peak, std::abs(v));
  std::vector<double> ratio;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::abs(minus.psi[n - 1 - i]);
    if (m > 1e-6 * peak) ratio.push_back(std::abs(plus.psi[i]) / m);
  }
  if (ratio.size() < 10) throw SupportError("fewer than 10 usable points for the reflection property");
  std::vector<double> sorted = ratio;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  double dev = 0.0;
  for (double r : ratio) dev = std::max(dev, std::abs(r / med - 1.0));
  return {med, dev, ratio.size()};
}

// V(x) = E + A''/A - C^2/A^4, A'' by central differences (non-uniform
// spacing allowed; end values extrapolated linearly).
inline std::vector<Complex> milne_reconstruct(const std::vector<double>& x, const std::vector<double>& amp, double C,
                                              double E) {
  const std::size_t n = x.size();
  if (amp.size() != n || n < 4) throw SupportError("milne_reconstruct needs at least 4 matching samples");
  std::vector<double> a2(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
    a2[i] = 2.0 * ((amp[i + 1] - amp[i]) / h2 - (amp[i] - amp[i - 1]) / h1) / (h1 + h2);
  }
  auto extrapolate = [&](std::size_t at, std::size_t i1, std::size_t i2) {
    return a2[i1] + (a2[i2] - a2[i1]) * (x[at] - x[i1]) / (x[i2] - x[i1]);
  };
  a2[0] = extrapolate(0, 1, 2);
  a2[n - 1] = extrapolate(n - 1, n - 2, n - 3);
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(amp[i] > 1e-75)) throw RangeError("Milne amplitude underflows or is not positive");
    v[i] = E + a2[i] / amp[i] - C * C / std::pow(amp[i], 4);
  }
  return v;
}

// psi = A(x) exp(i S(x)) with S' = C / A^2, so the flux is exactly C.
struct MilneState {
  std::string name;
  double C;
  std::function<double(double)> amplitude;
  std::function<double(double)> amplitude_prime;
  std::function<double(double)> phase;
};

inline std::vector<MilneState> milne_states() {
  auto sech_amp = [](double x) { return 1.0 / std::sqrt(std::cosh(x)); };
  auto sech_amp_prime = [](double x) { return -0.5 * std::sinh(x) * std::pow(std::cosh(x), -1.5); };
  return {
      {"exp(i(x+x^3/3))/sqrt(1+x^2)", 1.0, [](double x) { return 1.0 / std::sqrt(1.0 + x * x); },
       [](double x) { return -x * std::pow(1.0 + x * x, -1.5); }, [](double x) { return x + x * x * x / 3.0; }},
      {"exp(i sinh x)/sqrt(cosh x)", 1.0, sech_amp, sech_amp_prime, [](double x) { return std::sinh(x); }},
      {"exp((i/2) sinh x)/sqrt(cosh x)", 0.5, sech_amp, sech_amp_prime,
       [](double x) { return 0.5 * std::sinh(x); }},
  };
}

inline WavefunctionSample sample_milne(const MilneState& s, const XGrid& grid) {
  WavefunctionSample out;
  out.x = detail::linspace(grid);
  const Complex i{0.0, 1.0};
  for (double x : out.x) {
    const double a = s.amplitude(x);
    const Complex ph = std::exp(i * s.phase(x));
    out.psi.push_back(a * ph);
    out.dpsi.push_back((s.amplitude_prime(x) + i * s.C / a) * ph);
  }
  out.current = current_density(out);
  return out;
}

// Sign changes of Re psi, ignoring samples below 1e-6 of the peak.
inline int oscillation_count(const WavefunctionSample& s) {
  double peak = 0.0;
  for (const auto& v : s.psi) peak = std::max(peak, std::abs(v));
  int count = 0, last = 0;
  for (const auto& v : s.psi) {
    if (std::abs(v.real()) < 1e-6 * peak) continue;
    const int sign = v.real() > 0.0 ? 1 : -1;
    if (last != 0 && sign != last) ++count;
    last = sign;
  }
  return count;
}

inline double peak_position(const WavefunctionSample& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.psi.size(); ++i)
    if (std::abs(s.psi[i]) > std::abs(s.psi[best])) best = i;
  return s.x.empty() ? 0.0 : s.x[best];
}

}  // namespace ptsat
