#pragma once

// The five potential models, their asymptotic kinematics and the
// characteristic functions whose zeros are the discrete eigenvalues.
// Units: hbar = 1, 2m = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ptsat/errors.hpp"
#include "ptsat/specfun.hpp"

namespace ptsat {

using ComplexEnergy = Complex;

struct Step {
  double V1 = 0.0;
};

struct ExpStep {
  double V1 = 0.0;
  double a = 1.0;
};

struct LinearStep {
  double V1 = 0.0;
  double a = 1.0;
};

struct SquareWell {
  double V0 = 0.0;
  double V1 = 0.0;
  double a = 1.0;
};

// V(x) = -s(s+1) sech^2 x + 2ic tanh x
struct RosenMorse {
  double s = 1.0;
  double c = 0.0;
};

using ModelSpec = std::variant<Step, ExpStep, LinearStep, SquareWell, RosenMorse>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::string model_name(const ModelSpec& m) {
  return std::visit(Overloaded{[](const Step&) { return "step"; },
                               [](const ExpStep&) { return "expstep"; },
                               [](const LinearStep&) { return "linear"; },
                               [](const SquareWell&) { return "sqwell"; },
                               [](const RosenMorse&) { return "rosen-morse"; }},
                    m);
}

// Throws ConfigError when the parameters violate the model invariants.
// V1 = 0 is only accepted for the square well (Hermitian limit).
inline void validate(const ModelSpec& m) {
  auto finite = [](std::initializer_list<double> xs) {
    for (double x : xs)
      if (!std::isfinite(x)) throw ConfigError("model parameters must be finite");
  };
  auto need_a = [](double a) {
    if (!(a > 0.0)) throw ConfigError("model parameter a must be positive");
  };
  auto need_v1 = [](double v1) {
    if (v1 == 0.0) throw ConfigError("model parameter V1 must be nonzero");
  };
  std::visit(Overloaded{[&](const Step& s) { finite({s.V1}); need_v1(s.V1); },
                        [&](const ExpStep& e) { finite({e.V1, e.a}); need_v1(e.V1); need_a(e.a); },
                        [&](const LinearStep& l) { finite({l.V1, l.a}); need_v1(l.V1); need_a(l.a); },
                        [&](const SquareWell& w) { finite({w.V0, w.V1, w.a}); need_a(w.a); },
                        [&](const RosenMorse& r) {
                          finite({r.s, r.c});
                          if (!(r.s > 0.0)) throw ConfigError("model parameter s must be positive");
                        }},
             m);
}

// Asymptotic saturation strength: V(x -> +-inf) = +-i V1.
inline double saturation(const ModelSpec& m) {
  return std::visit(Overloaded{[](const Step& s) { return s.V1; },
                               [](const ExpStep& e) { return e.V1; },
                               [](const LinearStep& l) { return l.V1; },
                               [](const SquareWell& w) { return w.V1; },
                               [](const RosenMorse& r) { return 2.0 * r.c; }},
                    m);
}

// Points where the potential changes functional form, ascending.
inline std::vector<double> joints(const ModelSpec& m) {
  return std::visit(Overloaded{[](const Step&) { return std::vector<double>{0.0}; },
                               [](const ExpStep&) { return std::vector<double>{0.0}; },
                               [](const LinearStep& l) { return std::vector<double>{-l.a, l.a}; },
                               [](const SquareWell& w) { return std::vector<double>{-w.a, w.a}; },
                               [](const RosenMorse&) { return std::vector<double>{}; }},
                    m);
}

inline Complex potential_value(const ModelSpec& m, double x) {
  const Complex i{0.0, 1.0};
  return std::visit(
      Overloaded{
          [&](const Step& s) -> Complex { return x <= 0.0 ? -i * s.V1 : i * s.V1; },
          [&](const ExpStep& e) -> Complex {
            if (x <= 0.0) return -i * e.V1 * (1.0 - std::exp(2.0 * x / e.a));
            return i * e.V1 * (1.0 - std::exp(-2.0 * x / e.a));
          },
          [&](const LinearStep& l) -> Complex {
            if (x <= -l.a) return -i * l.V1;
            if (x >= l.a) return i * l.V1;
            return i * l.V1 * x / l.a;
          },
          [&](const SquareWell& w) -> Complex {
            if (x < -w.a) return -i * w.V1;
            if (x > w.a) return i * w.V1;
            return -w.V0;
          },
          [&](const RosenMorse& r) -> Complex {
            const double sech = 1.0 / std::cosh(x);
            return Complex(-r.s * (r.s + 1.0) * sech * sech, 2.0 * r.c * std::tanh(x));
          }},
      m);
}

struct Kinematics {
  Complex K1;
  Complex K2;
  std::optional<Complex> q;   // ExpStep
  std::optional<double> g;    // LinearStep
  std::optional<Complex> h1;  // LinearStep
  std::optional<Complex> h2;  // LinearStep
  std::optional<Complex> p;   // SquareWell
};

// Principal branch throughout. K1 and K2 are computed separately; they are
// conjugates only for real E.
inline Complex decay_k1(ComplexEnergy e, double v1) { return std::sqrt(-(e + Complex(0.0, v1))); }
inline Complex decay_k2(ComplexEnergy e, double v1) { return std::sqrt(-(e - Complex(0.0, v1))); }

inline Kinematics kinematics(const ModelSpec& m, ComplexEnergy e) {
  const double v1 = saturation(m);
  Kinematics k{decay_k1(e, v1), decay_k2(e, v1), {}, {}, {}, {}, {}};
  std::visit(Overloaded{[](const Step&) {},
                        [&](const ExpStep& s) { k.q = s.a * std::sqrt(Complex(0.0, s.V1)); },
                        [&](const LinearStep& s) {
                          const double g = std::cbrt((s.V1 / s.a) * (s.V1 / s.a));
                          k.g = g;
                          k.h1 = (e + Complex(0.0, s.V1)) / g;
                          k.h2 = (e - Complex(0.0, s.V1)) / g;
                        },
                        [&](const SquareWell& s) { k.p = std::sqrt(e + s.V0); },
                        [](const RosenMorse&) {}},
             m);
  return k;
}

// 2 Re K1: strictly positive for V1 != 0, so the step has no spectrum.
inline Complex char_step(ComplexEnergy e, double v1) { return 2.0 * decay_k1(e, v1).real(); }

inline Complex char_expstep(ComplexEnergy e, double v1, double a) {
  const Complex q = a * std::sqrt(Complex(0.0, v1));
  const auto i = bessel_i_pair(decay_k1(e, v1) * a, q);
  const auto j = bessel_j_pair(decay_k2(e, v1) * a, q);
  return j.value * i.derivative + i.value * j.derivative;
}

inline Complex char_linear(ComplexEnergy e, double v1, double a) {
  const Complex k1 = decay_k1(e, v1), k2 = decay_k2(e, v1);
  const double g = std::cbrt((v1 / a) * (v1 / a));
  const double sg = std::sqrt(g);
  const Complex i{0.0, 1.0};
  const AiryValues w1 = airy_all((e + i * v1) / g);
  const AiryValues w2 = airy_all((e - i * v1) / g);
  return k1 * k2 * (w2.ai * w1.bi - w1.ai * w2.bi) -
         i * k1 * sg * (w2.ai_prime * w1.bi - w1.ai * w2.bi_prime) -
         i * k2 * sg * (w1.ai_prime * w2.bi - w2.ai * w1.bi_prime) -
         g * (w1.ai_prime * w2.bi_prime - w2.ai_prime * w1.bi_prime);
}

// Square-well determinant for an explicit choice of p; odd in p.
inline Complex char_sqwell_p(Complex k1, Complex k2, Complex p, double a) {
  return (k1 + k2) * p * std::cos(2.0 * p * a) + (k1 * k2 - p * p) * std::sin(2.0 * p * a);
}

inline Complex char_sqwell(ComplexEnergy e, double v0, double v1, double a) {
  return char_sqwell_p(decay_k1(e, v1), decay_k2(e, v1), std::sqrt(e + v0), a);
}

inline bool has_characteristic(const ModelSpec& m) {
  return !std::holds_alternative<RosenMorse>(m);
}

inline Complex characteristic(const ModelSpec& m, ComplexEnergy e) {
  return std::visit(
      Overloaded{[&](const Step& s) { return char_step(e, s.V1); },
                 [&](const ExpStep& s) { return char_expstep(e, s.V1, s.a); },
                 [&](const LinearStep& s) { return char_linear(e, s.V1, s.a); },
                 [&](const SquareWell& s) { return char_sqwell(e, s.V0, s.V1, s.a); },
                 [](const RosenMorse&) -> Complex {
                   throw ConfigError("rosen-morse has no characteristic function; use the analytic levels or the oracle");
                 }},
      m);
}

// Bound states of the Hermitian well V = -V0 on [-a, a], lowest first.
// With theta = P a the even condition tan theta = K/P has one root in each
// [n pi, n pi + pi/2] and the odd one tan theta = -P/K one in each
// [n pi + pi/2, (n+1) pi]; both sides are monotone there.
inline std::vector<double> hermitian_sqwell_levels(double v0, double a, int count) {
  if (!(v0 > 0.0) || !(a > 0.0)) throw ConfigError("hermitian_sqwell_levels needs V0 > 0 and a > 0");
  const double theta_max = a * std::sqrt(v0);
  auto energy = [&](double th) { return th * th / (a * a) - v0; };
  auto even = [&](double th) {
    const double e = energy(th);
    return std::sqrt(e + v0) * std::sin(th) - std::sqrt(std::max(0.0, -e)) * std::cos(th);
  };
  auto odd = [&](double th) {
    const double e = energy(th);
    return std::sqrt(e + v0) * std::cos(th) + std::sqrt(std::max(0.0, -e)) * std::sin(th);
  };
  auto bisect = [](auto f, double lo, double hi) -> std::optional<double> {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  std::vector<double> levels;
  const double half_pi = 0.5 * kPi;
  for (int k = 0; static_cast<int>(levels.size()) < count; ++k) {
    const double lo = k * half_pi;
    if (lo >= theta_max) break;
    const double hi = std::min((k + 1) * half_pi, theta_max);
    // Open interval: the end points of a branch are never bound states.
    const double eps = 1e-14 * std::max(1.0, hi);
    const auto root = (k % 2 == 0) ? bisect(even, lo + eps, hi - eps) : bisect(odd, lo + eps, hi - eps);
    if (root) levels.push_back(energy(*root));
  }
  return levels;
}

// E_n = -(n-s)^2 + c^2/(n-s)^2 for integer 0 <= n < s.
inline std::vector<double> rosen_morse_levels(double s, double c) {
  std::vector<double> levels;
  if (!(s > 0.0)) return levels;
  for (int n = 0; n < s; ++n) {
    const double d = n - s;
    levels.push_back(-d * d + c * c / (d * d));
  }
  return levels;
}

}  // namespace ptsat
