#pragma once

// Direct RK4 shooting on psi'' = (V(x) - E) psi. Uses only potential_value,
// never the special functions, so it can check the characteristic
// functions independently.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ptsat/errors.hpp"
#include "ptsat/models.hpp"
#include "ptsat/rootfinder.hpp"

namespace ptsat {

struct ShootingConfig {
  double L = 25.0;
  int n_steps = 20000;  // per half-line
  double matcher_x = 0.0;
};

// L = max(5a, 25) for piecewise models, 20 for Rosen-Morse. The exponential
// step saturates only asymptotically, so L grows until |V(+-L) -+ iV1| < 1e-8.
inline ShootingConfig default_shooting(const ModelSpec& m) {
  ShootingConfig cfg;
  std::visit(Overloaded{[&](const Step&) { cfg.L = 25.0; },
                        [&](const ExpStep& s) {
                          const double tail = 0.5 * s.a * std::log(std::abs(s.V1) / 1e-8);
                          cfg.L = std::max({5.0 * s.a, 25.0, std::ceil(tail + 1.0)});
                        },
                        [&](const LinearStep& s) { cfg.L = std::max(5.0 * s.a, 25.0); },
                        [&](const SquareWell& s) { cfg.L = std::max(5.0 * s.a, 25.0); },
                        [&](const RosenMorse&) { cfg.L = 20.0; }},
             m);
  return cfg;
}

inline void validate(const ModelSpec& m, const ShootingConfig& cfg) {
  if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) throw ConfigError("shooting L must be positive");
  if (cfg.n_steps < 10) throw ConfigError("shooting needs at least 10 steps per half-line");
  if (!(cfg.matcher_x > -cfg.L && cfg.matcher_x < cfg.L)) throw ConfigError("matcher_x must lie inside (-L, L)");
  const double v1 = saturation(m);
  const Complex i{0.0, 1.0};
  const double off = std::max(std::abs(potential_value(m, -cfg.L) + i * v1), std::abs(potential_value(m, cfg.L) - i * v1));
  if (off >= 1e-8)
    throw ConfigError("shooting L too small: |V(+-L) -+ iV1| = " + std::to_string(off) + " (needs < 1e-8)");
}

struct HalfLine {
  Complex psi;
  Complex dpsi;
  double log_scale = 0.0;  // log of the factors divided out en route
};

enum class Side { left, right };

// Precomputes V at every RK4 node and half-node for both half-lines, so that
// evaluating at many energies only costs the arithmetic. Steps are laid out
// so that no step straddles a joint of the potential.
class Shooter {
 public:
  Shooter(ModelSpec model, ShootingConfig cfg) : model_(std::move(model)), cfg_(cfg) {
    validate(model_);
    validate(model_, cfg_);
    v1_ = saturation(model_);
    build(Side::left);
    build(Side::right);
  }

  [[nodiscard]] const ShootingConfig& config() const { return cfg_; }
  [[nodiscard]] const ModelSpec& model() const { return model_; }

  [[nodiscard]] HalfLine integrate(ComplexEnergy e, Side side) const {
    const Path& p = side == Side::left ? left_ : right_;
    const Complex k = side == Side::left ? decay_k1(e, v1_) : -decay_k2(e, v1_);
    const double kap = std::max(1.0, std::abs(k));
    // Start from exp(k x0) itself: its modulus goes into log_scale, its phase
    // stays on psi so that the result is analytic in E. Dropping the phase
    // makes arg(psi) spin with Im(k) L and floods the scan with sign changes.
    const double x0 = side == Side::left ? -cfg_.L : cfg_.L;
    const Complex kx = k * x0;
    Complex psi = std::polar(1.0, kx.imag()), phi = k * psi;
    double log_scale = kx.real();
    const std::size_t n = p.h.size();
    for (std::size_t s = 0; s < n; ++s) {
      const double h = p.h[s];
      const Complex w0 = p.v0[s] - e, wm = p.vm[s] - e, w1 = p.v1[s] - e;
      const Complex k1p = phi, k1f = mul(w0, psi);
      const Complex k2p = phi + 0.5 * h * k1f, k2f = mul(wm, psi + 0.5 * h * k1p);
      const Complex k3p = phi + 0.5 * h * k2f, k3f = mul(wm, psi + 0.5 * h * k2p);
      const Complex k4p = phi + h * k3f, k4f = mul(w1, psi + h * k3p);
      psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      phi += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
      if ((s + 1) % 500 == 0 || s + 1 == n) {
        const double norm = std::max(std::abs(psi), std::abs(phi) / kap);
        if (!(norm > 0.0) || !std::isfinite(norm))
          throw IntegrationError("shooting solution overflowed or vanished; renormalization failed");
        psi /= norm;
        phi /= norm;
        log_scale += std::log(norm);
      }
    }
    return {psi, phi, log_scale};
  }

  // psi_L psi'_R - psi_R psi'_L with each half-line scaled to unit
  // sqrt(|psi|^2 + |psi'|^2 / kappa^2). The scaling factors are real and
  // positive, so the zeros and the sign pattern of Re/Im are those of the
  // raw Wronskian.
  [[nodiscard]] Complex mismatch(ComplexEnergy e) const {
    const HalfLine l = integrate(e, Side::left);
    const HalfLine r = integrate(e, Side::right);
    const double kap = std::max({1.0, std::abs(decay_k1(e, v1_)), std::abs(decay_k2(e, v1_))});
    auto norm = [&](const HalfLine& h) { return std::hypot(std::abs(h.psi), std::abs(h.dpsi) / kap); };
    return (l.psi * r.dpsi - r.psi * l.dpsi) / (norm(l) * norm(r) * kap);
  }

  // The raw Wronskian times exp(-ref_log_scale). Analytic in E, unlike
  // mismatch(), so Newton converges quadratically on it; ref_log_scale is
  // fixed per refinement to keep the values in range.
  [[nodiscard]] Complex analytic_mismatch(ComplexEnergy e, double ref_log_scale) const {
    const HalfLine l = integrate(e, Side::left);
    const HalfLine r = integrate(e, Side::right);
    return (l.psi * r.dpsi - r.psi * l.dpsi) * std::exp(l.log_scale + r.log_scale - ref_log_scale);
  }

  [[nodiscard]] double log_scale(ComplexEnergy e) const {
    return integrate(e, Side::left).log_scale + integrate(e, Side::right).log_scale;
  }

  // Largest h * sqrt|V - E| over the path; RK4 needs this well below 1.
  [[nodiscard]] double step_phase(ComplexEnergy e) const {
    double m = 0.0;
    for (const Path* p : {&left_, &right_})
      for (std::size_t s = 0; s < p->h.size(); ++s)
        m = std::max(m, std::abs(p->h[s]) * std::sqrt(std::abs(p->vm[s] - e)));
    return m;
  }

 private:
  // Plain complex product; std::complex's operator* goes through the
  // NaN-recovering library routine, which dominates the loop otherwise.
  static Complex mul(Complex a, Complex b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
  }

  struct Path {
    std::vector<double> h;
    std::vector<Complex> v0, vm, v1;
  };

  void build(Side side) {
    const double start = side == Side::left ? -cfg_.L : cfg_.L;
    const double end = cfg_.matcher_x;
    std::vector<double> cuts{start};
    for (double j : joints(model_))
      if (j > std::min(start, end) && j < std::max(start, end)) cuts.push_back(j);
    if (side == Side::right) std::sort(cuts.begin() + 1, cuts.end(), std::greater<>());
    else std::sort(cuts.begin() + 1, cuts.end());
    cuts.push_back(end);

    Path& p = side == Side::left ? left_ : right_;
    const double total = std::abs(end - start);
    int used = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c], b = cuts[c + 1];
      const bool last = c + 2 == cuts.size();
      int steps = last ? cfg_.n_steps - used
                       : std::max(1, static_cast<int>(std::lround(cfg_.n_steps * std::abs(b - a) / total)));
      steps = std::max(steps, 1);
      used += steps;
      const double lo = std::min(a, b), hi = std::max(a, b);
      // Evaluate on the segment's own side of any discontinuity.
      auto v = [&](double x) {
        const double eps = 1e-12 * std::max(1.0, std::abs(x));
        return potential_value(model_, std::clamp(x, lo + eps, hi - eps));
      };
      const double h = (b - a) / steps;
      for (int s = 0; s < steps; ++s) {
        const double x0 = a + s * h;
        const double x1 = s + 1 == steps ? b : a + (s + 1) * h;
        p.h.push_back(x1 - x0);
        p.v0.push_back(v(x0));
        p.vm.push_back(v(0.5 * (x0 + x1)));
        p.v1.push_back(v(x1));
      }
    }
  }

  ModelSpec model_;
  ShootingConfig cfg_;
  double v1_ = 0.0;
  Path left_, right_;
};

inline HalfLine integrate_halfline(const ModelSpec& model, ComplexEnergy e, Side side, const ShootingConfig& cfg) {
  return Shooter(model, cfg).integrate(e, side);
}

inline Complex wronskian_mismatch(const ModelSpec& model, ComplexEnergy e, const ShootingConfig& cfg) {
  return Shooter(model, cfg).mismatch(e);
}

// Rootfinder pipeline with f := mismatch. The scan grid is the caller's;
// shooting is expensive, so callers typically pass a coarser one than for
// the characteristic function.
inline Spectrum oracle_spectrum(const ModelSpec& model, const SearchRect& rect, const ShootingConfig& cfg,
                                const SolveOptions& opt = {}) {
  const Shooter shooter(model, cfg);
  auto local = [&shooter](Complex z0) -> CharFn {
    const double ref = shooter.log_scale(z0);
    return [&shooter, ref](Complex e) { return shooter.analytic_mismatch(e, ref); };
  };
  // The normalized Wronskian is a difference of O(1) products, so its
  // roundoff floor is absolute; a median-relative tolerance alone can sit
  // below it when |f| is small across the whole rectangle.
  SolveOptions o = opt;
  o.tol_f_floor = std::max(o.tol_f_floor, 1e-12);
  return find_roots([&shooter](Complex e) { return shooter.mismatch(e); }, saturation(model), rect, o, local);
}

}  // namespace ptsat
