#pragma once

// Zeros of a complex function inside a rectangle: grid scan for cells where
// both Re f and Im f change sign, Newton/Muller refinement, dedup, physical
// filter, conjugate pairing. Also marching-squares zero contours.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ptsat/errors.hpp"
#include "ptsat/models.hpp"

namespace ptsat {

using CharFn = std::function<Complex(Complex)>;

// nx, ny count cells; the grid has (nx+1) x (ny+1) nodes.
struct SearchRect {
  double re_min = 0.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  int nx = 400;
  int ny = 200;

  void validate() const {
    if (!(std::isfinite(re_min) && std::isfinite(re_max) && std::isfinite(im_min) && std::isfinite(im_max)))
      throw ConfigError("search rectangle must be finite");
    if (!(re_min < re_max) || !(im_min < im_max))
      throw ConfigError("search rectangle needs re_min < re_max and im_min < im_max");
    if (nx < 8 || ny < 8) throw ConfigError("grid resolution must be at least 8 x 8");
  }
  [[nodiscard]] double dx() const { return (re_max - re_min) / nx; }
  [[nodiscard]] double dy() const { return (im_max - im_min) / ny; }
  [[nodiscard]] Complex node(int i, int j) const {
    return {re_min + i * dx(), im_min + j * dy()};
  }
  [[nodiscard]] bool contains(Complex z, double pad = 0.0) const {
    const double px = pad * (re_max - re_min), py = pad * (im_max - im_min);
    return z.real() >= re_min - px && z.real() <= re_max + px && z.imag() >= im_min - py &&
           z.imag() <= im_max + py;
  }
};

enum class RootKind { real, ccpe_plus, ccpe_minus };

inline const char* to_string(RootKind k) {
  switch (k) {
    case RootKind::real: return "real";
    case RootKind::ccpe_plus: return "ccpe_plus";
    case RootKind::ccpe_minus: return "ccpe_minus";
  }
  return "?";
}

struct Root {
  ComplexEnergy energy;
  double residual = 0.0;  // |f(energy)|, unscaled
  RootKind kind = RootKind::real;
  std::optional<int> pair_id;
  int iterations = 0;
};

struct RejectedRoot {
  Root root;
  std::string reason;
};

struct SolveOptions {
  double tol_f = 1e-9;     // relative to the median |f| over the scan grid
  double tol_real = 1e-6;  // |Im E| < tol_real * max(1, |Re E|) counts as real
  int max_iter = 100;
  unsigned threads = 0;    // 0 picks hardware_concurrency
  double tol_f_floor = 0.0;  // absolute lower bound on the residual tolerance
};

struct Spectrum {
  std::vector<Root> roots;
  std::vector<RejectedRoot> rejected;
  std::vector<std::string> warnings;
  double f_scale = 1.0;   // median |f| on the grid
  double tol_f_abs = 0.0;
  std::size_t candidates = 0;
  std::size_t masked_nodes = 0;
};

struct ContourSet {
  std::vector<std::vector<ComplexEnergy>> re_zero;
  std::vector<std::vector<ComplexEnergy>> im_zero;
};

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t work) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  const unsigned workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct GridValues {
  SearchRect rect;
  std::vector<Complex> value;
  std::vector<char> ok;

  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * (rect.nx + 1) + i;
  }
};

inline GridValues evaluate_grid(const CharFn& f, const SearchRect& rect, unsigned threads) {
  rect.validate();
  GridValues g{rect, {}, {}};
  const std::size_t n = static_cast<std::size_t>(rect.nx + 1) * (rect.ny + 1);
  g.value.assign(n, Complex{});
  g.ok.assign(n, 0);
  parallel_for(n, threads, [&](std::size_t k) {
    const int i = static_cast<int>(k % (rect.nx + 1));
    const int j = static_cast<int>(k / (rect.nx + 1));
    try {
      const Complex v = f(rect.node(i, j));
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) {
        g.value[k] = v;
        g.ok[k] = 1;
      }
    } catch (const Error&) {
      // masked node
    }
  });
  return g;
}

inline bool nonneg(double v) { return v >= 0.0; }

// A component below 1e-12 of |v| is a structural zero (e.g. Re f on the real
// axis when f(conj E) = -conj f(E)) whose sign is roundoff; it is snapped to
// +0 so the classification does not depend on that noise.
inline bool nonneg_snapped(double part, Complex v) { return part >= 0.0 || std::abs(part) <= 1e-12 * std::abs(v); }

inline std::vector<Complex> candidate_cells(const GridValues& g) {
  std::vector<Complex> out;
  const auto& r = g.rect;
  for (int j = 0; j < r.ny; ++j) {
    for (int i = 0; i < r.nx; ++i) {
      const std::size_t c[4] = {g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)};
      bool usable = true;
      int re_pos = 0, im_pos = 0;
      for (std::size_t k : c) {
        if (!g.ok[k]) {
          usable = false;
          break;
        }
        re_pos += nonneg_snapped(g.value[k].real(), g.value[k]);
        im_pos += nonneg_snapped(g.value[k].imag(), g.value[k]);
      }
      if (!usable) continue;
      if (re_pos % 4 != 0 && im_pos % 4 != 0)
        out.push_back(r.node(i, j) + Complex(0.5 * r.dx(), 0.5 * r.dy()));
    }
  }
  return out;
}

inline double median_abs(const GridValues& g) {
  std::vector<double> mags;
  mags.reserve(g.value.size());
  for (std::size_t k = 0; k < g.value.size(); ++k)
    if (g.ok[k]) mags.push_back(std::abs(g.value[k]));
  if (mags.empty()) return 1.0;
  auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace detail

inline std::vector<ComplexEnergy> scan_candidates(const CharFn& f, const SearchRect& rect,
                                                  unsigned threads = 0) {
  return detail::candidate_cells(detail::evaluate_grid(f, rect, threads));
}

// Newton with a central-difference derivative; switches to Muller once the
// derivative estimate collapses (multiple or nearly multiple roots).
// Returns nullopt on failure. `bounds`, if given, aborts iterations that
// wander more than 25% of the rectangle size outside it. `check`, if given,
// replaces f in the |f| < tol_f test (and in the reported residual); the
// iteration itself always runs on f.
inline std::optional<Root> refine_root(const CharFn& f, ComplexEnergy z0, double tol_f, int max_iter = 100,
                                       const SearchRect* bounds = nullptr, const CharFn* check = nullptr) {
  auto scale_of = [](Complex z) { return std::max(1.0, std::abs(z)); };
  auto finite = [](Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
  try {
    Complex z = z0;
    Complex fz = f(z);
    if (!finite(fz)) return std::nullopt;
    Complex prev_deriv{};
    double prev_step = 0.0;
    bool muller = false;
    // Muller history: (z_{k-2}, z_{k-1}) and their values.
    Complex za{}, zb{}, fa{}, fb{};
    for (int it = 1; it <= max_iter; ++it) {
      Complex step;
      if (!muller) {
        const double h = 1e-6 * scale_of(z);
        const Complex d = (f(z + h) - f(z - h)) / (2.0 * h);
        const bool collapsed = it > 1 && std::abs(d) < 0.6 * std::abs(prev_deriv);
        if (d == Complex{} || !finite(d) || collapsed) {
          muller = true;
          za = z - 2.0 * h;
          zb = z - h;
          fa = f(za);
          fb = f(zb);
        } else {
          prev_deriv = d;
          step = -fz / d;
        }
      }
      if (muller) {
        const Complex h1 = zb - za, h2 = z - zb;
        const Complex d1 = (fb - fa) / h1, d2 = (fz - fb) / h2;
        const Complex a = (d2 - d1) / (h2 + h1);
        const Complex b = a * h2 + d2;
        const Complex disc = std::sqrt(b * b - 4.0 * fz * a);
        const Complex den = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
        step = den == Complex{} ? Complex(1e-8 * scale_of(z)) : -2.0 * fz / den;
        za = zb;
        fa = fb;
        zb = z;
        fb = fz;
      }
      if (!finite(step)) return std::nullopt;
      z += step;
      fz = f(z);
      if (!finite(fz)) return std::nullopt;
      if (bounds && !bounds->contains(z, 0.25)) return std::nullopt;
      // With a separate residual function (the shooting oracle) also stop
      // once the steps no longer contract: f has hit its evaluation noise
      // and further iterations only wander.
      const bool stalled = check && it > 2 && std::abs(step) >= 0.5 * prev_step;
      if (std::abs(step) < 1e-10 * scale_of(z) || stalled) {
        const double res = std::abs(check ? (*check)(z) : fz);
        if (res < tol_f) return Root{z, res, RootKind::real, std::nullopt, it};
      }
      prev_step = std::abs(step);
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

// Builds the function Newton iterates on near a given start point, for
// callers whose scan function is only sign-faithful, not analytic.
using LocalFn = std::function<CharFn(Complex)>;

// Full pipeline for an arbitrary function. `v1` is the asymptotic saturation
// used by the decay filter Re K1 > 0, Re K2 > 0.
inline Spectrum find_roots(const CharFn& f, double v1, const SearchRect& rect, const SolveOptions& opt = {},
                           const LocalFn& local = {}) {
  Spectrum out;
  const auto grid = detail::evaluate_grid(f, rect, opt.threads);
  out.masked_nodes = static_cast<std::size_t>(std::count(grid.ok.begin(), grid.ok.end(), 0));
  if (out.masked_nodes)
    out.warnings.push_back(std::to_string(out.masked_nodes) + " grid nodes could not be evaluated and were masked");
  out.f_scale = detail::median_abs(grid);
  out.tol_f_abs = std::max(opt.tol_f * out.f_scale, opt.tol_f_floor);
  const auto cand = detail::candidate_cells(grid);
  out.candidates = cand.size();

  auto refine = [&](Complex z0, const SearchRect* bounds) {
    if (!local) return refine_root(f, z0, out.tol_f_abs, opt.max_iter, bounds);
    try {
      return refine_root(local(z0), z0, out.tol_f_abs, opt.max_iter, bounds, &f);
    } catch (const Error&) {
      return std::optional<Root>{};
    }
  };

  std::vector<std::optional<Root>> refined(cand.size());
  detail::parallel_for(cand.size(), opt.threads, [&](std::size_t k) {
    refined[k] = refine(cand[k], &rect);
  });

  std::vector<Root> roots;
  std::size_t failed = 0;
  for (auto& r : refined) {
    if (r) roots.push_back(*r);
    else ++failed;
  }
  if (failed)
    out.warnings.push_back(std::to_string(failed) + " candidate cells did not refine to a root");

  auto close = [](Complex a, Complex b, double rel) {
    return std::abs(a - b) < rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  auto dedup = [&](std::vector<Root>& v) {
    std::sort(v.begin(), v.end(), [](const Root& a, const Root& b) {
      if (a.energy.real() != b.energy.real()) return a.energy.real() < b.energy.real();
      return a.energy.imag() < b.energy.imag();
    });
    std::vector<Root> kept;
    for (const auto& r : v) {
      bool dup = false;
      for (const auto& k : kept)
        if (close(k.energy, r.energy, 1e-6)) dup = true;
      if (!dup) kept.push_back(r);
    }
    v = std::move(kept);
  };
  dedup(roots);

  auto physical = [&](const Root& r) {
    return decay_k1(r.energy, v1).real() > 0.0 && decay_k2(r.energy, v1).real() > 0.0;
  };
  auto is_real = [&](Complex e) {
    return std::abs(e.imag()) < opt.tol_real * std::max(1.0, std::abs(e.real()));
  };

  std::vector<Root> accepted;
  for (const auto& r : roots) {
    if (!rect.contains(r.energy)) continue;
    if (physical(r)) accepted.push_back(r);
    else out.rejected.push_back({r, "Re K1 <= 0 or Re K2 <= 0 (not decaying)"});
  }

  // Conjugate partners: look for an existing match, otherwise refine at conj E.
  std::vector<Root> extra;
  for (const auto& r : accepted) {
    if (is_real(r.energy)) continue;
    const Complex target = std::conj(r.energy);
    bool found = false;
    for (const auto& s : accepted)
      if (close(s.energy, target, 1e-6)) found = true;
    for (const auto& s : extra)
      if (close(s.energy, target, 1e-6)) found = true;
    if (found) continue;
    auto partner = refine(target, nullptr);
    if (partner && close(partner->energy, target, 1e-6) && physical(*partner)) extra.push_back(*partner);
  }
  accepted.insert(accepted.end(), extra.begin(), extra.end());
  dedup(accepted);

  // Classify and pair.
  std::vector<double> sort_key(accepted.size());
  int next_pair = 1;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    auto& r = accepted[k];
    sort_key[k] = r.energy.real();
    if (is_real(r.energy)) {
      r.kind = RootKind::real;
      continue;
    }
    r.kind = r.energy.imag() > 0.0 ? RootKind::ccpe_plus : RootKind::ccpe_minus;
  }
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    auto& r = accepted[k];
    if (r.kind != RootKind::ccpe_plus) continue;
    for (std::size_t m = 0; m < accepted.size(); ++m) {
      auto& s = accepted[m];
      if (s.kind == RootKind::ccpe_minus && !s.pair_id && close(s.energy, std::conj(r.energy), 1e-6)) {
        r.pair_id = s.pair_id = next_pair++;
        sort_key[m] = sort_key[k];
        break;
      }
    }
  }
  for (const auto& r : accepted) {
    if (r.kind != RootKind::real && !r.pair_id) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "unpaired complex root %.10g%+.10gi (rectangle clipping or tolerance)",
                    r.energy.real(), r.energy.imag());
      out.warnings.emplace_back(buf);
    }
  }

  std::vector<std::size_t> order(accepted.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sort_key[a] != sort_key[b]) return sort_key[a] < sort_key[b];
    return accepted[a].energy.imag() < accepted[b].energy.imag();
  });
  for (std::size_t k : order) out.roots.push_back(accepted[k]);
  return out;
}

inline Spectrum find_spectrum(const ModelSpec& model, const SearchRect& rect, const SolveOptions& opt = {}) {
  validate(model);
  if (!has_characteristic(model))
    throw ConfigError(model_name(model) + " has no characteristic function");
  return find_roots([&model](Complex e) { return characteristic(model, e); }, saturation(model), rect, opt);
}

namespace detail {

// Marching squares on one real field sampled at the grid nodes. Segment end
// points live on cell edges; edges are keyed so that segments sharing an
// edge point can be chained into polylines.
inline std::vector<std::vector<Complex>> march(const GridValues& g, bool imag_part) {
  const auto& r = g.rect;
  auto val = [&](int i, int j) {
    const Complex v = g.value[g.index(i, j)];
    return imag_part ? v.imag() : v.real();
  };
  auto ok = [&](int i, int j) { return g.ok[g.index(i, j)] != 0; };
  // Edge key: horizontal edge (i,j)-(i+1,j) -> 2*node, vertical (i,j)-(i,j+1) -> 2*node+1.
  auto hkey = [&](int i, int j) { return 2 * static_cast<long>(g.index(i, j)); };
  auto vkey = [&](int i, int j) { return 2 * static_cast<long>(g.index(i, j)) + 1; };
  auto point = [&](int i0, int j0, int i1, int j1) {
    const double v0 = val(i0, j0), v1 = val(i1, j1);
    const double t = v0 / (v0 - v1);
    return r.node(i0, j0) + t * (r.node(i1, j1) - r.node(i0, j0));
  };

  std::map<long, Complex> where;
  std::vector<std::pair<long, long>> segs;
  for (int j = 0; j < r.ny; ++j) {
    for (int i = 0; i < r.nx; ++i) {
      if (!ok(i, j) || !ok(i + 1, j) || !ok(i + 1, j + 1) || !ok(i, j + 1)) continue;
      const bool s0 = nonneg(val(i, j)), s1 = nonneg(val(i + 1, j)), s2 = nonneg(val(i + 1, j + 1)),
                 s3 = nonneg(val(i, j + 1));
      // Crossed edges in counter-clockwise order: bottom, right, top, left.
      std::vector<long> keys;
      if (s0 != s1) { keys.push_back(hkey(i, j)); where[hkey(i, j)] = point(i, j, i + 1, j); }
      if (s1 != s2) { keys.push_back(vkey(i + 1, j)); where[vkey(i + 1, j)] = point(i + 1, j, i + 1, j + 1); }
      if (s3 != s2) { keys.push_back(hkey(i, j + 1)); where[hkey(i, j + 1)] = point(i, j + 1, i + 1, j + 1); }
      if (s0 != s3) { keys.push_back(vkey(i, j)); where[vkey(i, j)] = point(i, j, i, j + 1); }
      if (keys.size() == 2) {
        segs.emplace_back(keys[0], keys[1]);
      } else if (keys.size() == 4) {
        // Saddle: the centre average decides which corners are connected.
        const double centre = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
        if (nonneg(centre) == s0) {
          segs.emplace_back(keys[0], keys[1]);
          segs.emplace_back(keys[2], keys[3]);
        } else {
          segs.emplace_back(keys[0], keys[3]);
          segs.emplace_back(keys[1], keys[2]);
        }
      }
    }
  }

  std::map<long, std::vector<std::size_t>> touching;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    touching[segs[s].first].push_back(s);
    touching[segs[s].second].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);
  auto other_end = [&](std::size_t s, long key) { return segs[s].first == key ? segs[s].second : segs[s].first; };
  auto extend = [&](std::vector<long>& chain) {
    for (;;) {
      const long tail = chain.back();
      std::optional<std::size_t> nxt;
      for (std::size_t s : touching[tail])
        if (!used[s]) { nxt = s; break; }
      if (!nxt) return;
      used[*nxt] = 1;
      chain.push_back(other_end(*nxt, tail));
    }
  };

  std::vector<std::vector<Complex>> lines;
  // Open chains first (start at an end point touched once), then loops.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (used[s]) continue;
      if (pass == 0 && touching[segs[s].first].size() != 1 && touching[segs[s].second].size() != 1) continue;
      used[s] = 1;
      std::vector<long> chain;
      if (pass == 0 && touching[segs[s].first].size() != 1) chain = {segs[s].second, segs[s].first};
      else chain = {segs[s].first, segs[s].second};
      extend(chain);
      if (pass == 1) {
        std::reverse(chain.begin(), chain.end());
        extend(chain);
      }
      std::vector<Complex> line;
      line.reserve(chain.size());
      for (long k : chain) line.push_back(where[k]);
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

}  // namespace detail

inline ContourSet contour_polylines(const CharFn& f, const SearchRect& rect, unsigned threads = 0) {
  const auto g = detail::evaluate_grid(f, rect, threads);
  return {detail::march(g, false), detail::march(g, true)};
}

}  // namespace ptsat
