// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed here.
// Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ptsat/ptsat.hpp"

using namespace ptsat;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "ok       " : "NOT MET  ") + what);
  }
};

std::string fmt(Complex e) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f%+.4fi", e.real(), e.imag());
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string list(const std::vector<Root>& roots) {
  std::string s;
  for (const auto& r : roots) s += (s.empty() ? "" : " ") + fmt(r.energy);
  return s.empty() ? "(none)" : s;
}

double nearest(const std::vector<Root>& roots, Complex e) {
  double best = INFINITY;
  for (const auto& r : roots) best = std::min(best, std::abs(r.energy - e));
  return best;
}

// Every expected value within tol of a distinct found root, and nothing else found.
void expect_set(Outcome& o, const std::vector<Root>& found, const std::vector<Complex>& want, double tol) {
  for (Complex e : want) {
    const double d = nearest(found, e);
    o.check(d < tol, "expected " + fmt(e) + ": nearest root at distance " + fmt(d));
  }
  o.check(found.size() == want.size(),
          std::to_string(found.size()) + " roots found, " + std::to_string(want.size()) + " expected: " + list(found));
}

std::vector<Complex> pairs(std::initializer_list<Complex> upper) {
  std::vector<Complex> v;
  for (Complex e : upper) {
    v.push_back(e);
    v.push_back(std::conj(e));
  }
  return v;
}

struct Case {
  std::string name;
  ModelSpec model;
  SearchRect rect;
  Spectrum spectrum;
};

const SearchRect kOracleGrid{0, 0, 0, 0, 120, 60};

SearchRect with_grid(SearchRect r, const SearchRect& g) {
  r.nx = g.nx;
  r.ny = g.ny;
  return r;
}

std::vector<Case>& cases() {
  static std::vector<Case> c = [] {
    std::vector<Case> v = {
        {"expstep V1=5 a=8", ExpStep{5, 8}, {0, 6, -6, 6}, {}},
        {"linear V1=5 a=2", LinearStep{5, 2}, {0, 12, -4, 4}, {}},
        {"sqwell V0=0 V1=5 a=2", SquareWell{0, 5, 2}, {-1, 10, -4, 4}, {}},
        {"sqwell V0=5 V1=2 a=2", SquareWell{5, 2, 2}, {-6, 45, -4, 4}, {}},
        {"sqwell V0=-5 V1=2 a=2", SquareWell{-5, 2, 2}, {-1, 45, -4, 4}, {}},
    };
    for (auto& k : v) k.spectrum = find_spectrum(k.model, k.rect);
    return v;
  }();
  return c;
}

Outcome criterion_expstep() {
  Outcome o;
  const auto& s = cases()[0].spectrum;
  expect_set(o, s.roots, pairs({{2.28, 4.80}, {3.54, 3.69}, {2.64, 2.09}}), 0.05);
  std::size_t real = 0;
  for (const auto& r : s.roots) real += r.kind == RootKind::real;
  o.check(real == 0, std::to_string(real) + " real roots");
  return o;
}

Outcome criterion_linear() {
  Outcome o;
  expect_set(o, cases()[1].spectrum.roots, {{4.2959, -1.5653}, {4.2959, 1.5653}, 6.5952, 10.7814}, 5e-3);
  return o;
}

// The well half-width is ambiguous in the source: both are run and the one
// reproducing the listed levels is adopted.
Outcome criterion_sqwell_hermitian_core() {
  Outcome o;
  const std::vector<Complex> want = {0.4619, 1.8754, 4.3348, 7.9631};
  const SearchRect rect = cases()[2].rect;
  double adopted = 0.0;
  for (double a : {2.0, 8.0}) {
    const auto s = find_spectrum(SquareWell{0, 5, a}, rect);
    bool all = s.roots.size() == want.size();
    for (Complex e : want) all = all && nearest(s.roots, e) < 5e-3;
    o.notes.push_back("         a=" + fmt(a) + ": " + list(s.roots));
    if (all && adopted == 0.0) adopted = a;
  }
  o.check(adopted != 0.0, adopted != 0.0 ? "adopted a=" + fmt(adopted) : "neither a=2 nor a=8 matches");
  if (adopted == 2.0) {
    expect_set(o, cases()[2].spectrum.roots, want, 5e-3);
    std::size_t ccpe = 0;
    for (const auto& r : cases()[2].spectrum.roots) ccpe += r.kind != RootKind::real;
    o.check(ccpe == 0, std::to_string(ccpe) + " CCPEs");
  }
  return o;
}

Outcome criterion_sqwell_deep() {
  Outcome o;
  auto want = pairs({{-3.8081, 1.6840}, {-0.2267, 0.7944}});
  for (double e : {7.4807, 8.2005, 19.6416, 23.0117, 37.0765}) want.push_back(e);
  expect_set(o, cases()[3].spectrum.roots, want, 5e-3);
  return o;
}

Outcome criterion_sqwell_barrier() {
  Outcome o;
  auto want = pairs({{12.9285, 1.9100}, {23.9465, 1.0938}});
  want.push_back(38.2666);
  expect_set(o, cases()[4].spectrum.roots, want, 5e-3);
  return o;
}

const RosenMorse kRM{3.2, 1};
const SearchRect kRMRect{-14.44, 30, -2, 2, 120, 60};

Spectrum& rm_oracle() {
  static Spectrum s = oracle_spectrum(kRM, kRMRect, default_shooting(kRM));
  return s;
}

Outcome criterion_rosen_morse() {
  Outcome o;
  expect_set(o, rm_oracle().roots, {-10.1423, -4.6334, -0.7456, 24.96}, 1e-2);
  return o;
}

Outcome criterion_step() {
  Outcome o;
  const SearchRect rect{-20, 20, -20, 20};
  const auto c = find_spectrum(Step{5}, rect);
  o.check(c.roots.empty(), "characteristic: " + list(c.roots));
  const auto s = oracle_spectrum(Step{5}, with_grid(rect, kOracleGrid), default_shooting(Step{5}));
  o.check(s.roots.empty(), "oracle: " + list(s.roots));
  return o;
}

Outcome criterion_hermitian_limit() {
  Outcome o;
  const double v0 = 5, a = 2;
  const auto s = find_spectrum(SquareWell{v0, 1e-8, a}, {-v0 - 0.5, -1e-3, -0.5, 0.5});
  std::vector<Complex> want;
  for (double e : hermitian_sqwell_levels(v0, a, 100)) want.push_back(e);
  expect_set(o, s.roots, want, 1e-4);
  return o;
}

// ---- property suite

void closure(Outcome& o) {
  double worst = 0.0;
  auto scan = [&](const std::vector<Root>& roots) {
    for (const auto& r : roots) worst = std::max(worst, nearest(roots, std::conj(r.energy)) / std::max(1.0, std::abs(r.energy)));
  };
  for (const auto& c : cases()) scan(c.spectrum.roots);
  scan(rm_oracle().roots);
  o.check(worst < 1e-8, "conjugation closure: worst relative partner distance " + fmt(worst));
}

void reflection(Outcome& o) {
  double worst = 0.0;
  int count = 0;
  for (const auto& c : cases())
    for (const auto& r : c.spectrum.roots) {
      if (r.kind != RootKind::ccpe_plus) continue;
      const XGrid g = default_grid(c.model, r.energy);
      const auto plus = assemble(c.model, r.energy, g).sample;
      const auto minus = assemble(c.model, std::conj(r.energy), g).sample;
      worst = std::max(worst, reflection_property(plus, minus).max_rel_dev);
      ++count;
    }
  o.check(count > 0 && worst < 1e-3, "reflection property over " + std::to_string(count) + " CCPEs: worst deviation " + fmt(worst));
}

void symmetry(Outcome& o) {
  double worst = 0.0;
  int count = 0;
  for (const auto& c : cases())
    for (const auto& r : c.spectrum.roots) {
      if (r.kind != RootKind::real) continue;
      const auto s = assemble(c.model, r.energy).sample;
      const std::size_t n = s.size();
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(std::abs(s.psi[i]) - std::abs(s.psi[n - 1 - i])));
      ++count;
    }
  o.check(count > 0 && worst < 1e-6, "|psi(x)| = |psi(-x)| over " + std::to_string(count) + " real roots: worst " + fmt(worst));
}

void matching(Outcome& o) {
  double at_root = 0.0;
  for (const auto& c : cases()) {
    double displaced = INFINITY;
    for (const auto& r : c.spectrum.roots) {
      at_root = std::max(at_root, assemble(c.model, r.energy).match.max_jump());
      displaced = std::min(displaced, assemble(c.model, r.energy * 1.01).match.max_jump());
    }
    if (!c.spectrum.roots.empty())
      o.check(displaced > 1e-3, "matching at 1%-displaced energies, " + c.name + ": smallest jump " + fmt(displaced));
  }
  o.check(at_root < 1e-6, "matching at roots: largest jump " + fmt(at_root));
}

void currents(Outcome& o) {
  double milne = 0.0;
  for (const auto& m : milne_states()) {
    const auto s = sample_milne(m, {-6, 6, 2001});
    for (double j : s.current) milne = std::max(milne, std::abs(j - m.C));
  }
  o.check(milne < 1e-8, "Milne states: max |J - C| " + fmt(milne));

  double ends = 0.0;
  int count = 0;
  auto scan = [&](const ModelSpec& m, Complex e) {
    const auto s = assemble(m, e).sample;
    ends = std::max({ends, std::abs(s.current.front()), std::abs(s.current.back())});
    ++count;
  };
  for (const auto& c : cases())
    for (const auto& r : c.spectrum.roots) scan(c.model, r.energy);
  for (double e : rosen_morse_levels(kRM.s, kRM.c)) scan(kRM, e);
  o.check(ends < 1e-6, "endpoint |J| (max|psi| = 1) over " + std::to_string(count) + " eigenstates: " + fmt(ends));
}

void oracle_agreement(Outcome& o) {
  for (const auto& c : cases()) {
    const auto orc = oracle_spectrum(c.model, with_grid(c.rect, kOracleGrid), default_shooting(c.model));
    double worst = 0.0;
    for (const auto& r : c.spectrum.roots) worst = std::max(worst, nearest(orc.roots, r.energy));
    for (const auto& r : orc.roots) worst = std::max(worst, nearest(c.spectrum.roots, r.energy));
    o.check(worst < 1e-3 && orc.roots.size() == c.spectrum.roots.size(),
            "oracle vs characteristic, " + c.name + ": " + std::to_string(orc.roots.size()) + "/" +
                std::to_string(c.spectrum.roots.size()) + " roots, worst distance " + fmt(worst));
  }
}

void grid_doubling(Outcome& o) {
  for (const auto& c : cases()) {
    SearchRect fine = c.rect;
    fine.nx *= 2;
    fine.ny *= 2;
    const auto s = find_spectrum(c.model, fine);
    double worst = 0.0;
    for (const auto& r : c.spectrum.roots) worst = std::max(worst, nearest(s.roots, r.energy) / std::max(1.0, std::abs(r.energy)));
    o.check(s.roots.size() == c.spectrum.roots.size() && worst < 1e-6,
            "grid doubling, " + c.name + ": relative shift " + fmt(worst));
  }
}

Outcome criterion_properties() {
  Outcome o;
  closure(o);
  reflection(o);
  symmetry(o);
  matching(o);
  currents(o);
  oracle_agreement(o);
  grid_doubling(o);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"ExpStep V1=5 a=8: three CCPEs at 2.28+-4.80i, 3.54+-3.69i, 2.64+-2.09i (0.05), no real roots", criterion_expstep},
      {"LinearStep V1=5 a=2: 4.2959+-1.5653i, 6.5952, 10.7814 (5e-3)", criterion_linear},
      {"SquareWell V0=0 V1=5: 0.4619, 1.8754, 4.3348, 7.9631 (5e-3), no CCPEs", criterion_sqwell_hermitian_core},
      {"SquareWell V0=5 V1=2 a=2: -3.8081+-1.6840i, -0.2267+-0.7944i, 7.4807, 8.2005, 19.6416, 23.0117, 37.0765 (5e-3)",
       criterion_sqwell_deep},
      {"SquareWell V0=-5 V1=2 a=2: 12.9285+-1.9100i, 23.9465+-1.0938i, 38.2666 (5e-3)", criterion_sqwell_barrier},
      {"RosenMorse s=3.2 c=1: oracle gives -10.1423, -4.6334, -0.7456, 24.96 (1e-2)", criterion_rosen_morse},
      {"Step V1=5: empty spectrum on [-20,20]^2 from both pipelines", criterion_step},
      {"Hermitian limit: SquareWell V0=5 V1=1e-8 a=2 matches bisection levels (1e-4)", criterion_hermitian_limit},
      {"Property suite", criterion_properties},
  };

  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%d] %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, secs);
    for (const auto& n : o.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
