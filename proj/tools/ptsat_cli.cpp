// ptsat: spectra, eigenfunctions, contour sets and oracle cross-checks for
// PT-symmetric potentials with imaginary asymptotic saturation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ptsat/ptsat.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace ptsat;

enum ExitCode { kOk = 0, kConfig = 2, kConvergence = 3, kResidual = 4, kMismatch = 5 };

struct ExitError : std::runtime_error {
  int code;
  ExitError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

using Settings = std::map<std::string, std::string>;

const std::set<std::string> kKeys = {"model",  "V0",          "V1",           "a",        "s",       "c",
                                     "rect",   "grid",        "tol_f",        "tol_real", "x_range", "x_points",
                                     "energy", "analytic",    "force",        "out",      "format",  "oracle_grid",
                                     "oracle_steps", "oracle_L", "threads"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat "key = value" lines; '#' starts a comment.
Settings read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKeys.count(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (out.count(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a finite number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": not an integer: '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v, std::size_t n) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.size() != n) throw ConfigError(key + ": expected " + std::to_string(n) + " comma-separated values");
  return out;
}

struct RunConfig {
  ModelSpec model;
  json params;
  SearchRect rect;
  SearchRect oracle_rect;
  SolveOptions solve;
  ShootingConfig shooting;
  std::optional<XGrid> xgrid;
  std::optional<Complex> energy;
  bool analytic = false;
  bool force = false;
  std::string out;
  std::string format;
};

SearchRect default_rect(const ModelSpec& m) {
  return std::visit(Overloaded{[](const Step&) { return SearchRect{-20, 20, -20, 20}; },
                               [](const ExpStep&) { return SearchRect{0, 6, -6, 6}; },
                               [](const LinearStep&) { return SearchRect{0, 12, -4, 4}; },
                               [](const SquareWell& w) {
                                 return SearchRect{std::min(-w.V0, 0.0) - 1.0, 45, -4, 4};
                               },
                               [](const RosenMorse& r) {
                                 const double top = std::max(30.0, r.c * r.c + 5.0);
                                 return SearchRect{-r.s * (r.s + 1.0) - 1.0, top, -2, 2};
                               }},
                    m);
}

RunConfig build_config(const Settings& s, const std::string& command) {
  RunConfig rc;
  auto has = [&](const char* k) { return s.count(k) > 0; };
  auto get = [&](const char* k) -> const std::string& { return s.at(k); };
  auto num = [&](const char* k) {
    if (!has(k)) throw ConfigError(std::string("missing required parameter ") + k);
    return to_double(k, get(k));
  };

  if (!has("model")) throw ConfigError("missing --model");
  const std::string name = get("model");
  std::vector<const char*> allowed;
  if (name == "step") {
    rc.model = Step{num("V1")};
    allowed = {"V1"};
  } else if (name == "expstep") {
    rc.model = ExpStep{num("V1"), num("a")};
    allowed = {"V1", "a"};
  } else if (name == "linear") {
    rc.model = LinearStep{num("V1"), num("a")};
    allowed = {"V1", "a"};
  } else if (name == "sqwell") {
    rc.model = SquareWell{num("V0"), num("V1"), num("a")};
    allowed = {"V0", "V1", "a"};
  } else if (name == "rosen-morse") {
    rc.model = RosenMorse{num("s"), num("c")};
    allowed = {"s", "c"};
  } else {
    throw ConfigError("unknown model '" + name + "' (step|expstep|linear|sqwell|rosen-morse)");
  }
  for (const char* p : {"V0", "V1", "a", "s", "c"}) {
    const bool ok = std::find_if(allowed.begin(), allowed.end(),
                                 [&](const char* q) { return std::string(q) == p; }) != allowed.end();
    if (has(p) && !ok) throw ConfigError(std::string("parameter ") + p + " does not apply to model " + name);
  }
  validate(rc.model);
  for (const char* p : allowed) rc.params[p] = to_double(p, get(p));

  rc.rect = default_rect(rc.model);
  if (has("rect")) {
    const auto r = to_list("rect", get("rect"), 4);
    rc.rect.re_min = r[0];
    rc.rect.re_max = r[1];
    rc.rect.im_min = r[2];
    rc.rect.im_max = r[3];
  }
  if (has("grid")) {
    const auto g = to_list("grid", get("grid"), 2);
    rc.rect.nx = to_int("grid", std::to_string(g[0]));
    rc.rect.ny = to_int("grid", std::to_string(g[1]));
  }
  rc.rect.validate();
  rc.oracle_rect = rc.rect;
  rc.oracle_rect.nx = 120;
  rc.oracle_rect.ny = 60;
  if (has("oracle_grid")) {
    const auto g = to_list("oracle_grid", get("oracle_grid"), 2);
    rc.oracle_rect.nx = to_int("oracle_grid", std::to_string(g[0]));
    rc.oracle_rect.ny = to_int("oracle_grid", std::to_string(g[1]));
  }
  rc.oracle_rect.validate();

  if (has("tol_f")) rc.solve.tol_f = to_double("tol_f", get("tol_f"));
  if (has("tol_real")) rc.solve.tol_real = to_double("tol_real", get("tol_real"));
  if (!(rc.solve.tol_f > 0.0) || !(rc.solve.tol_real > 0.0)) throw ConfigError("tolerances must be positive");
  if (has("threads")) {
    const int t = to_int("threads", get("threads"));
    if (t < 0) throw ConfigError("threads must be >= 0");
    rc.solve.threads = static_cast<unsigned>(t);
  }

  rc.shooting = default_shooting(rc.model);
  if (has("oracle_steps")) rc.shooting.n_steps = to_int("oracle_steps", get("oracle_steps"));
  if (has("oracle_L")) rc.shooting.L = to_double("oracle_L", get("oracle_L"));

  if (has("x_range") || has("x_points")) {
    XGrid g;
    if (has("x_range")) {
      const auto r = to_list("x_range", get("x_range"), 2);
      g.lo = r[0];
      g.hi = r[1];
    } else {
      g.lo = g.hi = 0.0;  // filled from the default grid once E is known
    }
    if (has("x_points")) g.points = to_int("x_points", get("x_points"));
    if (g.points < 3) throw ConfigError("x_points must be >= 3");
    if (has("x_range") && !(g.lo < g.hi)) throw ConfigError("x_range needs lo < hi");
    rc.xgrid = g;
  }
  if (has("energy")) {
    const auto e = to_list("energy", get("energy"), 2);
    rc.energy = Complex(e[0], e[1]);
  }
  if (has("analytic")) rc.analytic = to_bool("analytic", get("analytic"));
  if (has("force")) rc.force = to_bool("force", get("force"));
  if (has("out")) rc.out = get("out");
  rc.format = has("format") ? get("format") : (command == "wavefunction" ? "csv" : "json");
  if (rc.format != "json" && rc.format != "csv") throw ConfigError("format must be json or csv");
  return rc;
}

json cjson(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json rect_json(const SearchRect& r) {
  return json{{"re_min", r.re_min}, {"re_max", r.re_max}, {"im_min", r.im_min},
              {"im_max", r.im_max}, {"nx", r.nx},         {"ny", r.ny}};
}

json header(const RunConfig& rc, const std::string& kind) {
  json j;
  j["tool_version"] = kVersion;
  j["kind"] = kind;
  j["model"] = model_name(rc.model);
  j["params"] = rc.params;
  j["units"] = kUnits;
  return j;
}

json root_json(const Root& r, const std::string& source) {
  json j;
  j["re"] = r.energy.real();
  j["im"] = r.energy.imag();
  j["kind"] = to_string(r.kind);
  j["pair_id"] = r.pair_id ? json(*r.pair_id) : json(nullptr);
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["source"] = source;
  return j;
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out.empty() || rc.out == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(rc.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + rc.out);
  f << text;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct SpectrumRun {
  std::vector<Root> roots;
  double tol_f_abs = 0.0;
  std::vector<RejectedRoot> rejected;
  std::vector<std::string> warnings;
  std::string source;
  SearchRect rect;
};

SpectrumRun analytic_roots(const RunConfig& rc) {
  SpectrumRun run{{}, 0.0, {}, {}, "analytic", rc.rect};
  std::vector<double> levels;
  if (auto* r = std::get_if<RosenMorse>(&rc.model)) {
    levels = rosen_morse_levels(r->s, r->c);
  } else if (auto* w = std::get_if<SquareWell>(&rc.model); w && w->V1 == 0.0) {
    levels = hermitian_sqwell_levels(w->V0, w->a, 1000);
  } else {
    throw ConfigError("--analytic is available for rosen-morse and for sqwell with V1 = 0");
  }
  for (double e : levels) run.roots.push_back(Root{Complex(e, 0.0), 0.0, RootKind::real, std::nullopt, 0});
  return run;
}

SpectrumRun oracle_roots(const RunConfig& rc) {
  auto s = oracle_spectrum(rc.model, rc.oracle_rect, rc.shooting, rc.solve);
  return {s.roots, s.tol_f_abs, s.rejected, s.warnings, "oracle", rc.oracle_rect};
}

SpectrumRun solve(const RunConfig& rc) {
  if (rc.analytic) return analytic_roots(rc);
  if (!has_characteristic(rc.model)) return oracle_roots(rc);
  auto s = find_spectrum(rc.model, rc.rect, rc.solve);
  return {s.roots, s.tol_f_abs, s.rejected, s.warnings, "characteristic", rc.rect};
}

int cmd_spectrum(const RunConfig& rc) {
  const SpectrumRun run = solve(rc);
  if (rc.format == "csv") {
    std::string out = "re,im,kind,pair_id,residual\n";
    for (const auto& r : run.roots) {
      out += fmt12(r.energy.real()) + "," + fmt12(r.energy.imag()) + "," + to_string(r.kind) + "," +
             (r.pair_id ? std::to_string(*r.pair_id) : "") + "," + fmt12(r.residual) + "\n";
    }
    emit(rc, out);
    return kOk;
  }
  json j = header(rc, "spectrum");
  j["source"] = run.source;
  j["rect"] = rect_json(run.rect);
  // residuals are raw |f|; tol_f_abs is tol_f times the median |f| on the scan grid
  j["tolerances"] = {{"tol_f", rc.solve.tol_f}, {"tol_real", rc.solve.tol_real}, {"tol_f_abs", run.tol_f_abs}};
  j["roots"] = json::array();
  for (const auto& r : run.roots) j["roots"].push_back(root_json(r, run.source));
  j["rejected"] = json::array();
  for (const auto& r : run.rejected) {
    json x = root_json(r.root, run.source);
    x["reason"] = r.reason;
    j["rejected"].push_back(x);
  }
  j["warnings"] = run.warnings;
  emit(rc, j.dump(2) + "\n");
  return kOk;
}

int cmd_wavefunction(const RunConfig& rc) {
  if (!rc.energy) throw ConfigError("wavefunction needs --energy re,im");
  const Complex e = *rc.energy;
  XGrid grid = default_grid(rc.model, e);
  if (rc.xgrid) {
    if (rc.xgrid->lo < rc.xgrid->hi) {
      grid.lo = rc.xgrid->lo;
      grid.hi = rc.xgrid->hi;
    }
    grid.points = rc.xgrid->points;
  }
  Eigenstate st;
  try {
    st = assemble(rc.model, e, grid);
  } catch (const DegenerateMatchError& ex) {
    throw ExitError(kResidual, std::string("energy is not an eigenvalue: ") + ex.what());
  }
  const double jump = st.match.max_jump();
  if (jump >= 1e-6 && !rc.force) {
    throw ExitError(kResidual, "matching residual " + fmt12(jump) +
                                   " exceeds 1e-6; the energy is not an eigenvalue (use --force to write anyway)");
  }

  const auto& s = st.sample;
  if (rc.format == "csv") {
    std::string out = "x,re_psi,im_psi,abs_psi,current\n";
    out.reserve(s.size() * 100);
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += fmt12(s.x[i]) + "," + fmt12(s.psi[i].real()) + "," + fmt12(s.psi[i].imag()) + "," +
             fmt12(std::abs(s.psi[i])) + "," + fmt12(s.current[i]) + "\n";
    }
    emit(rc, out);
  } else {
    json j = header(rc, "wavefunction");
    j["energy"] = cjson(e);
    json x = json::array(), re = json::array(), im = json::array(), ab = json::array(), cur = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      x.push_back(s.x[i]);
      re.push_back(s.psi[i].real());
      im.push_back(s.psi[i].imag());
      ab.push_back(std::abs(s.psi[i]));
      cur.push_back(s.current[i]);
    }
    j["x"] = x;
    j["re_psi"] = re;
    j["im_psi"] = im;
    j["abs_psi"] = ab;
    j["current"] = cur;
    emit(rc, j.dump(2) + "\n");
  }

  if (!rc.out.empty() && rc.out != "-") {
    json meta = header(rc, "wavefunction-meta");
    meta["energy"] = cjson(e);
    meta["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"points", grid.points}};
    meta["match"] = {{"joints", st.match.joints},
                     {"value_jump", st.match.value_jump},
                     {"derivative_jump", st.match.derivative_jump}};
    meta["peak_x"] = peak_position(s);
    meta["oscillations"] = oscillation_count(s);
    if (std::abs(e.imag()) >= rc.solve.tol_real * std::max(1.0, std::abs(e.real()))) {
      try {
        const auto partner = assemble(rc.model, std::conj(e), grid);
        const auto rp = e.imag() > 0.0 ? reflection_property(s, partner.sample)
                                       : reflection_property(partner.sample, s);
        meta["reflection"] = {{"partner_energy", cjson(std::conj(e))},
                              {"N", rp.N},
                              {"max_rel_dev", rp.max_rel_dev},
                              {"support", rp.support}};
      } catch (const Error& ex) {
        meta["reflection"] = {{"error", ex.what()}};
      }
    }
    std::ofstream f(rc.out + ".json", std::ios::binary);
    if (!f) throw ConfigError("cannot write " + rc.out + ".json");
    f << meta.dump(2) << "\n";
  }
  return kOk;
}

int cmd_contours(const RunConfig& rc) {
  ContourSet cs;
  std::string source = "characteristic";
  SearchRect rect = rc.rect;
  if (has_characteristic(rc.model)) {
    cs = contour_polylines([&](Complex e) { return characteristic(rc.model, e); }, rect, rc.solve.threads);
  } else {
    const Shooter sh(rc.model, rc.shooting);
    rect = rc.oracle_rect;
    source = "oracle";
    cs = contour_polylines([&](Complex e) { return sh.mismatch(e); }, rect, rc.solve.threads);
  }
  if (rc.format == "csv") {
    std::string out = "set,line,re,im\n";
    auto dump = [&](const char* name, const std::vector<std::vector<Complex>>& lines) {
      for (std::size_t l = 0; l < lines.size(); ++l)
        for (const auto& p : lines[l])
          out += std::string(name) + "," + std::to_string(l) + "," + fmt12(p.real()) + "," + fmt12(p.imag()) + "\n";
    };
    dump("re_zero", cs.re_zero);
    dump("im_zero", cs.im_zero);
    emit(rc, out);
    return kOk;
  }
  json j = header(rc, "contours");
  j["source"] = source;
  j["rect"] = rect_json(rect);
  auto lines = [](const std::vector<std::vector<Complex>>& ls) {
    json a = json::array();
    for (const auto& l : ls) {
      json pl = json::array();
      for (const auto& p : l) pl.push_back(cjson(p));
      a.push_back(pl);
    }
    return a;
  };
  j["re_zero"] = lines(cs.re_zero);
  j["im_zero"] = lines(cs.im_zero);
  emit(rc, j.dump(2) + "\n");
  return kOk;
}

int cmd_verify(const RunConfig& rc) {
  SpectrumRun ref;
  if (has_characteristic(rc.model)) {
    auto s = find_spectrum(rc.model, rc.rect, rc.solve);
    ref = {s.roots, s.tol_f_abs, s.rejected, s.warnings, "characteristic", rc.rect};
  } else {
    ref = analytic_roots(rc);
    std::vector<Root> inside;
    for (const auto& r : ref.roots)
      if (rc.rect.contains(r.energy)) inside.push_back(r);
    ref.roots = inside;
  }
  const SpectrumRun orc = oracle_roots(rc);

  auto tol = [](Complex e) { return std::max(1e-3, 1e-3 * std::abs(e)); };
  auto nearest = [](const std::vector<Root>& pool, Complex e) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < pool.size(); ++k)
      if (!best || std::abs(pool[k].energy - e) < std::abs(pool[*best].energy - e)) best = k;
    return best;
  };

  bool pass = true;
  json table = json::array();
  for (const auto& r : ref.roots) {
    json row;
    row["reference"] = cjson(r.energy);
    row["kind"] = to_string(r.kind);
    const auto k = nearest(orc.roots, r.energy);
    if (k) {
      const double d = std::abs(orc.roots[*k].energy - r.energy);
      row["oracle"] = cjson(orc.roots[*k].energy);
      row["delta"] = d;
      row["ok"] = d < tol(r.energy);
    } else {
      row["oracle"] = nullptr;
      row["delta"] = nullptr;
      row["ok"] = false;
    }
    pass = pass && row["ok"].get<bool>();
    table.push_back(row);
  }
  json extra = json::array();
  for (const auto& o : orc.roots) {
    const auto k = nearest(ref.roots, o.energy);
    if (!k || std::abs(ref.roots[*k].energy - o.energy) >= tol(o.energy)) {
      extra.push_back(cjson(o.energy));
      pass = false;
    }
  }

  json j = header(rc, "verify");
  j["reference_source"] = ref.source;
  j["rect"] = rect_json(rc.rect);
  j["oracle_rect"] = rect_json(rc.oracle_rect);
  j["shooting"] = {{"L", rc.shooting.L}, {"n_steps", rc.shooting.n_steps}, {"matcher_x", rc.shooting.matcher_x}};
  j["agreement_rule"] = "|dE| < max(1e-3, 1e-3*|E|)";
  j["roots"] = table;
  j["unmatched_oracle_roots"] = extra;
  j["warnings"] = {{"reference", ref.warnings}, {"oracle", orc.warnings}};
  j["pass"] = pass;
  emit(rc, j.dump(2) + "\n");
  return pass ? kOk : kMismatch;
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const FlagSpec kFlags[] = {
    {"--model", "model", "step|expstep|linear|sqwell|rosen-morse"},
    {"--V0", "V0", "well depth (sqwell)"},
    {"--V1", "V1", "saturation strength"},
    {"--a", "a", "length scale"},
    {"--s", "s", "Rosen-Morse s > 0"},
    {"--c", "c", "Rosen-Morse c"},
    {"--rect", "rect", "re_min,re_max,im_min,im_max"},
    {"--grid", "grid", "NX,NY scan cells"},
    {"--tol-f", "tol_f", "root tolerance relative to median |f| on the grid"},
    {"--tol-real", "tol_real", "|Im E| < tol_real*max(1,|Re E|) counts as real"},
    {"--x-range", "x_range", "lo,hi for wavefunction samples"},
    {"--x-points", "x_points", "number of wavefunction samples"},
    {"--energy", "energy", "re,im"},
    {"--out", "out", "output path (default stdout)"},
    {"--config", "config", "flat key = value config file"},
    {"--format", "format", "json|csv"},
    {"--oracle-grid", "oracle_grid", "NX,NY scan cells for the shooting oracle"},
    {"--oracle-steps", "oracle_steps", "RK4 steps per half-line"},
    {"--oracle-L", "oracle_L", "shooting half-width"},
    {"--threads", "threads", "worker threads (0 = all cores)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of PT-symmetric potentials with imaginary asymptotic saturation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<CLI::Option*>> opts;
  std::map<std::string, bool> bools{{"analytic", false}, {"force", false}};
  std::map<std::string, std::vector<CLI::Option*>> bool_opts;

  const char* commands[][2] = {{"spectrum", "locate eigenvalues in a rectangle of the complex E plane"},
                               {"wavefunction", "sample the eigenfunction at --energy (CSV)"},
                               {"contours", "zero contours of Re f and Im f"},
                               {"verify", "cross-check characteristic roots against the shooting oracle"}};
  std::vector<CLI::App*> subs;
  for (auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    for (const auto& f : kFlags) opts[f.key].push_back(sub->add_option(f.flag, values[f.key], f.help));
    bool_opts["analytic"].push_back(sub->add_flag("--analytic", bools["analytic"], "use the closed-form spectrum"));
    bool_opts["force"].push_back(sub->add_flag("--force", bools["force"], "write even if the residual check fails"));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  try {
    Settings flags;
    for (const auto& [key, list] : opts)
      for (auto* o : list)
        if (o->count()) flags[key] = values[key];
    for (const auto& [key, list] : bool_opts)
      for (auto* o : list)
        if (o->count()) flags[key] = "true";

    Settings merged;
    if (flags.count("config")) merged = read_config(flags.at("config"));
    for (const auto& [k, v] : flags)
      if (k != "config") merged[k] = v;

    const RunConfig rc = build_config(merged, command);
    if (command == "spectrum") return cmd_spectrum(rc);
    if (command == "wavefunction") return cmd_wavefunction(rc);
    if (command == "contours") return cmd_contours(rc);
    return cmd_verify(rc);
  } catch (const ExitError& e) {
    std::cerr << "ptsat: " << e.what() << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "ptsat: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DegenerateMatchError& e) {
    std::cerr << "ptsat: " << e.what() << "\n";
    return kResidual;
  } catch (const Error& e) {
    std::cerr << "ptsat: solver failure: " << e.what() << "\n";
    return kConvergence;
  }
}
