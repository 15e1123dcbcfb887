#include "entropy_lab/experiments.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include "entropy_lab/error.hpp"
#include "entropy_lab/heat.hpp"
#include "pipelines.hpp"

namespace entropy_lab {

namespace {

using detail::CaseSpec;
using detail::Definition;
using detail::Settings;

constexpr double kPi = std::numbers::pi;

const std::set<std::string> kKnownKeys = {
    "seed",        "output.dir", "manifold.kind", "manifold.length1", "manifold.length2",
    "manifold.radius", "grid.n1", "grid.n2",   "time.t0",          "time.t_end",
    "time.dt",     "tau.list"};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

double parse_number(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    config_error(key + ": '" + text + "' is not a finite number");
  return v;
}

double parse_positive(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v <= 0.0) config_error(key + " must be positive, got " + text);
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    config_error(key + ": '" + text + "' is not a nonnegative integer");
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) config_error(key + ": '" + text + "' is out of range");
  return v;
}

int parse_count(const std::string& key, const std::string& text, int lo, int hi) {
  const std::uint64_t v = parse_unsigned(key, text);
  if (v < static_cast<std::uint64_t>(lo) || v > static_cast<std::uint64_t>(hi))
    config_error(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(parse_positive(key, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

ManifoldDescriptor describe(const std::string& kind, double l1, double l2, double radius) {
  if (kind == "circle") return ManifoldDescriptor::circle(l1);
  if (kind == "torus") return ManifoldDescriptor::torus(l1, l2);
  if (kind == "sphere") return ManifoldDescriptor::sphere();
  if (kind == "box") return ManifoldDescriptor::box(l1, l2);
  return ManifoldDescriptor::disc(radius);
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

Settings resolve(const Definition& def, const Config& config, std::optional<std::uint64_t> seed) {
  for (const auto& [key, value] : config.entries()) {
    if (key.rfind("tolerance.", 0) == 0) {
      const std::string name = key.substr(10);
      const bool known = std::any_of(def.tolerances.begin(), def.tolerances.end(),
                                     [&](const auto& t) { return t.first == name; });
      if (!known) config_error("unknown tolerance " + key + " for experiment " + def.name);
      continue;
    }
    if (!kKnownKeys.count(key)) config_error("unknown key " + key);
    if ((key.rfind("time.", 0) == 0 || key == "tau.list") && !contains(def.keys, key))
      config_error("key " + key + " is not used by experiment " + def.name);
  }

  Settings s;
  s.seed = 100;
  if (config.has("seed")) s.seed = parse_unsigned("seed", config.get("seed"));
  if (seed) s.seed = *seed;
  for (const auto& [name, value] : def.tolerances) {
    const std::string key = "tolerance." + name;
    s.tolerances[name] = value;
    if (config.has(key)) {
      const double v = parse_number(key, config.get(key));
      if (v < 0.0 && value >= 0.0) config_error(key + " must be nonnegative");
      s.tolerances[name] = v;
    }
  }

  std::vector<CaseSpec> cases;
  if (config.has("manifold.kind")) {
    const std::string kind = config.get("manifold.kind");
    auto it = std::find_if(def.supported.begin(), def.supported.end(),
                           [&](const CaseSpec& c) { return c.kind == kind; });
    if (it == def.supported.end()) {
      std::string kinds;
      for (const auto& c : def.supported) kinds += (kinds.empty() ? "" : ", ") + c.kind;
      config_error("manifold.kind " + kind + " is not supported by " + def.name + " (supported: " +
                   kinds + ")");
    }
    CaseSpec c = *it;
    double l1 = c.desc.length1, l2 = c.desc.length2, radius = c.desc.radius;
    const bool lengths = kind == "circle" || kind == "torus" || kind == "box";
    if (config.has("manifold.length1")) {
      if (!lengths) config_error("manifold.length1 does not apply to " + kind);
      l1 = parse_positive("manifold.length1", config.get("manifold.length1"));
    }
    if (config.has("manifold.length2")) {
      if (kind != "torus" && kind != "box") config_error("manifold.length2 does not apply to " + kind);
      l2 = parse_positive("manifold.length2", config.get("manifold.length2"));
    }
    if (config.has("manifold.radius")) {
      if (kind != "disc") config_error("manifold.radius does not apply to " + kind);
      radius = parse_positive("manifold.radius", config.get("manifold.radius"));
    }
    c.desc = describe(kind, l1, l2, radius);
    if (config.has("grid.n1")) c.res.n1 = parse_count("grid.n1", config.get("grid.n1"), 4, 4096);
    if (config.has("grid.n2")) {
      if (kind == "circle") config_error("grid.n2 does not apply to circle");
      c.res.n2 = parse_count("grid.n2", config.get("grid.n2"), 4, 4096);
    }
    cases.push_back(c);
  } else {
    for (const char* key :
         {"manifold.length1", "manifold.length2", "manifold.radius", "grid.n1", "grid.n2"})
      if (config.has(key)) config_error(std::string(key) + " requires manifold.kind");
    for (const auto& kind : def.defaults)
      for (const auto& c : def.supported)
        if (c.kind == kind) cases.push_back(c);
  }

  for (auto& c : cases) {
    if (config.has("time.t0")) c.t0 = parse_positive("time.t0", config.get("time.t0"));
    if (config.has("time.t_end")) c.t_end = parse_positive("time.t_end", config.get("time.t_end"));
    if (config.has("time.dt")) c.dt = parse_positive("time.dt", config.get("time.dt"));
    if (config.has("tau.list")) c.taus = parse_list("tau.list", config.get("tau.list"));
    if (contains(def.keys, "time.t_end") && c.t_end <= c.t0)
      config_error("time.t_end must exceed time.t0");
    if (contains(def.keys, "time.dt") && c.dt > c.t_end - c.t0 && contains(def.keys, "time.t_end"))
      config_error("time.dt exceeds the time window");
    if (contains(def.keys, "time.t_end") && (c.t_end - c.t0) / c.dt > 1e6)
      config_error("more than 1e6 time steps");
    try {
      c.grid = build_grid(c.desc, c.res);
    } catch (const Error& e) {
      config_error(std::string("grid: ") + e.what());
    }
    const double floor = resolution_floor(*c.grid);
    if (contains(def.keys, "time.t0") && c.t0 < floor)
      config_error("time.t0 = " + format_double(c.t0) + " is below the resolution floor " +
                   format_double(floor) + " of " + c.label());
  }
  s.cases = std::move(cases);
  return s;
}

std::vector<std::pair<std::string, std::string>> echo(const Definition& def, const Settings& s) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("experiment", def.name);
  e.emplace_back("seed", std::to_string(s.seed));
  for (const auto& c : s.cases) {
    std::string v = c.label();
    if (contains(def.keys, "time.t0")) v += " t0=" + format_double(c.t0);
    if (contains(def.keys, "time.t_end")) v += " t_end=" + format_double(c.t_end);
    if (contains(def.keys, "time.dt")) v += " dt=" + format_double(c.dt);
    if (contains(def.keys, "tau.list")) v += " tau=" + list_text(c.taus);
    e.emplace_back("case", v);
  }
  for (const auto& [name, value] : def.tolerances)
    e.emplace_back("tolerance." + name, format_double(s.tol(name)));
  return e;
}

struct Single {
  bool passed = false;
  std::vector<std::string> failures;
};

Single run_one(const Definition& def, const Settings& s, const std::filesystem::path& dir) {
  Artifacts art(dir);
  try {
    def.run(s, art);
  } catch (const std::exception& e) {
    art.check("pipeline completed", false, e.what());
  }
  art.write_manifest(def.name, echo(def, s));
  Single r;
  r.passed = art.passed();
  for (const auto& a : art.assertions())
    if (!a.passed) r.failures.push_back(def.name + ": " + a.name + (a.detail.empty() ? "" : " : " + a.detail));
  return r;
}

}  // namespace

namespace detail {

std::string CaseSpec::label() const {
  std::string l = kind + "-" + std::to_string(res.n1);
  if (kind != "circle") l += "x" + std::to_string(res.n2);
  return l;
}

const std::vector<Definition>& definitions() {
  static const std::vector<Definition> defs = [] {
    const double L = 2 * kPi;
    auto make = [](std::string kind, ManifoldDescriptor desc, Resolution res, double t0,
                   double t_end, double dt, std::vector<double> taus = {}) {
      CaseSpec c;
      c.kind = std::move(kind);
      c.desc = std::move(desc);
      c.res = res;
      c.t0 = t0;
      c.t_end = t_end;
      c.dt = dt;
      c.taus = std::move(taus);
      return c;
    };
    const auto circle = ManifoldDescriptor::circle(L);
    const auto torus = ManifoldDescriptor::torus(L, L);
    const auto sphere = ManifoldDescriptor::sphere();
    const auto disc = ManifoldDescriptor::disc(1.0);
    const std::vector<double> kernel_times{0.05, 0.1, 0.2};
    const std::vector<double> box_times{0.01, 0.02, 0.03, 0.04, 0.05};
    std::vector<double> log_taus;
    for (int i = 0; i < 12; ++i) log_taus.push_back(0.01 * std::pow(1000.0, i / 11.0));
    log_taus.back() = 10.0;

    std::vector<Definition> d;
    d.push_back({"monotonicity",
                 "Theorem 0.1",
                 {make("sphere", sphere, {256, 16}, 0.01, 1.01, 0.01),
                  make("torus", torus, {128, 128}, 0.3, 1.3, 0.01),
                  make("circle", circle, {256, 1}, 0.3, 1.3, 0.01),
                  make("disc", disc, {48, 32}, 0.05, 1.05, 0.01),
                  make("box", ManifoldDescriptor::box(2, 2), {64, 64}, 0.05, 1.05, 0.01)},
                 {"sphere", "torus", "disc", "box"},
                 {"time.t0", "time.t_end", "time.dt"},
                 {{"slack", 1e-8}, {"flat_boundary", 1e-12}},
                 &run_monotonicity});
    d.push_back({"pointwise",
                 "Theorem 0.2",
                 {make("circle", circle, {1024, 1}, 0, 0, 0, kernel_times),
                  make("torus", torus, {128, 128}, 0, 0, 0, kernel_times),
                  make("sphere", sphere, {256, 16}, 0, 0, 0, kernel_times),
                  make("box", ManifoldDescriptor::box(4, 4), {256, 256}, 0, 0, 0, box_times)},
                 {"circle", "torus", "sphere", "box"},
                 {"tau.list"},
                 {{"defect", 1e-3},
                  {"sphere_floor", -0.01},
                  {"floor_stability", 0.05},
                  {"equality", 5e-3}},
                 &run_pointwise});
    d.push_back({"dissipation-match",
                 "Equation (0.4)",
                 {make("circle", circle, {256, 1}, 0.5, 0, 0.02),
                  make("torus", torus, {64, 64}, 0.5, 0, 0.04),
                  make("sphere", sphere, {128, 16}, 0.2, 0, 0.02)},
                 {"circle", "torus", "sphere"},
                 {"time.t0", "time.dt"},
                 {{"match", 0.05}, {"refinement_ratio", 1.7}, {"residual_order", 1.0}},
                 &run_dissipation_match});
    d.push_back({"liyau",
                 "Equation (0.6)",
                 {make("circle", circle, {1024, 1}, 0, 0, 0, kernel_times),
                  make("torus", torus, {128, 128}, 0, 0, 0, kernel_times),
                  make("sphere", sphere, {256, 16}, 0, 0, 0, kernel_times),
                  make("box", ManifoldDescriptor::box(4, 4), {256, 256}, 0, 0, 0, box_times)},
                 {"circle", "torus", "sphere", "box"},
                 {"tau.list"},
                 {{"defect", 1e-3}, {"equality", 5e-3}, {"comparison", 1e-3}},
                 &run_liyau});
    d.push_back({"varadhan",
                 "Theorem 0.3, Varadhan limit",
                 {make("circle", circle, {1024, 1}, 0, 0, 0, {0.1, 0.05, 0.025, 0.01, 0.004}),
                  make("sphere", sphere, {256, 16}, 0, 0, 0, {0.1, 0.05, 0.025, 0.01, 0.004})},
                 {"circle", "sphere"},
                 {"tau.list"},
                 {{"closed_form", 1e-4}},
                 &run_varadhan});
    d.push_back({"mu-curve",
                 "Corollary 0.1, Proposition 2.1",
                 {make("sphere", sphere, {256, 64}, 0, 0, 0, log_taus),
                  make("torus", torus, {128, 128}, 0, 0, 0, log_taus),
                  make("circle", circle, {256, 1}, 0, 0, 0, log_taus)},
                 {"sphere", "torus"},
                 {"tau.list"},
                 {{"monotone_slack", 1e-4},
                  {"ceiling", 1e-3},
                  {"small_tau_floor", -0.05},
                  {"gradient", 1e-5},
                  {"scaling", 1e-10}},
                 &run_mu_curve});
    d.push_back({"lsi-euclidean",
                 "Equation (0.8)",
                 {make("box", ManifoldDescriptor::box(16, 16), {256, 256}, 0, 0, 0, {0.5})},
                 {"box"},
                 {"tau.list"},
                 {{"mu", 5e-3}, {"l2_distance", 0.02}, {"sample_floor", -1e-6}, {"gaussian", 1e-4}},
                 &run_lsi_euclidean});
    d.push_back({"symmetrize",
                 "Proposition 3.1",
                 {make("box", ManifoldDescriptor::box(4, 4), {256, 256}, 0, 0, 0)},
                 {"box"},
                 {},
                 {{"layer_cake", 1e-3}, {"energy", 1e-12}},
                 &run_symmetrize});
    d.push_back({"growth",
                 "Proposition 3.2",
                 {make("box", ManifoldDescriptor::box(4, 4), {256, 256}, 0.01, 0.1, 0.0025),
                  make("sphere", sphere, {256, 16}, 0.5, 6.0, 0.5),
                  make("torus", torus, {128, 128}, 0.1, 10.0, 0.5)},
                 {"box", "sphere"},
                 {"time.t0", "time.t_end", "time.dt"},
                 {{"w_band", 0.05}, {"area_ratio", 5e-3}, {"bishop", 1e-3}},
                 &run_growth});
    d.push_back({"noncollapse",
                 "Proposition 4.1",
                 {make("box", ManifoldDescriptor::box(4, 4), {256, 256}, 0, 0, 0, {0.0625, 0.25, 1.0}),
                  make("sphere", sphere, {256, 64}, 0, 0, 0, {0.0625, 0.25, 1.0}),
                  make("torus", torus, {128, 128}, 0, 0, 0, {0.0625, 0.25, 1.0})},
                 {"box", "sphere", "torus"},
                 {"tau.list"},
                 {},
                 &run_noncollapse});
    return d;
  }();
  return defs;
}

}  // namespace detail

const std::vector<ExperimentInfo>& experiment_list() {
  static const std::vector<ExperimentInfo> list = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& d : detail::definitions()) v.push_back({d.name, d.anchor});
    v.push_back({"all", "every experiment above at default settings"});
    return v;
  }();
  return list;
}

std::string list_experiments() {
  std::string s;
  for (const auto& e : experiment_list()) s += e.name + " — " + e.anchor + "\n";
  return s;
}

RunOutcome run_experiment(const std::string& name, const Config& config, const RunOptions& opts) {
  RunOutcome o;
  const auto& defs = detail::definitions();
  std::vector<const Definition*> chosen;
  std::vector<Settings> settings;
  try {
    if (name == "all") {
      for (const auto& [key, value] : config.entries())
        if (key != "seed" && key != "output.dir")
          config_error("run all accepts only seed and output.dir, got " + key);
      std::optional<std::uint64_t> seed = opts.seed;
      if (!seed && config.has("seed")) seed = parse_unsigned("seed", config.get("seed"));
      for (const auto& d : defs) {
        chosen.push_back(&d);
        settings.push_back(resolve(d, Config{}, seed));
      }
    } else {
      auto it = std::find_if(defs.begin(), defs.end(), [&](const Definition& d) { return d.name == name; });
      if (it == defs.end()) config_error("unknown experiment " + name);
      chosen.push_back(&*it);
      settings.push_back(resolve(*it, config, opts.seed));
    }
  } catch (const Error& e) {
    o.exit_code = 2;
    o.message = e.what();
    return o;
  }

  o.out = opts.out ? *opts.out
                   : config.has("output.dir") ? std::filesystem::path(config.get("output.dir"))
                                              : std::filesystem::path("entropy-lab-out") / name;
  try {
    std::filesystem::create_directories(o.out);
  } catch (const std::exception& e) {
    o.exit_code = 2;
    o.message = std::string("cannot create output directory: ") + e.what();
    return o;
  }

  if (name != "all") {
    const Single r = run_one(*chosen[0], settings[0], o.out);
    o.failures = r.failures;
  } else {
    std::vector<Single> results(chosen.size());
    auto job = [&](int i) { results[i] = run_one(*chosen[i], settings[i], o.out / chosen[i]->name); };
    if (opts.parallel) {
      parallel_for(static_cast<int>(chosen.size()), job);
    } else {
      for (int i = 0; i < static_cast<int>(chosen.size()); ++i) job(i);
    }
    Artifacts top(o.out);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      top.check(chosen[i]->name, results[i].passed,
                std::to_string(results[i].failures.size()) + " failed assertions");
      top.record(chosen[i]->name + "/manifest.txt");
      o.failures.insert(o.failures.end(), results[i].failures.begin(), results[i].failures.end());
    }
    top.write_manifest("all", {{"experiment", "all"}, {"seed", std::to_string(settings[0].seed)}});
  }
  o.exit_code = o.failures.empty() ? 0 : 1;
  if (o.exit_code) o.message = std::to_string(o.failures.size()) + " assertion(s) failed";
  return o;
}

}  // namespace entropy_lab
