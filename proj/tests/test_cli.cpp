#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entropy_lab/error.hpp"
#include "entropy_lab/experiments.hpp"
#include "entropy_lab/output.hpp"

using namespace entropy_lab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("entropy_lab_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

RunOutcome run(const std::string& name, const std::string& config, const fs::path& out) {
  RunOptions opts;
  opts.out = out;
  return run_experiment(name, Config::parse(config), opts);
}

}  // namespace

TEST_CASE("config parsing trims, skips comments and rejects malformed lines") {
  const Config c = Config::parse("# comment\n\n  manifold.kind = sphere  \ntime.dt=0.01\n");
  CHECK(c.has("manifold.kind"));
  CHECK(c.get("manifold.kind") == "sphere");
  CHECK(c.get("time.dt") == "0.01");
  CHECK(c.entries().size() == 2);

  CHECK(code_of([] { Config::parse("no equals sign\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { Config::parse("=1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { Config::parse("a=\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { Config::parse("a=1\na=2\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { Config::load("/nonexistent/entropy.cfg"); }) == ErrorCode::ConfigError);
}

TEST_CASE("doubles print with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::exp(u(rng)) * (i % 2 ? -1 : 1);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv follows RFC 4180 with LF endings") {
  CsvTable t({"name", "value", "count"});
  t.add({std::string("plain"), 0.5, std::int64_t{3}});
  t.add({std::string("has,comma"), 1.0, std::int64_t{-1}});
  t.add({std::string("has \"quote\""), 2.0, std::int64_t{0}});
  t.add({std::string("line\nbreak"), 3.0, std::int64_t{0}});
  const std::string s = t.str();
  CHECK(s.find('\r') == std::string::npos);
  CHECK(s ==
        "name,value,count\n"
        "plain,0.5,3\n"
        "\"has,comma\",1,-1\n"
        "\"has \"\"quote\"\"\",2,0\n"
        "\"line\nbreak\",3,0\n");
  CHECK(code_of([&] { t.add({1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("svg has the fixed viewport, one path per series and escaped text") {
  Plot p;
  p.title = "W <t> & \"more\"";
  p.xlabel = "t";
  p.ylabel = "W";
  p.series.push_back({"a", {0, 1, 2}, {0, 1, 4}});
  p.series.push_back({"b", {0, 1, 2}, {1, std::numeric_limits<double>::quiet_NaN(), 3}});
  const std::string s = render_svg(p);
  CHECK(s.find("width=\"800\"") != std::string::npos);
  CHECK(s.find("height=\"600\"") != std::string::npos);
  CHECK(s.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(s.find("W &lt;t&gt; &amp; &quot;more&quot;") != std::string::npos);
  CHECK(s.find("<t>") == std::string::npos);
  CHECK(s.find("nan") == std::string::npos);
  CHECK(render_svg(p) == s);

  Plot logp = p;
  logp.logx = true;
  logp.series = {{"c", {0.01, 0.1, 1, 10}, {1, 2, 3, 4}}};
  const std::string ls = render_svg(logp);
  CHECK(ls.find("stroke=") != std::string::npos);
  CHECK(ls != s);
}

TEST_CASE("manifest echoes config, version and the assertion table") {
  TempDir tmp("manifest");
  Artifacts a(tmp.path);
  CsvTable t({"x"});
  t.add({1.0});
  a.csv("x.csv", t);
  a.constant("kappa", 0.25);
  CHECK(a.check("first", true, "fine"));
  CHECK_FALSE(a.check("second", false, "broken"));
  CHECK_FALSE(a.passed());
  a.write_manifest("demo", {{"seed", "7"}});
  const std::string m = slurp(tmp.path / "manifest.txt");
  CHECK(m.find("experiment = demo") != std::string::npos);
  CHECK(m.find(std::string("version = ") + version()) != std::string::npos);
  CHECK(m.find("status = FAILED") != std::string::npos);
  CHECK(m.find("seed = 7") != std::string::npos);
  CHECK(m.find("kappa = 0.25") != std::string::npos);
  CHECK(m.find("PASS first : fine") != std::string::npos);
  CHECK(m.find("FAIL second : broken") != std::string::npos);
  CHECK(m.find("x.csv") != std::string::npos);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(257, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(8, [](int i) {
                    if (i == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  CHECK(worker_count() >= 1);
}

TEST_CASE("ENTROPY_LAB_THREADS caps the worker count") {
  ::setenv("ENTROPY_LAB_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  ::unsetenv("ENTROPY_LAB_THREADS");
}

TEST_CASE("list names eleven experiments with their anchors") {
  CHECK(experiment_list().size() == 11);
  CHECK(experiment_list().back().name == "all");
  const std::string text = list_experiments();
  CHECK(lines(text).size() == 11);
  CHECK(text.find("monotonicity \xE2\x80\x94 Theorem 0.1") != std::string::npos);
  CHECK(text.find("noncollapse \xE2\x80\x94 Proposition 4.1") != std::string::npos);
  std::set<std::string> names;
  for (const auto& e : experiment_list()) names.insert(e.name);
  for (const char* n : {"monotonicity", "pointwise", "dissipation-match", "liyau", "varadhan",
                        "mu-curve", "lsi-euclidean", "symmetrize", "growth", "noncollapse", "all"})
    CHECK(names.count(n) == 1);
}

TEST_CASE("config errors exit 2 and leave no outputs") {
  TempDir tmp("config_errors");
  const std::vector<std::pair<std::string, std::string>> bad = {
      {"monotonicity", "time.dt = 0\n"},
      {"monotonicity", "time.dt = -0.01\n"},
      {"monotonicity", "time.t0 = 0.5\ntime.t_end = 0.2\n"},
      {"monotonicity", "unknown.key = 1\n"},
      {"monotonicity", "tau.list = 0.1\n"},
      {"monotonicity", "grid.n1 = 64\n"},
      {"monotonicity", "manifold.kind = klein\n"},
      {"monotonicity", "manifold.kind = sphere\nmanifold.length1 = 3\n"},
      {"monotonicity", "manifold.kind = box\ngrid.n1 = 2\n"},
      {"monotonicity", "manifold.kind = box\ngrid.n1 = 64x\n"},
      {"pointwise", "tau.list = 0.1,-0.2\n"},
      {"pointwise", "tolerance.nonexistent = 1\n"},
      {"symmetrize", "time.dt = 0.1\n"},
      {"noncollapse", "seed = -4\n"},
      {"monotonicity", "tolerance.slack = -1\n"},
      {"all", "manifold.kind = sphere\n"},
      {"frobnicate", ""},
  };
  for (const auto& [name, text] : bad) {
    CAPTURE(name);
    CAPTURE(text);
    const fs::path out = tmp.path / "out";
    const RunOutcome o = run(name, text, out);
    CHECK(o.exit_code == 2);
    CHECK_FALSE(o.message.empty());
    CHECK_FALSE(fs::exists(out));
  }
}

TEST_CASE("a passing run writes CSV, SVG and a PASSED manifest") {
  TempDir tmp("liyau");
  const RunOutcome o = run("liyau", "manifold.kind = circle\ngrid.n1 = 512\n", tmp.path);
  CHECK(o.exit_code == 0);
  CHECK(o.failures.empty());
  const std::string m = slurp(tmp.path / "manifest.txt");
  CHECK(m.find("status = PASSED") != std::string::npos);
  CHECK(m.find("case = circle-512") != std::string::npos);
  bool csv = false, svg = false;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    csv = csv || e.path().extension() == ".csv";
    svg = svg || e.path().extension() == ".svg";
  }
  CHECK(csv);
  CHECK(svg);
}

TEST_CASE("a tolerance override that cannot hold exits 1 and lists failures") {
  TempDir tmp("override");
  const RunOutcome o =
      run("liyau", "manifold.kind = box\ntau.list = 0.01\ntolerance.equality = 0\n", tmp.path);
  CHECK(o.exit_code == 1);
  REQUIRE_FALSE(o.failures.empty());
  CHECK(o.failures.front().find("equality") != std::string::npos);
  CHECK(slurp(tmp.path / "manifest.txt").find("status = FAILED") != std::string::npos);
}

TEST_CASE("monotonicity on the sphere writes a nonincreasing W column") {
  TempDir tmp("sphere");
  const RunOutcome o = run("monotonicity", "manifold.kind = sphere\n", tmp.path);
  CHECK(o.exit_code == 0);
  const auto rows = lines(slurp(tmp.path / "monotonicity_sphere-256x16.csv"));
  REQUIRE(rows.size() > 100);
  std::istringstream head(rows[0]);
  int wcol = -1, col = 0;
  for (std::string h; std::getline(head, h, ','); ++col)
    if (h == "W") wcol = col;
  REQUIRE(wcol >= 0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::istringstream row(rows[r]);
    std::string cell;
    for (int k = 0; k <= wcol; ++k) std::getline(row, cell, ',');
    const double w = std::stod(cell);
    CHECK(w <= prev + 1e-8);
    prev = w;
  }
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempDir a("det_a"), b("det_b");
  const std::string cfg = "manifold.kind = box\n";
  RunOptions oa, ob;
  oa.out = a.path;
  ob.out = b.path;
  oa.seed = ob.seed = 11;
  REQUIRE(run_experiment("symmetrize", Config::parse(cfg), oa).exit_code == 0);
  REQUIRE(run_experiment("symmetrize", Config::parse(cfg), ob).exit_code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a.path)) {
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(b.path / e.path().filename()));
    ++files;
  }
  CHECK(files >= 3);
}
