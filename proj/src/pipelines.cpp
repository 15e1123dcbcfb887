#include "pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "entropy_lab/entropy.hpp"
#include "entropy_lab/growth.hpp"
#include "entropy_lab/harnack.hpp"
#include "entropy_lab/logsob.hpp"
#include "entropy_lab/rearrange.hpp"

namespace entropy_lab::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) { return format_double(v); }

std::string bound(const std::string& what, double value, const char* op, double limit) {
  return what + " = " + fmt(value) + " " + op + " " + fmt(limit);
}

/// Nodes on a ray from the base point, ordered by distance.
std::vector<int> ray(const GridPtr& grid, const BasePoint& base) {
  const ManifoldGrid& g = *grid;
  const ScalarField d = distance_field(grid, base);
  std::vector<int> nodes;
  if (g.kind() == GridKind::WarpedSurface || g.kind() == GridKind::EuclideanDisc) {
    for (int i = 0; i < g.n1(); ++i) nodes.push_back(g.index(i, 0));
  } else if (g.kind() == GridKind::Circle) {
    for (int k = 0; k < g.node_count(); ++k)
      if (g.coord(k, 0) >= base.x - 1e-12) nodes.push_back(k);
  } else {
    int row = 0;
    for (int j = 0; j < g.n2(); ++j)
      if (std::abs(g.coord(g.index(0, j), 1) - base.y) < std::abs(g.coord(g.index(0, row), 1) - base.y))
        row = j;
    for (int i = 0; i < g.n1(); ++i)
      if (g.coord(g.index(i, row), 0) >= base.x - 1e-12) nodes.push_back(g.index(i, row));
  }
  std::stable_sort(nodes.begin(), nodes.end(), [&](int a, int b) { return d[a] < d[b]; });
  return nodes;
}

/// Euclidean heat kernel sampled at the nodes and renormalized to unit mass.
HeatState gaussian_state(const GridPtr& g, const BasePoint& base, double t) {
  const ScalarField r = distance_field(g, base);
  const double norm = std::pow(4.0 * kPi * t, 0.5 * g->dimension());
  auto u = ScalarField::from_nodes(g, [&](int k) { return std::exp(-r[k] * r[k] / (4.0 * t)) / norm; });
  const double m = integrate(u);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] /= m;
  return HeatState{u, t};
}

double true_diameter(const CaseSpec& c) {
  if (c.kind == "sphere") return kPi;
  if (c.kind == "torus") return 0.5 * std::hypot(c.desc.length1, c.desc.length2);
  if (c.kind == "circle") return 0.5 * c.desc.length1;
  if (c.kind == "box") return std::hypot(c.desc.length1, c.desc.length2);
  return 2.0 * c.desc.radius;
}

Plot plot(std::string title, std::string xlabel, std::string ylabel, bool logx = false) {
  Plot p;
  p.title = std::move(title);
  p.xlabel = std::move(xlabel);
  p.ylabel = std::move(ylabel);
  p.logx = logx;
  return p;
}

std::string tlabel(double t) { return "t = " + fmt(t); }

}  // namespace

void run_monotonicity(const Settings& s, Artifacts& out) {
  Plot pw = plot("W(f, t) along the heat flow", "t", "W");
  Plot pd = plot("Predicted dW/dt", "t", "dW/dt");
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    HeatSolver solver(g);
    HeatState st = delta_init(g, base, c.t0);
    const int steps = static_cast<int>(std::ceil((c.t_end - c.t0) / c.dt - 1e-9));
    CsvTable tab({"step", "t", "tau", "W", "W_increment", "nash_term", "dirichlet_term",
                  "predicted_dWdt", "boundary_term", "excluded_mass"});
    Series sw{c.label(), {}, {}}, sd{c.label(), {}, {}};
    double prev = 0.0, max_inc = -kInf, max_pred = -kInf, max_b = -kInf, max_abs_b = 0.0;
    for (int i = 0; i <= steps; ++i) {
      if (i > 0) {
        const double target = i == steps ? c.t_end : c.t0 + i * c.dt;
        st = solver.step(st, target - st.t);
      }
      const EntropyReport r = snapshot(st);
      const double inc = i > 0 ? r.W - prev : 0.0;
      if (i > 0) max_inc = std::max(max_inc, inc);
      max_pred = std::max(max_pred, r.predicted_dWdt);
      max_b = std::max(max_b, r.boundary_term);
      max_abs_b = std::max(max_abs_b, std::abs(r.boundary_term));
      prev = r.W;
      tab.add({std::int64_t{i}, r.t, r.tau, r.W, inc, r.nash_term, r.dirichlet_term, r.predicted_dWdt,
               r.boundary_term, r.excluded_mass});
      sw.x.push_back(r.t);
      sw.y.push_back(r.W);
      sd.x.push_back(r.t);
      sd.y.push_back(r.predicted_dWdt);
    }
    out.csv("monotonicity_" + c.label() + ".csv", tab);
    pw.series.push_back(sw);
    pd.series.push_back(sd);
    out.constant(c.label() + ".max_W_increment", max_inc);
    out.constant(c.label() + ".max_predicted_dWdt", max_pred);
    out.check(c.label() + " W nonincreasing over " + std::to_string(steps) + " steps",
              max_inc <= s.tol("slack"), bound("max increment", max_inc, "<=", s.tol("slack")));
    out.check(c.label() + " predicted dW/dt <= 0", max_pred <= 0.0,
              bound("max predicted dW/dt", max_pred, "<=", 0.0));
    if (!g->closed()) {
      out.constant(c.label() + ".max_boundary_term", max_b);
      if (g->euclidean() && c.kind == "box")
        out.check(c.label() + " boundary term vanishes on flat faces",
                  max_abs_b <= s.tol("flat_boundary"),
                  bound("max |boundary term|", max_abs_b, "<=", s.tol("flat_boundary")));
      else
        out.check(c.label() + " boundary term <= 0", max_b <= 0.0,
                  bound("max boundary term", max_b, "<=", 0.0));
    }
  }
  out.svg("monotonicity_W.svg", pw);
  out.svg("monotonicity_dWdt.svg", pd);
}

void run_pointwise(const Settings& s, Artifacts& out) {
  CsvTable summary({"case", "t", "max_sharp_defect", "argmax_r", "min_sharp_defect", "W",
                    "predicted_dWdt", "max_abs_liyau_defect"});
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    const ScalarField d = distance_field(g, base);
    const bool euclid = c.kind == "box";
    const auto region = smooth_region(*g, base);
    const auto nodes = ray(g, base);
    CsvTable prof({"t", "node", "r", "u", "sharp_defect"});
    Plot p = plot("Sharp defect t(2 Lap f - |grad f|^2) + f - n, " + c.label(), "r", "defect");
    for (double t : c.taus) {
      const HeatState st = euclid ? gaussian_state(g, base, t) : delta_init(g, base, t);
      const ScalarField sh = sharp_defect(st);
      double top = -kInf, low = kInf, where = 0.0, ly_max = 0.0;
      for (std::size_t k = 0; k < sh.size(); ++k) {
        if (euclid && !region[k]) continue;
        const double v = euclid ? std::abs(sh[k]) : sh[k];
        if (v > top) top = v, where = d[k];
        low = std::min(low, sh[k]);
      }
      const EntropyReport rep = snapshot(st);
      if (euclid) {
        const ScalarField ly = liyau_defect(st);
        for (std::size_t k = 0; k < ly.size(); ++k)
          if (region[k]) ly_max = std::max(ly_max, std::abs(ly[k]));
        const double tol = s.tol("equality");
        out.check(c.label() + " " + tlabel(t) + " |W| < equality tolerance", std::abs(rep.W) < tol,
                  bound("|W|", std::abs(rep.W), "<", tol));
        out.check(c.label() + " " + tlabel(t) + " max |pointwise W| < equality tolerance", top < tol,
                  bound("max |pointwise W|", top, "<", tol));
        out.check(c.label() + " " + tlabel(t) + " max |Li-Yau defect| < equality tolerance",
                  ly_max < tol, bound("max |Li-Yau defect|", ly_max, "<", tol));
        out.check(c.label() + " " + tlabel(t) + " |predicted dW/dt| < equality tolerance",
                  std::abs(rep.predicted_dWdt) < tol,
                  bound("|predicted dW/dt|", std::abs(rep.predicted_dWdt), "<", tol));
      } else {
        out.check(c.label() + " " + tlabel(t) + " sharp defect <= tolerance", top <= s.tol("defect"),
                  bound("max sharp defect", top, "<=", s.tol("defect")));
        if (c.kind == "sphere") {
          out.check(c.label() + " " + tlabel(t) + " sharp defect <= floor at every node",
                    top <= s.tol("sphere_floor"),
                    bound("max sharp defect", top, "<=", s.tol("sphere_floor")));
          const GridPtr coarse = build_grid(c.desc, {c.res.n1 / 2, c.res.n2});
          const double top_c = sharp_defect(delta_init(coarse, base, t)).max();
          const double drift = std::abs(top - top_c) / std::abs(top);
          out.constant(c.label() + "." + tlabel(t) + ".floor_half_resolution", top_c);
          out.check(c.label() + " " + tlabel(t) + " floor stable under refinement",
                    drift <= s.tol("floor_stability"),
                    bound("relative change from half resolution", drift, "<=", s.tol("floor_stability")));
        }
      }
      summary.add({c.label(), t, top, where, low, rep.W, rep.predicted_dWdt, ly_max});
      Series ser{tlabel(t), {}, {}};
      for (int k : nodes) {
        if (euclid && !region[k]) continue;
        prof.add({t, std::int64_t{k}, d[k], st.u[k], sh[k]});
        ser.x.push_back(d[k]);
        ser.y.push_back(sh[k]);
      }
      p.series.push_back(ser);
    }
    out.csv("pointwise_" + c.label() + "_profile.csv", prof);
    out.svg("pointwise_" + c.label() + ".svg", p);
  }
  out.csv("pointwise_summary.csv", summary);
}

void run_dissipation_match(const Settings& s, Artifacts& out) {
  CsvTable tab({"case", "n1", "n2", "h", "dt", "t", "predicted_dWdt", "measured_dWdt",
                "boundary_term", "match_relerr"});
  CsvTable res({"case", "n1", "n2", "dt", "w_identity", "W_identity", "order_w", "order_W"});
  Plot p = plot("Dissipation match: relative error against h", "h", "relative error", true);
  Plot pr = plot("Evolution identity residuals", "h", "max residual", true);
  for (const auto& c : s.cases) {
    const BasePoint base = default_base(*c.grid);
    Series ser{c.label(), {}, {}};
    double rel[2] = {0, 0};
    for (int level = 0; level < 2; ++level) {
      const int m = 1 << level;
      const Resolution r{c.res.n1 * m, c.kind == "circle" ? 1 : c.res.n2 * m};
      const GridPtr g = level == 0 ? c.grid : build_grid(c.desc, r);
      HeatSolver solver(g);
      const auto [rep, st] = dissipation(delta_init(g, base, c.t0), solver, c.dt / m);
      rel[level] = rep.match_relerr;
      tab.add({c.label(), std::int64_t{r.n1}, std::int64_t{r.n2}, g->spacing(0), c.dt / m, rep.t,
               rep.predicted_dWdt, rep.measured_dWdt, rep.boundary_term, rep.match_relerr});
      ser.x.push_back(g->spacing(0));
      ser.y.push_back(rep.match_relerr);
    }
    p.series.push_back(ser);
    out.check(c.label() + " measured and predicted dW/dt agree", rel[0] < s.tol("match"),
              bound("relative error", rel[0], "<", s.tol("match")));
    const double ratio = rel[0] / rel[1];
    out.check(c.label() + " error shrinks when h and dt are halved",
              ratio >= s.tol("refinement_ratio"),
              bound("error ratio", ratio, ">=", s.tol("refinement_ratio")));

    if (c.kind != "circle" && c.kind != "torus") continue;
    Series sw{c.label() + " w identity", {}, {}}, sW{c.label() + " W identity", {}, {}};
    double prev_w = 0, prev_W = 0;
    for (int level = 0; level < 3; ++level) {
      const int m = 1 << level;
      const Resolution r{c.res.n1 * m, c.kind == "circle" ? 1 : c.res.n2 * m};
      const GridPtr g = level == 0 ? c.grid : build_grid(c.desc, r);
      HeatSolver solver(g);
      const double dt = c.dt / m;
      const HeatState s0 = delta_init(g, base, c.t0);
      const HeatState s1 = solver.step(s0, dt);
      const HeatState s2 = solver.step(s1, dt);
      const LemmaResiduals lr = lemma_residuals(s0, s1, s2);
      double ow = 0, oW = 0;
      if (level > 0) {
        ow = std::log2(prev_w / lr.w_identity);
        oW = std::log2(prev_W / lr.W_identity);
        const std::string step = " order from n1 = " + std::to_string(r.n1 / 2) + " to " + std::to_string(r.n1);
        out.check(c.label() + " w identity" + step, ow >= s.tol("residual_order"),
                  bound("observed order", ow, ">=", s.tol("residual_order")));
        out.check(c.label() + " W identity" + step, oW >= s.tol("residual_order"),
                  bound("observed order", oW, ">=", s.tol("residual_order")));
      }
      res.add({c.label(), std::int64_t{r.n1}, std::int64_t{r.n2}, dt, lr.w_identity, lr.W_identity, ow, oW});
      sw.x.push_back(g->spacing(0));
      sw.y.push_back(std::log10(lr.w_identity));
      sW.x.push_back(g->spacing(0));
      sW.y.push_back(std::log10(lr.W_identity));
      prev_w = lr.w_identity;
      prev_W = lr.W_identity;
    }
    pr.series.push_back(sw);
    pr.series.push_back(sW);
  }
  pr.ylabel = "log10 max residual";
  out.csv("dissipation.csv", tab);
  out.csv("residuals.csv", res);
  out.svg("dissipation_relerr.svg", p);
  out.svg("residuals.svg", pr);
}

void run_liyau(const Settings& s, Artifacts& out) {
  CsvTable rig({"case", "t", "max_liyau_defect", "hessian_defect", "trace_defect", "liyau_below_sharp",
                "sharp_below_liyau"});
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    const ScalarField d = distance_field(g, base);
    const bool euclid = c.kind == "box";
    const auto region = smooth_region(*g, base);
    const auto nodes = ray(g, base);
    CsvTable prof({"t", "node", "r", "liyau_defect", "sharp_defect"});
    Plot p = plot("Li-Yau defect 2 t Lap f - n, " + c.label(), "r", "defect");
    for (double t : c.taus) {
      const HeatState st = euclid ? gaussian_state(g, base, t) : delta_init(g, base, t);
      const ScalarField ly = liyau_defect(st);
      const ScalarField sh = sharp_defect(st);
      double top = -kInf;
      for (std::size_t k = 0; k < ly.size(); ++k)
        if (!euclid || region[k]) top = std::max(top, euclid ? std::abs(ly[k]) : ly[k]);
      const RigidityRow rr = rigidity_diagnostic({st})[0];
      const DefectOrdering ord = compare_defects(st);
      rig.add({c.label(), t, top, rr.hessian_defect, rr.trace_defect,
               std::int64_t{ord.liyau_below_sharp}, std::int64_t{ord.sharp_below_liyau}});
      if (euclid)
        out.check(c.label() + " " + tlabel(t) + " Li-Yau equality |2 t Lap f - n| < tolerance",
                  top < s.tol("equality"), bound("max |defect|", top, "<", s.tol("equality")));
      else
        out.check(c.label() + " " + tlabel(t) + " Li-Yau defect <= tolerance", top <= s.tol("defect"),
                  bound("max defect", top, "<=", s.tol("defect")));
      Series ser{tlabel(t), {}, {}};
      for (int k : nodes) {
        if (euclid && !region[k]) continue;
        prof.add({t, std::int64_t{k}, d[k], ly[k], sh[k]});
        ser.x.push_back(d[k]);
        ser.y.push_back(ly[k]);
      }
      p.series.push_back(ser);
    }
    const ComparisonReport cmp = comparison_excess(g, base);
    out.constant(c.label() + ".laplacian_comparison_excess", cmp.max_excess);
    out.check(c.label() + " Lap r^2 <= 2n on the smooth region", cmp.max_excess <= s.tol("comparison"),
              bound("max excess", cmp.max_excess, "<=", s.tol("comparison")));
    out.csv("liyau_" + c.label() + "_profile.csv", prof);
    out.svg("liyau_" + c.label() + ".svg", p);
  }
  out.csv("liyau_rigidity.csv", rig);
}

void run_varadhan(const Settings& s, Artifacts& out) {
  CsvTable tab({"case", "t", "max_error", "argmax_r", "base_r", "base_value", "closed_form"});
  Plot pe = plot("Varadhan error max |-4 t log H - r^2|", "t", "max error", true);
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    const auto oracle = KernelOracle::for_grid(*g);
    std::vector<double> ts = c.taus;
    std::sort(ts.begin(), ts.end(), std::greater<>());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (ts.size() < 2) {
      out.check(c.label() + " needs at least two times", false, "tau.list has one distinct value");
      continue;
    }
    const double radius = c.kind == "sphere" ? 2.0 : 0.25 * c.desc.length1;
    const VaradhanTable vt = varadhan_profile(*oracle, g, base, ts, radius);
    const ScalarField d = distance_field(g, base);
    int b = 0;
    for (int k = 0; k < g->node_count(); ++k)
      if (d[k] < d[b]) b = k;
    const double r0 = d[b];
    const int n = g->dimension();
    Series se{c.label(), {}, {}};
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      // Small-time expansion at the base: H(0, t) = (4 pi t)^{-n/2} (1 + t/3 + t^2/15 + ...)
      // on the unit sphere, with no correction on the circle.
      double cf = r0 * r0 + 2.0 * n * t * std::log(4.0 * kPi * t);
      if (c.kind == "sphere") cf -= 4.0 * t * std::log1p(t / 3.0 + t * t / 15.0);
      const double v = vt.scaled_log[i][b];
      tab.add({c.label(), t, vt.max_error[i], vt.argmax_r[i], r0, v, cf});
      out.check(c.label() + " " + tlabel(t) + " -4 t log H at the base matches its expansion",
                std::abs(v - cf) <= s.tol("closed_form"),
                bound("|value - expansion|", std::abs(v - cf), "<=", s.tol("closed_form")));
      se.x.push_back(t);
      se.y.push_back(vt.max_error[i]);
    }
    pe.series.push_back(se);
    out.check(c.label() + " error at the smallest t is below the error at the largest t",
              vt.max_error.back() < vt.max_error.front(),
              "max error " + fmt(vt.max_error.back()) + " at t = " + fmt(ts.back()) + " < " +
                  fmt(vt.max_error.front()) + " at t = " + fmt(ts.front()));
    out.note(c.label() + ".monotone_decreasing_over_all_t", vt.monotone_decreasing ? "yes" : "no");

    std::vector<std::string> header{"node", "r", "r2"};
    for (double t : ts) header.push_back("minus_4t_logH_t" + fmt(t));
    CsvTable prof(header);
    Plot pp = plot("-4 t log H against r^2, " + c.label(), "r", "-4 t log H");
    Series sr{"r^2", {}, {}};
    std::vector<Series> st;
    for (double t : ts) st.push_back({tlabel(t), {}, {}});
    for (int k : ray(g, base)) {
      if (d[k] > radius) continue;
      std::vector<Cell> row{std::int64_t{k}, d[k], vt.r2[k]};
      for (std::size_t i = 0; i < ts.size(); ++i) {
        row.push_back(vt.scaled_log[i][k]);
        st[i].x.push_back(d[k]);
        st[i].y.push_back(vt.scaled_log[i][k]);
      }
      prof.add(row);
      sr.x.push_back(d[k]);
      sr.y.push_back(vt.r2[k]);
    }
    pp.series.push_back(sr);
    for (auto& x : st) pp.series.push_back(std::move(x));
    out.csv("varadhan_" + c.label() + "_profile.csv", prof);
    out.svg("varadhan_" + c.label() + ".svg", pp);
  }
  out.csv("varadhan.csv", tab);
  out.svg("varadhan_error.svg", pe);
}

namespace {

// W(psi, tau) without the unit-norm constraint.
double w_unconstrained(const ScalarField& psi, double tau) {
  const auto& g = *psi.grid();
  const int n = g.dimension();
  const double c = 0.5 * n * std::log(4 * kPi * tau) + n;
  double v = 4 * tau * dirichlet_form(psi, psi);
  const auto& vol = g.node_volumes();
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double p2 = psi[k] * psi[k];
    v -= vol[k] * ((p2 > 0 ? p2 * std::log(p2) : 0.0) + c * p2);
  }
  return v;
}

ScalarField random_psi(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-0.4, 0.4);
  const double c1 = a(rng), c2 = a(rng), c3 = a(rng);
  ScalarField psi = ScalarField::from_nodes(g, [&](int k) {
    const double x = g->coord(k, 0), y = g->dimension() > 1 ? g->coord(k, 1) : 0.0;
    return 1.0 + c1 * std::cos(x) + c2 * std::sin(2 * y) + c3 * std::cos(x + y);
  });
  const double m = std::sqrt(integrate(psi * psi));
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] /= m;
  return psi;
}

}  // namespace

void run_mu_curve(const Settings& s, Artifacts& out) {
  CsvTable tab({"case", "tau", "mu", "mu_coarse", "mu_fine", "el_residual", "multiplier_gap",
                "iterations", "converged", "start"});
  CsvTable grad({"case", "direction", "analytic", "finite_difference", "relerr"});
  CsvTable scal({"case", "pair", "lambda", "tau", "lhs", "rhs", "difference"});
  Plot p = plot("mu(tau)", "tau", "mu", true);
  std::mt19937_64 rng(s.seed);
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    std::vector<double> taus = c.taus;
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    const bool extrapolate = c.kind == "circle" || c.kind == "torus";
    MuCurve curve;
    if (extrapolate) {
      const GridPtr fine =
          build_grid(c.desc, {2 * c.res.n1, c.kind == "circle" ? 1 : 2 * c.res.n2});
      curve = mu_curve_extrapolated(g, fine, taus);
    } else {
      curve = entropy_lab::mu_curve(g, taus);
    }
    Series ser{c.label() + (extrapolate ? " (extrapolated)" : ""), {}, {}};
    double worst_rise = -kInf, running_min = kInf, top = -kInf;
    bool converged = true;
    for (std::size_t i = 0; i < curve.entries.size(); ++i) {
      const MuResult& e = curve.entries[i];
      if (i > 0) worst_rise = std::max(worst_rise, e.mu - running_min);
      running_min = std::min(running_min, e.mu);
      top = std::max(top, e.mu);
      converged = converged && e.converged;
      tab.add({c.label(), e.tau, e.mu, extrapolate ? curve.coarse_mu[i] : e.mu,
               extrapolate ? curve.fine_mu[i] : e.mu, e.el_residual, e.multiplier_gap,
               std::int64_t{e.iterations}, std::int64_t{e.converged ? 1 : 0}, e.start});
      ser.x.push_back(e.tau);
      ser.y.push_back(e.mu);
    }
    p.series.push_back(ser);
    out.check(c.label() + " every minimization converged", converged);
    if (curve.entries.size() > 1)
      out.check(c.label() + " mu nonincreasing in tau", worst_rise <= s.tol("monotone_slack"),
                bound("largest rise", worst_rise, "<=", s.tol("monotone_slack")));
    out.check(c.label() + " mu <= ceiling", top <= s.tol("ceiling"),
              bound("max mu", top, "<=", s.tol("ceiling")));
    const double mu0 = curve.entries.front().mu;
    out.check(c.label() + " mu at the smallest tau above floor", mu0 > s.tol("small_tau_floor"),
              bound("mu(" + fmt(taus.front()) + ")", mu0, ">", s.tol("small_tau_floor")));

    // Euler-Lagrange gradient against extrapolated central differences of the functional.
    const double tau = taus[taus.size() / 2];
    const ScalarField psi = random_psi(g, rng);
    const ScalarField gr = w_gradient(psi, tau);
    const auto& vol = g->node_volumes();
    std::normal_distribution<double> z;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      ScalarField dir(g);
      for (std::size_t k = 0; k < dir.size(); ++k) dir[k] = z(rng);
      double analytic = 0.0;
      for (std::size_t k = 0; k < dir.size(); ++k) analytic += vol[k] * gr[k] * dir[k];
      auto central = [&](double eps) {
        return (w_unconstrained(psi + eps * dir, tau) - w_unconstrained(psi - eps * dir, tau)) /
               (2 * eps);
      };
      // Richardson step removes the eps^2 term.
      const double eps = 1e-3;
      const double fd = (4.0 * central(eps / 2) - central(eps)) / 3.0;
      const double rel = std::abs(fd - analytic) / std::abs(analytic);
      worst = std::max(worst, rel);
      grad.add({c.label(), std::int64_t{i}, analytic, fd, rel});
    }
    out.check(c.label() + " gradient matches finite differences on 20 directions",
              worst < s.tol("gradient"), bound("max relative error", worst, "<", s.tol("gradient")));

    std::uniform_real_distribution<double> lam(0.05, 20.0);
    std::uniform_real_distribution<double> lt(std::log(taus.front()), std::log(taus.back()) + 1e-300);
    double diff = 0.0;
    for (int i = 0; i < 100; ++i) {
      const ScalarField phi = random_psi(g, rng);
      const double l = lam(rng), t = std::exp(lt(rng));
      const auto [lhs, rhs] = scaling_identity_check(phi, l, t);
      diff = std::max(diff, std::abs(lhs - rhs));
      scal.add({c.label(), std::int64_t{i}, l, t, lhs, rhs, lhs - rhs});
    }
    out.check(c.label() + " scaling identity on 100 random pairs", diff <= s.tol("scaling"),
              bound("max |lhs - rhs|", diff, "<=", s.tol("scaling")));
  }
  out.csv("mu_curve.csv", tab);
  out.csv("gradient_check.csv", grad);
  out.csv("scaling_identity.csv", scal);
  out.svg("mu_curve.svg", p);
}

void run_lsi_euclidean(const Settings& s, Artifacts& out) {
  const CaseSpec& c = s.cases.front();
  const GridPtr& g = c.grid;
  const GridPtr fine = build_grid(c.desc, {2 * c.res.n1, 2 * c.res.n2});
  const BasePoint base = BasePoint::at(0, 0);
  const int n = g->dimension();
  CsvTable mins({"tau", "mu", "l2_distance", "el_residual", "multiplier_gap", "iterations", "converged"});
  CsvTable prof({"tau", "node", "r", "psi", "gaussian_psi"});
  Plot p = plot("Minimizer against the Gaussian, " + c.label(), "r", "psi");
  for (double tau : c.taus) {
    const ScalarField start = gaussian_psi(g, base, tau);
    const MuResult r = minimize_mu(g, tau, start);
    const ScalarField diff = r.psi - start;
    const double l2 = std::sqrt(integrate(diff * diff));
    mins.add({tau, r.mu, l2, r.el_residual, r.multiplier_gap, std::int64_t{r.iterations},
              std::int64_t{r.converged ? 1 : 0}});
    const std::string tag = "tau = " + fmt(tau);
    out.check(tag + " minimization converged", r.converged);
    out.check(tag + " mu = 0 within tolerance", std::abs(r.mu) <= s.tol("mu"),
              bound("|mu|", std::abs(r.mu), "<=", s.tol("mu")));
    out.check(tag + " minimizer is the Gaussian", l2 < s.tol("l2_distance"),
              bound("L2 distance", l2, "<", s.tol("l2_distance")));
    const ScalarField d = distance_field(g, base);
    Series sp{"minimizer " + tag, {}, {}}, sg{"Gaussian " + tag, {}, {}};
    for (int k : ray(g, base)) {
      prof.add({tau, std::int64_t{k}, d[k], r.psi[k], start[k]});
      sp.x.push_back(d[k]);
      sp.y.push_back(r.psi[k]);
      sg.x.push_back(d[k]);
      sg.y.push_back(start[k]);
    }
    p.series.push_back(sp);
    p.series.push_back(sg);
  }

  CsvTable samples({"sample", "coarse", "fine", "extrapolated", "expected"});
  auto gaussian_value = [&](double v) { return 0.5 * n * (1.0 / v - 1.0 + std::log(v)); };
  for (double v : {1.0, 0.5, 1.5, 2.0}) {
    const LsiValue lv = euclidean_lsi_check(g, fine, [v](double x, double y) {
      return (x * x + y * y) / (2 * v);
    });
    const double expected = gaussian_value(v);
    samples.add({"gaussian variance " + fmt(v), lv.coarse, lv.fine, lv.extrapolated, expected});
    out.check("Gaussian of variance " + fmt(v) + " matches its closed form",
              std::abs(lv.extrapolated - expected) <= s.tol("gaussian"),
              bound("|value - closed form|", std::abs(lv.extrapolated - expected), "<=", s.tol("gaussian")));
  }
  std::mt19937_64 rng(s.seed);
  const double half = 0.125 * std::min(c.desc.length1, c.desc.length2);
  std::uniform_real_distribution<double> amp(-0.5, 0.5), ctr(-half, half);
  double low = kInf;
  for (int i = 0; i < 8; ++i) {
    const double a = amp(rng), cx = ctr(rng), cy = ctr(rng);
    const LsiValue lv = euclidean_lsi_check(g, fine, [&](double x, double y) {
      const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      return (x * x + y * y) / 2 + a * std::exp(-r2);
    });
    low = std::min(low, lv.extrapolated);
    samples.add({"perturbed " + std::to_string(i), lv.coarse, lv.fine, lv.extrapolated, std::string("")});
  }
  out.constant("lowest_perturbed_sample", low);
  out.check("perturbed samples satisfy the log-Sobolev inequality", low >= s.tol("sample_floor"),
            bound("lowest value", low, ">=", s.tol("sample_floor")));
  out.csv("lsi_minimizer.csv", mins);
  out.csv("lsi_minimizer_profile.csv", prof);
  out.csv("lsi_samples.csv", samples);
  out.svg("lsi_minimizer.svg", p);
}

void run_symmetrize(const Settings& s, Artifacts& out) {
  const CaseSpec& c = s.cases.front();
  const GridPtr& g = c.grid;
  constexpr int kFields = 50;
  std::vector<SymmetrizationReport> reps(kFields);
  parallel_for(kFields, [&](int i) {
    reps[i] = entropy_lab::symmetrize(random_bump_field(g, s.seed + static_cast<std::uint64_t>(i)), 256);
  });
  CsvTable tab({"seed", "equimeasure_gap", "cell_volume", "layer_cake_relerr", "l2_phi", "l2_g",
                "energy_phi", "energy_g", "functional_phi", "functional_g", "coarea_levels",
                "degenerate_levels", "coarea_holds"});
  Plot pe = plot("Dirichlet energy before and after symmetrization", "seed", "energy");
  Plot pf = plot("Log-Sobolev functional before and after symmetrization", "seed", "functional");
  Series ephi{"phi", {}, {}}, eg{"g", {}, {}}, fphi{"phi", {}, {}}, fg{"g", {}, {}};
  int bad_gap = 0, bad_lc = 0, bad_energy = 0, bad_coarea = 0, bad_func = 0, levels = 0;
  double worst_gap = 0, worst_lc = 0;
  const double e = s.tol("energy");
  for (int i = 0; i < kFields; ++i) {
    const auto& r = reps[i];
    const double seed = static_cast<double>(s.seed + i);
    bad_gap += r.max_equimeasure_gap > r.cell_volume;
    bad_lc += r.layer_cake_relerr > s.tol("layer_cake");
    bad_energy += r.energy_g > r.energy_phi * (1 + e);
    bad_coarea += !r.coarea.all_hold;
    bad_func += r.functional_g > r.functional_phi + e * std::abs(r.functional_phi);
    levels += static_cast<int>(r.coarea.levels.size());
    worst_gap = std::max(worst_gap, r.max_equimeasure_gap / r.cell_volume);
    worst_lc = std::max(worst_lc, r.layer_cake_relerr);
    tab.add({static_cast<std::int64_t>(s.seed + i), r.max_equimeasure_gap, r.cell_volume,
             r.layer_cake_relerr, r.l2_phi, r.l2_g, r.energy_phi, r.energy_g, r.functional_phi,
             r.functional_g, static_cast<std::int64_t>(r.coarea.levels.size()),
             static_cast<std::int64_t>(r.coarea.degenerate.size()),
             std::int64_t{r.coarea.all_hold ? 1 : 0}});
    ephi.x.push_back(seed);
    ephi.y.push_back(r.energy_phi);
    eg.x.push_back(seed);
    eg.y.push_back(r.energy_g);
    fphi.x.push_back(seed);
    fphi.y.push_back(r.functional_phi);
    fg.x.push_back(seed);
    fg.y.push_back(r.functional_g);
  }
  const std::string of = " of " + std::to_string(kFields) + " fields";
  out.constant("worst_equimeasure_gap_in_cells", worst_gap);
  out.constant("worst_layer_cake_relerr", worst_lc);
  out.constant("coarea_levels_checked", levels);
  out.check("equimeasurable within one cell volume at all thresholds", bad_gap == 0,
            std::to_string(bad_gap) + of + " exceed; worst gap " + fmt(worst_gap) + " cells");
  out.check("layer-cake identity within tolerance", bad_lc == 0,
            std::to_string(bad_lc) + of + " exceed; " + bound("worst", worst_lc, "<=", s.tol("layer_cake")));
  out.check("Dirichlet energy does not increase", bad_energy == 0, std::to_string(bad_energy) + of + " violate");
  out.check("co-area and Holder chain at every nondegenerate level", bad_coarea == 0,
            std::to_string(bad_coarea) + of + " violate over " + std::to_string(levels) + " levels");
  out.check("log-Sobolev functional does not increase", bad_func == 0, std::to_string(bad_func) + of + " violate");
  pe.series = {ephi, eg};
  pf.series = {fphi, fg};
  out.csv("symmetrize.csv", tab);
  out.svg("symmetrize_energy.svg", pe);
  out.svg("symmetrize_functional.svg", pf);
}

void run_growth(const Settings& s, Artifacts& out) {
  Plot pw = plot("Kernel entropy W(t)", "t", "W");
  Plot pa = plot("r A(r) / V(r)", "r", "r A / V");
  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    const int n = g->dimension();
    const auto oracle = KernelOracle::for_grid(*g);
    constexpr int kSamples = 10;
    std::vector<HeatState> traj;
    HeatSolver solver(g);
    for (int i = 0; i < kSamples; ++i) {
      const double t = i == kSamples - 1 ? c.t_end : c.t0 + i * (c.t_end - c.t0) / (kSamples - 1);
      if (oracle)
        traj.push_back(HeatState{kernel(*oracle, g, base, t), t});
      else if (traj.empty())
        traj.push_back(delta_init(g, base, t));
      else
        traj.push_back(solver.advance(traj.back(), t, c.dt));
    }
    const auto rows = kernel_entropy_bound(g, base, traj);
    CsvTable tab({"t", "W", "dirichlet", "entropy", "constant", "lower_bound", "moment", "log_volume",
                  "finite", "dirichlet_bound"});
    Series sw{c.label(), {}, {}};
    bool finite = true, dir = true, lower = true, band = true, mono = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      tab.add({r.t, r.W, r.dirichlet, r.entropy, r.constant, r.lower_bound, r.moment, r.log_volume,
               std::int64_t{r.finite}, std::int64_t{r.dirichlet_bound}});
      finite = finite && r.finite;
      dir = dir && r.dirichlet_bound;
      lower = lower && r.lower_bound <= r.W;
      worst = std::max(worst, std::abs(r.W));
      band = band && std::abs(r.W) <= s.tol("w_band");
      if (i > 0) mono = mono && r.W <= rows[i - 1].W;
      sw.x.push_back(r.t);
      sw.y.push_back(r.W);
    }
    pw.series.push_back(sw);
    out.csv("kernel_entropy_" + c.label() + ".csv", tab);
    out.check(c.label() + " kernel entropy terms finite", finite);
    out.check(c.label() + " 4 t int |grad sqrt H|^2 <= n/2", dir);
    out.check(c.label() + " W above the peak lower bound", lower);
    if (c.kind == "box")
      out.check(c.label() + " W stays in the band before the boundary is felt", band,
                bound("max |W|", worst, "<=", s.tol("w_band")));
    else
      out.check(c.label() + " W nonincreasing along the kernel", mono);

    // Radii from 0.25 on the sphere and from 0.5 on flat grids, where the
    // lattice noise in r A / V is below 5e-3 at the default resolutions.
    const bool curved = c.kind == "sphere";
    const double rmax = curved ? 2.5 : 0.375 * std::min(c.desc.length1, c.desc.length2);
    std::vector<double> radii;
    for (int k = curved ? 1 : 2; 0.25 * k <= rmax + 1e-12; ++k) radii.push_back(0.25 * k);
    const VolumeProfile vp = volume_profile(g, base, radii);
    const auto ratio = vp.area_ratio();
    CsvTable vt({"r", "volume", "area", "area_ratio", "volume_over_r_n", "clamped"});
    Series sa{c.label(), {}, {}};
    double dev = 0.0, above = -kInf, rise = -kInf;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double q = vp.volume[k] / std::pow(vp.radii[k], n);
      vt.add({vp.radii[k], vp.volume[k], vp.area[k], ratio[k], q, std::int64_t{vp.clamped[k] ? 1 : 0}});
      sa.x.push_back(vp.radii[k]);
      sa.y.push_back(ratio[k]);
      dev = std::max(dev, std::abs(ratio[k] - n));
      above = std::max(above, ratio[k] - n);
      if (k > 0) {
        const double prev = vp.volume[k - 1] / std::pow(vp.radii[k - 1], n);
        rise = std::max(rise, q / prev - 1.0);
      }
    }
    pa.series.push_back(sa);
    out.csv("volume_" + c.label() + ".csv", vt);
    if (g->euclidean())
      out.check(c.label() + " r A / V = n", dev <= s.tol("area_ratio"),
                bound("max |r A / V - n|", dev, "<=", s.tol("area_ratio")));
    else if (curved)
      out.check(c.label() + " r A / V < n", above < 0.0, bound("max r A / V - n", above, "<", 0.0));
    if (radii.size() > 1)
      out.check(c.label() + " V / r^n nonincreasing", rise <= s.tol("bishop"),
                bound("largest relative rise", rise, "<=", s.tol("bishop")));
  }
  out.svg("growth_W.svg", pw);
  out.svg("growth_area_ratio.svg", pa);
}

void run_noncollapse(const Settings& s, Artifacts& out) {
  CsvTable tab({"case", "R", "tau", "mu", "A", "B", "rhs", "C1", "C2", "C3", "volume", "half_volume",
                "ratio", "kappa", "doubling", "bracket", "chain", "noncollapsed"});
  CsvTable dbl({"profile", "k", "r", "volume", "eta_k_volume", "within"});
  CsvTable dia({"case", "total_volume", "kappa", "diameter_bound", "diameter"});
  Plot p = plot("Dyadic volumes log2 V(R / 2^k)", "k", "log2 V");
  const auto cst = noncollapse_constants(2);
  out.constant("eta", cst.eta);
  out.constant("C1", cst.C1);
  out.constant("C2", cst.C2);
  out.constant("C3", cst.C3);

  auto record = [&](const std::string& name, const VolumeProfile& vp, const DoublingReport& rep) {
    Series ser{name, {}, {}};
    for (std::size_t k = 0; k < vp.radii.size(); ++k) {
      const double cap = std::pow(rep.eta, static_cast<double>(k)) * vp.volume[0];
      dbl.add({name, static_cast<std::int64_t>(k), vp.radii[k], vp.volume[k], cap,
               std::int64_t{vp.volume[k] <= cap ? 1 : 0}});
      ser.x.push_back(static_cast<double>(k));
      ser.y.push_back(std::log2(vp.volume[k]));
    }
    p.series.push_back(ser);
  };

  for (const auto& c : s.cases) {
    const GridPtr& g = c.grid;
    const BasePoint base = default_base(*g);
    std::vector<double> taus = c.taus;
    std::sort(taus.begin(), taus.end());
    double kappa = 0.0, Rmax = 0.0;
    MuResult prev;
    for (double tau : taus) {
      const double R = std::sqrt(tau);
      const MuResult mu = minimize_mu_multistart(g, tau, prev.psi.size() ? &prev.psi : nullptr);
      const double A = std::max(0.0, -mu.mu);
      const NoncollapseReport rep = mu_lower_to_volume(g, base, A, R);
      tab.add({c.label(), R, tau, mu.mu, A, rep.B, rep.rhs, rep.C1, rep.C2, rep.C3, rep.volume,
               rep.half_volume, rep.ratio, rep.kappa, std::int64_t{rep.doubling}, std::int64_t{rep.bracket},
               std::int64_t{rep.chain}, std::int64_t{rep.noncollapsed}});
      const std::string tag = c.label() + " R = " + fmt(R);
      out.check(tag + " kappa > 0 and V(R) / R^n >= kappa", rep.kappa > 0.0 && rep.noncollapsed,
                bound("V(R) / R^n", rep.ratio, ">=", rep.kappa));
      out.check(tag + " test-function chain -A <= rhs <= C3 + B", rep.chain,
                "rhs = " + fmt(rep.rhs) + ", A = " + fmt(A) + ", C3 + B = " + fmt(rep.C3 + rep.B));
      if (rep.doubling)
        out.check(tag + " log-volume bracket", rep.bracket, "B = " + fmt(rep.B));
      else
        out.note(tag + ".doubling_iteration_broken_at", std::to_string(rep.iteration.broken_at));
      prev = mu;
      if (R >= Rmax) Rmax = R, kappa = rep.kappa;
    }
    const VolumeProfile vp = volume_profile(g, base, dyadic_radii(Rmax, 4));
    const DoublingReport dr = doubling_iteration(vp, std::pow(3.0, -g->dimension()));
    record(c.label(), vp, dr);
    out.check(c.label() + " doubling chain breaks at k = 1", dr.broken_at == 1,
              "broken at k = " + std::to_string(dr.broken_at));
    if (g->closed()) {
      const double bound_d = diameter_bound(g->total_volume(), kappa);
      const double diam = true_diameter(c);
      dia.add({c.label(), g->total_volume(), kappa, bound_d, diam});
      out.check(c.label() + " diameter bound exceeds the diameter", bound_d >= diam,
                bound("bound", bound_d, ">=", diam));
    }
  }

  const VolumeProfile syn = power_profile(2, 3.5, dyadic_radii(1.0, 8));
  const DoublingReport sr = doubling_iteration(syn, cst.eta);
  record("synthetic r^3.5", syn, sr);
  out.constant("synthetic.exponent", sr.exponent);
  out.constant("synthetic.exponent_bound", sr.exponent_bound);
  out.check("synthetic r^3.5 profile flagged anomalous", sr.persists && sr.anomalous,
            "chain length " + std::to_string(sr.chain_length));
  out.check("synthetic exponent exceeds n log2 3", sr.exponent > sr.exponent_bound,
            bound("exponent", sr.exponent, ">", sr.exponent_bound));
  out.csv("noncollapse.csv", tab);
  out.csv("doubling.csv", dbl);
  out.csv("diameter.csv", dia);
  out.svg("doubling.svg", p);
}

}  // namespace entropy_lab::detail
