// imub: sampling, simulation and verification from the command line.
//
// Exit codes: 0 when every verdict passes, 1 when any verdict fails or a
// numerical error occurs, 2 on usage or configuration errors (including
// parameters outside their domain).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imub/checks.hpp"
#include "imub/finite_rate.hpp"
#include "imub/generator.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/infinite_rate.hpp"
#include "imub/planar_bm.hpp"
#include "imub/verify.hpp"

using namespace imub;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- parsing helpers -------------------------------------------------------

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

QuadrantPoint parse_quadrant(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 2) throw UsageError("expected a point 'a,b', got '" + text + "'");
  try {
    return QuadrantPoint(v[0], v[1]);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

BoundaryPoint parse_boundary(const std::string& text) {
  try {
    return parse_boundary_point(text);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

/// A point given either as axis1:m / axis2:m / origin or as 'a,b'.
QuadrantPoint parse_any_point(const std::string& text) {
  if (text.find(':') != std::string::npos || text == "origin") return parse_boundary(text).to_quadrant();
  return parse_quadrant(text);
}

SdeScheme parse_scheme(const std::string& s) {
  if (s == "euler" || s == "euler-truncated") return SdeScheme::EulerTruncated;
  if (s == "split" || s == "split-cir") return SdeScheme::SplitCir;
  throw UsageError("unknown scheme '" + s + "' (euler, split)");
}

// ---- option registry with config echo ---------------------------------------

class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    echo_.emplace_back(name, [&var] { return json(var); });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    echo_.emplace_back(name, [&var] { return json(var); });
    return app_->add_flag("--" + name, var, help);
  }

  [[nodiscard]] json echo() const {
    json j = json::object();
    for (const auto& [k, f] : echo_) j[k] = f();
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<json()>>> echo_;
};

// ---- output helpers --------------------------------------------------------

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string branch_column(const BoundaryPoint& p) {
  switch (p.branch()) {
    case Branch::Axis1: return "axis1";
    case Branch::Axis2: return "axis2";
    case Branch::Origin: break;
  }
  return "origin";
}

void write_path_csv(std::ostream& os, const PathSample& s) {
  os << "t,x1,x2,in_E\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << format_double(s.times[i]) << ',' << format_double(s.states[i].x1) << ',' << format_double(s.states[i].x2)
       << ',' << (s.in_E[i] ? 1 : 0) << '\n';
  }
}

int emit_reports(const std::string& out, const json& config, const std::vector<Report>& reports,
                 json extra = json::object()) {
  const auto s = summarize_verdicts(reports);
  json doc;
  doc["config"] = config;
  for (auto& [k, v] : extra.items()) doc[k] = v;
  doc["reports"] = json::array();
  for (const auto& r : reports) doc["reports"].push_back(r.to_json());
  doc["summary"] = {{"pass", s.pass}, {"fail", s.fail}, {"inconclusive", s.inconclusive}};
  Output o(out);
  o.stream() << doc.dump(2) << '\n';
  return s.fail > 0 ? 1 : 0;
}

std::vector<double> default_grid(double horizon, double step) {
  std::vector<double> t;
  const auto n = static_cast<std::uint64_t>(std::llround(horizon / step));
  for (std::uint64_t k = 0; k <= n; ++k) t.push_back(std::min(horizon, static_cast<double>(k) * step));
  return t;
}

// ---- config file -----------------------------------------------------------

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar(e);
    return s;
  }
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

/// Appends "--key value" for config-file keys not given on the command line,
/// so that flags override file values.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  auto out = args;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
      continue;
    }
    out.push_back(flag);
    out.push_back(json_scalar(value));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite-rate mutually catalytic branching: sampling, simulation and checks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON file mirroring the flag names; flags override it");
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: IMUB_WORKERS, then hardware threads)");

  // sample-q
  auto* sq = app.add_subcommand("sample-q", "draw from the harmonic measure Q_(u,v); CSV branch,magnitude");
  Options sq_o(sq);
  double sq_u = 1, sq_v = 1;
  std::uint64_t sq_n = 1000, sq_seed = 0;
  std::string sq_out;
  sq_o.add("u", sq_u, "first coordinate of the start");
  sq_o.add("v", sq_v, "second coordinate of the start");
  sq_o.add("n", sq_n, "number of samples");
  sq_o.add("seed", sq_seed, "master seed");
  sq->add_option("--out", sq_out, "CSV output (default stdout)");

  // exit-sim
  auto* ex = app.add_subcommand("exit-sim", "first exits of planar Brownian motion from a cone; CSV branch,magnitude,exit_time");
  Options ex_o(ex);
  std::string ex_x = "1,1", ex_out, ex_report;
  std::uint64_t ex_n = 1000, ex_seed = 0;
  double ex_step = 1e-4;
  ex_o.add("x", ex_x, "cone vertex 'a,b'");
  ex_o.add("n", ex_n, "number of paths");
  ex_o.add("step", ex_step, "Brownian time step");
  ex_o.add("seed", ex_seed, "master seed");
  ex->add_option("--out", ex_out, "CSV output (default stdout)");
  ex->add_option("--report", ex_report, "also write a JSON report (KS against Q_x, exit-time moment bound)");

  // sde
  auto* sde = app.add_subcommand("sde", "one path of the finite-rate process Y (or driftless Z); CSV t,x1,x2,in_E");
  Options sde_o(sde);
  double sde_gamma = 1, sde_c = 1, sde_step = 1e-4, sde_horizon = 1;
  std::string sde_theta = "1,1", sde_y0 = "1,0", sde_times, sde_scheme = "euler", sde_out;
  std::uint64_t sde_seed = 0, sde_index = 0;
  bool sde_driftless = false;
  sde_o.add("gamma", sde_gamma, "branching rate");
  sde_o.add("c", sde_c, "drift rate");
  sde_o.add("theta", sde_theta, "drift target 'a,b'");
  sde_o.add("y0", sde_y0, "start 'a,b' or axis point");
  sde_o.add("times", sde_times, "comma-separated record times (default: every 0.01 up to --horizon)");
  sde_o.add("horizon", sde_horizon, "end of the default record grid");
  sde_o.add("step", sde_step, "time step");
  sde_o.add("scheme", sde_scheme, "euler or split");
  sde_o.add("seed", sde_seed, "master seed");
  sde_o.add("path-index", sde_index, "path index within the seed");
  sde_o.flag("driftless", sde_driftless, "simulate Z (c = 0) with absorption on E");
  sde->add_option("--out", sde_out, "CSV output (default stdout)");

  // path
  auto* pa = app.add_subcommand("path", "one path of X by exact transitions or the strong construction; CSV t,x1,x2,in_E");
  Options pa_o(pa);
  std::string pa_mode = "strong", pa_theta = "2,1", pa_x0 = "axis2:1", pa_times, pa_out, pa_trace;
  double pa_c = 0.5, pa_horizon = 4, pa_step = 1e-4, pa_grid = 0.01;
  std::uint64_t pa_seed = 0, pa_index = 0, pa_trace_points = 2000;
  pa_o.add("mode", pa_mode, "strong or exact");
  pa_o.add("c", pa_c, "drift rate");
  pa_o.add("theta", pa_theta, "drift target 'a,b'");
  pa_o.add("x0", pa_x0, "start on E (axis1:m, axis2:m, origin)");
  pa_o.add("times", pa_times, "comma-separated record times (default: every --grid up to --horizon)");
  pa_o.add("horizon", pa_horizon, "end of the default record grid");
  pa_o.add("grid", pa_grid, "spacing of the default record grid");
  pa_o.add("step", pa_step, "Brownian time step (strong mode)");
  pa_o.add("seed", pa_seed, "master seed");
  pa_o.add("path-index", pa_index, "path index within the seed");
  pa_o.add("trace-points", pa_trace_points, "points in the Brownian trace");
  pa->add_option("--out", pa_out, "CSV output (default stdout)");
  pa->add_option("--trace", pa_trace, "strong mode: also write the driving Brownian motion as CSV s,b1,b2");

  // trotter
  auto* tr = app.add_subcommand("trotter", "one Trotter path of X; CSV t,x1,x2,in_E");
  Options tr_o(tr);
  double tr_c = 1, tr_eps = 1e-2, tr_horizon = 1;
  std::string tr_theta = "1,1", tr_x0 = "axis1:1", tr_times, tr_out;
  std::uint64_t tr_seed = 0, tr_index = 0;
  tr_o.add("c", tr_c, "drift rate");
  tr_o.add("theta", tr_theta, "drift target 'a,b'");
  tr_o.add("x0", tr_x0, "start 'a,b' or axis point; an interior start begins with a jump");
  tr_o.add("epsilon", tr_eps, "grid spacing");
  tr_o.add("horizon", tr_horizon, "end time");
  tr_o.add("times", tr_times, "comma-separated record times (default: the grid)");
  tr_o.add("seed", tr_seed, "master seed");
  tr_o.add("path-index", tr_index, "path index within the seed");
  tr->add_option("--out", tr_out, "CSV output (default stdout)");

  // generator
  auto* ge = app.add_subcommand("generator", "generator on F(., z) by quadrature against its closed form; JSON");
  Options ge_o(ge);
  double ge_c = 1, ge_tol = 1e-10, ge_rel = 1e-6;
  std::string ge_theta = "1,1", ge_z = "axis1:1", ge_x = "axis1:2", ge_out;
  ge_o.add("c", ge_c, "drift rate");
  ge_o.add("theta", ge_theta, "drift target 'a,b'");
  ge_o.add("z", ge_z, "dual point on E");
  ge_o.add("x", ge_x, "evaluation point on E");
  ge_o.add("tol", ge_tol, "quadrature tolerance");
  ge_o.add("threshold", ge_rel, "relative error threshold");
  ge->add_option("--out", ge_out, "JSON output (default stdout)");

  // verify
  auto* ve = app.add_subcommand("verify", "one statistical check; JSON");
  Options ve_o(ve);
  std::string ve_suite = "duality", ve_theta = "1,1", ve_x = "axis2:1", ve_z = "axis1:1", ve_gammas = "1,10,100,1000",
              ve_integral = "exact", ve_scheme = "split", ve_out;
  double ve_c = 1, ve_t = 0.6931, ve_eps = 1e-3, ve_sigmas = 4, ve_threshold = 0.02, ve_u = 1, ve_v = 1;
  std::uint64_t ve_n = 100000, ve_seed = 0;
  ve_o.add("suite", ve_suite, "duality, martingale, sweep or ks-q");
  ve_o.add("c", ve_c, "drift rate");
  ve_o.add("theta", ve_theta, "drift target 'a,b'");
  ve_o.add("x", ve_x, "start on E");
  ve_o.add("z", ve_z, "dual point on E");
  ve_o.add("t", ve_t, "time");
  ve_o.add("n", ve_n, "samples");
  ve_o.add("seed", ve_seed, "master seed");
  ve_o.add("sigmas", ve_sigmas, "band width in standard errors (duality, martingale)");
  ve_o.add("eps", ve_eps, "Trotter grid (martingale)");
  ve_o.add("integral", ve_integral, "exact or trapezoid (martingale)");
  ve_o.add("gammas", ve_gammas, "increasing branching rates (sweep)");
  ve_o.add("scheme", ve_scheme, "euler or split (sweep)");
  ve_o.add("threshold", ve_threshold, "KS threshold (sweep, ks-q)");
  ve_o.add("u", ve_u, "Q parameter (ks-q)");
  ve_o.add("v", ve_v, "Q parameter (ks-q)");
  ve->add_option("--out", ve_out, "JSON output (default stdout)");

  // all-checks
  auto* ac = app.add_subcommand("all-checks", "the acceptance suite, criteria 1-13; JSON");
  Options ac_o(ac);
  std::uint64_t ac_seed = 1;
  std::string ac_only, ac_out;
  ac_o.add("seed", ac_seed, "master seed");
  ac_o.add("only", ac_only, "comma-separated criteria to run (default all)");
  ac->add_option("--out", ac_out, "JSON output (default stdout)");

  std::vector<std::string> args;
  try {
    std::vector<std::string> raw(argv + 1, argv + argc);
    args = merge_config(raw);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const int w = resolve_workers(workers);
  try {
    if (*sq) {
      const QMeasureParams q(sq_u, sq_v);
      const auto xs = parallel_map<BoundaryPoint>(sq_n, w, [&](std::size_t i) {
        Stream rng(sq_seed, i);
        return q_sample(q, rng);
      });
      Output o(sq_out);
      o.stream() << "branch,magnitude\n";
      for (const auto& x : xs) o.stream() << branch_column(x) << ',' << format_double(x.magnitude()) << '\n';
      return 0;
    }

    if (*ex) {
      const QuadrantPoint x = parse_quadrant(ex_x);
      const auto recs = parallel_map<ExitRecord>(ex_n, w, [&](std::size_t i) {
        BrownianPath path(ex_step, ex_seed, i, checks::kUnboundedBudget);
        return cone_exit(path, x);
      });
      Output o(ex_out);
      o.stream() << "branch,magnitude,exit_time\n";
      for (const auto& r : recs) {
        o.stream() << branch_column(r.exit_point) << ',' << format_double(r.exit_point.magnitude()) << ','
                   << format_double(r.exit_time) << '\n';
      }
      if (ex_report.empty()) return 0;
      std::vector<Report> reports;
      if (!x.on_boundary()) {
        std::vector<BoundaryPoint> pts;
        std::vector<double> root_tau;
        for (const auto& r : recs) {
          pts.push_back(r.exit_point);
          root_tau.push_back(std::sqrt(r.exit_time));
        }
        // Discretization allowance or the alpha = 0.01 critical value, whichever is larger.
        const double threshold = std::max(checks::kBrownianKs, 1.63 / std::sqrt(static_cast<double>(ex_n)));
        reports.push_back(ks_against_q(pts, QMeasureParams(x), threshold, "cone_exit_ks"));
        if (ex_n >= 100) {
          reports.push_back(
              summarize_upper("exit_time_sqrt_moment", root_tau, exit_time_moment_bound(QMeasureParams(x), 1.0), 3.0));
        }
        for (auto& r : reports) r.seed = ex_seed;
      }
      return emit_reports(ex_report, ex_o.echo(), reports);
    }

    if (*sde) {
      SdeConfig cfg;
      cfg.gamma = sde_gamma;
      cfg.c = sde_driftless ? 0.0 : sde_c;
      cfg.theta = parse_quadrant(sde_theta);
      cfg.step = sde_step;
      cfg.seed = sde_seed;
      cfg.path_index = sde_index;
      cfg.scheme = parse_scheme(sde_scheme);
      cfg.absorb = sde_driftless;
      const auto times = sde_times.empty() ? default_grid(sde_horizon, 0.01) : parse_list(sde_times);
      const auto s = simulate_Y(cfg, parse_any_point(sde_y0), times);
      Output o(sde_out);
      write_path_csv(o.stream(), s);
      return 0;
    }

    if (*pa) {
      const ImubParams p(pa_c, parse_quadrant(pa_theta));
      const BoundaryPoint x0 = parse_boundary(pa_x0);
      const auto times = pa_times.empty() ? default_grid(pa_horizon, pa_grid) : parse_list(pa_times);
      if (pa_mode == "exact") {
        Stream rng(pa_seed, pa_index);
        Output o(pa_out);
        write_path_csv(o.stream(), path_sample(p, x0, times, rng));
        return 0;
      }
      if (pa_mode != "strong") throw UsageError("unknown path mode '" + pa_mode + "' (strong, exact)");
      BrownianPath path(pa_step, pa_seed, pa_index, checks::kUnboundedBudget);
      const auto s = strong_construct(path, x0, DriftSchedule::constant(p.c, p.theta), times);
      {
        Output o(pa_out);
        write_path_csv(o.stream(), s);
      }
      if (!pa_trace.empty()) {
        // The trace runs until the last exit used by the path.
        const QuadrantPoint last = x0.to_quadrant() + DriftSchedule::constant(p.c, p.theta).Xi(0.0, times.back());
        BrownianPath again(pa_step, pa_seed, pa_index, checks::kUnboundedBudget);
        const double end = std::max(cone_exit(again, last).exit_time, pa_step);
        std::vector<double> s_grid;
        const std::uint64_t m = std::max<std::uint64_t>(pa_trace_points, 2);
        for (std::uint64_t k = 0; k < m; ++k) s_grid.push_back(end * static_cast<double>(k) / static_cast<double>(m - 1));
        const auto trace = brownian_trace(again, s_grid);
        Output o(pa_trace);
        o.stream() << "s,b1,b2\n";
        for (std::size_t k = 0; k < trace.size(); ++k) {
          o.stream() << format_double(s_grid[k]) << ',' << format_double(trace[k].b1) << ','
                     << format_double(trace[k].b2) << '\n';
        }
      }
      return 0;
    }

    if (*tr) {
      const ImubParams p(tr_c, parse_quadrant(tr_theta));
      const TrotterConfig cfg{tr_eps, tr_horizon, tr_seed, tr_index};
      const auto times = tr_times.empty() ? default_grid(tr_horizon, tr_eps) : parse_list(tr_times);
      Output o(tr_out);
      write_path_csv(o.stream(), trotter_path(p, parse_any_point(tr_x0), cfg, times));
      return 0;
    }

    if (*ge) {
      const ImubParams p(ge_c, parse_quadrant(ge_theta));
      const BoundaryPoint z = parse_boundary(ge_z), x = parse_boundary(ge_x);
      Stopwatch clock;
      const auto got = apply_G(p, duality_test_function(z), x, ge_tol);
      const DualityValue want = generator_on_F(p, z, x);
      Report r;
      r.check = "generator_vs_closed_form";
      r.params = ge_o.echo();
      r.estimate = got.value;
      r.reference = want;
      const double scale = std::abs(want);
      r.statistic = std::abs(got.value - want) / (scale > 0 ? scale : 1.0);
      r.threshold = ge_rel;
      r.verdict = *r.statistic <= ge_rel ? Verdict::Pass : Verdict::Fail;
      r.note = "quadrature error estimate " + format_double(got.quadrature_error_estimate);
      r.wall_time_ms = clock.ms();
      return emit_reports(ge_out, ge_o.echo(), {r});
    }

    if (*ve) {
      const ImubParams p(ve_c, parse_quadrant(ve_theta));
      std::vector<Report> reports;
      if (ve_suite == "duality") {
        reports.push_back(duality_check(p, parse_boundary(ve_x), parse_boundary(ve_z), ve_t, ve_n, ve_seed, w, ve_sigmas));
      } else if (ve_suite == "martingale") {
        IntegralScheme scheme = IntegralScheme::Exact;
        if (ve_integral == "trapezoid") scheme = IntegralScheme::Trapezoid;
        else if (ve_integral != "exact") throw UsageError("unknown integral '" + ve_integral + "' (exact, trapezoid)");
        reports.push_back(martingale_residual(p, parse_boundary(ve_x), parse_boundary(ve_z), ve_t, ve_eps, ve_n,
                                              ve_seed, w, scheme, ve_sigmas));
      } else if (ve_suite == "sweep") {
        SweepOptions o;
        o.scheme = parse_scheme(ve_scheme);
        o.threshold = ve_threshold;
        reports = convergence_sweep(p, parse_boundary(ve_x), ve_t, parse_list(ve_gammas), ve_n, ve_seed, w, o);
        if (reports.size() > 1) {
          const bool mono = sweep_nonincreasing(reports);
          for (std::size_t i = 0; i + 1 < reports.size(); ++i) reports[i].verdict = Verdict::Inconclusive;
          Report m;
          m.check = "convergence_sweep_monotone";
          m.n = ve_n;
          m.verdict = mono ? Verdict::Pass : Verdict::Fail;
          m.seed = ve_seed;
          reports.push_back(m);
        }
      } else if (ve_suite == "ks-q") {
        const QMeasureParams q(ve_u, ve_v);
        const auto xs = parallel_map<BoundaryPoint>(ve_n, w, [&](std::size_t i) {
          Stream rng(ve_seed, i);
          return q_sample(q, rng);
        });
        auto r = ks_against_q(xs, q, ve_threshold);
        r.seed = ve_seed;
        reports.push_back(r);
      } else {
        throw UsageError("unknown suite '" + ve_suite + "' (duality, martingale, sweep, ks-q)");
      }
      return emit_reports(ve_out, ve_o.echo(), reports);
    }

    if (*ac) {
      SuiteOptions so;
      so.seed = ac_seed;
      so.workers = w;
      for (double c : parse_list(ac_only)) so.only.insert(static_cast<int>(c));
      json criteria = json::array();
      so.progress = [&](int criterion, const std::vector<Report>& got, double ms) {
        const bool ok = criterion_passed(got, criterion);
        std::cerr << "criterion " << criterion << ": " << (ok ? "pass" : "FAIL") << " (" << format_double(std::round(ms) / 1000.0)
                  << " s)\n";
        criteria.push_back({{"criterion", criterion},
                            {"passed", ok},
                            {"wall_time_ms", ms},
                            {"budget_s", criterion_budget_s(criterion)}});
      };
      const auto reports = run_all_checks(so);
      return emit_reports(ac_out, ac_o.echo(), reports, {{"criteria", criteria}});
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const imub::Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
