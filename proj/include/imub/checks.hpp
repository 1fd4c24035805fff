#pragma once

// The acceptance suite: one function per criterion, each returning the
// reports it produced. Every check draws from its own key derived from the
// master seed, so checks can be run alone or in any order.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "imub/generator.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/infinite_rate.hpp"
#include "imub/planar_bm.hpp"
#include "imub/verify.hpp"

namespace imub {

struct SuiteOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  /// Criteria to run; empty means all.
  std::set<int> only;
  /// Called after each criterion finishes, with its wall time in ms.
  std::function<void(int, const std::vector<Report>&, double)> progress;
};

/// Wall-clock budget per criterion in seconds.
inline double criterion_budget_s(int criterion) {
  switch (criterion) {
    case 1: return 5;
    case 2: return 10;
    case 3: return 30;
    case 4: return 10;
    case 5: return 300;
    case 6: return 30;
    case 7: return 30;
    case 8: return 120;
    case 9: return 600;
    case 10: return 60;
    case 11: return 60;
    case 12: return 120;
    case 13: return 120;
    default: return std::numeric_limits<double>::infinity();
  }
}

namespace checks {

inline constexpr std::uint64_t kSamples = 100000;
inline constexpr double kExactKs = 0.01;
inline constexpr double kBrownianKs = 0.015;
inline constexpr double kTrotterKs = 0.02;

inline std::uint64_t check_seed(std::uint64_t master, std::uint64_t id) { return derive_key(master, id, 0x636bU); }

inline Report bounded(const std::string& check, double statistic, double threshold, json params = json::object()) {
  Report r;
  r.check = check;
  r.params = std::move(params);
  r.statistic = statistic;
  r.threshold = threshold;
  r.verdict = statistic <= threshold ? Verdict::Pass : Verdict::Fail;
  return r;
}

template <class F>
std::vector<double> signed_samples(std::uint64_t n, std::uint64_t seed, int workers, F&& draw) {
  return parallel_map<double>(n, workers, [&](std::size_t i) {
    Stream rng(seed, i);
    return draw(rng, i);
  });
}

inline KsReport ks_exact(const std::string& check, std::vector<double> w, const QuadrantPoint& law, double threshold) {
  const QMeasureParams q(law);
  auto r = ks_report(check, std::move(w), [&](double v) { return q_signed_cdf(q, v); }, threshold);
  r.params["law"] = to_json(law);
  return r;
}

// 1. Exact harmonic-measure sampler.
inline std::vector<Report> harmonic_sampler(std::uint64_t master, int workers) {
  const std::uint64_t seed = check_seed(master, 1);
  const double threshold = 1.63 / std::sqrt(static_cast<double>(kSamples));
  std::vector<BoundaryPoint> xs = parallel_map<BoundaryPoint>(kSamples, workers, [&](std::size_t i) {
    Stream rng(seed, i);
    return q_sample(QMeasureParams(1, 1), rng);
  });
  auto r = ks_against_q(xs, {1, 1}, threshold, "q_sample_ks");
  r.seed = seed;
  return {r};
}

// 2. Density normalization and branch mass.
inline std::vector<Report> normalization() {
  const double us[] = {0.15, 0.6, 1.2, 2.1, 3.0};
  const double vs[] = {0.3, 1.0, 1.7, 2.9};
  double worst = 0.0;
  for (double u : us) {
    for (double v : vs) {
      const auto r = q_expect(QMeasureParams(u, v), [](const BoundaryPoint&) { return 1.0; });
      worst = std::max(worst, r.converged ? std::abs(r.value - 1.0) : 1.0);
    }
  }
  // Independent quadrature of the axis-1 density with double-exponential rules.
  const double u = 1.0, v = 2.0;
  const auto density = [&](double m) {
    const double s = m * m + v * v - u * u;
    return 4.0 / std::numbers::pi * u * v * m / (4.0 * u * u * v * v + s * s);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double peak = std::sqrt(u * v);
  const double oracle = ts.integrate(density, 0.0, peak) + es.integrate(density, peak, std::numeric_limits<double>::infinity());
  const double mass = q_branch_mass({u, v}).mass1;
  return {bounded("normalization_grid", worst, 1e-8, {{"grid", "5x4 in (0,3]^2"}}),
          bounded("branch_mass_vs_quadrature", std::abs(mass - oracle), 1e-6, {{"u", u}, {"v", v}, {"mass1", mass}}),
          bounded("branch_mass_vs_value", std::abs(mass - 0.295167), 1e-6, {{"u", u}, {"v", v}, {"mass1", mass}})};
}

// 3. Scaling and composition of Q.
inline std::vector<Report> scaling_composition(std::uint64_t master, int workers) {
  std::vector<Report> out;
  for (double r : {0.5, 2.0}) {
    const std::uint64_t seed = check_seed(master, r < 1 ? 31 : 32);
    auto w = signed_samples(kSamples, seed, workers,
                            [r](Stream& rng, std::size_t) { return r * q_sample(QMeasureParams(1, 1), rng).signed_coordinate(); });
    auto rep = ks_exact("q_scaling", std::move(w), {r, r}, kExactKs);
    rep.params["r"] = r;
    rep.seed = seed;
    out.push_back(std::move(rep));
  }
  const std::uint64_t seed = check_seed(master, 33);
  auto w = signed_samples(kSamples, seed, workers, [](Stream& rng, std::size_t) {
    const QuadrantPoint z = q_sample(QMeasureParams(1, 1), rng).to_quadrant();
    return q_sample(0.5 * z + QuadrantPoint{1, 0}, rng).signed_coordinate();
  });
  auto rep = ks_exact("q_composition", std::move(w), {1.5, 0.5}, kExactKs);
  rep.params["x"] = to_json(QuadrantPoint{1, 1});
  rep.params["r"] = 0.5;
  rep.params["y"] = to_json(QuadrantPoint{1, 0});
  rep.seed = seed;
  out.push_back(std::move(rep));
  return out;
}

// 4. Mean identity and moment bound.
inline std::vector<Report> moments() {
  double mean_err = 0.0;
  double excess = -std::numeric_limits<double>::infinity();
  for (double u : {0.2, 0.7, 1.0, 2.5}) {
    for (double v : {0.5, 1.0, 3.0}) {
      mean_err = std::max({mean_err, std::abs(q_moment({u, v}, 1, 1.0) - u), std::abs(q_moment({u, v}, 2, 1.0) - v)});
      for (double p : {1.0, 1.25, 1.5, 1.75, 1.9}) {
        excess = std::max(excess, q_moment({u, v}, 1, p) - q_moment_bound({u, v}, p));
        excess = std::max(excess, q_moment({u, v}, 2, p) - q_moment_bound({v, u}, p));
      }
    }
  }
  return {bounded("mean_identity", mean_err, 1e-7, {{"grid", "4x3"}}),
          bounded("moment_bound_excess", excess, 0.0, {{"exponents", {1.0, 1.25, 1.5, 1.75, 1.9}}})};
}

inline constexpr std::uint64_t kUnboundedBudget = std::uint64_t{1} << 50;

// 5. Cone-exit sampler, exit-time bound, constant-schedule strong construction.
inline std::vector<Report> strong_construction(std::uint64_t master, int workers) {
  std::vector<Report> out;
  const double step = 1e-4;
  {
    Stopwatch clock;
    const std::uint64_t seed = check_seed(master, 51);
    const auto recs = parallel_map<ExitRecord>(kSamples, workers, [&](std::size_t i) {
      BrownianPath path(step, seed, i, kUnboundedBudget);
      return cone_exit(path, {1, 1});
    });
    std::vector<double> w, root_tau;
    w.reserve(recs.size());
    root_tau.reserve(recs.size());
    for (const auto& r : recs) {
      w.push_back(r.exit_point.signed_coordinate());
      root_tau.push_back(std::sqrt(r.exit_time));
    }
    auto ks = ks_exact("cone_exit_ks", std::move(w), {1, 1}, kBrownianKs);
    ks.params["step"] = step;
    ks.seed = seed;
    ks.wall_time_ms = clock.ms();
    out.push_back(std::move(ks));
    auto tau = summarize_upper("exit_time_sqrt_moment", root_tau, exit_time_moment_bound({1, 1}, 1.0), 3.0);
    tau.params["x"] = to_json(QuadrantPoint{1, 1});
    tau.params["step"] = step;
    tau.seed = seed;
    out.push_back(std::move(tau));
  }
  {
    // The constant schedule (1/2, (2,1)) from (0,1): every recorded state must
    // equal e^{-t/2} times the exit point of the cone at (0,1) + (2,1)(e^{t/2} - 1).
    Stopwatch clock;
    const std::uint64_t seed = check_seed(master, 52);
    const auto sched = DriftSchedule::constant(0.5, {2, 1});
    const std::vector<double> times{0.25, 0.5, 1, 2, 4};
    const auto mismatches = parallel_map<int>(200, workers, [&](std::size_t i) {
      BrownianPath path(step, seed, i, kUnboundedBudget);
      const auto s = strong_construct(path, BoundaryPoint::axis2(1), sched, times);
      int bad = 0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        BrownianPath fresh(step, seed, i, kUnboundedBudget);
        const QuadrantPoint cone = QuadrantPoint{0, 1} + std::expm1(0.5 * times[k]) * QuadrantPoint{2, 1};
        const QuadrantPoint want = std::exp(-0.5 * times[k]) * cone_exit(fresh, cone).exit_point.to_quadrant();
        bad += !(s.states[k] == want) || !s.in_E[k];
      }
      return bad;
    });
    int bad = 0;
    for (int b : mismatches) bad += b;
    auto r = bounded("strong_constant_schedule_identity", bad, 0.0,
                     {{"c", 0.5}, {"theta", to_json(QuadrantPoint{2, 1})}, {"x0", "axis2:1"}, {"paths", 200}});
    r.n = 200;
    r.seed = seed;
    r.wall_time_ms = clock.ms();
    out.push_back(std::move(r));
  }
  {
    Stopwatch clock;
    const std::uint64_t seed = check_seed(master, 53);
    const ImubParams p(1, {1, 1});
    const double t = 0.7;
    const auto sched = DriftSchedule::constant(p.c, p.theta);
    auto w = parallel_map<double>(kSamples, workers, [&](std::size_t i) {
      BrownianPath path(step, seed, i, kUnboundedBudget);
      const auto s = strong_construct(path, BoundaryPoint::axis1(1), sched, {t});
      return s.boundary_state(0).signed_coordinate();
    });
    auto r = ks_exact("strong_marginal_ks", std::move(w), kernel_argument(p, {1, 0}, t), kBrownianKs);
    r.params["t"] = t;
    r.params["step"] = step;
    r.seed = seed;
    r.wall_time_ms = clock.ms();
    out.push_back(std::move(r));
  }
  return out;
}

// 6. Chapman-Kolmogorov.
inline std::vector<Report> chapman_kolmogorov(std::uint64_t master, int workers) {
  const std::uint64_t seed = check_seed(master, 6);
  const ImubParams p(1, {1, 1});
  const double s = 0.3, t = 0.7;
  const BoundaryPoint x0 = BoundaryPoint::axis1(1);
  auto two = signed_samples(kSamples, seed, workers, [&](Stream& rng, std::size_t) {
    return path_sample(p, x0, {s, s + t}, rng).boundary_state(1).signed_coordinate();
  });
  auto one = signed_samples(kSamples, derive_key(seed, 1), workers, [&](Stream& rng, std::size_t) {
    return transition_sample(p, x0, s + t, rng).signed_coordinate();
  });
  const json params = {{"c", 1}, {"theta", to_json(p.theta)}, {"x0", to_json(x0)}, {"s", s}, {"t", t}};
  auto exact = ks_exact("chapman_kolmogorov_vs_exact", two, kernel_argument(p, x0.to_quadrant(), s + t), kExactKs);
  exact.params.update(params);
  exact.seed = seed;
  auto pair = ks_two_sample_report("chapman_kolmogorov_two_vs_one", std::move(two), std::move(one), kExactKs);
  pair.params.update(params);
  pair.seed = seed;
  return {exact, pair};
}

// 7. Duality moment.
inline std::vector<Report> duality(std::uint64_t master, int workers) {
  const std::uint64_t seed = check_seed(master, 7);
  return {duality_check(ImubParams(1, {1, 1}), BoundaryPoint::axis2(1), BoundaryPoint::axis1(1), std::log(2.0),
                        kSamples, seed, workers)};
}

// 8. Trotter scheme.
inline std::vector<Report> trotter(std::uint64_t master, int workers) {
  const ImubParams p(1, {1, 1});
  std::vector<Report> out;
  const auto run = [&](const std::string& name, const QuadrantPoint& x0, double eps, double horizon, double threshold,
                       std::uint64_t id) {
    Stopwatch clock;
    const std::uint64_t seed = check_seed(master, id);
    auto w = parallel_map<double>(kSamples, workers, [&](std::size_t i) {
      const TrotterConfig cfg{eps, horizon, seed, i};
      return trotter_path(p, x0, cfg, {horizon}).boundary_state(0).signed_coordinate();
    });
    auto r = ks_exact(name, std::move(w), kernel_argument(p, x0, horizon), threshold);
    r.params["epsilon"] = eps;
    r.params["t"] = horizon;
    r.params["x0"] = to_json(x0);
    r.seed = seed;
    r.wall_time_ms = clock.ms();
    out.push_back(std::move(r));
  };
  run("trotter_coarse_grid", {0, 2}, 0.5, 2.0, stats::ks_critical(0.01) / std::sqrt(static_cast<double>(kSamples)), 81);
  run("trotter_fine_grid", {1, 0}, 1e-3, 1.0, kTrotterKs, 82);
  return out;
}

// 9. Finite-rate convergence as gamma grows.
inline std::vector<Report> gamma_sweep(std::uint64_t master, int workers, std::uint64_t n = 20000) {
  const ImubParams p(1, {1, 1});
  const BoundaryPoint x0 = BoundaryPoint::axis1(1);
  const double t = 1.0;
  const std::vector<double> gammas{1, 10, 100, 1000};
  const SweepOptions o;
  const QMeasureParams limit(kernel_argument(p, x0.to_quadrant(), t));
  std::vector<Report> out;
  std::vector<KsReport> ks;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    Stopwatch clock;
    const std::uint64_t seed = check_seed(master, 900 + g);
    const auto ys = sweep_marginals(p, x0, t, gammas[g], n, seed, workers, o);
    auto r = sweep_ks(p, x0, t, ys, o.threshold);
    r.params = sweep_params(p, x0, t, gammas[g], o);
    r.seed = seed;
    // Only the largest gamma is held to the threshold; the others feed the
    // monotonicity check.
    if (g + 1 < gammas.size()) r.verdict = Verdict::Inconclusive;
    ks.push_back(r);
    out.push_back(std::move(r));
    for (int i : {1, 2}) {
      std::vector<double> m;
      m.reserve(ys.size());
      for (const auto& y : ys) m.push_back(i == 1 ? y.x1 : y.x2);
      auto mom = summarize_upper("moment_domination", m, q_moment(limit, i, 1.0), 3.0);
      mom.params.update({{"gamma", gammas[g]}, {"coordinate", i}, {"p", 1}});
      mom.seed = seed;
      out.push_back(std::move(mom));
    }
    out[out.size() - 3].wall_time_ms = clock.ms();
  }
  double worst_rise = -1.0;
  double floor = 0.0;
  for (std::size_t i = 1; i < ks.size(); ++i) {
    floor = stats::ks_critical(0.05) / std::sqrt(static_cast<double>(n));
    worst_rise = std::max(worst_rise, *ks[i].statistic - *ks[i - 1].statistic);
  }
  auto mono = bounded("convergence_sweep_monotone", worst_rise, 2.0 * floor, {{"gammas", gammas}});
  mono.n = n;
  out.push_back(std::move(mono));
  return out;
}

// 10. Generator against its closed form on the duality functions.
inline std::vector<Report> generator_consistency() {
  const ImubParams p(1, {1, 1});
  const std::vector<BoundaryPoint> zs{BoundaryPoint::axis1(0.5), BoundaryPoint::axis1(1), BoundaryPoint::axis1(2),
                                      BoundaryPoint::axis2(0.5), BoundaryPoint::axis2(1), BoundaryPoint::axis2(2)};
  const std::vector<BoundaryPoint> xs{BoundaryPoint::origin(),   BoundaryPoint::axis1(0.25), BoundaryPoint::axis1(1),
                                      BoundaryPoint::axis1(2),   BoundaryPoint::axis1(4),    BoundaryPoint::axis2(0.5),
                                      BoundaryPoint::axis2(1.5), BoundaryPoint::axis2(3)};
  double worst = 0.0;
  for (const auto& z : zs) {
    const auto f = duality_test_function(z);
    for (const auto& x : xs) {
      const DualityValue want = generator_on_F(p, z, x);
      worst = std::max(worst, std::abs(apply_G(p, f, x).value - want) / std::abs(want));
    }
  }
  NuIntegrand<double> y2;
  y2.value = [](const BoundaryPoint& y) { return y.to_quadrant().x2; };
  y2.slope_at_one = 0.0;
  const double moment = nu_integrate(y2).value;

  const double e = 0.5;
  const auto arctan = quad::integrate(
      [e](double r) {
        const double s = r * r + e * e - 1.0;
        return 4.0 / std::numbers::pi * r * (r - 1.0) / (4.0 * e * e + s * s);
      },
      {0.0, 0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()});
  const double closed = 2.0 / std::numbers::pi / e * std::atan(e);
  return {bounded("generator_grid_relative_error", worst, 1e-6, {{"grid", "6x8"}, {"c", 1}, {"theta", to_json(p.theta)}}),
          bounded("nu_second_axis_moment", std::abs(moment - 1.0), 1e-8, {{"value", moment}}),
          bounded("arctan_identity", std::abs(arctan.value - closed), 1e-8, {{"epsilon", e}, {"closed_form", closed}})};
}

// 11. Semigroup difference quotients approach the generator at order one.
inline std::vector<Report> semigroup_derivative_order() {
  const ImubParams p(1, {1, 1});
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  double worst = 0.0;
  json orders = json::array();
  for (const auto& [z, x] : {std::pair{BoundaryPoint::axis1(1), BoundaryPoint::axis1(2)},
                             std::pair{BoundaryPoint::axis2(0.5), BoundaryPoint::axis1(1)},
                             std::pair{BoundaryPoint::axis1(2), BoundaryPoint::axis2(1.5)}}) {
    const auto f = duality_test_function(z);
    const DualityValue limit = apply_G(p, f, x).value;
    const auto d = semigroup_derivative(p, f, x, eps);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      const double order = std::log10(std::abs(d[i] - limit) / std::abs(d[i + 1] - limit));
      orders.push_back(order);
      worst = std::max(worst, std::abs(order - 1.0));
    }
  }
  return {bounded("semigroup_derivative_order", worst, 0.15, {{"eps", eps}, {"orders", orders}})};
}

// 12. Martingale problem.
inline std::vector<Report> martingale(std::uint64_t master, int workers) {
  const std::uint64_t seed = check_seed(master, 12);
  return {martingale_residual(ImubParams(1, {1, 1}), BoundaryPoint::axis1(1), BoundaryPoint::axis1(1), 1.0, 1e-3,
                              kSamples, seed, workers)};
}

// 13. The origin is never hit on a Trotter grid.
inline std::vector<Report> polarity(std::uint64_t master, int workers) {
  const std::uint64_t seed = check_seed(master, 13);
  const ImubParams p(1, {1, 1});
  constexpr std::uint64_t paths = 1000, steps = 1000;
  const auto hits = parallel_map<int>(paths, workers, [&](std::size_t i) {
    Stream rng(seed, i);
    int h = 0;
    for (const auto& x : trotter_grid(p, {1, 0}, 1e-3, steps, rng)) h += x.is_origin();
    return h;
  });
  int total = 0;
  for (int h : hits) total += h;
  auto r = bounded("origin_hits", total, 0.0, {{"paths", paths}, {"steps", steps}, {"epsilon", 1e-3}});
  r.n = paths * (steps + 1);
  r.seed = seed;
  return {r};
}

}  // namespace checks

/// Runs criteria 1-13 and returns all reports, tagged with their criterion.
inline std::vector<Report> run_all_checks(const SuiteOptions& opts) {
  const int w = resolve_workers(opts.workers);
  const std::uint64_t m = opts.seed;
  const std::vector<std::function<std::vector<Report>()>> suite{
      [&] { return checks::harmonic_sampler(m, w); },
      [&] { return checks::normalization(); },
      [&] { return checks::scaling_composition(m, w); },
      [&] { return checks::moments(); },
      [&] { return checks::strong_construction(m, w); },
      [&] { return checks::chapman_kolmogorov(m, w); },
      [&] { return checks::duality(m, w); },
      [&] { return checks::trotter(m, w); },
      [&] { return checks::gamma_sweep(m, w); },
      [&] { return checks::generator_consistency(); },
      [&] { return checks::semigroup_derivative_order(); },
      [&] { return checks::martingale(m, w); },
      [&] { return checks::polarity(m, w); },
  };
  std::vector<Report> all;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const int criterion = static_cast<int>(i) + 1;
    if (!opts.only.empty() && !opts.only.count(criterion)) continue;
    Stopwatch clock;
    std::vector<Report> got;
    try {
      got = suite[i]();
    } catch (const std::exception& e) {
      Report r;
      r.check = "criterion_" + std::to_string(criterion);
      r.verdict = Verdict::Fail;
      r.note = std::string("error: ") + e.what();
      got.push_back(std::move(r));
    }
    const double elapsed = clock.ms();
    for (auto& r : got) {
      r.criterion = criterion;
      if (r.wall_time_ms == 0.0) r.wall_time_ms = elapsed / static_cast<double>(got.size());
    }
    if (opts.progress) opts.progress(criterion, got, elapsed);
    all.insert(all.end(), got.begin(), got.end());
  }
  return all;
}

struct Summary {
  int pass = 0;
  int fail = 0;
  int inconclusive = 0;
};

inline Summary summarize_verdicts(const std::vector<Report>& reports) {
  Summary s;
  for (const auto& r : reports) {
    if (r.verdict == Verdict::Pass) ++s.pass;
    else if (r.verdict == Verdict::Fail) ++s.fail;
    else ++s.inconclusive;
  }
  return s;
}

/// Criterion-level verdict: no failing report and at least one passing one.
inline bool criterion_passed(const std::vector<Report>& reports, int criterion) {
  bool any = false;
  for (const auto& r : reports) {
    if (r.criterion != criterion) continue;
    if (r.verdict == Verdict::Fail) return false;
    any = any || r.verdict == Verdict::Pass;
  }
  return any;
}

}  // namespace imub
