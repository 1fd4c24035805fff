#pragma once

// Monte Carlo estimates, KS tests and the martingale-problem residual, with
// JSON reports.
//
// Reproducibility contract: sample i of a check always draws from
// Stream(seed, i), results are stored by index, and reductions run in index
// order. Worker count therefore changes wall time only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "imub/dual_kernels.hpp"
#include "imub/errors.hpp"
#include "imub/finite_rate.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/infinite_rate.hpp"
#include "imub/random.hpp"
#include "imub/stats.hpp"
#include "imub/types.hpp"

namespace imub {

using json = nlohmann::ordered_json;

inline constexpr const char* kWorkersEnv = "IMUB_WORKERS";

/// requested > 0 wins; otherwise IMUB_WORKERS; otherwise hardware threads.
inline int resolve_workers(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// out[i] = fn(i) for i < n, computed on `workers` threads.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& fn) {
  std::vector<T> out(n);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failure_index = n;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          out[i] = fn(i);
        } catch (...) {
          // Keep the lowest failing index so the surfaced error does not
          // depend on scheduling.
          std::lock_guard lock(failure_mutex);
          if (i < failure_index) {
            failure_index = i;
            failure = std::current_exception();
          }
          return;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = static_cast<std::size_t>(workers);
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

/// One verification outcome. Estimate fields are used by Monte Carlo
/// checks, statistic/threshold by KS and deterministic checks.
struct Report {
  std::string check;
  int criterion = 0;
  json params = json::object();
  std::uint64_t n = 0;
  std::optional<DualityValue> estimate;
  std::optional<DualityValue> std_error;
  std::optional<DualityValue> reference;
  std::optional<double> statistic;
  std::optional<double> threshold;
  double band_width_sigmas = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::string note;

  [[nodiscard]] bool passed() const { return verdict == Verdict::Pass; }

  [[nodiscard]] json to_json() const {
    const auto complex_json = [](const std::optional<DualityValue>& v) -> json {
      if (!v) return nullptr;
      return json{{"re", v->real()}, {"im", v->imag()}};
    };
    const auto opt = [](const std::optional<double>& v) -> json {
      if (!v) return nullptr;
      return *v;
    };
    json j;
    j["check"] = check;
    if (criterion > 0) j["criterion"] = criterion;
    j["params"] = params;
    j["n"] = n;
    j["estimate"] = complex_json(estimate);
    j["std_error"] = complex_json(std_error);
    j["reference"] = complex_json(reference);
    j["statistic"] = opt(statistic);
    j["threshold"] = opt(threshold);
    j["band_width_sigmas"] = band_width_sigmas;
    j["verdict"] = verdict_name(verdict);
    j["seed"] = seed;
    j["wall_time_ms"] = wall_time_ms;
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

using EstimateReport = Report;
using KsReport = Report;

inline json to_json(const QuadrantPoint& p) { return json::array({p.x1, p.x2}); }
inline json to_json(const BoundaryPoint& p) { return to_string(p); }

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

namespace detail {

struct ComponentStats {
  double mean = 0.0;
  double se = 0.0;
};

inline ComponentStats component_stats(const std::vector<DualityValue>& xs, bool imag) {
  stats::Accumulator sum;
  for (const auto& x : xs) sum.add(imag ? x.imag() : x.real());
  const double n = static_cast<double>(xs.size());
  const double mean = sum.value() / n;
  stats::Accumulator sq;
  for (const auto& x : xs) {
    const double d = (imag ? x.imag() : x.real()) - mean;
    sq.add(d * d);
  }
  const double var = xs.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline bool within_band(double est, double se, double ref, double sigmas) {
  // A few ulps of slack so that a zero-variance sampler passes against itself.
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ref), std::abs(est));
  return std::abs(est - ref) <= sigmas * se + slack;
}

}  // namespace detail

/// Mean and standard error of `xs` (componentwise for complex values) and,
/// when a reference is given, a two-sided verdict at `sigmas` standard errors.
inline EstimateReport summarize(const std::string& check, const std::vector<DualityValue>& xs,
                                std::optional<DualityValue> reference, double sigmas = 4.0) {
  if (xs.size() < 100) {
    throw InsufficientSamples("Monte Carlo estimate needs at least 100 samples, got " + std::to_string(xs.size()));
  }
  const auto re = detail::component_stats(xs, false);
  const auto im = detail::component_stats(xs, true);
  EstimateReport r;
  r.check = check;
  r.n = xs.size();
  r.estimate = DualityValue(re.mean, im.mean);
  r.std_error = DualityValue(re.se, im.se);
  r.reference = reference;
  r.band_width_sigmas = sigmas;
  if (reference) {
    const bool ok = detail::within_band(re.mean, re.se, reference->real(), sigmas) &&
                    detail::within_band(im.mean, im.se, reference->imag(), sigmas);
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
  }
  return r;
}

/// One-sided check: the real mean may exceed `bound` by at most sigmas * se.
inline EstimateReport summarize_upper(const std::string& check, const std::vector<double>& xs, double bound,
                                      double sigmas = 3.0) {
  std::vector<DualityValue> c(xs.begin(), xs.end());
  auto r = summarize(check, c, std::nullopt, sigmas);
  r.reference = DualityValue(bound, 0.0);
  r.params["comparison"] = "upper-bound";
  r.verdict = r.estimate->real() <= bound + sigmas * r.std_error->real() ? Verdict::Pass : Verdict::Fail;
  return r;
}

using Sampler = std::function<DualityValue(Stream&, std::uint64_t)>;

/// Draws sample i from Stream(seed, i) and summarizes.
inline EstimateReport mc_estimate(const Sampler& sampler, std::uint64_t n, std::optional<DualityValue> reference,
                                  double sigmas = 4.0, std::uint64_t seed = 0, int workers = 1,
                                  const std::string& check = "mc_estimate") {
  if (n < 100) throw InsufficientSamples("Monte Carlo estimate needs at least 100 samples");
  Stopwatch clock;
  const auto xs = parallel_map<DualityValue>(n, workers, [&](std::size_t i) {
    Stream rng(seed, i);
    return sampler(rng, i);
  });
  auto r = summarize(check, xs, reference, sigmas);
  r.seed = seed;
  r.wall_time_ms = clock.ms();
  return r;
}

/// Signed-line coordinate w = x1 - x2; the identity on E up to orientation.
inline double signed_line(const QuadrantPoint& p) { return p.x1 - p.x2; }

template <class Cdf>
KsReport ks_report(const std::string& check, std::vector<double> w, const Cdf& cdf, double threshold) {
  KsReport r;
  r.check = check;
  r.n = w.size();
  r.statistic = stats::ks_one_sample(w, cdf);
  r.threshold = threshold;
  r.verdict = *r.statistic <= threshold ? Verdict::Pass : Verdict::Fail;
  return r;
}

/// One-sample KS of E-valued samples against the exact law Q_(u,v), on the
/// signed line.
inline KsReport ks_against_q(const std::vector<BoundaryPoint>& samples, const QMeasureParams& params,
                             double threshold, const std::string& check = "ks_against_q") {
  if (params.degenerate()) throw DegenerateStart("KS against Q needs an interior parameter");
  std::vector<double> w;
  w.reserve(samples.size());
  for (const auto& s : samples) w.push_back(s.signed_coordinate());
  auto r = ks_report(check, std::move(w), [&](double v) { return q_signed_cdf(params, v); }, threshold);
  r.params["q"] = to_json(params.point());
  return r;
}

inline KsReport ks_two_sample_report(const std::string& check, std::vector<double> a, std::vector<double> b,
                                     double threshold) {
  KsReport r;
  r.check = check;
  r.n = std::min(a.size(), b.size());
  r.statistic = stats::ks_two_sample(a, b);
  r.threshold = threshold;
  r.verdict = *r.statistic <= threshold ? Verdict::Pass : Verdict::Fail;
  r.params["two_sample"] = true;
  return r;
}

/// E_x[F(X_t, z)] = F(x, e^{-ct} z) F(theta, (1 - e^{-ct}) z).
inline DualityValue duality_reference(const ImubParams& p, const BoundaryPoint& x, const BoundaryPoint& z, double t) {
  const QuadrantPoint zq = z.to_quadrant();
  return kernel_F(x.to_quadrant(), std::exp(-p.c * t) * zq) * kernel_F(p.theta, -std::expm1(-p.c * t) * zq);
}

/// Monte Carlo E_x[F(X_t, z)] from exact transitions against the closed form.
inline EstimateReport duality_check(const ImubParams& p, const BoundaryPoint& x, const BoundaryPoint& z, double t,
                                    std::uint64_t n, std::uint64_t seed = 0, int workers = 1, double sigmas = 4.0) {
  const QuadrantPoint zq = z.to_quadrant();
  auto r = mc_estimate(
      [&](Stream& rng, std::uint64_t) { return kernel_F(transition_sample(p, x, t, rng).to_quadrant(), zq); }, n,
      duality_reference(p, x, z, t), sigmas, seed, workers, "duality");
  r.params = {{"c", p.c}, {"theta", to_json(p.theta)}, {"x", to_json(x)}, {"z", to_json(z)}, {"t", t}};
  return r;
}

enum class IntegralScheme { Exact, Trapezoid };

/// M_t = F(X_t, z) - int_0^t (c(theta - X_s) <> z) F(X_s, z) ds along one
/// Trotter path with grid eps. Between jumps X is the drift flow, along which
/// the integrand is d/ds F(X_s, z), so the exact segment integral is
/// F(end of segment) - F(start of segment).
inline DualityValue martingale_value(const ImubParams& p, const BoundaryPoint& x0, const BoundaryPoint& z, double t,
                                     double eps, Stream& rng, IntegralScheme scheme = IntegralScheme::Exact,
                                     int substeps = 16) {
  const QuadrantPoint zq = z.to_quadrant();
  const auto integrand = [&](const QuadrantPoint& y) {
    return kernel_F(y, zq) * lozenge(p.c * (p.theta.x1 - y.x1), p.c * (p.theta.x2 - y.x2), zq.x1, zq.x2);
  };
  const auto segment = [&](const QuadrantPoint& start, double len) -> std::pair<QuadrantPoint, DualityValue> {
    const QuadrantPoint end = kernel_argument(p, start, len);
    if (scheme == IntegralScheme::Exact) return {end, kernel_F(end, zq) - kernel_F(start, zq)};
    const double h = len / substeps;
    DualityValue acc = 0.5 * (integrand(start) + integrand(end));
    for (int j = 1; j < substeps; ++j) acc += integrand(kernel_argument(p, start, j * h));
    return {end, acc * h};
  };

  if (t == 0.0) return kernel_F(x0.to_quadrant(), zq);
  const auto full = static_cast<std::uint64_t>(std::floor(t / eps * (1.0 + 1e-12)));
  QuadrantPoint x = x0.to_quadrant();
  DualityValue integral = 0.0;
  for (std::uint64_t k = 0; k < full; ++k) {
    const auto [pre_jump, piece] = segment(x, eps);
    integral += piece;
    x = q_sample(pre_jump, rng).to_quadrant();
  }
  const double rest = t - static_cast<double>(full) * eps;
  if (rest > 1e-12 * t) {
    const auto [end, piece] = segment(x, rest);
    integral += piece;
    x = end;
  }
  return kernel_F(x, zq) - integral;
}

/// Tests E[M_t] = F(x0, z) by Monte Carlo over Trotter paths.
inline EstimateReport martingale_residual(const ImubParams& p, const BoundaryPoint& x0, const BoundaryPoint& z,
                                          double t, double eps, std::uint64_t n, std::uint64_t seed = 0,
                                          int workers = 1, IntegralScheme scheme = IntegralScheme::Exact,
                                          double sigmas = 4.0) {
  if (!(eps > 0.0) || (t > 0.0 && eps > t)) throw DomainError("martingale residual needs 0 < eps <= t");
  const DualityValue ref = kernel_F(x0, z);
  auto r = mc_estimate(
      [&](Stream& rng, std::uint64_t) { return martingale_value(p, x0, z, t, eps, rng, scheme); }, n, ref, sigmas,
      seed, workers, "martingale_residual");
  r.params = {{"c", p.c},          {"theta", to_json(p.theta)}, {"x0", to_json(x0)},
              {"z", to_json(z)},   {"t", t},                    {"eps", eps},
              {"integral", scheme == IntegralScheme::Exact ? "exact-segment" : "trapezoid"}};
  return r;
}

struct SweepOptions {
  SdeScheme scheme = SdeScheme::SplitCir;
  /// Step is min(max_step, step_scale / gamma).
  double max_step = 1e-3;
  double step_scale = 0.1;
  double threshold = 0.02;
};

inline double sweep_step(double gamma, const SweepOptions& o) {
  return gamma > 0.0 ? std::min(o.max_step, o.step_scale / gamma) : o.max_step;
}

/// Marginals of Y^gamma at time t from a boundary start, one path per index.
inline std::vector<QuadrantPoint> sweep_marginals(const ImubParams& p, const BoundaryPoint& x0, double t, double gamma,
                                                  std::uint64_t n, std::uint64_t seed, int workers,
                                                  const SweepOptions& o = {}) {
  SdeConfig base;
  base.gamma = gamma;
  base.c = p.c;
  base.theta = p.theta;
  base.step = sweep_step(gamma, o);
  base.seed = seed;
  base.scheme = o.scheme;
  return parallel_map<QuadrantPoint>(n, workers, [&](std::size_t i) {
    SdeConfig cfg = base;
    cfg.path_index = i;
    return simulate_Y(cfg, x0.to_quadrant(), {t}).states[0];
  });
}

/// KS distance between the signed-line projection w = y1 - y2 of finite-rate
/// samples and the exact law of X_t from x0.
inline KsReport sweep_ks(const ImubParams& p, const BoundaryPoint& x0, double t, const std::vector<QuadrantPoint>& ys,
                         double threshold) {
  std::vector<double> w;
  w.reserve(ys.size());
  for (const auto& y : ys) w.push_back(signed_line(y));
  const QMeasureParams q(kernel_argument(p, x0.to_quadrant(), t));
  if (q.degenerate()) {
    // Point mass: sup |F_n - F| is the larger of the mass strictly below and
    // strictly above the atom, up to rounding between flow and closed form.
    const double w0 = q.atom().signed_coordinate();
    const double tol = 1e-9 * std::max(1.0, std::abs(w0));
    const double n = static_cast<double>(w.size());
    const auto below = std::count_if(w.begin(), w.end(), [=](double v) { return v < w0 - tol; });
    const auto above = std::count_if(w.begin(), w.end(), [=](double v) { return v > w0 + tol; });
    KsReport r;
    r.check = "convergence_sweep";
    r.n = w.size();
    r.statistic = static_cast<double>(std::max(below, above)) / n;
    r.threshold = threshold;
    r.verdict = *r.statistic <= threshold ? Verdict::Pass : Verdict::Fail;
    return r;
  }
  return ks_report("convergence_sweep", std::move(w), [&](double v) { return q_signed_cdf(q, v); }, threshold);
}

inline json sweep_params(const ImubParams& p, const BoundaryPoint& x0, double t, double gamma,
                         const SweepOptions& o) {
  return {{"gamma", gamma},
          {"c", p.c},
          {"theta", to_json(p.theta)},
          {"x0", to_json(x0)},
          {"t", t},
          {"step", sweep_step(gamma, o)},
          {"scheme", scheme_name(o.scheme)},
          {"projection", "w = y1 - y2"}};
}

/// One KS report per gamma. Starts are on E; an interior start would need
/// the limit law with an initial jump, which this sweep does not offer.
inline std::vector<KsReport> convergence_sweep(const ImubParams& p, const BoundaryPoint& x0, double t,
                                               const std::vector<double>& gammas, std::uint64_t n,
                                               std::uint64_t seed = 0, int workers = 1,
                                               const SweepOptions& o = {}) {
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    if (!(gammas[i] > gammas[i - 1])) throw DomainError("gammas must be increasing");
  }
  std::vector<KsReport> out;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    Stopwatch clock;
    const std::uint64_t s = derive_key(seed, g, 0x7377U);
    auto r = sweep_ks(p, x0, t, sweep_marginals(p, x0, t, gammas[g], n, s, workers, o), o.threshold);
    r.params = sweep_params(p, x0, t, gammas[g], o);
    r.seed = s;
    r.wall_time_ms = clock.ms();
    out.push_back(std::move(r));
  }
  return out;
}

/// True when each statistic exceeds its predecessor by at most
/// `slack_factor` times the KS noise floor 1.36 / sqrt(n).
inline bool sweep_nonincreasing(const std::vector<KsReport>& reports, double slack_factor = 2.0) {
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double floor = stats::ks_critical(0.05) / std::sqrt(static_cast<double>(reports[i].n));
    if (*reports[i].statistic > *reports[i - 1].statistic + slack_factor * floor) return false;
  }
  return true;
}

}  // namespace imub
