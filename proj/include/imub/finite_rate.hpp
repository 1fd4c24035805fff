#pragma once

// Finite-rate mutually catalytic branching
//
//   dY_i = c (theta_i - Y_i) dt + sqrt(gamma Y_1 Y_2) dW_i,
//
// its driftless version Z, and the deterministic dual flow.
//
// Two integrators are provided. EulerTruncated is explicit Euler-Maruyama with
// full truncation: the diffusion uses max(Y, 0) and the new state is clamped
// to the quadrant. SplitCir freezes the larger coordinate L over a step, which
// turns the smaller one into a square-root diffusion
//
//   dY_m = c (theta_m - Y_m) dt + sqrt(gamma L) sqrt(Y_m) dW_m
//
// with an exact noncentral chi-square transition; the larger coordinate then
// takes its drift flow plus Gaussian noise of variance gamma L int Y_m, the
// integral taken by the trapezoid rule. For large gamma the process lives in
// a boundary layer of width O(1/gamma), where the clamp in Euler adds a bias
// that does not shrink with the step; the split scheme does not clamp the
// small coordinate at all.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "imub/errors.hpp"
#include "imub/path_sample.hpp"
#include "imub/random.hpp"
#include "imub/types.hpp"

namespace imub {

enum class SdeScheme { EulerTruncated, SplitCir };

inline const char* scheme_name(SdeScheme s) {
  return s == SdeScheme::SplitCir ? "split-cir" : "euler-truncated";
}

struct SdeConfig {
  double gamma = 1.0;
  double c = 0.0;
  QuadrantPoint theta;
  double step = 1e-4;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  SdeScheme scheme = SdeScheme::EulerTruncated;
  double magnitude_cap = 1e12;
  /// Snap to E and freeze once min < tol and max > ratio * min (Z only).
  bool absorb = false;
  double absorb_tol = 1e-10;
  double absorb_ratio = 1e6;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and nonnegative");
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be finite and nonnegative");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("step must be positive");
  }
};

namespace detail {

/// Poisson variate; inversion for small means, the library sampler otherwise.
inline std::int64_t poisson(double mean, Stream& rng) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = rng.uniform();
    std::int64_t k = 0;
    while (u > cdf && k < 400) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

/// Gamma(shape, 1) by Marsaglia-Tsang, boosted for shape < 1.
inline double gamma_variate(double shape, Stream& rng) {
  if (shape < 1.0) {
    const double g = gamma_variate(shape + 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

/// Noncentral chi-square with `dof` >= 0 degrees of freedom (dof = 0 has an
/// atom at zero) and noncentrality `lambda`, as a Poisson mixture of gammas.
inline double noncentral_chi2(double dof, double lambda, Stream& rng) {
  if (lambda > 1e8) {
    // Far from the boundary the law is Gaussian to high accuracy.
    return std::max(0.0, dof + lambda + std::sqrt(2.0 * (dof + 2.0 * lambda)) * rng.normal());
  }
  const double shape = 0.5 * dof + static_cast<double>(poisson(0.5 * lambda, rng));
  if (shape <= 0.0) return 0.0;
  return 2.0 * gamma_variate(shape, rng);
}

/// Exact transition over dt of dX = k (mu - X) dt + s sqrt(X) dW, s^2 = var.
inline double cir_step(double x, double k, double mu, double var, double dt, Stream& rng) {
  const double decay = std::exp(-k * dt);
  if (var <= 0.0) return mu + (x - mu) * decay;
  // (1 - e^{-k dt}) / k, continuous at k = 0.
  const double span = k > 0.0 ? -std::expm1(-k * dt) / k : dt;
  const double scale = 0.25 * var * span;
  const double dof = 4.0 * k * mu / var;
  const double lambda = x * decay / scale;
  return scale * noncentral_chi2(dof, lambda, rng);
}

struct SdeState {
  double y1;
  double y2;
};

inline SdeState euler_step(const SdeConfig& cfg, SdeState s, double dt, Stream& rng) {
  const double diff = std::sqrt(cfg.gamma * std::max(s.y1, 0.0) * std::max(s.y2, 0.0) * dt);
  const double n1 = rng.normal();
  const double n2 = rng.normal();
  const double a = s.y1 + cfg.c * (cfg.theta.x1 - s.y1) * dt + diff * n1;
  const double b = s.y2 + cfg.c * (cfg.theta.x2 - s.y2) * dt + diff * n2;
  return {std::max(a, 0.0), std::max(b, 0.0)};
}

inline SdeState split_step(const SdeConfig& cfg, SdeState s, double dt, Stream& rng) {
  const bool first_minor = s.y1 <= s.y2;
  const double minor = first_minor ? s.y1 : s.y2;
  const double major = first_minor ? s.y2 : s.y1;
  const double theta_minor = first_minor ? cfg.theta.x1 : cfg.theta.x2;
  const double theta_major = first_minor ? cfg.theta.x2 : cfg.theta.x1;

  const double var = cfg.gamma * major;
  const double next_minor = cir_step(minor, cfg.c, theta_minor, var, dt, rng);
  const double noise_var = var * dt * 0.5 * (minor + next_minor);
  const double drift_major = theta_major + (major - theta_major) * std::exp(-cfg.c * dt);
  const double next_major = std::max(0.0, drift_major + std::sqrt(noise_var) * rng.normal());
  return first_minor ? SdeState{next_minor, next_major} : SdeState{next_major, next_minor};
}

}  // namespace detail

/// Simulates Y from y0 and records it at `times` (strictly increasing). The
/// step is shortened where needed so that every requested time is hit.
inline PathSample simulate_Y(const SdeConfig& cfg, const QuadrantPoint& y0, const std::vector<double>& times) {
  cfg.validate();
  require_increasing_times(times);
  PathSample out;
  out.provenance = {scheme_name(cfg.scheme), cfg.step, cfg.seed, cfg.path_index, false};
  Stream rng(cfg.seed, cfg.path_index);
  detail::SdeState s{y0.x1, y0.x2};
  double t = 0.0;
  bool frozen = false;

  const auto absorb = [&] {
    if (!cfg.absorb) return;
    const double lo = std::min(s.y1, s.y2);
    const double hi = std::max(s.y1, s.y2);
    if (lo == 0.0 || (lo < cfg.absorb_tol && hi > cfg.absorb_ratio * lo)) {
      if (s.y1 <= s.y2) s.y1 = 0.0; else s.y2 = 0.0;
      frozen = true;
    }
  };
  absorb();

  for (double target : times) {
    while (t < target && !frozen) {
      double dt = cfg.step;
      // Land exactly on the target instead of leaving a sliver step.
      if (t + dt >= target * (1.0 - 1e-12)) dt = target - t;
      s = cfg.scheme == SdeScheme::SplitCir ? detail::split_step(cfg, s, dt, rng)
                                            : detail::euler_step(cfg, s, dt, rng);
      t = (dt == target - t) ? target : t + dt;
      if (!(s.y1 <= cfg.magnitude_cap) || !(s.y2 <= cfg.magnitude_cap)) {
        throw NumericalBlowup("state exceeded the magnitude cap at t = " + std::to_string(t) +
                              "; reduce the step for this gamma");
      }
      absorb();
    }
    if (frozen) t = target;
    out.push(target, QuadrantPoint{s.y1, s.y2});
  }
  return out;
}

/// Driftless Z with absorption on E. Frozen states are recorded exactly on E.
inline PathSample simulate_Z(double gamma, const QuadrantPoint& z0, double step, std::uint64_t seed,
                             const std::vector<double>& times, std::uint64_t path_index = 0,
                             SdeScheme scheme = SdeScheme::EulerTruncated) {
  SdeConfig cfg;
  cfg.gamma = gamma;
  cfg.c = 0.0;
  cfg.step = step;
  cfg.seed = seed;
  cfg.path_index = path_index;
  cfg.scheme = scheme;
  cfg.absorb = true;
  auto out = simulate_Y(cfg, z0, times);
  out.provenance.scheme += "+absorb";
  return out;
}

/// Dual state (y(1), y(2)) with y(1) in E.
struct DualState {
  BoundaryPoint y1;
  QuadrantPoint y2;
  friend bool operator==(const DualState&, const DualState&) = default;
};

/// Closed-form dual flow (e^{-ct} y(1), (1 - e^{-ct}) y(1) + y(2)).
inline DualState dual_flow(const DualState& initial, double c, double t) {
  if (!(t >= 0.0)) throw DomainError("dual_flow needs t >= 0");
  if (!(c >= 0.0)) throw DomainError("dual_flow needs c >= 0");
  const double keep = std::exp(-c * t);
  const double moved = -std::expm1(-c * t);
  const QuadrantPoint a = initial.y1.to_quadrant();
  return {BoundaryPoint::on(initial.y1.branch(), keep * initial.y1.magnitude()),
          QuadrantPoint{moved * a.x1 + initial.y2.x1, moved * a.x2 + initial.y2.x2}};
}

}  // namespace imub
