#pragma once

// The infinite-rate process X^{c,theta} on E. Its transition kernel is
//   p_t(x, .) = Q_{e^{-ct} x + (1 - e^{-ct}) theta},
// so exact sampling is one harmonic-measure draw per time step.

#include <cmath>
#include <cstdint>
#include <vector>

#include "imub/errors.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/path_sample.hpp"
#include "imub/random.hpp"
#include "imub/types.hpp"

namespace imub {

struct ImubParams {
  double c = 0.0;
  QuadrantPoint theta;

  ImubParams() = default;
  ImubParams(double c_, const QuadrantPoint& theta_) : c(c_), theta(theta_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be finite and nonnegative");
  }
};

/// e^{-ct} x + (1 - e^{-ct}) theta.
inline QuadrantPoint kernel_argument(const ImubParams& p, const QuadrantPoint& x, double t) {
  const double keep = std::exp(-p.c * t);
  const double moved = -std::expm1(-p.c * t);
  return {keep * x.x1 + moved * p.theta.x1, keep * x.x2 + moved * p.theta.x2};
}

inline BoundaryPoint transition_sample(const ImubParams& p, const BoundaryPoint& x, double t, Stream& rng) {
  if (!(t >= 0.0)) throw DomainError("transition time must be nonnegative");
  if (t == 0.0) return x;
  return q_sample(kernel_argument(p, x.to_quadrant(), t), rng);
}

/// Chains exact transitions over the gaps of `times`; the path sits at x0 at
/// time 0.
inline PathSample path_sample(const ImubParams& p, const BoundaryPoint& x0, const std::vector<double>& times,
                              Stream& rng) {
  require_increasing_times(times);
  PathSample out;
  out.provenance.scheme = "exact-kernel";
  BoundaryPoint x = x0;
  double now = 0.0;
  for (double t : times) {
    x = transition_sample(p, x, t - now, rng);
    now = t;
    out.push(t, x);
  }
  return out;
}

struct TrotterConfig {
  double epsilon = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  [[nodiscard]] std::uint64_t steps() const {
    if (!(epsilon > 0.0) || !(epsilon <= horizon)) throw DomainError("Trotter grid needs 0 < epsilon <= horizon");
    return static_cast<std::uint64_t>(std::llround(horizon / epsilon));
  }
};

/// Post-jump states X_{k eps}, k = 0..steps. An interior x0 starts with a
/// jump drawn from Q_{x0}.
inline std::vector<BoundaryPoint> trotter_grid(const ImubParams& p, const QuadrantPoint& x0, double epsilon,
                                               std::uint64_t steps, Stream& rng) {
  std::vector<BoundaryPoint> grid;
  grid.reserve(steps + 1);
  grid.push_back(q_sample(x0, rng));
  for (std::uint64_t k = 0; k < steps; ++k) {
    grid.push_back(q_sample(kernel_argument(p, grid.back().to_quadrant(), epsilon), rng));
  }
  return grid;
}

/// Trotter path recorded at `record_times`. Between grid points the state is
/// the drift flow from the last jump, which leaves E when theta is interior.
inline PathSample trotter_path(const ImubParams& p, const QuadrantPoint& x0, const TrotterConfig& cfg,
                               const std::vector<double>& record_times, Stream& rng) {
  require_increasing_times(record_times);
  const std::uint64_t steps = cfg.steps();
  if (!record_times.empty() && record_times.back() > cfg.horizon * (1.0 + 1e-12)) {
    throw DomainError("record times must lie in [0, horizon]");
  }
  const auto grid = trotter_grid(p, x0, cfg.epsilon, steps, rng);
  PathSample out;
  out.provenance = {"trotter", cfg.epsilon, cfg.seed, cfg.path_index, !x0.on_boundary()};
  for (double t : record_times) {
    const double pos = t / cfg.epsilon;
    const auto nearest = static_cast<std::uint64_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(nearest)) <= 1e-9 * std::max(1.0, pos)) {
      out.push(t, grid[std::min(nearest, steps)]);
      continue;
    }
    const auto k = static_cast<std::uint64_t>(std::floor(pos));
    const double since = t - static_cast<double>(k) * cfg.epsilon;
    out.push(t, kernel_argument(p, grid[k].to_quadrant(), since));
  }
  return out;
}

inline PathSample trotter_path(const ImubParams& p, const QuadrantPoint& x0, const TrotterConfig& cfg,
                               const std::vector<double>& record_times) {
  Stream rng(cfg.seed, cfg.path_index);
  return trotter_path(p, x0, cfg, record_times, rng);
}

}  // namespace imub
