#pragma once

// Planar Brownian motion on a fine grid t_k = k h, cone exits D_x, and the
// pathwise construction X_t = C(0,t) D_{x + Xi(0,t)}.
//
// The path is generated top-down as a Levy construction: values at multiples
// of a long span H = h 2^L come from summed Gaussian increments, and every
// dyadic midpoint below is a Brownian-bridge draw keyed by (block, level,
// index). Any grid value is therefore a pure function of (seed, index, k),
// independent of the order of queries. Exit searches descend only into
// intervals where the bridge could reach the boundary, so a path whose exit
// time is 1e6 steps or 1e10 steps costs about the same.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "imub/errors.hpp"
#include "imub/path_sample.hpp"
#include "imub/quadrature.hpp"
#include "imub/random.hpp"
#include "imub/types.hpp"

namespace imub {

struct Vec2 {
  double b1 = 0.0;
  double b2 = 0.0;
};

class BrownianPath {
 public:
  static constexpr double kDefaultStep = 1e-4;
  static constexpr std::uint64_t kDefaultBudget = 1'000'000'000;
  /// Top-level span is the smallest h 2^L at least this long, so paths with
  /// steps differing by a power of two share every common grid value.
  static constexpr double kMinSpan = 524288.0;
  /// A bridge interval is skipped when its crossing probability is below this.
  static constexpr double kSkipProbability = 1e-12;

  BrownianPath(double step, std::uint64_t seed, std::uint64_t index = 0,
               std::uint64_t budget = kDefaultBudget)
      : step_(step), seed_(seed), index_(index), budget_(budget), key_(split_key(derive_key(seed, index, 0x626dU))) {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("Brownian step must be positive");
    levels_ = 0;
    while (step_ * std::ldexp(1.0, levels_) < kMinSpan) ++levels_;
    if (levels_ > 62) throw DomainError("Brownian step too small");
    block_steps_ = std::uint64_t{1} << levels_;
    top_.push_back({});
  }

  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t index() const { return index_; }
  [[nodiscard]] std::uint64_t budget() const { return budget_; }
  [[nodiscard]] int levels() const { return levels_; }
  /// Gaussian pairs drawn so far (each node costs one).
  [[nodiscard]] std::uint64_t nodes_generated() const { return nodes_; }

  /// B at fine grid index k, i.e. time k h.
  Vec2 at(std::uint64_t k) {
    const std::uint64_t j = k / block_steps_;
    const std::uint64_t off = k % block_steps_;
    if (off == 0) return top(j);
    std::uint64_t lo = 0;
    std::uint64_t hi = block_steps_;
    Vec2 vlo = top(j);
    Vec2 vhi = top(j + 1);
    while (true) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      const Vec2 vm = midpoint(j, mid, hi - lo, vlo, vhi);
      if (mid == off) return vm;
      if (off < mid) {
        hi = mid;
        vhi = vm;
      } else {
        lo = mid;
        vlo = vm;
      }
    }
  }

  /// First grid index k >= from with x + B(k h) outside the open quadrant.
  std::uint64_t first_exit(const QuadrantPoint& x, std::uint64_t from = 0) {
    const Vec2 start = at(from);
    if (outside(x, start)) return from;
    for (std::uint64_t j = from / block_steps_;; ++j) {
      const std::uint64_t base = j * block_steps_;
      if (base > budget_) break;
      const auto hit = search(x, j, 0, block_steps_, top(j), top(j + 1), from - std::min(from, base));
      if (hit) {
        const std::uint64_t k = base + *hit;
        if (k > budget_) break;
        return k;
      }
    }
    throw StepBudgetExceeded("no cone exit within " + std::to_string(budget_) + " steps");
  }

 private:
  Vec2 top(std::uint64_t j) {
    const double scale = std::sqrt(step_ * static_cast<double>(block_steps_));
    while (top_.size() <= j) {
      const std::uint64_t i = top_.size() - 1;
      const auto [n1, n2] = gaussian_pair(i, 0, 0);
      const Vec2 prev = top_.back();
      top_.push_back({prev.b1 + scale * n1, prev.b2 + scale * n2});
    }
    return top_[j];
  }

  std::pair<double, double> gaussian_pair(std::uint64_t block, int level, std::uint64_t idx) {
    ++nodes_;
    const auto out = philox4x32({static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
                                 static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(level)},
                                key_);
    const std::uint64_t w0 = (std::uint64_t{out[1]} << 32) | out[0];
    const std::uint64_t w1 = (std::uint64_t{out[3]} << 32) | out[2];
    return box_muller(to_open_unit(w0), to_open_unit(w1));
  }

  /// Bridge value at offset `mid` of block j, given the interval of `len`
  /// steps around it and its endpoint values.
  Vec2 midpoint(std::uint64_t j, std::uint64_t mid, std::uint64_t len, const Vec2& lo, const Vec2& hi) {
    const int tz = std::countr_zero(mid);
    const int level = levels_ - tz;
    const auto [n1, n2] = gaussian_pair(j, level, mid >> tz);
    const double sd = std::sqrt(0.25 * step_ * static_cast<double>(len));
    return {0.5 * (lo.b1 + hi.b1) + sd * n1, 0.5 * (lo.b2 + hi.b2) + sd * n2};
  }

  static bool outside(const QuadrantPoint& x, const Vec2& b) {
    return !(x.x1 + b.b1 > 0.0) || !(x.x2 + b.b2 > 0.0);
  }

  /// First offset in (lo, hi] and beyond `from` at which x + B leaves the
  /// open quadrant. Every grid point in [from, lo] is known to be inside.
  std::optional<std::uint64_t> search(const QuadrantPoint& x, std::uint64_t j, std::uint64_t lo,
                                      std::uint64_t hi, const Vec2& vlo, const Vec2& vhi,
                                      std::uint64_t from) {
    if (hi <= from) return std::nullopt;
    if (j * block_steps_ + lo >= budget_) return hi;  // caller reports the budget
    if (hi - lo == 1) return outside(x, vhi) ? std::optional(hi) : std::nullopt;
    if (lo >= from && !outside(x, vhi)) {
      const double t = step_ * static_cast<double>(hi - lo);
      const double p1 = (x.x1 + vlo.b1) * (x.x1 + vhi.b1);
      const double p2 = (x.x2 + vlo.b2) * (x.x2 + vhi.b2);
      if (std::exp(-2.0 * p1 / t) + std::exp(-2.0 * p2 / t) < kSkipProbability) return std::nullopt;
    }
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const Vec2 vm = midpoint(j, mid, hi - lo, vlo, vhi);
    if (auto left = search(x, j, lo, mid, vlo, vm, from)) return left;
    return search(x, j, mid, hi, vm, vhi, from);
  }

  double step_;
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t budget_;
  std::array<std::uint32_t, 2> key_;
  int levels_ = 0;
  std::uint64_t block_steps_ = 0;
  std::vector<Vec2> top_;
  std::uint64_t nodes_ = 0;
};

struct ExitRecord {
  QuadrantPoint x;
  BoundaryPoint exit_point;
  double exit_time = 0.0;
  std::uint64_t exit_index = 0;
};

namespace detail {

inline ExitRecord exit_from(BrownianPath& path, const QuadrantPoint& x, std::uint64_t from) {
  const std::uint64_t k = path.first_exit(x, from);
  const Vec2 b = path.at(k);
  return {x, BoundaryPoint::project(x.x1 + b.b1, x.x2 + b.b2), static_cast<double>(k) * path.step(), k};
}

}  // namespace detail

/// D_x = B_{tau_x} + x, with the first outside grid point projected onto E.
inline ExitRecord cone_exit(BrownianPath& path, const QuadrantPoint& x) {
  return detail::exit_from(path, x, 0);
}

/// Exits of one path from a componentwise nondecreasing family of cones.
/// Each search resumes at the previous exit, which is exact: a larger cone
/// cannot be left before a smaller one.
inline std::vector<ExitRecord> d_process(BrownianPath& path, const std::vector<QuadrantPoint>& xs) {
  std::vector<ExitRecord> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    if (out.empty()) {
      out.push_back(cone_exit(path, x));
      continue;
    }
    const ExitRecord& prev = out.back();
    if (!dominated_by(prev.x, x)) throw DomainError("d_process cones must be nondecreasing");
    if (prev.x == x) {
      out.push_back(prev);
    } else {
      out.push_back(detail::exit_from(path, x, prev.exit_index));
    }
  }
  return out;
}

/// Time-dependent drift (c̄, θ̄) of the pathwise construction, with
///   C(s,t) = exp(-int_s^t c̄),   Xi(s,t) = int_s^t θ̄(r) / C(0,r) dr.
class DriftSchedule {
 public:
  using RateFn = std::function<double(double)>;
  using MeanFn = std::function<QuadrantPoint(double)>;

  DriftSchedule(RateFn cbar, MeanFn thetabar) : cbar_(std::move(cbar)), thetabar_(std::move(thetabar)) {}

  /// Constant parameters (c, θ), taken as θ̄ ≡ cθ so that
  /// C(0,t) = e^{-ct} and Xi(0,t) = (e^{ct} - 1) θ.
  static DriftSchedule constant(double c, const QuadrantPoint& theta) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ScheduleError("constant rate must be finite and nonnegative");
    DriftSchedule s([c](double) { return c; }, [c, theta](double) { return c * theta; });
    s.constant_ = true;
    s.c_ = c;
    s.theta_ = theta;
    return s;
  }

  [[nodiscard]] bool is_constant() const { return constant_; }

  [[nodiscard]] double C(double s, double t) const {
    if (constant_) return std::exp(-c_ * (t - s));
    if (t == s) return 1.0;
    const auto r = quad::integrate([this](double r) { return rate(r); }, s, t, tight());
    if (!r.converged) throw ScheduleError("integral of c̄ did not converge");
    return std::exp(-r.value);
  }

  [[nodiscard]] QuadrantPoint Xi(double s, double t) const {
    if (constant_) {
      const double a = std::expm1(c_ * t) - std::expm1(c_ * s);
      return {a * theta_.x1, a * theta_.x2};
    }
    if (t == s) return {};
    // Both coordinates ride in one complex-valued quadrature.
    const auto r = quad::integrate(
        [this](double r) {
          const QuadrantPoint m = mean(r);
          return std::complex<double>(m.x1, m.x2) / C(0.0, r);
        },
        s, t, tight());
    if (!r.converged) throw ScheduleError("integral of θ̄/C did not converge");
    return {std::max(r.value.real(), 0.0), std::max(r.value.imag(), 0.0)};
  }

 private:
  static quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-11;
    o.rel_tol = 1e-12;
    return o;
  }

  double rate(double r) const {
    double v = 0.0;
    try {
      v = cbar_(r);
    } catch (const std::exception& e) {
      throw ScheduleError(std::string("c̄ not evaluable: ") + e.what());
    }
    if (!(v >= 0.0) || !std::isfinite(v)) throw ScheduleError("c̄ must be finite and nonnegative");
    return v;
  }

  QuadrantPoint mean(double r) const {
    try {
      const QuadrantPoint m = thetabar_(r);
      if (!std::isfinite(m.x1) || !std::isfinite(m.x2)) throw ScheduleError("θ̄ is not finite");
      return m;
    } catch (const ScheduleError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScheduleError(std::string("θ̄ not evaluable: ") + e.what());
    }
  }

  RateFn cbar_;
  MeanFn thetabar_;
  bool constant_ = false;
  double c_ = 0.0;
  QuadrantPoint theta_;
};

/// X_t = C(0,t) D_{x0 + Xi(0,t)} at each requested time, all from one path.
inline PathSample strong_construct(BrownianPath& path, const BoundaryPoint& x0, const DriftSchedule& schedule,
                                   const std::vector<double>& times) {
  require_increasing_times(times);
  PathSample out;
  out.provenance = {"strong", path.step(), path.seed(), path.index(), false};
  std::optional<ExitRecord> prev;
  for (double t : times) {
    const QuadrantPoint cone = x0.to_quadrant() + schedule.Xi(0.0, t);
    ExitRecord rec;
    if (!prev) {
      rec = cone_exit(path, cone);
    } else if (prev->x == cone) {
      rec = *prev;
    } else {
      // Xi is nondecreasing; rounding in a general schedule may still produce
      // a cone that is not componentwise larger, so fall back to a fresh search.
      rec = dominated_by(prev->x, cone) ? detail::exit_from(path, cone, prev->exit_index) : cone_exit(path, cone);
    }
    prev = rec;
    const double scale = schedule.C(0.0, t);
    out.push(t, scale * rec.exit_point.to_quadrant());
  }
  return out;
}

/// B sampled at the given times (rounded to the grid), for plotting.
inline std::vector<Vec2> brownian_trace(BrownianPath& path, const std::vector<double>& times) {
  std::vector<Vec2> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(path.at(static_cast<std::uint64_t>(std::llround(t / path.step()))));
  return out;
}

}  // namespace imub
