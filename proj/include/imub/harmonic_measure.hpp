#pragma once

// Harmonic measure Q_(u,v) of planar Brownian motion started at (u,v) and
// stopped on leaving the open quadrant, and the jump measure nu = nu_(1,0).
//
// For u, v > 0 the axis-1 density is
//
//   q1(m) = (4/pi) u v m / (4 u^2 v^2 + (m^2 + v^2 - u^2)^2),
//
// and the axis-2 density is the same with u and v exchanged. Substituting
// s = m^2 gives the antiderivative (1/pi) atan((m^2 + v^2 - u^2) / (2uv)),
// which yields the closed-form CDF and quantile used by the sampler. When
// u = 0 or v = 0 the measure is the atom at (u,v).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "imub/errors.hpp"
#include "imub/quadrature.hpp"
#include "imub/random.hpp"
#include "imub/types.hpp"

namespace imub {

struct QMeasureParams {
  double u = 0.0;
  double v = 0.0;

  QMeasureParams() = default;
  QMeasureParams(double u_, double v_) : u(u_), v(v_) {
    if (!(u >= 0.0) || !(v >= 0.0)) throw DomainError("Q parameters must be nonnegative");
  }
  explicit QMeasureParams(const QuadrantPoint& p) : u(p.x1), v(p.x2) {}

  [[nodiscard]] bool degenerate() const { return u == 0.0 || v == 0.0; }
  [[nodiscard]] QuadrantPoint point() const { return {u, v}; }
  /// The atom of Q when degenerate().
  [[nodiscard]] BoundaryPoint atom() const { return BoundaryPoint::from_quadrant(point()); }
};

struct BranchMass {
  double mass1;
  double mass2;
};

namespace detail {

inline void require_interior(const QMeasureParams& p, const char* what) {
  if (p.degenerate()) {
    throw DegenerateStart(std::string(what) +
                          ": Q is a point mass when the start lies on E; use q_sample or the atom");
  }
}

/// Axis-1 density; axis 2 is obtained by exchanging u and v.
inline double axis_density(double u, double v, double m) {
  const double uv = u * v;
  const double shifted = m * m + v * v - u * u;
  return (4.0 / std::numbers::pi) * uv * m / (4.0 * uv * uv + shifted * shifted);
}

/// atan((u^2 - v^2) / (2uv)), the phase shared by CDF and quantile.
inline double axis_phase(double u, double v) {
  return std::atan2((u - v) * (u + v), 2.0 * u * v);
}

/// Within-branch CDF on axis 1 from 0 to m.
inline double axis_cdf(double u, double v, double m) {
  if (!(m > 0.0)) return 0.0;
  if (std::isinf(m)) return 0.5 + axis_phase(u, v) / std::numbers::pi;
  const double num = m * m + (v - u) * (v + u);
  return (std::atan2(num, 2.0 * u * v) + axis_phase(u, v)) / std::numbers::pi;
}

/// Inverse of axis_cdf for a CDF level in [0, branch mass).
inline double axis_quantile(double u, double v, double level) {
  const double angle = std::numbers::pi * level - axis_phase(u, v);
  if (angle >= 0.5 * std::numbers::pi) return std::numeric_limits<double>::infinity();
  const double sq = (u - v) * (u + v) + 2.0 * u * v * std::tan(angle);
  return std::sqrt(std::max(sq, 0.0));
}

/// Breakpoints bracketing the density peak on one axis, for quadrature.
inline std::vector<double> axis_breakpoints(double u, double v) {
  const double peak = std::sqrt(std::max((u - v) * (u + v), 0.0));
  const double scale = std::max(peak, std::sqrt(u * v));
  const double width = std::max(u * v / std::max(scale, 1e-300), 1e-300);
  std::vector<double> pts{0.0};
  for (double k : {-30.0, -3.0, -1.0, 0.0, 1.0, 3.0, 30.0}) {
    const double p = peak + k * width;
    if (p > pts.back() * (1.0 + 1e-12) && p > 0.0) pts.push_back(p);
  }
  if (pts.back() < 10.0 * scale) pts.push_back(10.0 * scale);
  pts.push_back(std::numeric_limits<double>::infinity());
  return pts;
}

}  // namespace detail

/// Density of Q_(u,v) at a boundary point (density 0 at the Origin).
inline double q_density(const QMeasureParams& p, const BoundaryPoint& point) {
  detail::require_interior(p, "q_density");
  switch (point.branch()) {
    case Branch::Axis1: return detail::axis_density(p.u, p.v, point.magnitude());
    case Branch::Axis2: return detail::axis_density(p.v, p.u, point.magnitude());
    case Branch::Origin: break;
  }
  return 0.0;
}

inline BranchMass q_branch_mass(const QMeasureParams& p) {
  detail::require_interior(p, "q_branch_mass");
  const double m1 = 0.5 + detail::axis_phase(p.u, p.v) / std::numbers::pi;
  return {m1, 1.0 - m1};
}

/// Within-branch CDF: Q(branch of `point`, magnitude in [0, |point|]).
inline double q_cdf(const QMeasureParams& p, const BoundaryPoint& point) {
  detail::require_interior(p, "q_cdf");
  switch (point.branch()) {
    case Branch::Axis1: return detail::axis_cdf(p.u, p.v, point.magnitude());
    case Branch::Axis2: return detail::axis_cdf(p.v, p.u, point.magnitude());
    case Branch::Origin: break;
  }
  return 0.0;
}

/// Magnitude at within-branch CDF level `level` on `branch`.
inline double q_quantile(const QMeasureParams& p, Branch branch, double level) {
  detail::require_interior(p, "q_quantile");
  if (branch == Branch::Axis2) return detail::axis_quantile(p.v, p.u, level);
  return detail::axis_quantile(p.u, p.v, level);
}

/// Exact CDF of the signed coordinate w = x1 - x2 under Q_(u,v).
inline double q_signed_cdf(const QMeasureParams& p, double w) {
  if (p.degenerate()) return w >= p.atom().signed_coordinate() ? 1.0 : 0.0;
  const auto mass = q_branch_mass(p);
  if (w >= 0.0) return mass.mass2 + detail::axis_cdf(p.u, p.v, w);
  return mass.mass2 - detail::axis_cdf(p.v, p.u, -w);
}

/// Draws from Q_(u,v) by inversion. Consumes exactly two uniforms for an
/// interior start (branch, then magnitude) and none for a start on E.
inline BoundaryPoint q_sample(const QMeasureParams& p, Stream& rng) {
  if (p.degenerate()) return p.atom();
  const double phase = detail::axis_phase(p.u, p.v);
  const double mass1 = 0.5 + phase / std::numbers::pi;
  const double pick = rng.uniform();
  const double level = rng.uniform();
  if (pick < mass1) {
    return BoundaryPoint::axis1(detail::axis_quantile(p.u, p.v, level * mass1));
  }
  return BoundaryPoint::axis2(detail::axis_quantile(p.v, p.u, level * (1.0 - mass1)));
}

inline BoundaryPoint q_sample(const QuadrantPoint& x, Stream& rng) {
  return q_sample(QMeasureParams(x), rng);
}

/// Integral of f over E against Q_(u,v); f maps BoundaryPoint to a real or
/// complex value. Atoms are evaluated directly.
template <class F>
auto q_expect(const QMeasureParams& p, const F& f, const quad::Options& opts = {})
    -> quad::Result<std::decay_t<std::invoke_result_t<const F&, BoundaryPoint>>> {
  using T = std::decay_t<std::invoke_result_t<const F&, BoundaryPoint>>;
  if (p.degenerate()) return {f(p.atom()), 0.0, 0, true};
  quad::Options half = opts;
  half.abs_tol = 0.5 * opts.abs_tol;
  const auto on1 = [&](double m) -> T {
    return f(BoundaryPoint::axis1(m)) * detail::axis_density(p.u, p.v, m);
  };
  const auto on2 = [&](double m) -> T {
    return f(BoundaryPoint::axis2(m)) * detail::axis_density(p.v, p.u, m);
  };
  const auto pts1 = detail::axis_breakpoints(p.u, p.v);
  const auto pts2 = detail::axis_breakpoints(p.v, p.u);
  const auto r1 = quad::integrate(on1, std::span<const double>(pts1), half);
  const auto r2 = quad::integrate(on2, std::span<const double>(pts2), half);
  return {r1.value + r2.value, r1.error + r2.error, r1.intervals + r2.intervals,
          r1.converged && r2.converged};
}

/// Upper bound on the i-th p-moment of Q_(u,v), 1 <= p < 2.
inline double q_moment_bound(const QMeasureParams& p, double exponent) {
  return std::pow(std::abs(p.u * p.u - p.v * p.v), exponent / 2.0) +
         std::pow(2.0, exponent / 2.0) * std::pow(p.u * p.v, exponent / 2.0) /
             std::cos(exponent * std::numbers::pi / 4.0);
}

/// Bound on E[tau^(p/2)] for the quadrant exit time from (u,v).
inline double exit_time_moment_bound(const QMeasureParams& p, double exponent) {
  return 2.0 / (2.0 - exponent) * std::pow(2.0 / std::numbers::pi, exponent / 2.0) *
         std::pow(p.u * p.v, exponent / 2.0);
}

/// Integral of x_i^p over Q_(u,v) by adaptive quadrature, 1 <= p < 2.
///
/// Beyond the last breakpoint M the axis density decays like m^-3, so the
/// tail is integrated in s = m^(p-2), where the integrand is bounded.
inline quad::Result<double> q_moment_quad(const QMeasureParams& p, int coordinate, double exponent,
                                          const quad::Options& opts = {}) {
  if (!(exponent >= 1.0 && exponent < 2.0)) {
    throw InvalidExponent("moment exponent must lie in [1, 2); the second moment is infinite");
  }
  if (coordinate != 1 && coordinate != 2) throw DomainError("coordinate must be 1 or 2");
  if (p.degenerate()) {
    const double xi = coordinate == 1 ? p.u : p.v;
    return {std::pow(xi, exponent), 0.0, 0, true};
  }
  const double a = coordinate == 1 ? p.u : p.v;
  const double b = coordinate == 1 ? p.v : p.u;
  auto pts = detail::axis_breakpoints(a, b);
  pts.pop_back();  // drop infinity; the tail is handled below
  const double cut = std::max(pts.back(), 1.0);
  if (pts.back() < cut) pts.push_back(cut);

  quad::Options body = opts;
  body.abs_tol = 0.5 * opts.abs_tol;
  body.tail_start = std::numeric_limits<double>::infinity();
  const auto inner = [&](double m) { return std::pow(m, exponent) * detail::axis_density(a, b, m); };
  const auto r1 = quad::integrate(inner, std::span<const double>(pts), body);

  const double gap = 2.0 - exponent;
  const double s_max = std::pow(cut, -gap);
  const auto tail = [&](double s) {
    const double m = std::pow(s, -1.0 / gap);
    // dm = m / (gap * s) ds
    return std::pow(m, exponent) * detail::axis_density(a, b, m) * m / (gap * s);
  };
  const auto r2 = quad::integrate(tail, 0.0, s_max, body);
  return {r1.value + r2.value, r1.error + r2.error, r1.intervals + r2.intervals,
          r1.converged && r2.converged};
}

inline double q_moment(const QMeasureParams& p, int coordinate, double exponent) {
  const auto r = q_moment_quad(p, coordinate, exponent);
  if (!r.converged) throw QuadratureFailure("q_moment quadrature did not converge");
  return r.value;
}

// --- jump measure nu = nu_(1,0) -----------------------------------------

inline double nu_density(const BoundaryPoint& point) {
  constexpr double k = 4.0 / std::numbers::pi;
  const double m = point.magnitude();
  switch (point.branch()) {
    case Branch::Axis1: {
      if (m == 1.0) throw SingularPoint("nu density is infinite at axis1 magnitude 1");
      const double d = (1.0 - m) * (1.0 + m);
      return k * m / (d * d);
    }
    case Branch::Axis2: {
      const double d = 1.0 + m * m;
      return k * m / (d * d);
    }
    case Branch::Origin: break;
  }
  return 0.0;
}

/// Integrand for nu_integrate: g on E together with g(1,0) implied by
/// `value`, the axis-1 slope at (1,0), and optionally the axis-1 curvature
/// there. The integral computed is
///
///   int [g(y) - g(1,0) - (y1 - 1) g'(1,0)] nu(dy).
template <class T>
struct NuIntegrand {
  std::function<T(const BoundaryPoint&)> value;
  T slope_at_one{};
  std::optional<T> curvature_at_one;
};

struct NuOptions {
  double abs_tol = 1e-9;
  /// Half-width of the excised strip around the singular point.
  double strip = 1e-6;
  int max_intervals = 4000;
};

template <class T>
quad::Result<T> nu_integrate(const NuIntegrand<T>& g, const NuOptions& opts = {}) {
  using quad::detail::magnitude;
  const T g1 = g.value(BoundaryPoint::axis1(1.0));
  const T s1 = g.slope_at_one;
  const auto comp1 = [&](double u) -> T {
    return g.value(BoundaryPoint::axis1(u)) - g1 - (u - 1.0) * s1;
  };
  const auto comp2 = [&](double v) -> T { return g.value(BoundaryPoint::axis2(v)) - g1 + s1; };

  // Boundedness of comp1 / (u-1)^2 near the singular point.
  const double scale = 1.0 + magnitude(g1) + magnitude(s1);
  const auto ratio = [&](double d) {
    return std::max(magnitude(comp1(1.0 + d)), magnitude(comp1(1.0 - d))) / (d * d);
  };
  // A wrong slope makes the ratio grow like 1/d; allow rounding slack.
  if (ratio(1e-3) > 3.0 * ratio(1e-2) + 10.0 * scale) {
    throw NonIntegrable("compensated integrand is not O((u-1)^2) at the singular point; "
                        "check the supplied slope");
  }
  // At most linear growth at infinity on both axes.
  for (const auto& side : {std::function<T(double)>(comp1), std::function<T(double)>(comp2)}) {
    const double far = magnitude(side(1e6));
    const double near = magnitude(side(1e5));
    if (far > 30.0 * near + scale) {
      throw NonIntegrable("integrand grows faster than linearly at infinity");
    }
  }

  T curvature;
  if (g.curvature_at_one) {
    curvature = *g.curvature_at_one;
  } else {
    constexpr double k = 1e-4;
    curvature = (g.value(BoundaryPoint::axis1(1.0 + k)) - 2.0 * g1 +
                 g.value(BoundaryPoint::axis1(1.0 - k))) /
                (k * k);
  }

  quad::Options q;
  q.abs_tol = opts.abs_tol / 3.0;
  q.max_intervals = opts.max_intervals;
  const double d = opts.strip;
  const auto f1 = [&](double u) -> T { return comp1(u) * nu_density(BoundaryPoint::axis1(u)); };
  const auto f2 = [&](double v) -> T { return comp2(v) * nu_density(BoundaryPoint::axis2(v)); };
  const auto below = quad::integrate(f1, {0.0, 0.5, 1.0 - d}, q);
  const auto above = quad::integrate(f1, {1.0 + d, 1.5, 3.0, std::numeric_limits<double>::infinity()}, q);
  const auto axis2 = quad::integrate(f2, {0.0, 1.0, 3.0, std::numeric_limits<double>::infinity()}, q);
  // Strip: comp1 ~ curvature (u-1)^2 / 2 and (u-1)^2 nu1(u) -> 1/pi at u = 1.
  const T strip = curvature * (d / std::numbers::pi);
  return {below.value + above.value + axis2.value + strip,
          below.error + above.error + axis2.error,
          below.intervals + above.intervals + axis2.intervals,
          below.converged && above.converged && axis2.converged};
}

}  // namespace imub
