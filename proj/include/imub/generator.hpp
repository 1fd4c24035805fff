#pragma once

// Generator of X^{c,theta} on test functions f: E -> C,
//
//   G2 f(x) = d2 f(x)                                              if x1 = 0,
//   G2 f(x) = (1/x1) int [f(x1 y) - f(x) - x1 (y1 - 1) d1 f(x)] nu(dy)  if x1 > 0,
//   G1 f    = (G2 f^dagger)^dagger,   f^dagger(x1, x2) = f(x2, x1),
//   G f(x)  = sum_i c (theta_i - x_i) G_i f(x).
//
// On the duality functions F(., z) this reduces to F(x, z) [c (theta - x) <> z].

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imub/dual_kernels.hpp"
#include "imub/errors.hpp"
#include "imub/harmonic_measure.hpp"
#include "imub/infinite_rate.hpp"
#include "imub/types.hpp"

namespace imub {

/// A test function on E with analytic derivatives along both axes.
/// d1(r) = d/du f(u, 0) at u = r and d2(r) = d/dv f(0, v) at v = r.
struct TestFunction {
  using Value = std::function<DualityValue(const BoundaryPoint&)>;
  using Axis = std::function<DualityValue(double)>;

  Value value;
  Axis d1;
  Axis d2;
  /// Second derivatives along the axes; estimated by differences if absent.
  std::optional<Axis> d11;
  std::optional<Axis> d22;
  /// Declared sup |d1| and sup |d2| (the first-order C_l^2 norm).
  double d1_bound = std::numeric_limits<double>::infinity();
  double d2_bound = std::numeric_limits<double>::infinity();
  std::string name;

  /// f^dagger: coordinates swapped.
  [[nodiscard]] TestFunction dagger() const {
    TestFunction g;
    g.value = [v = value](const BoundaryPoint& p) { return v(p.swapped()); };
    g.d1 = d2;
    g.d2 = d1;
    g.d11 = d22;
    g.d22 = d11;
    g.d1_bound = d2_bound;
    g.d2_bound = d1_bound;
    g.name = name.empty() ? std::string() : name + "^dagger";
    return g;
  }
};

struct GeneratorResult {
  DualityValue value;
  double quadrature_error_estimate = 0.0;
};

/// F(., z) with its axis derivatives.
inline TestFunction duality_test_function(const BoundaryPoint& z) {
  const QuadrantPoint q = z.to_quadrant();
  // d/du F((u,0), z) = F a1 and d/dv F((0,v), z) = F a2.
  const DualityValue a1(-(q.x1 + q.x2), q.x1 - q.x2);
  const DualityValue a2(-(q.x1 + q.x2), q.x2 - q.x1);
  TestFunction f;
  f.value = [q](const BoundaryPoint& y) { return kernel_F(y.to_quadrant(), q); };
  f.d1 = [q, a1](double r) { return kernel_F(QuadrantPoint{r, 0.0}, q) * a1; };
  f.d2 = [q, a2](double r) { return kernel_F(QuadrantPoint{0.0, r}, q) * a2; };
  f.d11 = [q, a1](double r) { return kernel_F(QuadrantPoint{r, 0.0}, q) * a1 * a1; };
  f.d22 = [q, a2](double r) { return kernel_F(QuadrantPoint{0.0, r}, q) * a2 * a2; };
  f.d1_bound = std::abs(a1);
  f.d2_bound = std::abs(a2);
  f.name = "F(.," + to_string(z) + ")";
  return f;
}

/// Spot checks of the declared contract: derivative bounds on a sample of
/// magnitudes, and decay of r d1(r) and r d2(r) between r = 1e2 and 1e4.
inline void check_test_function(const TestFunction& f) {
  const double probes[] = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 1e2, 1e3, 1e4};
  for (double r : probes) {
    if (std::abs(f.d1(r)) > f.d1_bound * (1.0 + 1e-9) + 1e-12 ||
        std::abs(f.d2(r)) > f.d2_bound * (1.0 + 1e-9) + 1e-12) {
      throw NonIntegrable("test function exceeds its declared derivative bound at r = " + std::to_string(r));
    }
  }
  for (const auto& d : {f.d1, f.d2}) {
    const double near = 1e2 * std::abs(d(1e2));
    const double far = 1e4 * std::abs(d(1e4));
    if (far > near + 1e-8) throw NonIntegrable("r * derivative does not decay along an axis");
  }
}

inline GeneratorResult apply_G2(const TestFunction& f, const BoundaryPoint& x, double tol = 1e-10) {
  if (x.branch() != Branch::Axis1) return {f.d2(x.magnitude()), 0.0};
  const double m = x.magnitude();
  NuIntegrand<DualityValue> g;
  g.value = [&f, m](const BoundaryPoint& y) {
    return f.value(BoundaryPoint::on(y.branch(), m * y.magnitude()));
  };
  g.slope_at_one = m * f.d1(m);
  if (f.d11) g.curvature_at_one = m * m * (*f.d11)(m);
  NuOptions opts;
  opts.abs_tol = tol * m;
  const auto r = nu_integrate(g, opts);
  if (!r.converged) throw QuadratureFailure("nu quadrature did not reach tolerance");
  return {r.value / m, r.error / m};
}

inline GeneratorResult apply_G1(const TestFunction& f, const BoundaryPoint& x, double tol = 1e-10) {
  return apply_G2(f.dagger(), x.swapped(), tol);
}

inline GeneratorResult apply_G(const ImubParams& p, const TestFunction& f, const BoundaryPoint& x,
                               double tol = 1e-10) {
  const QuadrantPoint q = x.to_quadrant();
  const double w1 = p.c * (p.theta.x1 - q.x1);
  const double w2 = p.c * (p.theta.x2 - q.x2);
  GeneratorResult out{{0.0, 0.0}, 0.0};
  if (w1 == 0.0 && w2 == 0.0) return out;
  check_test_function(f);
  if (w1 != 0.0) {
    const auto r = apply_G1(f, x, tol);
    out.value += w1 * r.value;
    out.quadrature_error_estimate += std::abs(w1) * r.quadrature_error_estimate;
  }
  if (w2 != 0.0) {
    const auto r = apply_G2(f, x, tol);
    out.value += w2 * r.value;
    out.quadrature_error_estimate += std::abs(w2) * r.quadrature_error_estimate;
  }
  return out;
}

/// Closed form G F(., z)(x) = F(x, z) [c (theta - x) <> z].
inline DualityValue generator_on_F(const ImubParams& p, const BoundaryPoint& z, const BoundaryPoint& x) {
  const QuadrantPoint q = x.to_quadrant();
  const QuadrantPoint w = z.to_quadrant();
  const DualityValue drift = lozenge(p.c * (p.theta.x1 - q.x1), p.c * (p.theta.x2 - q.x2), w.x1, w.x2);
  return kernel_F(q, w) * drift;
}

/// eps^{-1} (int f dQ_{x + eps c (theta - x)} - f(x)) for each eps.
///
/// The quadrature tolerance is 1e-3 eps^2, so that its contribution to the
/// quotient stays well under the O(eps) approach to the limit.
inline std::vector<DualityValue> semigroup_derivative(const ImubParams& p, const TestFunction& f,
                                                      const BoundaryPoint& x, const std::vector<double>& eps) {
  std::vector<DualityValue> out;
  out.reserve(eps.size());
  const QuadrantPoint q = x.to_quadrant();
  const DualityValue fx = f.value(x);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double e = eps[i];
    if (!(e > 0.0) || (i > 0 && !(e < eps[i - 1]))) {
      throw DomainError("eps sequence must be positive and decreasing");
    }
    if (p.c * e > 1.0) throw DomainError("eps * c must not exceed 1");
    const QuadrantPoint y{q.x1 + e * p.c * (p.theta.x1 - q.x1), q.x2 + e * p.c * (p.theta.x2 - q.x2)};
    DualityValue integral;
    if (y.on_boundary()) {
      integral = f.value(BoundaryPoint::from_quadrant(y));
    } else {
      quad::Options o;
      o.abs_tol = std::max(1e-3 * e * e, 1e-14);
      o.max_intervals = 20000;
      const auto r = q_expect(QMeasureParams(y), f.value, o);
      if (!r.converged) throw QuadratureFailure("semigroup quotient quadrature did not converge");
      integral = r.value;
    }
    out.push_back((integral - fx) / e);
  }
  return out;
}

}  // namespace imub
