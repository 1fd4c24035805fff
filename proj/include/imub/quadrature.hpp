#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature.
//
// Intervals live in one max-heap keyed by local error estimate; the worst
// interval is bisected until the summed error meets the tolerance. Node and
// weight tables come from Boost.Math. Semi-infinite pieces [M, inf) are mapped
// by m = 1/t onto (0, 1/M]; the K21 rule never evaluates the endpoint t = 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <queue>
#include <span>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "imub/errors.hpp"

namespace imub::quad {

struct Options {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  int max_intervals = 4000;
  /// Finite pieces extending past this magnitude are split, and the remainder
  /// to infinity is integrated in the reciprocal variable.
  double tail_start = 1e3;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
inline bool finite_value(double v) { return std::isfinite(v); }
inline bool finite_value(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class T>
struct Piece {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

/// One G10/K21 evaluation on [a, b].
template <class T, class F>
Piece<T> kronrod21(const F& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const T f0 = f(center);
  T kronrod = f0 * wk[0];
  T gauss{};
  // Gauss-10 nodes are the odd-indexed Kronrod abscissae.
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double dx = half * xk[i];
    const T pair = f(center - dx) + f(center + dx);
    kronrod += wk[i] * pair;
    if (i % 2 == 1) gauss += wg[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  double err = magnitude(kronrod - gauss);
  if (!finite_value(kronrod)) err = std::numeric_limits<double>::infinity();
  return {a, b, kronrod, err};
}

}  // namespace detail

/// Integrates f over the consecutive pieces delimited by `points`
/// (strictly increasing; the last entry may be +infinity).
template <class F>
auto integrate(const F& f, std::span<const double> points, const Options& opts = {})
    -> Result<std::decay_t<std::invoke_result_t<const F&, double>>> {
  using T = std::decay_t<std::invoke_result_t<const F&, double>>;
  if (points.size() < 2) throw QuadratureFailure("integrate needs at least two points");

  // Tail pieces are stored in the reciprocal variable and flagged.
  struct Work {
    detail::Piece<T> piece;
    bool reciprocal;
    bool operator<(const Work& o) const { return piece < o.piece; }
  };
  const auto tail_f = [&f](double t) -> T {
    const double m = 1.0 / t;
    return f(m) * (m * m);
  };
  auto eval = [&](double a, double b, bool reciprocal) -> Work {
    return reciprocal ? Work{detail::kronrod21<T>(tail_f, a, b), true}
                      : Work{detail::kronrod21<T>(f, a, b), false};
  };

  std::priority_queue<Work> heap;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    double a = points[i];
    const double b = points[i + 1];
    if (!(b > a)) throw QuadratureFailure("quadrature breakpoints must increase");
    if (std::isinf(b) || b > opts.tail_start) {
      const double cut = std::max(a, opts.tail_start);
      if (a < cut) heap.push(eval(a, cut, false));
      const double t_hi = 1.0 / cut;
      const double t_lo = std::isinf(b) ? 0.0 : 1.0 / b;
      heap.push(eval(t_lo, t_hi, true));
    } else {
      heap.push(eval(a, b, false));
    }
  }

  auto totals = [&heap]() {
    // Recomputed from scratch so rounding does not accumulate.
    auto copy = heap;
    T value{};
    double error = 0.0;
    std::vector<Work> items;
    while (!copy.empty()) {
      items.push_back(copy.top());
      copy.pop();
    }
    std::sort(items.begin(), items.end(), [](const Work& x, const Work& y) {
      if (x.reciprocal != y.reciprocal) return x.reciprocal < y.reciprocal;
      return x.piece.a < y.piece.a;
    });
    for (const auto& w : items) {
      value += w.piece.value;
      error += w.piece.error;
    }
    return std::pair{value, error};
  };

  T value{};
  double error = 0.0;
  std::tie(value, error) = totals();

  int count = static_cast<int>(heap.size());
  while (true) {
    const double target = std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(value));
    if (error <= target) break;
    if (count >= opts.max_intervals) break;
    const Work worst = heap.top();
    const double mid = 0.5 * (worst.piece.a + worst.piece.b);
    if (!(mid > worst.piece.a && mid < worst.piece.b)) break;  // exhausted resolution
    heap.pop();
    const Work left = eval(worst.piece.a, mid, worst.reciprocal);
    const Work right = eval(mid, worst.piece.b, worst.reciprocal);
    value += left.piece.value + right.piece.value - worst.piece.value;
    error += left.piece.error + right.piece.error - worst.piece.error;
    heap.push(left);
    heap.push(right);
    ++count;
    if (count % 64 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  const double target = std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(value));
  return {value, error, count, error <= target && detail::finite_value(value)};
}

template <class F>
auto integrate(const F& f, double a, double b, const Options& opts = {}) {
  const double pts[2] = {a, b};
  return integrate(f, std::span<const double>(pts, 2), opts);
}

template <class F>
auto integrate(const F& f, std::initializer_list<double> points, const Options& opts = {}) {
  return integrate(f, std::span<const double>(points.begin(), points.size()), opts);
}

}  // namespace imub::quad
