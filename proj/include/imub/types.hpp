#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <string>

#include "imub/errors.hpp"

namespace imub {

/// Complex value returned by the duality kernels and generator formulas.
/// std::complex stores (re, im) in Cartesian form, so products and
/// conjugation stay exact in structure.
using DualityValue = std::complex<double>;

/// A point (x1, x2) of the closed quadrant [0, inf)^2.
struct QuadrantPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  constexpr QuadrantPoint() = default;
  QuadrantPoint(double a, double b) : x1(a), x2(b) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
      throw DomainError("QuadrantPoint requires nonnegative coordinates, got (" +
                        std::to_string(a) + ", " + std::to_string(b) + ")");
    }
  }

  /// True when at least one coordinate vanishes, i.e. the point lies in E.
  [[nodiscard]] bool on_boundary() const { return x1 == 0.0 || x2 == 0.0; }
  [[nodiscard]] double sum() const { return x1 + x2; }

  friend bool operator==(const QuadrantPoint&, const QuadrantPoint&) = default;
};

inline QuadrantPoint operator+(const QuadrantPoint& a, const QuadrantPoint& b) {
  return {a.x1 + b.x1, a.x2 + b.x2};
}
inline QuadrantPoint operator*(double r, const QuadrantPoint& a) {
  return {r * a.x1, r * a.x2};
}

/// Coordinate swap f^dagger.
inline QuadrantPoint swapped(const QuadrantPoint& p) { return {p.x2, p.x1}; }

/// Componentwise y <= x.
inline bool dominated_by(const QuadrantPoint& y, const QuadrantPoint& x) {
  return y.x1 <= x.x1 && y.x2 <= x.x2;
}

inline std::ostream& operator<<(std::ostream& os, const QuadrantPoint& p) {
  return os << '(' << p.x1 << ", " << p.x2 << ')';
}

enum class Branch : std::uint8_t { Origin, Axis1, Axis2 };

/// A point of E = [0,inf)^2 \ (0,inf)^2, stored as (branch, magnitude).
///
/// Membership in E is structural. Magnitude 0 on either axis canonicalizes
/// to Origin, so equality is well defined.
class BoundaryPoint {
 public:
  constexpr BoundaryPoint() = default;

  static BoundaryPoint origin() { return {}; }
  static BoundaryPoint axis1(double m) { return BoundaryPoint(Branch::Axis1, m); }
  static BoundaryPoint axis2(double m) { return BoundaryPoint(Branch::Axis2, m); }
  static BoundaryPoint on(Branch b, double m) { return BoundaryPoint(b, m); }

  /// Converts a quadrant point lying in E. Throws DomainError otherwise.
  static BoundaryPoint from_quadrant(const QuadrantPoint& p) {
    if (p.x2 == 0.0) return axis1(p.x1);
    if (p.x1 == 0.0) return axis2(p.x2);
    throw DomainError("point is not on the boundary E");
  }

  /// Projection onto E: nonpositive coordinates are zeroed; for an interior
  /// point the smaller coordinate is dropped.
  static BoundaryPoint project(double a, double b) {
    if (a <= 0.0 && b <= 0.0) return origin();
    if (a <= 0.0) return axis2(b);
    if (b <= 0.0) return axis1(a);
    return a >= b ? axis1(a) : axis2(b);
  }

  [[nodiscard]] Branch branch() const { return branch_; }
  [[nodiscard]] double magnitude() const { return magnitude_; }
  [[nodiscard]] bool is_origin() const { return branch_ == Branch::Origin; }

  [[nodiscard]] QuadrantPoint to_quadrant() const {
    switch (branch_) {
      case Branch::Axis1: return {magnitude_, 0.0};
      case Branch::Axis2: return {0.0, magnitude_};
      case Branch::Origin: break;
    }
    return {};
  }

  /// Signed line coordinate w = x1 - x2.
  [[nodiscard]] double signed_coordinate() const {
    return branch_ == Branch::Axis2 ? -magnitude_ : magnitude_;
  }

  [[nodiscard]] BoundaryPoint swapped() const {
    switch (branch_) {
      case Branch::Axis1: return axis2(magnitude_);
      case Branch::Axis2: return axis1(magnitude_);
      case Branch::Origin: break;
    }
    return {};
  }

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;

 private:
  BoundaryPoint(Branch b, double m) : branch_(b), magnitude_(m) {
    if (!(m >= 0.0)) throw DomainError("boundary magnitude must be nonnegative");
    if (m == 0.0 || b == Branch::Origin) {
      branch_ = Branch::Origin;
      magnitude_ = 0.0;
    }
  }
  Branch branch_ = Branch::Origin;
  double magnitude_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const BoundaryPoint& p) {
  switch (p.branch()) {
    case Branch::Origin: return os << "origin";
    case Branch::Axis1: return os << "axis1:" << p.magnitude();
    case Branch::Axis2: return os << "axis2:" << p.magnitude();
  }
  return os;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string to_string(const BoundaryPoint& p) {
  switch (p.branch()) {
    case Branch::Origin: return "origin";
    case Branch::Axis1: return "axis1:" + format_double(p.magnitude());
    case Branch::Axis2: return "axis2:" + format_double(p.magnitude());
  }
  return {};
}

/// Parses `axis1:<m>`, `axis2:<m>` or `origin`.
inline BoundaryPoint parse_boundary_point(const std::string& text) {
  if (text == "origin") return BoundaryPoint::origin();
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("expected axis1:<m>, axis2:<m> or origin, got '" + text + "'");
  }
  const std::string head = text.substr(0, colon);
  double m = 0.0;
  try {
    std::size_t used = 0;
    m = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw DomainError("bad magnitude in '" + text + "'");
  }
  if (head == "axis1") return BoundaryPoint::axis1(m);
  if (head == "axis2") return BoundaryPoint::axis2(m);
  throw DomainError("unknown branch '" + head + "'");
}

}  // namespace imub
