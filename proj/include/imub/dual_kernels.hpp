#pragma once

// Self-duality kernels of mutually catalytic branching.
//
//   x <> y  = -(x1 + x2)(y1 + y2) + i (x1 - x2)(y1 - y2)
//   F(x, y) = exp(x <> y)
//   H((x, x'), (y, y')) = F(x, y) F(x', y')
//
// The lozenge product is bilinear and symmetric; |F| <= 1 on the quadrant.

#include "imub/types.hpp"

namespace imub {

/// The lozenge product. Accepts arbitrary real pairs since the generator
/// evaluates it on drift directions c(theta - x) that leave the quadrant.
inline DualityValue lozenge(double x1, double x2, double y1, double y2) {
  return {-(x1 + x2) * (y1 + y2), (x1 - x2) * (y1 - y2)};
}

inline DualityValue lozenge(const QuadrantPoint& x, const QuadrantPoint& y) {
  return lozenge(x.x1, x.x2, y.x1, y.x2);
}

inline DualityValue kernel_F(const QuadrantPoint& x, const QuadrantPoint& y) {
  return std::exp(lozenge(x, y));
}

inline DualityValue kernel_F(const BoundaryPoint& x, const BoundaryPoint& y) {
  return kernel_F(x.to_quadrant(), y.to_quadrant());
}

inline DualityValue kernel_F(const QuadrantPoint& x, const BoundaryPoint& y) {
  return kernel_F(x, y.to_quadrant());
}

inline DualityValue kernel_F(const BoundaryPoint& x, const QuadrantPoint& y) {
  return kernel_F(x.to_quadrant(), y);
}

inline DualityValue kernel_H(const QuadrantPoint& x, const QuadrantPoint& x2,
                             const QuadrantPoint& y, const QuadrantPoint& y2) {
  return kernel_F(x, y) * kernel_F(x2, y2);
}

}  // namespace imub
