#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imub/types.hpp"

namespace imub {

struct Provenance {
  std::string scheme;
  double step = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  /// The path starts off E and makes an immediate jump at time 0, so it is
  /// not right-continuous there.
  bool initial_jump = false;
};

/// States of one simulated path on a time grid. States are QuadrantPoints;
/// in_E marks the ones lying on the boundary E.
struct PathSample {
  std::vector<double> times;
  std::vector<QuadrantPoint> states;
  std::vector<bool> in_E;
  Provenance provenance;

  void push(double t, const QuadrantPoint& x) {
    times.push_back(t);
    states.push_back(x);
    in_E.push_back(x.on_boundary());
  }
  void push(double t, const BoundaryPoint& x) { push(t, x.to_quadrant()); }

  [[nodiscard]] std::size_t size() const { return times.size(); }

  /// State at index i as a point of E; throws DomainError if it is off E.
  [[nodiscard]] BoundaryPoint boundary_state(std::size_t i) const {
    return BoundaryPoint::from_quadrant(states.at(i));
  }
};

inline void require_increasing_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
      throw DomainError("times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("times must be strictly increasing");
  }
}

}  // namespace imub
