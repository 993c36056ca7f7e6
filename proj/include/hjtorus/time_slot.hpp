#pragma once

#include <cmath>
#include <string>

#include "hjtorus/error.hpp"
#include "hjtorus/torus_grid.hpp"

namespace hjt {

// Position of time t on the uniform level grid {n dt}: level n and weight
// theta in [0, 1) toward level n+1. Times within 1e-9 (relative) of a level
// snap to it, so t = n dt returns that level exactly.
struct TimeSlot {
  int n;
  double theta;
};

inline TimeSlot time_slot(int n_steps, double dt, double t) {
  const double final_time = n_steps * dt;
  if (!std::isfinite(t) || t < 0.0 || t > final_time * (1.0 + 1e-12) + 1e-15) {
    throw ParameterError("time " + format_double(t) + " outside [0, " + format_double(final_time) + "]");
  }
  if (n_steps == 0) return {0, 0.0};
  const double r = t / dt;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) {
    return {std::min(static_cast<int>(nearest), n_steps), 0.0};
  }
  int n = static_cast<int>(std::floor(r));
  if (n >= n_steps) return {n_steps, 0.0};
  return {n, r - n};
}

}  // namespace hjt
