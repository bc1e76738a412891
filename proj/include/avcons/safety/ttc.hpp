#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"

namespace avcons {

inline constexpr double kInfiniteTtc = std::numeric_limits<double>::infinity();

/// Time-to-collision from separation d and closing speed v_rel (positive when
/// closing). Zero separation is an overlap (TTC 0); non-positive closing speed
/// means divergent or stationary motion (TTC infinite).
inline double ttc_frame(double d, double v_rel) {
  if (std::isnan(d) || std::isnan(v_rel)) throw ArgumentError("ttc inputs must not be NaN");
  if (d < 0.0) throw ArgumentError("ttc distance must be non-negative");
  if (d == 0.0) return 0.0;
  if (v_rel <= 0.0) return kInfiniteTtc;
  return d / v_rel;
}

/// Relative velocity projected on the subject->other line, positive when the
/// agents close in. nullopt when the positions coincide (overlap).
inline std::optional<double> relative_closing_speed(const TrackSample& subject,
                                                    const TrackSample& other) {
  const double dx = other.x - subject.x;
  const double dy = other.y - subject.y;
  const double d = std::hypot(dx, dy);
  if (d == 0.0) return std::nullopt;
  const double dvx = other.vx - subject.vx;
  const double dvy = other.vy - subject.vy;
  return -(dvx * dx + dvy * dy) / d;
}

/// TTC between two simultaneous samples.
inline double ttc_between(const TrackSample& subject, const TrackSample& other) {
  auto closing = relative_closing_speed(subject, other);
  if (!closing) return 0.0;
  return ttc_frame(std::hypot(other.x - subject.x, other.y - subject.y), *closing);
}

}  // namespace avcons
