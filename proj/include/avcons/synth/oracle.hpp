#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "avcons/core/agent.hpp"

namespace avcons::synth {

struct OracleEncroachment {
  double min_separation = std::numeric_limits<double>::infinity();
  double time_gap = std::numeric_limits<double>::infinity();
};

/// Exhaustive scan over every (t_a, t_b) sample pair. Reference for compute_pet.
inline OracleEncroachment oracle_encroachment(const AgentTrack& a, const AgentTrack& b) {
  OracleEncroachment best;
  for (const auto& sa : a.samples) {
    for (const auto& sb : b.samples) {
      const double d = std::hypot(sa.x - sb.x, sa.y - sb.y);
      const double gap = std::abs(sa.time - sb.time);
      if (d < best.min_separation || (d == best.min_separation && gap < best.time_gap)) {
        best.min_separation = d;
        best.time_gap = gap;
      }
    }
  }
  return best;
}

inline std::optional<double> oracle_pet(const AgentTrack& a, const AgentTrack& b,
                                        double proximity_threshold = 5.0) {
  const auto e = oracle_encroachment(a, b);
  if (e.min_separation < proximity_threshold) return e.time_gap;
  return std::nullopt;
}

}  // namespace avcons::synth
