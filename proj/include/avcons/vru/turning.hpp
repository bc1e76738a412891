#pragma once

#include <cmath>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/interaction/zones.hpp"

namespace avcons {

enum class TurnFlag { Straight, TurningLeft, TurningRight };

inline const char* to_string(TurnFlag f) {
  switch (f) {
    case TurnFlag::Straight: return "straight";
    case TurnFlag::TurningLeft: return "turning-left";
    case TurnFlag::TurningRight: return "turning-right";
  }
  return "?";
}

struct TurnOptions {
  double window = 3.0;          // s, centred on each frame
  double threshold_deg = 20.0;  // inclusive
  double min_speed = 0.5;       // heading undefined at or below this speed
};

/// Per-frame turn flag from the clockwise heading change accumulated over a
/// centred sliding window. Left turns accumulate negative (counter-clockwise)
/// change. Increments are only counted between two consecutive moving frames.
inline std::vector<TurnFlag> classify_turning(const AgentTrack& vehicle, const TurnOptions& opt = {}) {
  const auto& s = vehicle.samples;
  const std::size_t n = s.size();
  std::vector<TurnFlag> flags(n, TurnFlag::Straight);
  if (n < 2) return flags;

  // prefix[i] = clockwise change from frame 0 to frame i
  std::vector<double> prefix(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double inc = 0.0;
    if (s[i - 1].speed() > opt.min_speed && s[i].speed() > opt.min_speed) {
      const double h0 = std::atan2(s[i - 1].vy, s[i - 1].vx);
      const double h1 = std::atan2(s[i].vy, s[i].vx);
      double d = rad_to_deg(h0 - h1);
      d = wrap_degrees(d + 180.0) - 180.0;
      inc = d;
    }
    prefix[i] = prefix[i - 1] + inc;
  }
  constexpr double kEps = 1e-6;
  const double half = 0.5 * opt.window;
  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (s[lo].time < s[k].time - half - 1e-9) ++lo;
    if (hi < k) hi = k;
    while (hi + 1 < n && s[hi + 1].time <= s[k].time + half + 1e-9) ++hi;
    const double change = prefix[hi] - prefix[lo];
    if (change <= -opt.threshold_deg + kEps) {
      flags[k] = TurnFlag::TurningLeft;
    } else if (change >= opt.threshold_deg - kEps) {
      flags[k] = TurnFlag::TurningRight;
    }
  }
  return flags;
}

}  // namespace avcons
