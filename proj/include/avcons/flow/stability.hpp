#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"

namespace avcons {

inline constexpr double kDefaultGainHalfWindow = 5.0;

struct GainResult {
  std::string leader_id;
  std::string follower_id;
  int follower_position = 1;
  std::optional<double> gain;  // empty when the leader norm is zero
  double leader_t0 = 0.0;
  double follower_t0 = 0.0;
  double half_window = kDefaultGainHalfWindow;
  double leader_norm = 0.0;
  double follower_norm = 0.0;

  double window_start() const { return follower_t0 - half_window; }
  double window_end() const { return follower_t0 + half_window; }
  bool stable() const { return gain && *gain <= 1.0; }
};

/// L2 norm of the acceleration magnitude sqrt(ax^2 + ay^2) over the samples in
/// [t0 - half_window, t0 + half_window]. Throws when the track does not cover
/// the whole window.
inline double acceleration_norm(const AgentTrack& track, double t0, double half_window) {
  constexpr double kTol = 1e-9;
  const double lo = t0 - half_window;
  const double hi = t0 + half_window;
  if (track.samples.empty() || track.start_time() > lo + kTol || track.end_time() < hi - kTol) {
    throw WindowCoverageError("track '" + track.agent_id + "' does not cover the gain window");
  }
  double sum = 0.0;
  for (const auto& s : track.samples) {
    if (s.time < lo - kTol) continue;
    if (s.time > hi + kTol) break;
    const double a = std::hypot(s.ax, s.ay);
    sum += a * a;
  }
  return std::sqrt(sum);
}

/// String-stability gain of a follower relative to its leader, each norm
/// taken over a window centred on that vehicle's own t0.
inline GainResult stability_gain(const AgentTrack& leader, const AgentTrack& follower,
                                 double leader_t0, double follower_t0, double half_window) {
  if (!(half_window > 0.0)) throw ArgumentError("gain half window must be positive");
  GainResult r;
  r.leader_id = leader.agent_id;
  r.follower_id = follower.agent_id;
  r.leader_t0 = leader_t0;
  r.follower_t0 = follower_t0;
  r.half_window = half_window;
  r.leader_norm = acceleration_norm(leader, leader_t0, half_window);
  r.follower_norm = acceleration_norm(follower, follower_t0, half_window);
  if (r.leader_norm > 0.0) r.gain = r.follower_norm / r.leader_norm;
  return r;
}

inline GainResult stability_gain(const AgentTrack& leader, const AgentTrack& follower, double t0,
                                 double half_window = kDefaultGainHalfWindow) {
  return stability_gain(leader, follower, t0, t0, half_window);
}

}  // namespace avcons
