#pragma once

#include <cmath>
#include <optional>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"

namespace avcons {

inline constexpr double kDefaultFrameDt = 0.1;

/// Resamples a track to uniform spacing by linear interpolation of position,
/// velocity and acceleration. Output times are anchor + k*dt for every k that
/// falls inside the original span; the anchor defaults to the first sample
/// time. Pass a shared anchor (e.g. 0) to put several tracks on one frame grid.
inline AgentTrack resample_track(const AgentTrack& track, double dt,
                                 std::optional<double> anchor = std::nullopt) {
  if (!(dt > 0.0)) throw ArgumentError("resample dt must be positive");
  if (track.samples.size() < 2) {
    throw SingleSampleTrackError("track '" + track.agent_id + "' has fewer than two samples");
  }
  if (dt > track.duration()) {
    throw SingleSampleTrackError("dt exceeds duration of track '" + track.agent_id + "'");
  }
  const double t0 = track.start_time();
  const double t1 = track.end_time();
  const double origin = anchor.value_or(t0);
  // Slack keeps grid points that sit on the endpoints up to rounding.
  const double slack = 1e-9 * std::max(1.0, std::abs(t1 - origin) / dt);
  const auto k_first = static_cast<long long>(std::ceil((t0 - origin) / dt - slack));
  const auto k_last = static_cast<long long>(std::floor((t1 - origin) / dt + slack));

  AgentTrack out;
  out.agent_id = track.agent_id;
  out.agent_class = track.agent_class;
  out.length = track.length;
  out.width = track.width;
  if (k_last < k_first) {
    throw SingleSampleTrackError("no grid point inside track '" + track.agent_id + "'");
  }
  out.samples.reserve(static_cast<std::size_t>(k_last - k_first + 1));

  const auto& src = track.samples;
  std::size_t seg = 0;
  for (long long k = k_first; k <= k_last; ++k) {
    const double t = origin + static_cast<double>(k) * dt;
    while (seg + 2 < src.size() && src[seg + 1].time <= t) ++seg;
    const TrackSample& a = src[seg];
    const TrackSample& b = src[seg + 1];
    double u = (t - a.time) / (b.time - a.time);
    u = std::clamp(u, 0.0, 1.0);
    auto lerp = [u](double p, double q) { return u == 1.0 ? q : p + u * (q - p); };
    TrackSample s;
    s.time = t;
    s.x = lerp(a.x, b.x);
    s.y = lerp(a.y, b.y);
    s.vx = lerp(a.vx, b.vx);
    s.vy = lerp(a.vy, b.vy);
    s.ax = lerp(a.ax, b.ax);
    s.ay = lerp(a.ay, b.ay);
    s.lane = u < 1.0 ? a.lane : b.lane;
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace avcons
