#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/geometry.hpp"

namespace avcons {

enum class Boundary { Entry, Exit };

inline const char* to_string(Boundary b) { return b == Boundary::Entry ? "entry" : "exit"; }

struct LineCrossing {
  double time = 0.0;
  std::string lane;
};

/// First forward crossing (left side -> right side of the directed segment)
/// of a track, with the crossing time found by linear interpolation of the
/// signed distance between the two bracketing samples.
inline std::optional<LineCrossing> first_crossing(const AgentTrack& track,
                                                  const DirectedSegment& line) {
  const auto& s = track.samples;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double d0 = line.signed_distance({s[k].x, s[k].y});
    const double d1 = line.signed_distance({s[k + 1].x, s[k + 1].y});
    if (!(d0 < 0.0 && d1 >= 0.0)) continue;
    const double u = -d0 / (d1 - d0);
    const Vec2 p{s[k].x + u * (s[k + 1].x - s[k].x), s[k].y + u * (s[k + 1].y - s[k].y)};
    const double along = line.projection(p);
    if (along < 0.0 || along > 1.0) continue;
    return LineCrossing{s[k].time + u * (s[k + 1].time - s[k].time), s[k].lane};
  }
  return std::nullopt;
}

/// First crossing of the line that belongs to the lane the vehicle occupies
/// when it crosses. Lanes without a line are ignored.
inline std::optional<LineCrossing> boundary_crossing(const AgentTrack& track,
                                                     const IntersectionGeometry& geometry,
                                                     Boundary boundary) {
  const auto& lines = boundary == Boundary::Entry ? geometry.entry_lines : geometry.exit_lines;
  std::optional<LineCrossing> best;
  for (const auto& [lane, line] : lines) {
    auto c = first_crossing(track, line);
    if (!c || c->lane != lane) continue;
    if (!best || c->time < best->time) best = c;
  }
  return best;
}

struct HeadwayEvent {
  std::string leader_id;
  std::string follower_id;
  AgentClass leader_class;
  AgentClass follower_class;
  std::string lane;
  Boundary boundary = Boundary::Entry;
  double headway = 0.0;
  double t_leader = 0.0;
  double t_follower = 0.0;
};

struct HeadwayResult {
  std::vector<HeadwayEvent> events;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultHeadwayCutoff = 5.0;

/// Time headways between consecutive vehicles crossing the same lane's
/// boundary line. Only 0 < headway < cutoff is retained.
inline HeadwayResult compute_headways(const std::vector<AgentTrack>& tracks,
                                      const IntersectionGeometry& geometry, Boundary boundary,
                                      double cutoff = kDefaultHeadwayCutoff) {
  const auto& lines = boundary == Boundary::Entry ? geometry.entry_lines : geometry.exit_lines;
  HeadwayResult result;

  std::map<std::string, bool> lanes_seen;
  for (const auto& t : tracks) {
    if (t.agent_class.vru_flag()) continue;
    for (const auto& s : t.samples) {
      if (!s.lane.empty()) lanes_seen.emplace(s.lane, true);
    }
  }
  for (const auto& [lane, _] : lanes_seen) {
    if (!lines.count(lane)) {
      result.warnings.push_back(std::string("lane '") + lane + "' has no " + to_string(boundary) +
                                " line; skipped");
    }
  }

  struct Cross {
    double time;
    const AgentTrack* track;
  };
  std::map<std::string, std::vector<Cross>> by_lane;
  for (const auto& t : tracks) {
    if (t.agent_class.vru_flag()) continue;
    for (const auto& [lane, line] : lines) {
      auto c = first_crossing(t, line);
      if (c && c->lane == lane) by_lane[lane].push_back({c->time, &t});
    }
  }
  for (auto& [lane, list] : by_lane) {
    std::sort(list.begin(), list.end(), [](const Cross& l, const Cross& r) {
      return std::tie(l.time, l.track->agent_id) < std::tie(r.time, r.track->agent_id);
    });
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      const double h = list[i + 1].time - list[i].time;
      if (!(h > 0.0) || !(h < cutoff)) continue;
      HeadwayEvent e;
      e.leader_id = list[i].track->agent_id;
      e.follower_id = list[i + 1].track->agent_id;
      e.leader_class = list[i].track->agent_class;
      e.follower_class = list[i + 1].track->agent_class;
      e.lane = lane;
      e.boundary = boundary;
      e.headway = h;
      e.t_leader = list[i].time;
      e.t_follower = list[i + 1].time;
      result.events.push_back(std::move(e));
    }
  }
  return result;
}

}  // namespace avcons
