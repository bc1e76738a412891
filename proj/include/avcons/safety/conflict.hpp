#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/interaction/detect.hpp"
#include "avcons/safety/pet.hpp"
#include "avcons/safety/ttc.hpp"

namespace avcons {

struct TtcPoint {
  double time = 0.0;
  double ttc = kInfiniteTtc;
};

struct ConflictMetrics {
  std::string subject_id;
  std::string other_id;
  double start_time = 0.0;  // of the interaction record the series belongs to
  std::vector<TtcPoint> ttc_series;
  std::optional<double> pet;
  double min_separation = std::numeric_limits<double>::infinity();
  double min_separation_time_subject = 0.0;
  double min_separation_time_other = 0.0;

  double min_ttc() const {
    double m = kInfiniteTtc;
    for (const auto& p : ttc_series) m = std::min(m, p.ttc);
    return m;
  }
};

/// Per-frame TTC along an interaction record plus the pair's PET.
inline ConflictMetrics conflict_metrics(const InteractionRecord& record, const AgentTrack& subject,
                                        const AgentTrack& other,
                                        double pet_threshold = kDefaultPetProximity) {
  ConflictMetrics m;
  m.subject_id = record.subject_id;
  m.other_id = record.other_id;
  m.start_time = record.start_time;
  m.ttc_series.reserve(record.frames.size());
  for (const auto& f : record.frames) {
    const TrackSample* s = subject.sample_at(f.time);
    const TrackSample* o = other.sample_at(f.time);
    if (!s || !o) continue;
    m.ttc_series.push_back({f.time, ttc_between(*s, *o)});
  }
  const Encroachment e = closest_encroachment(subject, other);
  m.min_separation = e.min_separation;
  m.min_separation_time_subject = e.time_a;
  m.min_separation_time_other = e.time_b;
  if (e.min_separation < pet_threshold) m.pet = e.time_gap();
  return m;
}

/// Total time with finite TTC below threshold: dt times the count of such frames.
inline double ttc_exposure(const ConflictMetrics& metrics, double threshold, double dt) {
  std::size_t n = 0;
  for (const auto& p : metrics.ttc_series) {
    if (std::isfinite(p.ttc) && p.ttc < threshold) ++n;
  }
  return dt * static_cast<double>(n);
}

struct CoOccupancyEvent {
  std::string vehicle_id;
  std::string vru_id;  // VRU present at the start of the interval (lowest id on ties)
  std::string zone;
  double start = 0.0;
  double end = 0.0;
  double vru_speed_at_entry = 0.0;
  std::size_t vru_count = 0;  // distinct active VRUs seen during the interval
};

inline constexpr double kDefaultVruActiveSpeed = 0.5;

/// Maximal intervals in which a vehicle's centre is inside a crosswalk polygon
/// while at least one VRU moving faster than vru_speed_min is inside the same
/// polygon. Tracks must share a frame grid with spacing dt.
inline std::vector<CoOccupancyEvent> detect_co_occupancy(const std::vector<AgentTrack>& tracks,
                                                         const IntersectionGeometry& geometry,
                                                         double vru_speed_min = kDefaultVruActiveSpeed,
                                                         double dt = 0.1) {
  if (geometry.crosswalk_zones.empty()) {
    throw ConfigError("co-occupancy needs at least one crosswalk zone");
  }
  std::vector<CoOccupancyEvent> events;
  for (const auto& poly : geometry.crosswalk_zones) {
    const auto box = poly.bounds();
    auto inside = [&](const TrackSample& s) {
      if (s.x < box.xmin || s.x > box.xmax || s.y < box.ymin || s.y > box.ymax) return false;
      return poly.contains({s.x, s.y});
    };
    // frame -> active VRUs inside (id, speed), kept sorted by id.
    std::map<long long, std::vector<std::pair<std::string, double>>> active;
    for (const auto& t : tracks) {
      if (!t.agent_class.vru_flag()) continue;
      for (const auto& s : t.samples) {
        const double v = s.speed();
        if (v > vru_speed_min && inside(s)) {
          active[std::llround(s.time / dt)].emplace_back(t.agent_id, v);
        }
      }
    }
    for (auto& [_, list] : active) std::sort(list.begin(), list.end());

    for (const auto& t : tracks) {
      if (t.agent_class.vru_flag()) continue;
      std::optional<CoOccupancyEvent> open;
      std::vector<std::string> seen;
      long long prev_frame = 0;
      auto close = [&] {
        if (!open) return;
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        open->vru_count = seen.size();
        events.push_back(std::move(*open));
        open.reset();
        seen.clear();
      };
      for (const auto& s : t.samples) {
        const long long frame = std::llround(s.time / dt);
        const std::vector<std::pair<std::string, double>>* vrus = nullptr;
        if (inside(s)) {
          auto it = active.find(frame);
          if (it != active.end()) vrus = &it->second;
        }
        if (!vrus) {
          close();
          continue;
        }
        if (open && frame != prev_frame + 1) close();
        if (!open) {
          open = CoOccupancyEvent{t.agent_id, vrus->front().first, poly.name, s.time, s.time,
                                  vrus->front().second, 0};
        }
        open->end = s.time;
        for (const auto& [id, _] : *vrus) seen.push_back(id);
        prev_frame = frame;
      }
      close();
    }
  }
  std::sort(events.begin(), events.end(), [](const CoOccupancyEvent& l, const CoOccupancyEvent& r) {
    return std::tie(l.vehicle_id, l.zone, l.start) < std::tie(r.vehicle_id, r.zone, r.start);
  });
  return events;
}

}  // namespace avcons
