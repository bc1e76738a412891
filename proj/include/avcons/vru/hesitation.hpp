#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/parallel.hpp"
#include "avcons/vru/turning.hpp"

namespace avcons {

enum class TurnRequirement { LeftOnly, AnyTurn };

struct HesitationParams {
  double walk_speed = 0.5;             // m/s, strict
  std::size_t min_walk_frames = 5;
  double slow_drop_fraction = 0.6;     // of the pre-slow mean speed
  std::size_t min_slow_frames = 5;
  double recovery_fraction = 0.9;      // of the pre-slow mean speed
  double vehicle_radius = 15.0;        // m, inclusive
  TurnRequirement turn = TurnRequirement::LeftOnly;
  TurnOptions turn_options;
};

struct HesitationEvent {
  std::string vru_id;
  std::string vehicle_id;
  double t_walk_start = 0.0;
  double t_slow_start = 0.0;
  double t_recover = 0.0;
  double reference_speed = 0.0;  // mean walking speed before the slowdown
  double min_speed_during_slow = 0.0;
  double vehicle_distance_at_slow = 0.0;
  /// (time, speed) of the vehicle from t_walk_start to t_recover.
  std::vector<std::pair<double, double>> vehicle_speed_profile;
};

/// A vehicle track paired with its per-frame turn flags.
struct TurningVehicle {
  const AgentTrack* track = nullptr;
  std::vector<TurnFlag> flags;
};

inline std::vector<TurningVehicle> prepare_turning(const std::vector<const AgentTrack*>& vehicles,
                                                   const TurnOptions& opt, unsigned threads = 1) {
  std::vector<TurningVehicle> out(vehicles.size());
  parallel_for(vehicles.size(), threads, [&](std::size_t i) {
    out[i].track = vehicles[i];
    out[i].flags = classify_turning(*vehicles[i], opt);
  });
  return out;
}

namespace detail {

struct SpeedPattern {
  std::size_t walk_start, slow_start, recover;
  double reference;
};

/// Walk -> slow -> recover patterns in a speed series, left to right,
/// non-overlapping. Each recovery frame may open the next walk run.
inline std::vector<SpeedPattern> find_speed_patterns(const std::vector<double>& v,
                                                     const HesitationParams& p) {
  std::vector<SpeedPattern> out;
  const std::size_t n = v.size();
  std::size_t i = 0;
  while (i < n) {
    if (!(v[i] > p.walk_speed)) {
      ++i;
      continue;
    }
    const std::size_t walk_start = i;
    double sum = 0.0;
    std::size_t k = i;
    std::optional<std::size_t> slow;
    while (k < n) {
      const std::size_t walked = k - walk_start;
      if (walked >= std::max<std::size_t>(1, p.min_walk_frames) &&
          v[k] < p.slow_drop_fraction * (sum / static_cast<double>(walked))) {
        slow = k;
        break;
      }
      if (!(v[k] > p.walk_speed)) break;
      sum += v[k];
      ++k;
    }
    if (!slow) {
      i = k + 1;
      continue;
    }
    const double ref = sum / static_cast<double>(*slow - walk_start);
    std::size_t j = *slow;
    while (j < n && v[j] < p.slow_drop_fraction * ref) ++j;
    if (j - *slow < p.min_slow_frames) {
      i = *slow + 1;
      continue;
    }
    std::size_t r = j;
    while (r < n && !(v[r] > p.recovery_fraction * ref)) ++r;
    if (r >= n) break;  // never recovers
    out.push_back({walk_start, *slow, r, ref});
    i = r;
  }
  return out;
}

inline std::vector<HesitationEvent> hesitation_impl(const AgentTrack& vru,
                                                    const std::vector<const TurningVehicle*>& vehicles,
                                                    const HesitationParams& params) {
  std::vector<HesitationEvent> events;
  if (!vru.agent_class.vru_flag()) return events;
  std::vector<double> speed(vru.samples.size());
  for (std::size_t i = 0; i < speed.size(); ++i) speed[i] = vru.samples[i].speed();

  auto turning_ok = [&](TurnFlag f) {
    if (params.turn == TurnRequirement::LeftOnly) return f == TurnFlag::TurningLeft;
    return f != TurnFlag::Straight;
  };

  for (const auto& pat : detail::find_speed_patterns(speed, params)) {
    const TurningVehicle* best = nullptr;
    double best_min = std::numeric_limits<double>::infinity();
    double first_hit_distance = 0.0;
    for (const TurningVehicle* vp : vehicles) {
      const TurningVehicle& veh = *vp;
      if (veh.track->agent_id == vru.agent_id) continue;
      double vmin = std::numeric_limits<double>::infinity();
      std::optional<double> first_hit;
      for (std::size_t k = pat.slow_start; k < pat.recover; ++k) {
        const auto& ps = vru.samples[k];
        auto idx = veh.track->index_at(ps.time);
        if (!idx || !turning_ok(veh.flags[*idx])) continue;
        const auto& vs = veh.track->samples[*idx];
        const double d = std::hypot(vs.x - ps.x, vs.y - ps.y);
        if (d > params.vehicle_radius) continue;
        if (!first_hit) first_hit = d;
        vmin = std::min(vmin, d);
      }
      if (first_hit && (vmin < best_min ||
                        (vmin == best_min && veh.track->agent_id < best->track->agent_id))) {
        best = &veh;
        best_min = vmin;
        first_hit_distance = *first_hit;
      }
    }
    if (!best) continue;

    HesitationEvent e;
    e.vru_id = vru.agent_id;
    e.vehicle_id = best->track->agent_id;
    e.t_walk_start = vru.samples[pat.walk_start].time;
    e.t_slow_start = vru.samples[pat.slow_start].time;
    e.t_recover = vru.samples[pat.recover].time;
    e.reference_speed = pat.reference;
    e.min_speed_during_slow = *std::min_element(speed.begin() + static_cast<std::ptrdiff_t>(pat.slow_start),
                                                speed.begin() + static_cast<std::ptrdiff_t>(pat.recover));
    e.vehicle_distance_at_slow = first_hit_distance;
    for (const auto& s : best->track->samples) {
      if (s.time >= e.t_walk_start - 1e-9 && s.time <= e.t_recover + 1e-9) {
        e.vehicle_speed_profile.emplace_back(s.time, s.speed());
      }
    }
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace detail

/// Hesitation episodes of one VRU: a walk (speed above walk_speed for at least
/// min_walk_frames), a drop below slow_drop_fraction of the walking mean for at
/// least min_slow_frames, then a recovery above recovery_fraction of that mean,
/// with a turning vehicle within vehicle_radius at some frame of the slow phase.
inline std::vector<HesitationEvent> detect_hesitation(const AgentTrack& vru,
                                                      const std::vector<TurningVehicle>& vehicles,
                                                      const HesitationParams& params = {}) {
  std::vector<const TurningVehicle*> ptrs;
  ptrs.reserve(vehicles.size());
  for (const auto& v : vehicles) ptrs.push_back(&v);
  return detail::hesitation_impl(vru, ptrs, params);
}

inline std::vector<HesitationEvent> detect_hesitation(const AgentTrack& vru,
                                                      const std::vector<AgentTrack>& vehicles,
                                                      const HesitationParams& params = {}) {
  std::vector<const AgentTrack*> ptrs;
  for (const auto& v : vehicles) {
    if (!v.agent_class.vru_flag()) ptrs.push_back(&v);
  }
  return detect_hesitation(vru, prepare_turning(ptrs, params.turn_options), params);
}

/// Hesitation events for every VRU in a dataset, ordered by VRU id then time.
inline std::vector<HesitationEvent> detect_all_hesitations(const std::vector<AgentTrack>& tracks,
                                                           const HesitationParams& params = {},
                                                           unsigned threads = 1) {
  std::vector<const AgentTrack*> vehicles;
  std::vector<const AgentTrack*> vrus;
  for (const auto& t : tracks) (t.agent_class.vru_flag() ? vrus : vehicles).push_back(&t);
  const auto turning = prepare_turning(vehicles, params.turn_options, threads);
  std::vector<std::vector<HesitationEvent>> per_vru(vrus.size());
  parallel_for(vrus.size(), threads, [&](std::size_t i) {
    std::vector<const TurningVehicle*> nearby;
    for (const auto& tv : turning) {
      if (tv.track->end_time() >= vrus[i]->start_time() &&
          tv.track->start_time() <= vrus[i]->end_time()) {
        nearby.push_back(&tv);
      }
    }
    per_vru[i] = detail::hesitation_impl(*vrus[i], nearby, params);
  });
  std::vector<HesitationEvent> out;
  for (auto& list : per_vru) {
    for (auto& e : list) out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const HesitationEvent& l, const HesitationEvent& r) {
    return std::tie(l.vru_id, l.t_slow_start) < std::tie(r.vru_id, r.t_slow_start);
  });
  return out;
}

}  // namespace avcons
