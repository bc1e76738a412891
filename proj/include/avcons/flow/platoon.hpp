#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/geometry.hpp"
#include "avcons/flow/headway.hpp"

namespace avcons {

/// Affine spacing policy: a follower belongs to the platoon while
/// gap - (d0 + h * v) <= epsilon.
struct SpacingPolicy {
  double d0 = 4.0;       // standstill distance, m
  double h = 2.0;        // desired time headway, s
  double epsilon = 5.0;  // tolerance, m

  void validate() const {
    if (!(d0 > 0.0) || !(h > 0.0) || !(epsilon >= 0.0)) {
      throw ConfigError("spacing policy requires d0 > 0, h > 0, epsilon >= 0");
    }
  }

  double threshold(double speed) const { return d0 + h * speed + epsilon; }
  bool satisfied(double gap, double speed) const { return gap - (d0 + h * speed) <= epsilon; }
};

struct PlatoonOptions {
  double min_speed = 2.0;              // leader speed at entry, m/s
  std::size_t violation_frames = 10;   // consecutive violating frames that break membership
  double hold_window = 5.0;            // s after formation during which violations are checked
  double lateral_tolerance = 2.0;      // m, used when the leader has no lane id
};

struct PlatoonChain {
  std::string leader_id;
  AgentClass leader_class;
  double formation_time = 0.0;
  std::vector<std::string> members;  // ordered, first follower first
};

/// Bumper gap between two simultaneous samples: centre distance minus half lengths.
inline double bumper_gap(const TrackSample& a, double length_a, const TrackSample& b,
                         double length_b) {
  return std::hypot(a.x - b.x, a.y - b.y) - 0.5 * (length_a + length_b);
}

namespace detail {

/// Membership of `follower` behind `pred`: the spacing condition must hold at
/// entry_time and must not be violated for `violation_frames` consecutive
/// frames within the hold window after it.
inline bool platoon_member(const AgentTrack& pred, const AgentTrack& follower,
                           const SpacingPolicy& policy, double entry_time,
                           const PlatoonOptions& opt) {
  const TrackSample* p0 = pred.sample_at(entry_time);
  const TrackSample* f0 = follower.sample_at(entry_time);
  if (!p0 || !f0) return false;
  if (!policy.satisfied(bumper_gap(*p0, pred.length, *f0, follower.length), f0->speed())) {
    return false;
  }
  auto fi = follower.index_at(entry_time);
  std::size_t run = 0;
  for (std::size_t k = *fi + 1; k < follower.samples.size(); ++k) {
    const TrackSample& f = follower.samples[k];
    if (f.time > entry_time + opt.hold_window + 1e-9) break;
    const TrackSample* p = pred.sample_at(f.time);
    if (!p) break;
    if (policy.satisfied(bumper_gap(*p, pred.length, f, follower.length), f.speed())) {
      run = 0;
    } else if (++run >= opt.violation_frames) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Builds the chain of vehicles upstream of `leader` at entry_time. Candidates
/// are AV/HDV tracks in the leader's lane (or laterally aligned when the leader
/// has no lane), behind the leader along its heading, ordered by distance. The
/// chain ends at the first candidate that fails the membership test.
inline PlatoonChain identify_platoon(const AgentTrack& leader,
                                     const std::vector<const AgentTrack*>& candidates,
                                     const SpacingPolicy& policy, double entry_time,
                                     const PlatoonOptions& opt = {}) {
  policy.validate();
  PlatoonChain chain;
  chain.leader_id = leader.agent_id;
  chain.leader_class = leader.agent_class;
  chain.formation_time = entry_time;

  const TrackSample* ls = leader.sample_at(entry_time);
  if (!ls || !(ls->speed() > opt.min_speed)) return chain;
  const double v = ls->speed();
  const Vec2 u{ls->vx / v, ls->vy / v};

  struct Cand {
    double along;
    const AgentTrack* track;
  };
  std::vector<Cand> upstream;
  for (const AgentTrack* c : candidates) {
    if (c == &leader || c->agent_id == leader.agent_id) continue;
    if (!c->agent_class.platoon_eligible()) continue;
    const TrackSample* cs = c->sample_at(entry_time);
    if (!cs) continue;
    const Vec2 rel{cs->x - ls->x, cs->y - ls->y};
    if (!ls->lane.empty()) {
      if (cs->lane != ls->lane) continue;
    } else if (std::abs(cross(u, rel)) > opt.lateral_tolerance) {
      continue;
    }
    const double along = dot(u, rel);
    if (along < 0.0) upstream.push_back({along, c});
  }
  std::sort(upstream.begin(), upstream.end(), [](const Cand& l, const Cand& r) {
    if (l.along != r.along) return l.along > r.along;
    return l.track->agent_id < r.track->agent_id;
  });

  const AgentTrack* pred = &leader;
  for (const auto& c : upstream) {
    if (!detail::platoon_member(*pred, *c.track, policy, entry_time, opt)) break;
    chain.members.push_back(c.track->agent_id);
    pred = c.track;
  }
  return chain;
}

inline PlatoonChain identify_platoon(const AgentTrack& leader,
                                     const std::vector<AgentTrack>& candidates,
                                     const SpacingPolicy& policy, double entry_time,
                                     const PlatoonOptions& opt = {}) {
  std::vector<const AgentTrack*> ptrs;
  ptrs.reserve(candidates.size());
  for (const auto& c : candidates) ptrs.push_back(&c);
  return identify_platoon(leader, ptrs, policy, entry_time, opt);
}

struct PlatoonSearchResult {
  std::vector<PlatoonChain> chains;
  std::vector<std::string> warnings;
};

/// Runs identify_platoon for every AV or HDV that crosses its lane's entry
/// line faster than min_speed (and during green when signal data exists).
/// Chains are returned for every qualifying leader, including leader-only ones.
inline PlatoonSearchResult find_platoons(const std::vector<AgentTrack>& tracks,
                                         const IntersectionGeometry& geometry,
                                         const SpacingPolicy& policy,
                                         const PlatoonOptions& opt = {}) {
  PlatoonSearchResult result;
  if (!geometry.has_signals()) {
    result.warnings.push_back("no signal phases supplied; platoon leaders filtered by speed only");
  }
  std::vector<const AgentTrack*> all;
  all.reserve(tracks.size());
  for (const auto& t : tracks) all.push_back(&t);
  for (const auto& t : tracks) {
    if (!t.agent_class.platoon_eligible()) continue;
    auto entry = boundary_crossing(t, geometry, Boundary::Entry);
    if (!entry) continue;
    if (geometry.has_signals()) {
      auto phase = geometry.phase_at(entry->lane, entry->time);
      if (phase != SignalPhase::Green) continue;
    }
    // The chain is evaluated on the sample grid at or just after the crossing.
    auto it = std::lower_bound(t.samples.begin(), t.samples.end(), entry->time,
                               [](const TrackSample& s, double v) { return s.time < v; });
    if (it == t.samples.end()) continue;
    if (!(it->speed() > opt.min_speed)) continue;
    result.chains.push_back(identify_platoon(t, all, policy, it->time, opt));
  }
  std::sort(result.chains.begin(), result.chains.end(), [](const PlatoonChain& l, const PlatoonChain& r) {
    return std::tie(l.formation_time, l.leader_id) < std::tie(r.formation_time, r.leader_id);
  });
  return result;
}

}  // namespace avcons
