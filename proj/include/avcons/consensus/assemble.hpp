#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "avcons/consensus/consensus.hpp"
#include "avcons/core/agent.hpp"
#include "avcons/flow/gains.hpp"
#include "avcons/flow/headway.hpp"
#include "avcons/interaction/detect.hpp"
#include "avcons/safety/conflict.hpp"
#include "avcons/vru/hesitation.hpp"

namespace avcons {

struct ConsensusInputs {
  const std::vector<AgentTrack>* tracks = nullptr;
  const InteractionSet* interactions = nullptr;
  const std::vector<ConflictMetrics>* conflicts = nullptr;
  const std::vector<HesitationEvent>* hesitations = nullptr;
  const std::vector<HeadwayEvent>* exit_headways = nullptr;
  const std::vector<ChainGain>* gains = nullptr;
};

struct ConsensusOptions {
  ConsensusThresholds thresholds;
  ConsensusPolicy policy;
  /// Per-passage evidence (headway, gain) is matched to an encounter when its
  /// time lies within this many seconds of the encounter interval.
  double evidence_max_gap = 30.0;
};

struct ConsensusRun {
  std::vector<FrameContext> contexts;
  std::vector<ConsensusFrame> frames;
  std::size_t excluded_frames = 0;
};

namespace detail {

inline double interval_gap(double t, double start, double end) {
  if (t < start) return start - t;
  if (t > end) return t - end;
  return 0.0;
}

/// Evidence value whose time is closest to [start, end], within max_gap.
inline std::optional<double> nearest_evidence(const std::vector<std::pair<double, double>>& items,
                                              double start, double end, double max_gap) {
  std::optional<double> best;
  double best_gap = max_gap;
  for (const auto& [t, v] : items) {
    const double g = interval_gap(t, start, end);
    if (g <= best_gap && (!best || g < best_gap)) {
      best = v;
      best_gap = g;
    }
  }
  return best;
}

}  // namespace detail

/// Builds a context for every frame of every AV-subject, VRU-other record and
/// classifies it. Headway and gain evidence is chosen per encounter and
/// applied to all of its frames.
inline ConsensusRun build_consensus(const ConsensusInputs& in, const ConsensusOptions& opt) {
  opt.thresholds.validate();
  std::map<std::string, const AgentTrack*> by_id;
  for (const auto& t : *in.tracks) by_id[t.agent_id] = &t;

  std::map<std::tuple<std::string, std::string, double>, const ConflictMetrics*> conflict_of;
  for (const auto& c : *in.conflicts) conflict_of[{c.subject_id, c.other_id, c.start_time}] = &c;

  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> hes_windows;
  for (const auto& h : *in.hesitations) {
    hes_windows[{h.vehicle_id, h.vru_id}].emplace_back(h.t_slow_start, h.t_recover);
  }

  // AV as follower at the exit line: (follower crossing time, headway).
  std::map<std::string, std::vector<std::pair<double, double>>> headway_of;
  for (const auto& e : *in.exit_headways) {
    headway_of[e.follower_id].emplace_back(e.t_follower, e.headway);
  }
  // AV as platoon leader, first follower gain: (leader t0, gain).
  std::map<std::string, std::vector<std::pair<double, double>>> gain_of;
  for (const auto& g : *in.gains) {
    if (g.status != GainStatus::Ok || g.result.follower_position != 1 || !g.result.gain) continue;
    gain_of[g.platoon_leader_id].emplace_back(g.result.leader_t0, *g.result.gain);
  }

  ConsensusRun run;
  const double half = 0.5 * opt.thresholds.hesitation_window;
  for (const auto& rec : in.interactions->records) {
    if (rec.subject_class.kind != AgentKind::AV || !rec.other_class.vru_flag()) continue;
    const ConflictMetrics* cm = nullptr;
    if (auto it = conflict_of.find({rec.subject_id, rec.other_id, rec.start_time}); it != conflict_of.end()) {
      cm = it->second;
    }
    const AgentTrack* vru = by_id.count(rec.other_id) ? by_id.at(rec.other_id) : nullptr;
    const auto* hes = hes_windows.count({rec.subject_id, rec.other_id})
                          ? &hes_windows.at({rec.subject_id, rec.other_id})
                          : nullptr;

    std::optional<double> headway, gain;
    if (auto it = headway_of.find(rec.subject_id); it != headway_of.end()) {
      headway = detail::nearest_evidence(it->second, rec.start_time, rec.end_time, opt.evidence_max_gap);
    }
    if (auto it = gain_of.find(rec.subject_id); it != gain_of.end()) {
      gain = detail::nearest_evidence(it->second, rec.start_time, rec.end_time, opt.evidence_max_gap);
    }

    std::map<double, double> ttc_at;
    if (cm) {
      for (const auto& p : cm->ttc_series) ttc_at[p.time] = p.ttc;
    }
    const double min_ttc = cm ? cm->min_ttc() : kInfiniteTtc;

    for (const auto& fr : rec.frames) {
      FrameContext ctx;
      ctx.subject_id = rec.subject_id;
      ctx.other_id = rec.other_id;
      ctx.time = fr.time;
      if (auto it = ttc_at.find(fr.time); it != ttc_at.end()) ctx.ttc = it->second;
      ctx.encounter_min_ttc = min_ttc;
      if (cm) ctx.pet = cm->pet;
      if (hes) {
        for (const auto& [a, b] : *hes) {
          if (fr.time >= a - 1e-9 && fr.time <= b + 1e-9) ctx.in_hesitation = true;
        }
      }
      if (vru) {
        std::vector<double> speeds;
        auto lo = std::lower_bound(vru->samples.begin(), vru->samples.end(), fr.time - half - 1e-9,
                                   [](const TrackSample& s, double v) { return s.time < v; });
        for (; lo != vru->samples.end() && lo->time <= fr.time + half + 1e-9; ++lo) {
          speeds.push_back(lo->speed());
        }
        ctx.speed_cv = coefficient_of_variation(speeds);
      }
      ctx.exit_headway = headway;
      ctx.follower_gain = gain;
      auto f = classify_frame(ctx, opt.thresholds, opt.policy);
      if (f) {
        run.frames.push_back(*f);
      } else {
        ++run.excluded_frames;
      }
      run.contexts.push_back(std::move(ctx));
    }
  }
  return run;
}

}  // namespace avcons
