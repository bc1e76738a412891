#pragma once

#include <map>
#include <string>
#include <vector>

#include "avcons/flow/headway.hpp"
#include "avcons/flow/platoon.hpp"
#include "avcons/flow/stability.hpp"

namespace avcons {

enum class GainStatus { Ok, UndefinedGain, NoEntryCrossing, WindowCoverage };

inline const char* to_string(GainStatus s) {
  switch (s) {
    case GainStatus::Ok: return "ok";
    case GainStatus::UndefinedGain: return "undefined_gain";
    case GainStatus::NoEntryCrossing: return "no_entry_crossing";
    case GainStatus::WindowCoverage: return "window_coverage";
  }
  return "?";
}

struct ChainGain {
  GainResult result;
  GainStatus status = GainStatus::Ok;
  AgentClass leader_class;
  std::string platoon_leader_id;
};

/// Gains for adjacent pairs of each chain, up to `max_position` followers deep.
/// Each vehicle's window is centred on its own entry-line crossing.
inline std::vector<ChainGain> chain_gains(const std::vector<PlatoonChain>& chains,
                                          const std::vector<AgentTrack>& tracks,
                                          const IntersectionGeometry& geometry,
                                          double half_window = kDefaultGainHalfWindow,
                                          std::size_t max_position = 1) {
  std::map<std::string, const AgentTrack*> by_id;
  for (const auto& t : tracks) by_id[t.agent_id] = &t;
  std::vector<ChainGain> out;
  for (const auto& chain : chains) {
    const AgentTrack* pred = by_id.at(chain.leader_id);
    double pred_t0 = chain.formation_time;
    if (auto c = boundary_crossing(*pred, geometry, Boundary::Entry)) pred_t0 = c->time;
    for (std::size_t pos = 0; pos < chain.members.size() && pos < max_position; ++pos) {
      const AgentTrack* fol = by_id.at(chain.members[pos]);
      ChainGain g;
      g.platoon_leader_id = chain.leader_id;
      g.leader_class = chain.leader_class;
      g.result.leader_id = pred->agent_id;
      g.result.follower_id = fol->agent_id;
      g.result.follower_position = static_cast<int>(pos + 1);
      g.result.leader_t0 = pred_t0;
      g.result.half_window = half_window;
      auto crossing = boundary_crossing(*fol, geometry, Boundary::Entry);
      if (!crossing) {
        g.status = GainStatus::NoEntryCrossing;
        out.push_back(std::move(g));
        break;
      }
      g.result.follower_t0 = crossing->time;
      try {
        auto r = stability_gain(*pred, *fol, pred_t0, crossing->time, half_window);
        r.follower_position = g.result.follower_position;
        g.result = r;
        g.status = r.gain ? GainStatus::Ok : GainStatus::UndefinedGain;
      } catch (const WindowCoverageError&) {
        g.status = GainStatus::WindowCoverage;
      }
      out.push_back(std::move(g));
      pred = fol;
      pred_t0 = crossing->time;
    }
  }
  return out;
}

}  // namespace avcons
