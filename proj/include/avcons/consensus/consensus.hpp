#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avcons/core/errors.hpp"
#include "json.hpp"

namespace avcons {

struct ConsensusThresholds {
  double ttc_min = 3.0;           // s, safety requires TTC > ttc_min
  double pet_min = 5.0;           // s, safety requires PET > pet_min
  double exit_headway_max = 4.0;  // s, performance requires headway < max
  double gain_max = 1.0;          // performance requires G <= max
  double hesitation_window = 3.0; // s, window for the pedestrian speed stability check
  double speed_cv_max = 0.25;     // stable when coefficient of variation < max

  void validate() const {
    for (double v : {ttc_min, pet_min, exit_headway_max, gain_max, hesitation_window, speed_cv_max}) {
      if (!(v > 0.0)) throw ConfigError("consensus thresholds must be strictly positive");
    }
  }
};

/// How a frame is treated when a condition has no evidence to evaluate.
enum class EvidencePolicy { Strict, Vacuous, ExcludeFrame };

inline const char* to_string(EvidencePolicy p) {
  switch (p) {
    case EvidencePolicy::Strict: return "strict";
    case EvidencePolicy::Vacuous: return "vacuous";
    case EvidencePolicy::ExcludeFrame: return "exclude-frame";
  }
  return "?";
}

inline EvidencePolicy parse_evidence_policy(const std::string& s) {
  if (s == "strict") return EvidencePolicy::Strict;
  if (s == "vacuous") return EvidencePolicy::Vacuous;
  if (s == "exclude-frame" || s == "exclude") return EvidencePolicy::ExcludeFrame;
  throw ConfigError("unknown evidence policy '" + s + "'");
}

enum class TtcSource { PerFrame, EncounterMinimum };

struct ConsensusPolicy {
  EvidencePolicy pet_missing = EvidencePolicy::Vacuous;
  EvidencePolicy performance_missing = EvidencePolicy::Strict;
  TtcSource ttc_source = TtcSource::PerFrame;
};

/// Evidence available for one AV-VRU interaction frame.
struct FrameContext {
  std::string subject_id;
  std::string other_id;
  double time = 0.0;
  double ttc = std::numeric_limits<double>::infinity();
  double encounter_min_ttc = std::numeric_limits<double>::infinity();
  std::optional<double> pet;
  bool in_hesitation = false;
  std::optional<double> speed_cv;  // empty when the VRU speed is zero throughout the window
  std::optional<double> exit_headway;
  std::optional<double> follower_gain;
};

struct ConsensusFrame {
  std::string subject_id;
  std::string other_id;
  double time = 0.0;
  bool safety_ok = false;
  bool interaction_ok = false;
  bool performance_ok = false;
  int satisfied_count = 0;
};

/// Evaluates the three conditions. Returns nullopt when a missing-evidence
/// policy excludes the frame.
inline std::optional<ConsensusFrame> classify_frame(const FrameContext& ctx,
                                                    const ConsensusThresholds& th,
                                                    const ConsensusPolicy& policy = {}) {
  ConsensusFrame f;
  f.subject_id = ctx.subject_id;
  f.other_id = ctx.other_id;
  f.time = ctx.time;

  const double ttc = policy.ttc_source == TtcSource::PerFrame ? ctx.ttc : ctx.encounter_min_ttc;
  bool pet_ok = false;
  if (ctx.pet) {
    pet_ok = *ctx.pet > th.pet_min;
  } else if (policy.pet_missing == EvidencePolicy::ExcludeFrame) {
    return std::nullopt;
  } else {
    pet_ok = policy.pet_missing == EvidencePolicy::Vacuous;
  }
  f.safety_ok = ttc > th.ttc_min && pet_ok;

  const bool stable = !ctx.speed_cv || *ctx.speed_cv < th.speed_cv_max;
  f.interaction_ok = !ctx.in_hesitation && stable;

  if (ctx.exit_headway && ctx.follower_gain) {
    f.performance_ok = *ctx.exit_headway < th.exit_headway_max && *ctx.follower_gain <= th.gain_max;
  } else if (policy.performance_missing == EvidencePolicy::ExcludeFrame) {
    return std::nullopt;
  } else if (policy.performance_missing == EvidencePolicy::Vacuous) {
    // Vacuous applies only to the missing part; evidence that exists must still pass.
    f.performance_ok = (!ctx.exit_headway || *ctx.exit_headway < th.exit_headway_max) &&
                       (!ctx.follower_gain || *ctx.follower_gain <= th.gain_max);
  } else {
    f.performance_ok = false;
  }
  f.satisfied_count = int(f.safety_ok) + int(f.interaction_ok) + int(f.performance_ok);
  return f;
}

struct ConsensusSummary {
  std::size_t total_frames = 0;
  std::array<std::size_t, 4> count_by_satisfied{};  // index = number of conditions met
  std::size_t safety_frames = 0;
  std::size_t interaction_frames = 0;
  std::size_t performance_frames = 0;

  double pct_all_three() const { return pct(count_by_satisfied[3]); }
  double pct_exactly_two() const { return pct(count_by_satisfied[2]); }
  double pct_at_most_one() const { return pct(count_by_satisfied[0] + count_by_satisfied[1]); }

  nlohmann::json to_json() const {
    return {{"total_frames", total_frames},
            {"frames_by_conditions_met", count_by_satisfied},
            {"frames_safety_ok", safety_frames},
            {"frames_interaction_ok", interaction_frames},
            {"frames_performance_ok", performance_frames},
            {"pct_all_three", pct_all_three()},
            {"pct_exactly_two", pct_exactly_two()},
            {"pct_at_most_one", pct_at_most_one()}};
  }

 private:
  double pct(std::size_t n) const {
    return 100.0 * static_cast<double>(n) / static_cast<double>(total_frames);
  }
};

inline ConsensusSummary summarize(const std::vector<ConsensusFrame>& frames) {
  if (frames.empty()) throw EmptySummaryError("no consensus frames to summarize");
  ConsensusSummary s;
  s.total_frames = frames.size();
  for (const auto& f : frames) {
    ++s.count_by_satisfied[static_cast<std::size_t>(f.satisfied_count)];
    s.safety_frames += f.safety_ok;
    s.interaction_frames += f.interaction_ok;
    s.performance_frames += f.performance_ok;
  }
  return s;
}

/// Coefficient of variation (population sd / mean) of a speed series;
/// nullopt when the mean is zero.
inline std::optional<double> coefficient_of_variation(const std::vector<double>& speeds) {
  if (speeds.empty()) return std::nullopt;
  double mean = 0.0;
  for (double v : speeds) mean += v;
  mean /= static_cast<double>(speeds.size());
  if (!(mean > 1e-12)) return std::nullopt;
  double var = 0.0;
  for (double v : speeds) var += (v - mean) * (v - mean);
  var /= static_cast<double>(speeds.size());
  return std::sqrt(var) / mean;
}

}  // namespace avcons
