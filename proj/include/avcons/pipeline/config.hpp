#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "avcons/consensus/assemble.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/geometry.hpp"
#include "avcons/core/ingest.hpp"
#include "avcons/core/parallel.hpp"
#include "avcons/flow/platoon.hpp"
#include "avcons/interaction/detect.hpp"
#include "avcons/vru/decel.hpp"
#include "avcons/vru/hesitation.hpp"
#include "json.hpp"

namespace avcons::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

inline json default_config() {
  return json::parse(R"({
    "input": "",
    "schema": null,
    "geometry": "",
    "zones": "",
    "scenario": "",
    "output_dir": "avcons_out",
    "threads": 0,
    "seed": 0,
    "dt": 0.1,
    "filters": {"exclude_ids": [], "min_track_duration": 0.0},
    "interactions": {"radius": 30.0, "min_duration": 0.5, "frames_per_chunk": 512},
    "safety": {"pet_proximity": 5.0, "exposure_threshold": 3.0, "ttc_report_cutoff": 10.0,
               "ttc_report_others": "vru", "vru_speed_min": 0.5, "pet_count_threshold": 5.0},
    "flow": {"enabled": true, "headway_cutoff": 5.0, "d0": 4.0, "h": 2.0, "epsilon": 5.0,
             "min_speed": 2.0, "violation_frames": 10, "hold_window": 5.0, "lateral_tolerance": 2.0,
             "gain_half_window": 5.0, "gain_depth": 1, "leader_classes": ["AV", "HDV"]},
    "vru": {"walk_speed": 0.5, "min_walk_frames": 5, "slow_drop_fraction": 0.6, "min_slow_frames": 5,
            "recovery_fraction": 0.9, "vehicle_radius": 15.0, "turn_requirement": "left",
            "turn_window": 3.0, "turn_threshold_deg": 20.0, "turn_min_speed": 0.5,
            "decel_cell": 2.0, "decel_aggregate": "mean", "decel_region": null},
    "consensus": {"ttc_min": 3.0, "pet_min": 5.0, "exit_headway_max": 4.0, "gain_max": 1.0,
                  "hesitation_window": 3.0, "speed_cv_max": 0.25, "pet_missing": "vacuous",
                  "performance_missing": "strict", "ttc_source": "per-frame",
                  "evidence_max_gap": 30.0, "search_target": null}
  })");
}

inline constexpr const char* kSections[] = {"filters", "interactions", "safety", "flow", "vru", "consensus"};
inline constexpr const char* kPathKeys[] = {"input", "geometry", "zones", "scenario", "output_dir"};

/// Assumptions the engine makes where the method description is silent.
inline json recorded_assumptions() {
  return json::array({
      "HDV-led platoons are identified with the same procedure as AV-led platoons",
      "PET per vehicle is reported against all vehicles of the class and against vehicles with at least one encounter",
      "zone TTC distribution defaults to VRU others only",
  });
}

class RunConfig {
 public:
  RunConfig() : doc_(default_config()) {}

  /// Builds a config from a document. A run manifest (an object carrying a
  /// "config" member) is accepted in place of a plain config. Relative paths
  /// resolve against `base`.
  static RunConfig from_json(const json& j, const fs::path& base = fs::current_path()) {
    const json& src = (j.is_object() && j.contains("config") && j.at("config").is_object()) ? j.at("config") : j;
    if (!src.is_object()) throw ConfigError("run config must be an object");
    RunConfig c;
    c.merge(src, base);
    return c;
  }

  static RunConfig load(const std::string& path) {
    const auto p = fs::absolute(path);
    return from_json(read_json_file(p.string()), p.parent_path());
  }

  void merge(const json& src, const fs::path& base) {
    for (auto it = src.begin(); it != src.end(); ++it) {
      if (!doc_.contains(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
      if (doc_.at(it.key()).is_object()) {
        if (!it.value().is_object()) throw ConfigError("config section '" + it.key() + "' must be an object");
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
          set(it.key() + "." + jt.key(), jt.value());
        }
      } else {
        set(it.key(), it.value(), base);
      }
    }
  }

  /// Sets a dotted key ("safety.pet_proximity"). Path-valued keys are made absolute.
  void set(const std::string& dotted, json value, const fs::path& base = fs::current_path()) {
    const auto dot = dotted.find('.');
    json* slot = nullptr;
    std::string key = dotted;
    if (dot == std::string::npos) {
      if (!doc_.contains(dotted) || doc_.at(dotted).is_object()) throw ConfigError("unknown config key '" + dotted + "'");
      slot = &doc_[dotted];
    } else {
      const auto sec = dotted.substr(0, dot);
      key = dotted.substr(dot + 1);
      if (!doc_.contains(sec) || !doc_.at(sec).is_object() || !doc_.at(sec).contains(key)) {
        throw ConfigError("unknown config key '" + dotted + "'");
      }
      slot = &doc_[sec][key];
    }
    if (!slot->is_null() && !value.is_null() && slot->type() != value.type() &&
        !(slot->is_number() && value.is_number())) {
      throw ConfigError("config key '" + dotted + "' has the wrong type");
    }
    if (dot == std::string::npos && is_path_key(dotted) && value.is_string() && !value.get<std::string>().empty()) {
      value = (base / value.get<std::string>()).lexically_normal().string();
    }
    if (dotted == "schema" && value.is_string() && !value.get<std::string>().empty()) {
      value = (base / value.get<std::string>()).lexically_normal().string();
    }
    *slot = std::move(value);
  }

  /// Applies a "--policy name=value" override; the value is read as JSON when
  /// it parses, otherwise as a plain string.
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not name=value");
    const auto name = assignment.substr(0, eq);
    const auto raw = assignment.substr(eq + 1);
    json v = json::parse(raw, nullptr, false);
    if (v.is_discarded()) v = raw;
    set(name, v);
  }

  const json& doc() const { return doc_; }
  const json& section(const std::string& s) const { return doc_.at(s); }

  std::string str(const std::string& key) const { return doc_.at(key).get<std::string>(); }
  fs::path output_dir() const { return fs::path(str("output_dir")); }
  double dt() const { return doc_.at("dt").get<double>(); }
  unsigned threads() const { return resolve_threads(doc_.at("threads").get<unsigned>()); }
  std::uint64_t seed() const { return doc_.at("seed").get<std::uint64_t>(); }
  bool flow_enabled() const { return doc_.at("flow").at("enabled").get<bool>(); }

  /// Checks types and ranges. Does not touch the filesystem.
  void validate() const {
    if (!(dt() > 0.0)) throw ConfigError("dt must be positive");
    if (doc_.at("threads").get<long long>() < 0) throw ConfigError("threads must be non-negative");
    if (!doc_.at("seed").is_number_integer() || doc_.at("seed").get<long long>() < 0) {
      throw ConfigError("seed must be a non-negative integer");
    }
    if (str("output_dir").empty()) throw ConfigError("output_dir must be set");
    for (const char* sec : kSections) {
      for (auto it = doc_.at(sec).begin(); it != doc_.at(sec).end(); ++it) {
        if (!it.value().is_number()) continue;
        const double v = it.value().get<double>();
        const bool may_be_zero = it.key() == "min_duration" || it.key() == "min_track_duration";
        if (!(v > 0.0) && !(may_be_zero && v == 0.0)) {
          throw ConfigError(std::string(sec) + "." + it.key() + " must be positive");
        }
      }
    }
    detection_options();
    spacing_policy().validate();
    consensus_options().thresholds.validate();
    hesitation_params();
    decel_aggregate();
    leader_kinds();
    if (const auto& o = doc_.at("safety").at("ttc_report_others"); o != "vru" && o != "all") {
      throw ConfigError("safety.ttc_report_others must be 'vru' or 'all'");
    }
    if (const auto& r = doc_.at("vru").at("decel_region"); !r.is_null()) decel_region();
  }

  SchemaConfig schema() const {
    const auto& s = doc_.at("schema");
    if (s.is_null()) return SchemaConfig::canonical();
    if (s.is_string()) {
      if (s.get<std::string>().empty()) return SchemaConfig::canonical();
      return SchemaConfig::from_json(read_json_file(s.get<std::string>()));
    }
    return SchemaConfig::from_json(s);
  }

  ZoneLayout zone_layout() const {
    const auto z = str("zones");
    if (z.empty()) return ZoneLayout::default_layout();
    return ZoneLayout::from_json(read_json_file(z));
  }

  DetectionOptions detection_options() const {
    const auto& s = doc_.at("interactions");
    DetectionOptions o;
    o.radius = s.at("radius").get<double>();
    o.min_duration = s.at("min_duration").get<double>();
    o.frames_per_chunk = s.at("frames_per_chunk").get<std::size_t>();
    o.dt = dt();
    o.threads = threads();
    return o;
  }

  SpacingPolicy spacing_policy() const {
    const auto& s = doc_.at("flow");
    return {s.at("d0").get<double>(), s.at("h").get<double>(), s.at("epsilon").get<double>()};
  }

  PlatoonOptions platoon_options() const {
    const auto& s = doc_.at("flow");
    PlatoonOptions o;
    o.min_speed = s.at("min_speed").get<double>();
    o.violation_frames = s.at("violation_frames").get<std::size_t>();
    o.hold_window = s.at("hold_window").get<double>();
    o.lateral_tolerance = s.at("lateral_tolerance").get<double>();
    return o;
  }

  std::vector<AgentKind> leader_kinds() const {
    std::vector<AgentKind> out;
    for (const auto& v : doc_.at("flow").at("leader_classes")) {
      auto k = parse_agent_kind(v.get<std::string>());
      if (!k || !is_platoon_eligible(*k)) throw ConfigError("flow.leader_classes accepts AV and HDV only");
      out.push_back(*k);
    }
    return out;
  }

  HesitationParams hesitation_params() const {
    const auto& s = doc_.at("vru");
    HesitationParams p;
    p.walk_speed = s.at("walk_speed").get<double>();
    p.min_walk_frames = s.at("min_walk_frames").get<std::size_t>();
    p.slow_drop_fraction = s.at("slow_drop_fraction").get<double>();
    p.min_slow_frames = s.at("min_slow_frames").get<std::size_t>();
    p.recovery_fraction = s.at("recovery_fraction").get<double>();
    p.vehicle_radius = s.at("vehicle_radius").get<double>();
    const auto turn = s.at("turn_requirement").get<std::string>();
    if (turn == "left") {
      p.turn = TurnRequirement::LeftOnly;
    } else if (turn == "any") {
      p.turn = TurnRequirement::AnyTurn;
    } else {
      throw ConfigError("vru.turn_requirement must be 'left' or 'any'");
    }
    p.turn_options.window = s.at("turn_window").get<double>();
    p.turn_options.threshold_deg = s.at("turn_threshold_deg").get<double>();
    p.turn_options.min_speed = s.at("turn_min_speed").get<double>();
    if (!(p.slow_drop_fraction < 1.0) || !(p.recovery_fraction <= 1.0) ||
        !(p.slow_drop_fraction < p.recovery_fraction)) {
      throw ConfigError("vru: need slow_drop_fraction < recovery_fraction <= 1");
    }
    return p;
  }

  CellAggregate decel_aggregate() const {
    const auto a = doc_.at("vru").at("decel_aggregate").get<std::string>();
    if (a == "mean") return CellAggregate::Mean;
    if (a == "max") return CellAggregate::Max;
    throw ConfigError("vru.decel_aggregate must be 'mean' or 'max'");
  }

  std::optional<Region> decel_region() const {
    const auto& r = doc_.at("vru").at("decel_region");
    if (r.is_null()) return std::nullopt;
    if (!r.is_array() || r.size() != 4) throw ConfigError("vru.decel_region must be [xmin, ymin, xmax, ymax]");
    Region g{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    if (!(g.xmax > g.xmin) || !(g.ymax > g.ymin)) throw ConfigError("vru.decel_region is empty");
    return g;
  }

  ConsensusOptions consensus_options() const {
    const auto& s = doc_.at("consensus");
    ConsensusOptions o;
    o.thresholds.ttc_min = s.at("ttc_min").get<double>();
    o.thresholds.pet_min = s.at("pet_min").get<double>();
    o.thresholds.exit_headway_max = s.at("exit_headway_max").get<double>();
    o.thresholds.gain_max = s.at("gain_max").get<double>();
    o.thresholds.hesitation_window = s.at("hesitation_window").get<double>();
    o.thresholds.speed_cv_max = s.at("speed_cv_max").get<double>();
    o.policy.pet_missing = parse_evidence_policy(s.at("pet_missing").get<std::string>());
    o.policy.performance_missing = parse_evidence_policy(s.at("performance_missing").get<std::string>());
    const auto src = s.at("ttc_source").get<std::string>();
    if (src == "per-frame") {
      o.policy.ttc_source = TtcSource::PerFrame;
    } else if (src == "encounter-min") {
      o.policy.ttc_source = TtcSource::EncounterMinimum;
    } else {
      throw ConfigError("consensus.ttc_source must be 'per-frame' or 'encounter-min'");
    }
    o.evidence_max_gap = s.at("evidence_max_gap").get<double>();
    const auto& target = s.at("search_target");
    if (!target.is_null() && (!target.is_array() || target.size() != 3)) {
      throw ConfigError("consensus.search_target must be [all_three, exactly_two, at_most_one]");
    }
    return o;
  }

 private:
  static bool is_path_key(const std::string& k) {
    for (const char* p : kPathKeys) {
      if (k == p) return true;
    }
    return false;
  }

  json doc_;
};

}  // namespace avcons::pipeline
