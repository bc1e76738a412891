#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/csv.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/geometry.hpp"
#include "json.hpp"

namespace avcons {

/// Column mapping from canonical roles to the names used in a source file.
///
/// Required roles: id, time, x, y, vx, vy, ax, ay, class, lane.
/// Optional roles: length, width, av_flag (a 0/1 column that marks automated
/// vehicles when the class column only says "car").
struct SchemaConfig {
  std::map<std::string, std::string> columns;
  char delimiter = ',';
  double time_scale = 1.0;
  /// Raw class label -> canonical kind name; consulted before the built-in aliases.
  std::map<std::string, std::string> class_map;

  static SchemaConfig canonical() {
    SchemaConfig s;
    for (const char* role : {"id", "time", "x", "y", "vx", "vy", "ax", "ay", "class", "lane",
                             "length", "width"}) {
      s.columns[role] = role;
    }
    return s;
  }

  static SchemaConfig from_json(const nlohmann::json& j) {
    SchemaConfig s;
    try {
      for (auto it = j.at("columns").begin(); it != j.at("columns").end(); ++it) {
        s.columns[it.key()] = it.value().get<std::string>();
      }
      if (j.contains("delimiter")) {
        auto d = j.at("delimiter").get<std::string>();
        if (d == "\\t" || d == "tab") d = "\t";
        if (d.size() != 1) throw ConfigError("schema delimiter must be one character");
        s.delimiter = d[0];
      }
      s.time_scale = j.value("time_scale", 1.0);
      if (j.contains("class_map")) {
        for (auto it = j.at("class_map").begin(); it != j.at("class_map").end(); ++it) {
          s.class_map[it.key()] = it.value().get<std::string>();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("schema config: ") + e.what());
    }
    if (!(s.time_scale > 0.0)) throw ConfigError("schema time_scale must be positive");
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["columns"] = columns;
    j["delimiter"] = std::string(1, delimiter);
    j["time_scale"] = time_scale;
    j["class_map"] = class_map;
    return j;
  }

  std::optional<std::string> column_for(const std::string& role) const {
    auto it = columns.find(role);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
};

inline constexpr const char* kRequiredRoles[] = {"id", "time", "x",  "y",     "vx",
                                                 "vy", "ax",   "ay", "class", "lane"};

struct IngestionReport {
  std::size_t total_rows = 0;
  std::size_t accepted_rows = 0;
  std::map<std::string, std::size_t> rejected;  // reason -> rows
  std::vector<std::string> rejected_tracks;     // whole tracks dropped (irregular sampling)
  std::vector<std::string> warnings;

  std::size_t rejected_rows() const {
    std::size_t n = 0;
    for (const auto& [_, c] : rejected) n += c;
    return n;
  }

  void reject(const std::string& reason, std::size_t n = 1) {
    if (n > 0) rejected[reason] += n;
  }

  nlohmann::json to_json() const {
    return {{"total_rows", total_rows},
            {"accepted_rows", accepted_rows},
            {"rejected_rows", rejected_rows()},
            {"rejected_by_reason", rejected},
            {"rejected_tracks", rejected_tracks},
            {"warnings", warnings}};
  }
};

struct Dataset {
  std::vector<AgentTrack> tracks;
  IngestionReport report;
};

/// Maximum allowed relative deviation of any interval from the track's median interval.
inline constexpr double kMaxIntervalDeviation = 0.5;

namespace detail {

inline std::optional<AgentKind> resolve_class(const SchemaConfig& schema, const std::string& raw) {
  auto it = schema.class_map.find(raw);
  if (it != schema.class_map.end()) return parse_agent_kind(it->second);
  return parse_agent_kind(raw);
}

inline bool truthy(const std::string& s) {
  auto v = csv::parse_number(s);
  if (v) return *v != 0.0;
  return s == "true" || s == "True" || s == "TRUE" || s == "yes";
}

}  // namespace detail

/// Loads a delimited trajectory file into one AgentTrack per id.
///
/// Rows are rejected (and counted in the report) for: wrong field count,
/// empty id, non-numeric kinematics, unknown class label, and a time that
/// repeats an earlier row of the same agent. Tracks whose sampling interval
/// deviates from their median interval by 50% or more are dropped whole.
inline Dataset ingest_dataset(const std::string& path, const SchemaConfig& schema) {
  csv::Reader reader(path, schema.delimiter);
  if (!reader.has_header()) throw EmptyDatasetError("'" + path + "' is empty");

  std::map<std::string, std::size_t> col;
  for (const char* role : kRequiredRoles) {
    auto name = schema.column_for(role);
    if (!name) throw SchemaError(std::string("schema does not map required role '") + role + "'");
    auto idx = reader.column(*name);
    if (!idx) throw SchemaError("missing required column '" + *name + "' (role " + role + ")");
    col[role] = *idx;
  }
  for (const char* role : {"length", "width", "av_flag"}) {
    if (auto name = schema.column_for(role)) {
      if (auto idx = reader.column(*name)) col[role] = *idx;
    }
  }

  struct Pending {
    AgentTrack track;
    std::size_t order = 0;
  };
  std::unordered_map<std::string, Pending> by_id;
  Dataset ds;
  auto& report = ds.report;

  std::vector<std::string> f;
  const std::size_t width = reader.header().size();
  while (reader.next(f)) {
    ++report.total_rows;
    if (f.size() != width) {
      report.reject("field_count");
      continue;
    }
    const std::string& id = f[col["id"]];
    if (id.empty()) {
      report.reject("missing_id");
      continue;
    }
    TrackSample s;
    bool numeric = true;
    auto num = [&](const char* role, double& out) {
      auto v = csv::parse_number(f[col[role]]);
      if (!v || !std::isfinite(*v)) {
        numeric = false;
      } else {
        out = *v;
      }
    };
    num("time", s.time);
    num("x", s.x);
    num("y", s.y);
    num("vx", s.vx);
    num("vy", s.vy);
    num("ax", s.ax);
    num("ay", s.ay);
    if (!numeric) {
      report.reject("non_numeric");
      continue;
    }
    s.time *= schema.time_scale;
    s.lane = f[col["lane"]];

    auto kind = detail::resolve_class(schema, f[col["class"]]);
    if (!kind) {
      report.reject("unknown_class");
      continue;
    }
    if (col.count("av_flag") && detail::truthy(f[col["av_flag"]]) && !is_vru(*kind)) {
      kind = AgentKind::AV;
    }

    auto [it, inserted] = by_id.try_emplace(id);
    auto& pending = it->second;
    if (inserted) {
      pending.order = by_id.size() - 1;
      pending.track.agent_id = id;
      pending.track.agent_class = AgentClass{*kind};
      if (col.count("length")) {
        pending.track.length = csv::parse_number(f[col["length"]]).value_or(0.0);
      }
      if (col.count("width")) {
        pending.track.width = csv::parse_number(f[col["width"]]).value_or(0.0);
      }
    }
    pending.track.samples.push_back(std::move(s));
  }

  if (report.total_rows == 0) throw EmptyDatasetError("'" + path + "' has no data rows");

  std::vector<Pending*> ordered;
  ordered.reserve(by_id.size());
  for (auto& [_, p] : by_id) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Pending* a, const Pending* b) { return a->track.agent_id < b->track.agent_id; });

  for (Pending* p : ordered) {
    auto& samples = p->track.samples;
    std::stable_sort(samples.begin(), samples.end(),
                     [](const TrackSample& a, const TrackSample& b) { return a.time < b.time; });
    std::vector<TrackSample> kept;
    kept.reserve(samples.size());
    for (auto& s : samples) {
      if (!kept.empty() && s.time <= kept.back().time) {
        report.reject("duplicate_time");
        continue;
      }
      kept.push_back(std::move(s));
    }
    samples = std::move(kept);

    if (samples.size() >= 2) {
      double med = median_interval(p->track);
      bool regular = med > 0.0;
      for (std::size_t i = 1; regular && i < samples.size(); ++i) {
        double gap = samples[i].time - samples[i - 1].time;
        if (std::abs(gap - med) >= kMaxIntervalDeviation * med) regular = false;
      }
      if (!regular) {
        report.reject("irregular_sampling", samples.size());
        report.rejected_tracks.push_back(p->track.agent_id);
        continue;
      }
    }
    report.accepted_rows += samples.size();
    ds.tracks.push_back(std::move(p->track));
  }
  if (ds.tracks.empty()) throw EmptyDatasetError("'" + path + "' has no valid tracks");
  return ds;
}

inline constexpr const char* kCanonicalHeader[] = {"id", "time", "x",  "y",     "vx",   "vy",
                                                   "ax", "ay",   "class", "lane", "length",
                                                   "width"};

/// Writes tracks in the canonical schema (readable with SchemaConfig::canonical()).
/// Numbers use shortest round-trip formatting, so a re-ingest is bit-exact.
inline void write_tracks_csv(const std::string& path, const std::vector<AgentTrack>& tracks) {
  csv::Writer w(path);
  w.row(std::vector<std::string>(std::begin(kCanonicalHeader), std::end(kCanonicalHeader)));
  for (const auto& t : tracks) {
    const std::string cls(to_string(t.agent_class.kind));
    for (const auto& s : t.samples) {
      w.row(t.agent_id, s.time, s.x, s.y, s.vx, s.vy, s.ax, s.ay, cls, s.lane, t.length, t.width);
    }
  }
  w.close();
}

}  // namespace avcons
