#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "avcons/core/csv.hpp"
#include "avcons/flow/gains.hpp"
#include "avcons/flow/headway.hpp"
#include "avcons/flow/platoon.hpp"
#include "avcons/interaction/detect.hpp"
#include "avcons/safety/conflict.hpp"
#include "avcons/vru/decel.hpp"
#include "avcons/vru/hesitation.hpp"

namespace avcons::pipeline {

namespace detail {

inline double num(const std::vector<std::string>& f, std::size_t i) {
  auto v = csv::parse_number(f.at(i));
  if (!v) throw MissingDependencyError("malformed numeric field '" + f.at(i) + "' in dump");
  return *v;
}

inline std::optional<double> opt_num(const std::vector<std::string>& f, std::size_t i) {
  if (f.at(i).empty()) return std::nullopt;
  return num(f, i);
}

inline AgentClass cls(const std::vector<std::string>& f, std::size_t i) {
  auto k = parse_agent_kind(f.at(i));
  if (!k) throw MissingDependencyError("unknown class '" + f.at(i) + "' in dump");
  return AgentClass{*k};
}

/// Opens a dump and maps each expected column to its index.
class DumpReader {
 public:
  DumpReader(const std::string& path, std::initializer_list<const char*> columns) : reader_(path) {
    for (const char* c : columns) {
      auto idx = reader_.column(c);
      if (!idx) throw MissingDependencyError("dump '" + path + "' lacks column '" + c + "'");
      idx_.push_back(*idx);
    }
  }
  bool next() {
    if (!reader_.next(raw_)) return false;
    row_.clear();
    for (auto i : idx_) row_.push_back(i < raw_.size() ? raw_[i] : std::string());
    return true;
  }
  const std::vector<std::string>& row() const { return row_; }

 private:
  csv::Reader reader_;
  std::vector<std::size_t> idx_;
  std::vector<std::string> raw_, row_;
};

}  // namespace detail

inline void write_interactions(const std::string& path, const InteractionSet& set) {
  csv::Writer w(path);
  w.row("subject_id", "other_id", "subject_class", "other_class", "encounter_start", "time", "distance",
        "bearing", "zone", "zone_index");
  for (const auto& r : set.records) {
    for (const auto& f : r.frames) {
      w.row(r.subject_id, r.other_id, to_string(r.subject_class.kind), to_string(r.other_class.kind), r.start_time,
            f.time, f.distance, f.bearing, set.zone_name(f), f.zone);
    }
  }
  w.close();
}

inline InteractionSet read_interactions(const std::string& path, const ZoneLayout& layout, double dt,
                                        double radius) {
  InteractionSet set;
  set.layout = layout;
  set.dt = dt;
  set.radius = radius;
  detail::DumpReader r(path, {"subject_id", "other_id", "subject_class", "other_class", "encounter_start", "time",
                              "distance", "bearing", "zone_index"});
  while (r.next()) {
    const auto& f = r.row();
    const double start = detail::num(f, 4);
    if (set.records.empty() || set.records.back().subject_id != f[0] || set.records.back().other_id != f[1] ||
        set.records.back().start_time != start) {
      InteractionRecord rec;
      rec.subject_id = f[0];
      rec.other_id = f[1];
      rec.subject_class = detail::cls(f, 2);
      rec.other_class = detail::cls(f, 3);
      rec.start_time = start;
      set.records.push_back(std::move(rec));
    }
    auto& rec = set.records.back();
    const int zone = static_cast<int>(detail::num(f, 8));
    if (zone >= static_cast<int>(layout.sectors().size())) {
      throw MissingDependencyError("interaction dump zone index does not match the zone layout");
    }
    rec.frames.push_back({detail::num(f, 5), detail::num(f, 6), detail::num(f, 7), zone});
    rec.end_time = rec.frames.back().time;
  }
  return set;
}

inline void write_encounters(const std::string& path, const InteractionSet& set,
                             const std::vector<ConflictMetrics>& metrics, double exposure_threshold) {
  csv::Writer w(path);
  w.row("subject_id", "other_id", "subject_class", "other_class", "start_time", "end_time", "frames", "min_ttc",
        "pet", "exposure", "min_separation", "t_min_sep_subject", "t_min_sep_other");
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& r = set.records[i];
    const auto& m = metrics[i];
    w.row(r.subject_id, r.other_id, to_string(r.subject_class.kind), to_string(r.other_class.kind), r.start_time,
          r.end_time, r.frames.size(), m.min_ttc(), m.pet, ttc_exposure(m, exposure_threshold, set.dt),
          m.min_separation, m.min_separation_time_subject, m.min_separation_time_other);
  }
  w.close();
}

inline void write_ttc_frames(const std::string& path, const std::vector<ConflictMetrics>& metrics) {
  csv::Writer w(path);
  w.row("subject_id", "other_id", "encounter_start", "time", "ttc");
  for (const auto& m : metrics) {
    for (const auto& p : m.ttc_series) w.row(m.subject_id, m.other_id, m.start_time, p.time, p.ttc);
  }
  w.close();
}

inline std::vector<ConflictMetrics> read_conflicts(const std::string& encounters_path,
                                                   const std::string& frames_path) {
  std::vector<ConflictMetrics> out;
  std::map<std::tuple<std::string, std::string, double>, std::size_t> index;
  {
    detail::DumpReader r(encounters_path, {"subject_id", "other_id", "start_time", "pet", "min_separation",
                                           "t_min_sep_subject", "t_min_sep_other"});
    while (r.next()) {
      const auto& f = r.row();
      ConflictMetrics m;
      m.subject_id = f[0];
      m.other_id = f[1];
      m.start_time = detail::num(f, 2);
      m.pet = detail::opt_num(f, 3);
      m.min_separation = detail::num(f, 4);
      m.min_separation_time_subject = detail::num(f, 5);
      m.min_separation_time_other = detail::num(f, 6);
      index[{m.subject_id, m.other_id, m.start_time}] = out.size();
      out.push_back(std::move(m));
    }
  }
  detail::DumpReader r(frames_path, {"subject_id", "other_id", "encounter_start", "time", "ttc"});
  while (r.next()) {
    const auto& f = r.row();
    auto it = index.find({f[0], f[1], detail::num(f, 2)});
    if (it == index.end()) throw MissingDependencyError("TTC frame without a matching encounter row");
    out[it->second].ttc_series.push_back({detail::num(f, 3), detail::num(f, 4)});
  }
  return out;
}

inline void write_hesitations(const std::string& path, const std::vector<HesitationEvent>& events) {
  csv::Writer w(path);
  w.row("vru_id", "vehicle_id", "t_walk_start", "t_slow_start", "t_recover", "reference_speed",
        "min_speed_during_slow", "vehicle_distance_at_slow");
  for (const auto& e : events) {
    w.row(e.vru_id, e.vehicle_id, e.t_walk_start, e.t_slow_start, e.t_recover, e.reference_speed,
          e.min_speed_during_slow, e.vehicle_distance_at_slow);
  }
  w.close();
}

inline void write_hesitation_profiles(const std::string& path, const std::vector<HesitationEvent>& events) {
  csv::Writer w(path);
  w.row("vru_id", "vehicle_id", "t_slow_start", "time", "vehicle_speed");
  for (const auto& e : events) {
    for (const auto& [t, v] : e.vehicle_speed_profile) w.row(e.vru_id, e.vehicle_id, e.t_slow_start, t, v);
  }
  w.close();
}

inline std::vector<HesitationEvent> read_hesitations(const std::string& path) {
  std::vector<HesitationEvent> out;
  detail::DumpReader r(path, {"vru_id", "vehicle_id", "t_walk_start", "t_slow_start", "t_recover",
                              "reference_speed", "min_speed_during_slow", "vehicle_distance_at_slow"});
  while (r.next()) {
    const auto& f = r.row();
    HesitationEvent e;
    e.vru_id = f[0];
    e.vehicle_id = f[1];
    e.t_walk_start = detail::num(f, 2);
    e.t_slow_start = detail::num(f, 3);
    e.t_recover = detail::num(f, 4);
    e.reference_speed = detail::num(f, 5);
    e.min_speed_during_slow = detail::num(f, 6);
    e.vehicle_distance_at_slow = detail::num(f, 7);
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_headways(const std::string& path, const std::vector<HeadwayEvent>& events) {
  csv::Writer w(path);
  w.row("boundary", "lane", "leader_id", "leader_class", "follower_id", "follower_class", "t_leader",
        "t_follower", "headway");
  for (const auto& e : events) {
    w.row(to_string(e.boundary), e.lane, e.leader_id, to_string(e.leader_class.kind), e.follower_id,
          to_string(e.follower_class.kind), e.t_leader, e.t_follower, e.headway);
  }
  w.close();
}

inline std::vector<HeadwayEvent> read_headways(const std::string& path) {
  std::vector<HeadwayEvent> out;
  detail::DumpReader r(path, {"boundary", "lane", "leader_id", "leader_class", "follower_id", "follower_class",
                              "t_leader", "t_follower", "headway"});
  while (r.next()) {
    const auto& f = r.row();
    HeadwayEvent e;
    e.boundary = f[0] == "exit" ? Boundary::Exit : Boundary::Entry;
    e.lane = f[1];
    e.leader_id = f[2];
    e.leader_class = detail::cls(f, 3);
    e.follower_id = f[4];
    e.follower_class = detail::cls(f, 5);
    e.t_leader = detail::num(f, 6);
    e.t_follower = detail::num(f, 7);
    e.headway = detail::num(f, 8);
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_platoons(const std::string& path, const std::vector<PlatoonChain>& chains) {
  csv::Writer w(path);
  w.row("leader_id", "leader_class", "formation_time", "size", "members");
  for (const auto& c : chains) {
    std::string members;
    for (const auto& m : c.members) members += (members.empty() ? "" : ";") + m;
    w.row(c.leader_id, to_string(c.leader_class.kind), c.formation_time, c.members.size() + 1, members);
  }
  w.close();
}

inline void write_gains(const std::string& path, const std::vector<ChainGain>& gains) {
  csv::Writer w(path);
  w.row("platoon_leader_id", "platoon_leader_class", "leader_id", "follower_id", "follower_position", "status",
        "gain", "leader_t0", "follower_t0", "half_window", "window_start", "window_end", "leader_norm",
        "follower_norm");
  for (const auto& g : gains) {
    const auto& r = g.result;
    w.row(g.platoon_leader_id, to_string(g.leader_class.kind), r.leader_id, r.follower_id, r.follower_position,
          to_string(g.status), r.gain, r.leader_t0, r.follower_t0, r.half_window, r.window_start(), r.window_end(),
          r.leader_norm, r.follower_norm);
  }
  w.close();
}

inline std::vector<ChainGain> read_gains(const std::string& path) {
  std::vector<ChainGain> out;
  detail::DumpReader r(path, {"platoon_leader_id", "platoon_leader_class", "leader_id", "follower_id",
                              "follower_position", "status", "gain", "leader_t0", "follower_t0", "half_window",
                              "leader_norm", "follower_norm"});
  while (r.next()) {
    const auto& f = r.row();
    ChainGain g;
    g.platoon_leader_id = f[0];
    g.leader_class = detail::cls(f, 1);
    g.result.leader_id = f[2];
    g.result.follower_id = f[3];
    g.result.follower_position = static_cast<int>(detail::num(f, 4));
    g.status = GainStatus::UndefinedGain;
    for (auto s : {GainStatus::Ok, GainStatus::UndefinedGain, GainStatus::NoEntryCrossing,
                   GainStatus::WindowCoverage}) {
      if (f[5] == to_string(s)) g.status = s;
    }
    g.result.gain = detail::opt_num(f, 6);
    g.result.leader_t0 = detail::num(f, 7);
    g.result.follower_t0 = detail::num(f, 8);
    g.result.half_window = detail::num(f, 9);
    g.result.leader_norm = detail::num(f, 10);
    g.result.follower_norm = detail::num(f, 11);
    out.push_back(std::move(g));
  }
  return out;
}

/// Dense matrix export: a '#' header line with origin and cell size, then one
/// row per y cell (south to north), empty fields for cells without samples.
inline void write_decel_grid(const std::string& path, const DecelGrid& g) {
  std::ofstream out(path, std::ios::binary);
  out << "# origin_x=" << csv::format_number(g.origin_x) << " origin_y=" << csv::format_number(g.origin_y)
      << " cell_size=" << csv::format_number(g.cell_size) << " nx=" << g.nx << " ny=" << g.ny
      << " aggregate=" << (g.aggregate == CellAggregate::Mean ? "mean" : "max") << '\n';
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      if (ix) out << ',';
      if (auto v = g.value(ix, iy)) out << csv::format_number(*v);
    }
    out << '\n';
  }
  out.close();
  if (!out) throw Error("cannot write '" + path + "'");
}

inline void write_accel_distance(const std::string& path, const std::vector<AccelDistancePoint>& pts) {
  csv::Writer w(path);
  w.row("subject_id", "subject_class", "other_id", "time", "distance", "accel");
  for (const auto& p : pts) w.row(p.subject_id, to_string(p.subject_kind), p.other_id, p.time, p.distance, p.accel);
  w.close();
}

}  // namespace avcons::pipeline
