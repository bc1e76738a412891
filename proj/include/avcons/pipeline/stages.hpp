#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "avcons/consensus/assemble.hpp"
#include "avcons/core/ingest.hpp"
#include "avcons/core/parallel.hpp"
#include "avcons/core/resample.hpp"
#include "avcons/pipeline/artifacts.hpp"
#include "avcons/pipeline/config.hpp"
#include "avcons/pipeline/dumps.hpp"
#include "avcons/safety/conflict.hpp"

namespace avcons::pipeline {

inline constexpr const char* kStages[] = {"ingest", "interactions", "safety", "flow", "vru", "consensus"};

inline bool is_stage(const std::string& s) {
  return std::any_of(std::begin(kStages), std::end(kStages), [&](const char* k) { return s == k; });
}

inline std::vector<std::string> dependencies(const std::string& stage, const RunConfig& cfg) {
  if (stage == "ingest") return {};
  if (stage == "interactions" || stage == "flow") return {"ingest"};
  if (stage == "safety" || stage == "vru") return {"ingest", "interactions"};
  if (stage == "consensus") {
    std::vector<std::string> d{"ingest", "interactions", "safety", "vru"};
    if (cfg.flow_enabled()) d.emplace_back("flow");
    return d;
  }
  throw ConfigError("unknown stage '" + stage + "'");
}

/// The configuration values a stage's outputs depend on directly.
inline json stage_settings(const std::string& stage, const RunConfig& cfg) {
  const auto& d = cfg.doc();
  if (stage == "ingest") {
    return {{"input", d.at("input")}, {"schema", d.at("schema")}, {"geometry", d.at("geometry")},
            {"dt", d.at("dt")}, {"filters", d.at("filters")}};
  }
  if (stage == "interactions") return {{"interactions", d.at("interactions")}, {"zones", d.at("zones")}};
  return {{stage, d.at(stage)}};
}

struct StageContext {
  StageContext(const RunConfig& c, std::string s) : cfg(c), stage(std::move(s)), out(c.output_dir()), staging(out) {}

  const RunConfig& cfg;
  std::string stage;
  fs::path out;
  Staging staging;
  json inputs = json::object();
  json notes = json::array();
  json summary = json::object();

  /// Path of an upstream artifact in the output directory, recorded with its hash.
  std::string use(const std::string& name) {
    const auto p = out / name;
    inputs[name] = sha256_file(p);
    return p.string();
  }

  void use_external(const std::string& path) { inputs[path] = sha256_file(path); }

  json finish() {
    json m;
    m["stage"] = stage;
    m["settings"] = stage_settings(stage, cfg);
    m["inputs"] = inputs;
    m["outputs"] = staging.commit();
    m["notes"] = notes;
    m["summary"] = summary;
    m["threads"] = cfg.threads();
    m["seed"] = cfg.seed();
    const auto path = manifest_path(out, stage);
    write_text(path.string() + ".partial", m.dump(2) + "\n");
    fs::rename(path.string() + ".partial", path);
    return m;
  }
};

/// Verifies that a dependency's manifest exists and that everything it read
/// and wrote is unchanged. Differences in the dependency's own settings are
/// noted; for ingest they mean different data and are refused.
inline json check_dependency(StageContext& ctx, const std::string& dep) {
  const auto mp = manifest_path(ctx.out, dep);
  if (!fs::exists(mp)) {
    throw MissingDependencyError("stage '" + ctx.stage + "' needs the output of '" + dep + "', but " +
                                 mp.string() + " does not exist; run '" + dep + "' first");
  }
  const json m = read_json(mp);
  auto verify = [&](const json& files, const char* what) {
    for (auto it = files.begin(); it != files.end(); ++it) {
      const fs::path p = fs::path(it.key()).is_absolute() ? fs::path(it.key()) : ctx.out / it.key();
      if (!fs::exists(p)) {
        throw MissingDependencyError("'" + dep + "' " + what + " '" + p.string() + "' is missing; rerun '" + dep + "'");
      }
      if (sha256_file(p) != it.value().get<std::string>()) {
        throw MissingDependencyError("stale artifact: '" + p.string() + "' changed since '" + dep + "' ran (" + what +
                                     " hash mismatch); rerun '" + dep + "'");
      }
    }
  };
  verify(m.at("outputs"), "output");
  verify(m.at("inputs"), "input");
  const json now = stage_settings(dep, ctx.cfg);
  if (m.at("settings") != now) {
    if (dep == "ingest") {
      throw MissingDependencyError("stale artifact: ingest ran with a different input, schema, geometry, dt or "
                                   "filter setting; rerun 'ingest'");
    }
    ctx.notes.push_back("upstream stage '" + dep + "' ran with different settings than the current config; its "
                        "recorded outputs were used unchanged");
  }
  return m;
}

inline void check_dependencies(StageContext& ctx) {
  for (const auto& d : dependencies(ctx.stage, ctx.cfg)) check_dependency(ctx, d);
}

inline std::vector<AgentTrack> load_stage_tracks(StageContext& ctx) {
  return ingest_dataset(ctx.use("tracks.csv"), SchemaConfig::canonical()).tracks;
}

inline std::optional<IntersectionGeometry> load_stage_geometry(StageContext& ctx) {
  if (!fs::exists(ctx.out / "geometry.json")) return std::nullopt;
  return geometry_from_json(read_json_file(ctx.use("geometry.json")));
}

inline InteractionSet load_stage_interactions(StageContext& ctx) {
  const auto layout = ZoneLayout::from_json(read_json_file(ctx.use("zones.json")));
  const auto& s = ctx.cfg.section("interactions");
  return read_interactions(ctx.use("interactions.csv"), layout, ctx.cfg.dt(), s.at("radius").get<double>());
}

inline std::size_t undirected_count(const InteractionSet& set) {
  return static_cast<std::size_t>(std::count_if(set.records.begin(), set.records.end(),
                                                [](const InteractionRecord& r) { return r.subject_id < r.other_id; }));
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------- ingest

inline json run_ingest(const RunConfig& cfg) {
  StageContext ctx(cfg, "ingest");
  const auto input = cfg.str("input");
  if (input.empty()) throw ConfigError("no input trajectory file configured (--input)");
  if (!fs::exists(input)) throw ConfigError("input file '" + input + "' does not exist");
  const auto& schema_doc = cfg.doc().at("schema");
  if (schema_doc.is_string() && !schema_doc.get<std::string>().empty()) {
    if (!fs::exists(schema_doc.get<std::string>())) throw ConfigError("schema file does not exist");
    ctx.use_external(schema_doc.get<std::string>());
  }
  std::optional<IntersectionGeometry> geometry;
  if (const auto g = cfg.str("geometry"); !g.empty()) {
    if (!fs::exists(g)) throw ConfigError("geometry file '" + g + "' does not exist");
    geometry = load_geometry(g);
    ctx.use_external(g);
  }
  const auto schema = cfg.schema();
  ctx.use_external(input);

  Dataset ds = ingest_dataset(input, schema);
  auto& report = ds.report;
  const auto& filters = cfg.section("filters");
  std::set<std::string> excluded;
  for (const auto& id : filters.at("exclude_ids")) excluded.insert(id.get<std::string>());
  const double min_dur = filters.at("min_track_duration").get<double>();

  std::vector<AgentTrack> tracks;
  for (auto& t : ds.tracks) {
    const std::size_t n = t.samples.size();
    auto drop = [&](const std::string& reason, const std::string& why) {
      report.reject(reason, n);
      report.accepted_rows -= n;
      report.rejected_tracks.push_back(t.agent_id);
      report.warnings.push_back("track '" + t.agent_id + "' dropped: " + why);
    };
    if (excluded.count(t.agent_id)) {
      drop("filtered_track", "excluded by id filter");
      continue;
    }
    if (t.duration() < min_dur) {
      drop("filtered_track", "shorter than the minimum track duration");
      continue;
    }
    try {
      tracks.push_back(resample_track(t, cfg.dt(), 0.0));
    } catch (const SingleSampleTrackError&) {
      drop("single_sample_track", "fewer than two samples on the frame grid");
    }
  }
  if (tracks.empty()) throw EmptyDatasetError("no tracks remain after ingestion");

  write_tracks_csv(ctx.staging.path("tracks.csv"), tracks);
  if (geometry) {
    ctx.staging.write_json("geometry.json", geometry_to_json(*geometry));
  } else {
    std::error_code ec;
    fs::remove(ctx.out / "geometry.json", ec);
  }
  std::map<std::string, std::size_t> by_class;
  for (const auto& t : tracks) ++by_class[std::string(to_string(t.agent_class.kind))];
  json rep = report.to_json();
  rep["tracks"] = tracks.size();
  rep["unique_ids_by_class"] = by_class;
  rep["frame_dt"] = cfg.dt();
  ctx.staging.write_json("ingestion_report.json", rep);
  ctx.summary = {{"tracks", tracks.size()}, {"unique_ids_by_class", by_class},
                 {"rejected_rows", report.rejected_rows()}};
  return ctx.finish();
}

// ---------------------------------------------------------------- interactions

inline json run_interactions(const RunConfig& cfg) {
  StageContext ctx(cfg, "interactions");
  check_dependencies(ctx);
  const auto tracks = load_stage_tracks(ctx);
  if (const auto z = cfg.str("zones"); !z.empty()) ctx.use_external(z);
  auto opt = cfg.detection_options();
  opt.layout = cfg.zone_layout();
  const auto set = detect_interactions(tracks, opt);

  write_interactions(ctx.staging.path("interactions.csv"), set);
  ctx.staging.write_json("zones.json", set.layout.to_json());
  std::size_t frames = 0;
  std::map<std::string, std::size_t> by_pair;
  for (const auto& r : set.records) {
    frames += r.frames.size();
    ++by_pair[std::string(to_string(r.subject_class.kind)) + "->" + std::string(to_string(r.other_class.kind))];
  }
  ctx.summary = {{"encounters", undirected_count(set)},
                 {"directed_records", set.records.size()},
                 {"frames", frames},
                 {"records_by_class_pair", by_pair}};
  ctx.staging.write_json("interactions_summary.json", ctx.summary);
  return ctx.finish();
}

// ---------------------------------------------------------------- safety

inline json run_safety(const RunConfig& cfg) {
  StageContext ctx(cfg, "safety");
  check_dependencies(ctx);
  const auto& s = cfg.section("safety");
  const double pet_prox = s.at("pet_proximity").get<double>();
  const double exposure_th = s.at("exposure_threshold").get<double>();
  const double cutoff = s.at("ttc_report_cutoff").get<double>();
  const bool vru_only = s.at("ttc_report_others").get<std::string>() == "vru";
  const double pet_count_th = s.at("pet_count_threshold").get<double>();

  const auto tracks = load_stage_tracks(ctx);
  const auto geometry = load_stage_geometry(ctx);
  const auto set = load_stage_interactions(ctx);
  std::map<std::string, const AgentTrack*> by_id;
  for (const auto& t : tracks) by_id[t.agent_id] = &t;
  for (const auto& r : set.records) {
    if (!by_id.count(r.subject_id) || !by_id.count(r.other_id)) {
      throw MissingDependencyError("interaction dump names an agent missing from tracks.csv");
    }
  }

  std::vector<ConflictMetrics> metrics(set.records.size());
  parallel_for(set.records.size(), cfg.threads(), [&](std::size_t i) {
    const auto& r = set.records[i];
    metrics[i] = conflict_metrics(r, *by_id.at(r.subject_id), *by_id.at(r.other_id), pet_prox);
  });
  write_encounters(ctx.staging.path("safety_encounters.csv"), set, metrics, exposure_th);
  write_ttc_frames(ctx.staging.path("safety_ttc_frames.csv"), metrics);

  {
    csv::Writer w(ctx.staging.path("ttc_zone_distribution.csv"));
    w.row("subject_id", "other_id", "subject_class", "other_class", "time", "zone", "ttc");
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      const auto& r = set.records[i];
      if (vru_only && !r.other_class.vru_flag()) continue;
      std::map<double, const InteractionFrame*> frame_at;
      for (const auto& f : r.frames) frame_at[f.time] = &f;
      for (const auto& p : metrics[i].ttc_series) {
        if (!std::isfinite(p.ttc) || !(p.ttc < cutoff)) continue;
        w.row(r.subject_id, r.other_id, to_string(r.subject_class.kind), to_string(r.other_class.kind), p.time,
              set.zone_name(*frame_at.at(p.time)), p.ttc);
      }
    }
    w.close();
  }

  std::vector<CoOccupancyEvent> co;
  if (geometry && !geometry->crosswalk_zones.empty()) {
    co = detect_co_occupancy(tracks, *geometry, s.at("vru_speed_min").get<double>(), cfg.dt());
  } else {
    ctx.notes.push_back("co-occupancy not computed: no crosswalk zones in the geometry");
  }
  {
    csv::Writer w(ctx.staging.path("co_occupancy.csv"));
    w.row("vehicle_id", "vehicle_class", "vru_id", "zone", "start", "end", "duration", "vru_speed_at_entry",
          "vru_count");
    for (const auto& e : co) {
      w.row(e.vehicle_id, to_string(by_id.at(e.vehicle_id)->agent_class.kind), e.vru_id, e.zone, e.start, e.end,
            e.end - e.start, e.vru_speed_at_entry, e.vru_count);
    }
    w.close();
  }

  json per_vehicle = json::object();
  {
    csv::Writer w(ctx.staging.path("pet_per_vehicle.csv"));
    w.row("vehicle_class", "vehicles_total", "vehicles_with_encounter", "pet_events", "per_vehicle_all",
          "per_vehicle_with_encounter");
    for (AgentKind k : {AgentKind::AV, AgentKind::HDV}) {
      std::size_t total = 0, events = 0;
      std::set<std::string> active;
      for (const auto& t : tracks) total += t.agent_class.kind == k;
      for (std::size_t i = 0; i < metrics.size(); ++i) {
        if (set.records[i].subject_class.kind != k) continue;
        active.insert(set.records[i].subject_id);
        if (metrics[i].pet && *metrics[i].pet < pet_count_th) ++events;
      }
      std::optional<double> all, act;
      if (total) all = static_cast<double>(events) / static_cast<double>(total);
      if (!active.empty()) act = static_cast<double>(events) / static_cast<double>(active.size());
      w.row(to_string(k), total, active.size(), events, all, act);
      per_vehicle[std::string(to_string(k))] = {{"vehicles_total", total},
                                                {"vehicles_with_encounter", active.size()},
                                                {"pet_events", events}};
    }
    w.close();
  }

  double min_ttc = kInfiniteTtc;
  json min_pair = nullptr;
  std::size_t pet_present = 0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (metrics[i].min_ttc() < min_ttc) {
      min_ttc = metrics[i].min_ttc();
      min_pair = {metrics[i].subject_id, metrics[i].other_id};
    }
    pet_present += metrics[i].pet.has_value();
  }
  ctx.summary = {{"encounters", undirected_count(set)},
                 {"directed_records", set.records.size()},
                 {"min_ttc", finite_or_null(min_ttc)},
                 {"min_ttc_pair", min_pair},
                 {"records_with_pet", pet_present},
                 {"co_occupancy_events", co.size()},
                 {"pet_per_vehicle", per_vehicle},
                 {"thresholds", s}};
  ctx.staging.write_json("safety_summary.json", ctx.summary);
  return ctx.finish();
}

// ---------------------------------------------------------------- flow

inline void require_flow_geometry(const std::optional<IntersectionGeometry>& g) {
  if (!g) {
    throw ConfigError("flow analysis requested but no geometry is configured; set 'geometry' or flow.enabled=false");
  }
  if (g->entry_lines.empty() && g->exit_lines.empty()) {
    throw ConfigError("flow analysis requested but the geometry has no entry or exit lines");
  }
}

inline json run_flow(const RunConfig& cfg) {
  StageContext ctx(cfg, "flow");
  check_dependencies(ctx);
  const auto geometry = load_stage_geometry(ctx);
  require_flow_geometry(geometry);
  const auto& s = cfg.section("flow");
  const auto tracks = load_stage_tracks(ctx);

  const double cutoff = s.at("headway_cutoff").get<double>();
  auto entry = compute_headways(tracks, *geometry, Boundary::Entry, cutoff);
  auto exit = compute_headways(tracks, *geometry, Boundary::Exit, cutoff);
  std::vector<HeadwayEvent> events = entry.events;
  events.insert(events.end(), exit.events.begin(), exit.events.end());
  for (const auto& w : entry.warnings) ctx.notes.push_back(w);
  for (const auto& w : exit.warnings) ctx.notes.push_back(w);

  auto search = find_platoons(tracks, *geometry, cfg.spacing_policy(), cfg.platoon_options());
  for (const auto& w : search.warnings) ctx.notes.push_back(w);
  const auto kinds = cfg.leader_kinds();
  std::vector<PlatoonChain> chains;
  for (auto& c : search.chains) {
    if (std::find(kinds.begin(), kinds.end(), c.leader_class.kind) != kinds.end()) chains.push_back(std::move(c));
  }
  const auto gains = chain_gains(chains, tracks, *geometry, s.at("gain_half_window").get<double>(),
                                 s.at("gain_depth").get<std::size_t>());

  write_headways(ctx.staging.path("headways.csv"), events);
  write_platoons(ctx.staging.path("platoons.csv"), chains);
  write_gains(ctx.staging.path("gains.csv"), gains);

  json hw = json::object();
  for (const auto& e : events) {
    auto& slot = hw[to_string(e.boundary)][std::string(to_string(e.follower_class.kind))];
    if (slot.is_null()) slot = {{"count", 0}, {"sum", 0.0}};
    slot["count"] = slot["count"].get<std::size_t>() + 1;
    slot["sum"] = slot["sum"].get<double>() + e.headway;
  }
  for (auto& [b, per] : hw.items()) {
    for (auto& [k, slot] : per.items()) {
      slot["mean"] = slot["sum"].get<double>() / slot["count"].get<double>();
      slot.erase("sum");
    }
  }
  json pl = json::object();
  for (const auto& c : chains) {
    auto& slot = pl[std::string(to_string(c.leader_class.kind))];
    if (slot.is_null()) slot = {{"chains", 0}, {"with_followers", 0}};
    slot["chains"] = slot["chains"].get<std::size_t>() + 1;
    slot["with_followers"] = slot["with_followers"].get<std::size_t>() + (c.members.empty() ? 0 : 1);
  }
  json gs = json::object();
  for (const auto& g : gains) {
    auto& slot = gs[std::string(to_string(g.leader_class.kind))];
    if (slot.is_null()) slot = {{"computed", 0}, {"stable", 0}, {"not_computed", 0}};
    if (g.status == GainStatus::Ok) {
      slot["computed"] = slot["computed"].get<std::size_t>() + 1;
      slot["stable"] = slot["stable"].get<std::size_t>() + (g.result.stable() ? 1 : 0);
    } else {
      slot["not_computed"] = slot["not_computed"].get<std::size_t>() + 1;
    }
  }
  ctx.summary = {{"headways", hw}, {"platoons", pl}, {"gains", gs}, {"settings", s},
                 {"assumptions", json::array({recorded_assumptions()[0]})}};
  ctx.staging.write_json("flow_summary.json", ctx.summary);
  return ctx.finish();
}

// ---------------------------------------------------------------- vru

inline json run_vru(const RunConfig& cfg) {
  StageContext ctx(cfg, "vru");
  check_dependencies(ctx);
  const auto params = cfg.hesitation_params();
  const auto tracks = load_stage_tracks(ctx);
  const auto set = load_stage_interactions(ctx);

  const auto events = detect_all_hesitations(tracks, params, cfg.threads());
  write_hesitations(ctx.staging.path("hesitations.csv"), events);
  write_hesitation_profiles(ctx.staging.path("hesitation_vehicle_profiles.csv"), events);

  const double cell = cfg.section("vru").at("decel_cell").get<double>();
  const Region region = cfg.decel_region().value_or(bounding_region(tracks, cell));
  json grids = json::object();
  for (AgentKind k : {AgentKind::AV, AgentKind::HDV}) {
    const auto g = build_decel_grid(tracks, region, cell, k, cfg.decel_aggregate());
    write_decel_grid(ctx.staging.path("decel_grid_" + std::string(to_string(k)) + ".csv"), g);
    grids[std::string(to_string(k))] = {{"decelerating_frames", g.total_count()}, {"nx", g.nx}, {"ny", g.ny}};
  }
  const auto pts = accel_vs_distance(set, tracks);
  write_accel_distance(ctx.staging.path("accel_vs_distance.csv"), pts);

  std::map<std::string, const AgentTrack*> by_id;
  for (const auto& t : tracks) by_id[t.agent_id] = &t;
  std::map<std::string, std::size_t> by_vehicle_class;
  for (const auto& e : events) ++by_vehicle_class[std::string(to_string(by_id.at(e.vehicle_id)->agent_class.kind))];
  ctx.summary = {{"hesitation_events", events.size()},
                 {"hesitations_by_vehicle_class", by_vehicle_class},
                 {"decel_grids", grids},
                 {"accel_distance_points", pts.size()},
                 {"settings", cfg.section("vru")}};
  ctx.staging.write_json("vru_summary.json", ctx.summary);
  return ctx.finish();
}

// ---------------------------------------------------------------- consensus

inline json policy_json(const ConsensusPolicy& p) {
  return {{"pet_missing", to_string(p.pet_missing)},
          {"performance_missing", to_string(p.performance_missing)},
          {"ttc_source", p.ttc_source == TtcSource::PerFrame ? "per-frame" : "encounter-min"}};
}

/// Classifies the contexts under every combination of missing-evidence
/// policies and TTC source, ranking by the largest deviation from `target`.
inline json policy_search(const std::vector<FrameContext>& contexts, const ConsensusThresholds& th,
                          const json& target) {
  const double goal[3] = {target[0].get<double>(), target[1].get<double>(), target[2].get<double>()};
  json candidates = json::array();
  json best = nullptr;
  double best_err = std::numeric_limits<double>::infinity();
  for (auto pet : {EvidencePolicy::Strict, EvidencePolicy::Vacuous, EvidencePolicy::ExcludeFrame}) {
    for (auto perf : {EvidencePolicy::Strict, EvidencePolicy::Vacuous, EvidencePolicy::ExcludeFrame}) {
      for (auto src : {TtcSource::PerFrame, TtcSource::EncounterMinimum}) {
        const ConsensusPolicy p{pet, perf, src};
        std::vector<ConsensusFrame> frames;
        for (const auto& c : contexts) {
          if (auto f = classify_frame(c, th, p)) frames.push_back(*f);
        }
        json entry = {{"policy", policy_json(p)}, {"total_frames", frames.size()}};
        if (!frames.empty()) {
          const auto s = summarize(frames);
          const double got[3] = {s.pct_all_three(), s.pct_exactly_two(), s.pct_at_most_one()};
          double err = 0.0;
          for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(got[i] - goal[i]));
          entry["percentages"] = {got[0], got[1], got[2]};
          entry["max_abs_error_pp"] = err;
          if (err < best_err) {
            best_err = err;
            best = entry;
          }
        }
        candidates.push_back(entry);
      }
    }
  }
  return {{"target", target}, {"candidates", candidates}, {"best", best},
          {"within_2pp", std::isfinite(best_err) && best_err <= 2.0}};
}

inline json run_consensus(const RunConfig& cfg) {
  StageContext ctx(cfg, "consensus");
  check_dependencies(ctx);
  const auto opt = cfg.consensus_options();
  const auto tracks = load_stage_tracks(ctx);
  const auto set = load_stage_interactions(ctx);
  const auto conflicts = read_conflicts(ctx.use("safety_encounters.csv"), ctx.use("safety_ttc_frames.csv"));
  const auto hesitations = read_hesitations(ctx.use("hesitations.csv"));
  std::vector<HeadwayEvent> exit_headways;
  std::vector<ChainGain> gains;
  if (cfg.flow_enabled()) {
    for (auto& e : read_headways(ctx.use("headways.csv"))) {
      if (e.boundary == Boundary::Exit) exit_headways.push_back(std::move(e));
    }
    gains = read_gains(ctx.use("gains.csv"));
  } else {
    ctx.notes.push_back("flow disabled: no exit headway or gain evidence; performance follows the missing-evidence policy");
  }

  ConsensusInputs in{&tracks, &set, &conflicts, &hesitations, &exit_headways, &gains};
  const auto run = build_consensus(in, opt);

  {
    csv::Writer w(ctx.staging.path("consensus_frames.csv"));
    w.row("subject_id", "other_id", "time", "ttc", "encounter_min_ttc", "pet", "in_hesitation", "speed_cv",
          "exit_headway", "follower_gain", "safety_ok", "interaction_ok", "performance_ok", "satisfied_count");
    for (const auto& c : run.contexts) {
      auto f = classify_frame(c, opt.thresholds, opt.policy);
      if (!f) continue;
      w.row(c.subject_id, c.other_id, c.time, c.ttc, c.encounter_min_ttc, c.pet, c.in_hesitation, c.speed_cv,
            c.exit_headway, c.follower_gain, f->safety_ok, f->interaction_ok, f->performance_ok,
            f->satisfied_count);
    }
    w.close();
  }

  const auto& th = opt.thresholds;
  json doc = {{"thresholds",
               {{"ttc_min", th.ttc_min}, {"pet_min", th.pet_min}, {"exit_headway_max", th.exit_headway_max},
                {"gain_max", th.gain_max}, {"hesitation_window", th.hesitation_window},
                {"speed_cv_max", th.speed_cv_max}}},
              {"policy", policy_json(opt.policy)},
              {"evidence_max_gap", opt.evidence_max_gap},
              {"denominator", "frames of AV-subject, VRU-other interaction records"},
              {"candidate_frames", run.contexts.size()},
              {"excluded_frames", run.excluded_frames}};
  try {
    const auto s = summarize(run.frames);
    doc["summary"] = s.to_json();
  } catch (const EmptySummaryError&) {
    doc["summary"] = {{"total_frames", 0}, {"pct_all_three", nullptr}, {"pct_exactly_two", nullptr},
                      {"pct_at_most_one", nullptr}};
    ctx.notes.push_back("no AV-VRU interaction frames to classify");
  }
  if (const auto& target = cfg.section("consensus").at("search_target"); !target.is_null()) {
    doc["policy_search"] = policy_search(run.contexts, th, target);
  }
  ctx.summary = doc;
  ctx.staging.write_json("consensus_summary.json", doc);
  return ctx.finish();
}

inline json run_stage(const std::string& stage, const RunConfig& cfg) {
  cfg.validate();
  if (stage == "ingest") return run_ingest(cfg);
  if (stage == "interactions") return run_interactions(cfg);
  if (stage == "safety") return run_safety(cfg);
  if (stage == "flow") return run_flow(cfg);
  if (stage == "vru") return run_vru(cfg);
  if (stage == "consensus") return run_consensus(cfg);
  throw ConfigError("unknown stage '" + stage + "'");
}

/// Runs every stage in order and writes run_manifest.json. All configuration
/// checks that can fail happen before any stage computes.
inline json run_all(const RunConfig& cfg) {
  cfg.validate();
  const auto input = cfg.str("input");
  if (input.empty()) throw ConfigError("no input trajectory file configured (--input)");
  if (!fs::exists(input)) throw ConfigError("input file '" + input + "' does not exist");
  std::optional<IntersectionGeometry> geometry;
  if (const auto g = cfg.str("geometry"); !g.empty()) {
    if (!fs::exists(g)) throw ConfigError("geometry file '" + g + "' does not exist");
    geometry = load_geometry(g);
  }
  if (cfg.flow_enabled()) require_flow_geometry(geometry);
  cfg.schema();
  cfg.zone_layout();

  json stages = json::object();
  for (const char* s : kStages) {
    if (std::string(s) == "flow" && !cfg.flow_enabled()) continue;
    stages[s] = run_stage(s, cfg);
  }
  json manifest = {{"tool", "avcons"},
                   {"config", cfg.doc()},
                   {"assumptions", recorded_assumptions()},
                   {"seed", cfg.seed()},
                   {"stages", stages}};
  const auto path = cfg.output_dir() / "run_manifest.json";
  write_text(path.string() + ".partial", manifest.dump(2) + "\n");
  fs::rename(path.string() + ".partial", path);
  return manifest;
}

}  // namespace avcons::pipeline
