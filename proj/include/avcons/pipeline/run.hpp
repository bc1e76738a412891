#pragma once

#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "avcons/pipeline/stages.hpp"
#include "avcons/synth/random.hpp"

namespace avcons::pipeline {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitMissingDependency = 3 };

struct ErrorInfo {
  int code = kExitRuntime;
  std::string type;
  std::string message;
};

inline ErrorInfo classify_error(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const MissingDependencyError& e) {
    return {kExitMissingDependency, "missing_dependency", e.what()};
  } catch (const SchemaError& e) {
    return {kExitValidation, "schema_error", e.what()};
  } catch (const SpecError& e) {
    return {kExitValidation, "specification_error", e.what()};
  } catch (const ConfigError& e) {
    return {kExitValidation, "configuration_error", e.what()};
  } catch (const ArgumentError& e) {
    return {kExitValidation, "argument_error", e.what()};
  } catch (const EmptyDatasetError& e) {
    return {kExitValidation, "empty_dataset", e.what()};
  } catch (const nlohmann::json::exception& e) {
    return {kExitValidation, "configuration_error", e.what()};
  } catch (const std::exception& e) {
    return {kExitRuntime, "runtime_error", e.what()};
  } catch (...) {
    return {kExitRuntime, "runtime_error", "unknown error"};
  }
}

/// Runs `body`, mapping exceptions to exit codes. On failure a structured
/// error_report.json is written to `out_dir` (when set); on success any
/// previous error report there is removed.
inline int guarded(const std::string& stage, const fs::path& out_dir, const std::function<void()>& body,
                   std::ostream& err = std::cerr) {
  std::error_code ec;
  try {
    body();
    if (!out_dir.empty()) fs::remove(out_dir / "error_report.json", ec);
    return kExitOk;
  } catch (...) {
    const auto info = classify_error(std::current_exception());
    err << "avcons " << stage << ": " << info.message << '\n';
    if (!out_dir.empty()) {
      fs::create_directories(out_dir, ec);
      const json report = {{"stage", stage}, {"exit_code", info.code}, {"error_type", info.type},
                           {"message", info.message}};
      std::ofstream(out_dir / "error_report.json") << report.dump(2) << '\n';
    }
    return info.code;
  }
}

/// Generates a scenario's tracks in the canonical ingestion schema together
/// with its geometry, expected values and a run config that points at them.
inline json run_synth(const RunConfig& cfg) {
  const auto scenario = cfg.str("scenario");
  if (scenario.empty()) throw ConfigError("no scenario file configured (--input)");
  const auto spec = synth::load_scenario(scenario);
  const auto tracks = synth::generate(spec, cfg.seed());
  const fs::path out = cfg.output_dir();
  Staging st(out);
  write_tracks_csv(st.path("synth_tracks.csv"), tracks);
  json expected = json::object();
  for (const auto& [k, v] : spec.expected) expected[k] = {{"value", v.value}, {"note", v.note}};
  st.write_json("synth_expected.json", {{"scenario", spec.name}, {"seed", cfg.seed()}, {"expected", expected}});

  json run = cfg.doc();
  run["input"] = (out / "synth_tracks.csv").string();
  run["output_dir"] = (out / "run").string();
  run["scenario"] = "";
  if (spec.geometry) {
    st.write_json("synth_geometry.json", geometry_to_json(*spec.geometry));
    run["geometry"] = (out / "synth_geometry.json").string();
  } else {
    run["geometry"] = "";
  }
  const bool has_lines = spec.geometry && (!spec.geometry->entry_lines.empty() || !spec.geometry->exit_lines.empty());
  if (!has_lines) run["flow"]["enabled"] = false;
  st.write_json("synth_run_config.json", run);

  json m = {{"stage", "synth"},
            {"scenario", scenario},
            {"scenario_sha256", sha256_file(scenario)},
            {"seed", cfg.seed()},
            {"agents", tracks.size()}};
  m["outputs"] = st.commit();
  write_text((out / "manifest_synth.json").string(), m.dump(2) + "\n");
  return m;
}

}  // namespace avcons::pipeline
