#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avcons/pipeline/run.hpp"

namespace pl = avcons::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"avcons: multimodal trajectory safety, interaction and flow analytics"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, input, out, stage_flag;
  std::optional<long long> threads, seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "run config (JSON); a run_manifest.json is also accepted");
  app.add_option("--input", input, "trajectory file (scenario file for 'synth')");
  app.add_option("--out", out, "output directory");
  app.add_option("--stage", stage_flag, "stage to run when no subcommand is given (default: report)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");
  app.add_option("--seed", seed, "seed for randomized scenarios");
  app.add_option("--policy", overrides, "config override name=value, e.g. consensus.pet_missing=strict");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "validate and resample trajectories onto the frame grid"},
      {"interactions", "detect pairwise encounters and field-of-view zones"},
      {"safety", "TTC, PET, exposure and crosswalk co-occupancy"},
      {"flow", "headways, platoons and string-stability gains"},
      {"vru", "pedestrian hesitation, deceleration grids, acceleration vs distance"},
      {"consensus", "classify AV-VRU frames against the three consensus conditions"},
      {"synth", "generate tracks from a scenario file"},
      {"report", "run every stage and write run_manifest.json"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);

  std::string stage = "report";
  if (!app.get_subcommands().empty()) {
    stage = app.get_subcommands().front()->get_name();
  } else if (!stage_flag.empty()) {
    stage = stage_flag;
  }

  std::filesystem::path out_dir;
  return pl::guarded(stage, out_dir, [&] {
    if (stage != "synth" && stage != "report" && !pl::is_stage(stage)) {
      throw avcons::ConfigError("unknown stage '" + stage + "'");
    }
    pl::RunConfig cfg = config_path.empty() ? pl::RunConfig{} : pl::RunConfig::load(config_path);
    if (!out.empty()) cfg.set("output_dir", out);
    out_dir = cfg.output_dir();
    if (!input.empty()) cfg.set(stage == "synth" ? "scenario" : "input", input);
    if (threads) cfg.set("threads", *threads);
    if (seed) cfg.set("seed", *seed);
    for (const auto& o : overrides) cfg.apply_override(o);
    out_dir = cfg.output_dir();
    cfg.validate();

    pl::json result;
    if (stage == "synth") {
      result = pl::run_synth(cfg);
    } else if (stage == "report") {
      const auto m = pl::run_all(cfg);
      result = pl::json::object();
      for (const auto& [name, sm] : m.at("stages").items()) result[name] = sm.at("summary");
    } else {
      result = pl::run_stage(stage, cfg).at("summary");
    }
    std::cout << result.dump(2) << '\n';
  });
}
