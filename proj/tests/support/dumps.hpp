#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "avcons/pipeline/artifacts.hpp"

namespace avcons::support {

/// SHA-256 of every regular file under `dir`, keyed by relative path. Stage
/// manifests and the run manifest are skipped since they record thread counts
/// and absolute paths.
inline std::map<std::string, std::string> dump_digests(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name.rfind("manifest_", 0) == 0 || name == "run_manifest.json" || name == "synth_run_config.json") continue;
    out[std::filesystem::relative(e.path(), dir).string()] = pipeline::sha256_file(e.path());
  }
  return out;
}

}  // namespace avcons::support
