#pragma once

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "avcons/core/errors.hpp"
#include "json.hpp"

namespace avcons::pipeline {

namespace fs = std::filesystem;

inline std::string to_hex(const unsigned char* data, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(2 * n);
  for (unsigned i = 0; i < n; ++i) {
    s.push_back(digits[data[i] >> 4]);
    s.push_back(digits[data[i] & 0xF]);
  }
  return s;
}

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingDependencyError("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  return to_hex(md, len);
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingDependencyError("cannot read '" + path.string() + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw MissingDependencyError("'" + path.string() + "' is not valid JSON");
  return j;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

/// Collects a stage's outputs under temporary names and renames them into
/// place together on commit. Uncommitted temporaries are removed.
class Staging {
 public:
  explicit Staging(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& name : names_) fs::remove(temp(name), ec);
  }

  std::string path(const std::string& name) {
    names_.push_back(name);
    return temp(name).string();
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write_text(path(name), j.dump(2) + "\n"); }

  /// Renames every staged file into place and returns name -> sha256.
  nlohmann::json commit() {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& name : names_) {
      fs::rename(temp(name), dir_ / name);
      hashes[name] = sha256_file(dir_ / name);
    }
    committed_ = true;
    return hashes;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path temp(const std::string& name) const { return dir_ / (name + ".partial"); }

  fs::path dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

inline fs::path manifest_path(const fs::path& dir, const std::string& stage) {
  return dir / ("manifest_" + stage + ".json");
}

}  // namespace avcons::pipeline
