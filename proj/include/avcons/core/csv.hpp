#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "avcons/core/errors.hpp"

namespace avcons::csv {

/// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Splits one record; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_record(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::string quote_if_needed(std::string_view s, char delim = ',') {
  if (s.find_first_of(std::string{delim, '"', '\n'}) == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Row-at-a-time reader with a header index.
class Reader {
 public:
  explicit Reader(const std::string& path, char delim = ',') : in_(path), delim_(delim) {
    if (!in_) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB &&
          static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      header_ = split_record(line, delim_);
      for (auto& h : header_) {
        while (!h.empty() && h.back() == ' ') h.pop_back();
        while (!h.empty() && h.front() == ' ') h.erase(0, 1);
      }
      has_header_ = true;
      break;
    }
  }

  bool has_header() const { return has_header_; }
  const std::vector<std::string>& header() const { return header_; }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view name) const {
    auto c = column(name);
    if (!c) throw SchemaError("missing required column '" + std::string(name) + "'");
    return *c;
  }

  /// Next non-empty record; false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_record(line, delim_);
      return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_no_ + 1; }

 private:
  std::ifstream in_;
  char delim_;
  std::vector<std::string> header_;
  bool has_header_ = false;
  std::size_t line_no_ = 0;
};

/// Buffered writer; values are joined with the delimiter, one row per call.
class Writer {
 public:
  explicit Writer(const std::string& path, char delim = ',')
      : out_(path, std::ios::binary), delim_(delim) {
    if (!out_) throw Error("cannot write '" + path + "'");
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    bool first = true;
    for (const auto& f : fields) emit(f, first);
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Error("write failed");
  }

 private:
  void sep(bool& first) {
    if (!first) out_ << delim_;
    first = false;
  }
  void emit(double v, bool& first) {
    sep(first);
    out_ << format_number(v);
  }
  void emit(const std::optional<double>& v, bool& first) {
    sep(first);
    if (v) out_ << format_number(*v);
  }
  void emit(std::string_view v, bool& first) {
    sep(first);
    out_ << quote_if_needed(v, delim_);
  }
  void emit(const std::string& v, bool& first) { emit(std::string_view(v), first); }
  void emit(const char* v, bool& first) { emit(std::string_view(v), first); }
  template <typename I>
    requires std::is_integral_v<I>
  void emit(I v, bool& first) {
    sep(first);
    out_ << v;
  }

  std::ofstream out_;
  char delim_;
};

}  // namespace avcons::csv
