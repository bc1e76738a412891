#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avcons/core/errors.hpp"
#include "json.hpp"

namespace avcons {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Polygon {
  std::string name;
  std::vector<Vec2> vertices;

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    }
    return 0.5 * a;
  }

  /// Points on an edge or vertex count as inside.
  bool contains(Vec2 p) const {
    const std::size_t n = vertices.size();
    constexpr double kEdgeTol = 1e-9;
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 a = vertices[i];
      Vec2 b = vertices[(i + 1) % n];
      Vec2 ab = b - a;
      double len = norm(ab);
      if (std::abs(cross(ab, p - a)) <= kEdgeTol * std::max(1.0, len) &&
          dot(p - a, ab) >= -kEdgeTol && dot(p - b, a - b) >= -kEdgeTol) {
        return true;
      }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      Vec2 a = vertices[i];
      Vec2 b = vertices[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_cross) inside = !inside;
      }
    }
    return inside;
  }

  struct Box {
    double xmin, ymin, xmax, ymax;
  };
  Box bounds() const {
    Box b{vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y};
    for (auto v : vertices) {
      b.xmin = std::min(b.xmin, v.x);
      b.ymin = std::min(b.ymin, v.y);
      b.xmax = std::max(b.xmax, v.x);
      b.ymax = std::max(b.ymax, v.y);
    }
    return b;
  }
};

/// Reference line (stop bar, exit bar). Traffic crossing it travels from the
/// left side of a->b to the right side.
struct DirectedSegment {
  Vec2 a;
  Vec2 b;

  double length() const { return norm(b - a); }

  /// Signed distance, positive on the right of a->b.
  double signed_distance(Vec2 p) const { return cross(p - a, b - a) / length(); }

  /// Parameter of the orthogonal projection of p onto the segment (0 at a, 1 at b).
  double projection(Vec2 p) const {
    Vec2 ab = b - a;
    return dot(p - a, ab) / dot(ab, ab);
  }
};

enum class SignalPhase { Green, Yellow, Red };

struct SignalInterval {
  double start = 0.0;
  double end = 0.0;
  SignalPhase phase = SignalPhase::Green;
};

struct IntersectionGeometry {
  std::vector<Polygon> crosswalk_zones;
  std::map<std::string, DirectedSegment> entry_lines;
  std::map<std::string, DirectedSegment> exit_lines;
  /// Keyed by lane id; the key "*" applies to lanes without their own entry.
  std::map<std::string, std::vector<SignalInterval>> signal_phases;

  bool has_signals() const { return !signal_phases.empty(); }

  std::optional<SignalPhase> phase_at(const std::string& lane, double t) const {
    auto it = signal_phases.find(lane);
    if (it == signal_phases.end()) it = signal_phases.find("*");
    if (it == signal_phases.end()) return std::nullopt;
    for (const auto& iv : it->second) {
      if (t >= iv.start && t < iv.end) return iv.phase;
    }
    return std::nullopt;
  }

  void validate() const {
    for (const auto& poly : crosswalk_zones) {
      if (poly.vertices.size() < 3) {
        throw ConfigError("crosswalk zone '" + poly.name + "' has fewer than 3 vertices");
      }
      if (std::abs(poly.signed_area()) <= 1e-12) {
        throw ConfigError("crosswalk zone '" + poly.name + "' has zero area");
      }
    }
    auto check_lines = [](const std::map<std::string, DirectedSegment>& lines,
                          const char* kind) {
      for (const auto& [lane, seg] : lines) {
        if (!(seg.length() > 0.0)) {
          throw ConfigError(std::string(kind) + " line for lane '" + lane +
                            "' has zero length");
        }
      }
    };
    check_lines(entry_lines, "entry");
    check_lines(exit_lines, "exit");
  }
};

namespace detail {

inline Vec2 parse_point(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {j.at("x").get<double>(), j.at("y").get<double>()};
  throw ConfigError("point must be [x, y] or {\"x\":..,\"y\":..}");
}

inline std::map<std::string, DirectedSegment> parse_lines(const nlohmann::json& j) {
  std::map<std::string, DirectedSegment> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (v.is_array() && v.size() == 2) {
      out[it.key()] = {parse_point(v[0]), parse_point(v[1])};
    } else {
      out[it.key()] = {parse_point(v.at("from")), parse_point(v.at("to"))};
    }
  }
  return out;
}

inline SignalPhase parse_phase(const std::string& s) {
  if (s == "green" || s == "G") return SignalPhase::Green;
  if (s == "yellow" || s == "amber" || s == "Y") return SignalPhase::Yellow;
  if (s == "red" || s == "R") return SignalPhase::Red;
  throw ConfigError("unknown signal phase '" + s + "'");
}

inline const char* phase_name(SignalPhase p) {
  switch (p) {
    case SignalPhase::Green: return "green";
    case SignalPhase::Yellow: return "yellow";
    case SignalPhase::Red: return "red";
  }
  return "?";
}

}  // namespace detail

/// Geometry document:
///   { "crosswalks": [ {"name": "...", "vertices": [[x,y], ...]}, ... ],
///     "entry_lines": { "<lane>": [[x,y],[x,y]] },
///     "exit_lines":  { "<lane>": {"from": [x,y], "to": [x,y]} },
///     "signal_phases": { "<lane>|*": [ {"start":s, "end":e, "phase":"green"} ] } }
inline IntersectionGeometry geometry_from_json(const nlohmann::json& j) {
  IntersectionGeometry g;
  try {
    if (j.contains("crosswalks")) {
      for (const auto& cj : j.at("crosswalks")) {
        Polygon p;
        p.name = cj.value("name", "crosswalk_" + std::to_string(g.crosswalk_zones.size()));
        for (const auto& v : cj.at("vertices")) p.vertices.push_back(detail::parse_point(v));
        g.crosswalk_zones.push_back(std::move(p));
      }
    }
    if (j.contains("entry_lines")) g.entry_lines = detail::parse_lines(j.at("entry_lines"));
    if (j.contains("exit_lines")) g.exit_lines = detail::parse_lines(j.at("exit_lines"));
    if (j.contains("signal_phases")) {
      const auto& sp = j.at("signal_phases");
      for (auto it = sp.begin(); it != sp.end(); ++it) {
        auto& list = g.signal_phases[it.key()];
        for (const auto& iv : it.value()) {
          list.push_back({iv.at("start").get<double>(), iv.at("end").get<double>(),
                          detail::parse_phase(iv.at("phase").get<std::string>())});
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("geometry document: ") + e.what());
  }
  g.validate();
  return g;
}

inline nlohmann::json geometry_to_json(const IntersectionGeometry& g) {
  using nlohmann::json;
  json j;
  j["crosswalks"] = json::array();
  for (const auto& p : g.crosswalk_zones) {
    json verts = json::array();
    for (auto v : p.vertices) verts.push_back({v.x, v.y});
    j["crosswalks"].push_back({{"name", p.name}, {"vertices", verts}});
  }
  auto lines = [](const std::map<std::string, DirectedSegment>& m) {
    json o = json::object();
    for (const auto& [lane, s] : m) o[lane] = json::array({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
    return o;
  };
  j["entry_lines"] = lines(g.entry_lines);
  j["exit_lines"] = lines(g.exit_lines);
  json sp = json::object();
  for (const auto& [lane, list] : g.signal_phases) {
    json arr = json::array();
    for (const auto& iv : list) {
      arr.push_back({{"start", iv.start}, {"end", iv.end}, {"phase", detail::phase_name(iv.phase)}});
    }
    sp[lane] = arr;
  }
  j["signal_phases"] = sp;
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline IntersectionGeometry load_geometry(const std::string& path) {
  return geometry_from_json(read_json_file(path));
}

}  // namespace avcons
