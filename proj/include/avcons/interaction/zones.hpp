#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/geometry.hpp"
#include "json.hpp"

namespace avcons {

/// Wraps an angle in degrees into [0, 360).
inline double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Bearing of `to` as seen from `from` facing `heading_rad` (counter-clockwise
/// from +x). Degrees clockwise from straight ahead, in [0, 360).
inline double bearing_deg(double heading_rad, Vec2 from, Vec2 to) {
  Vec2 d = to - from;
  return wrap_degrees(rad_to_deg(heading_rad - std::atan2(d.y, d.x)));
}

struct Sector {
  std::string name;
  double start_deg = 0.0;  // inclusive
  double end_deg = 0.0;    // exclusive; end < start wraps through 0
  double max_range = 0.0;

  double span() const {
    double s = wrap_degrees(end_deg - start_deg);
    return s == 0.0 ? 360.0 : s;
  }

  bool contains(double bearing) const {
    if (start_deg < end_deg) return bearing >= start_deg && bearing < end_deg;
    return bearing >= start_deg || bearing < end_deg;
  }
};

/// Angular detection sectors around a subject. Construction validates that
/// the sectors tile [0, 360) with no gap and no overlap.
class ZoneLayout {
 public:
  explicit ZoneLayout(std::vector<Sector> sectors) : sectors_(std::move(sectors)) {
    if (sectors_.empty()) throw ConfigError("zone layout has no sectors");
    for (auto& s : sectors_) {
      if (!(s.max_range > 0.0)) {
        throw ConfigError("sector '" + s.name + "' must have positive max range");
      }
      s.start_deg = wrap_degrees(s.start_deg);
      s.end_deg = wrap_degrees(s.end_deg);
    }
    if (sectors_.size() == 1) {
      if (sectors_[0].start_deg != sectors_[0].end_deg) {
        throw ConfigError("single-sector layout must cover the full circle");
      }
      return;
    }
    std::vector<const Sector*> order;
    for (const auto& s : sectors_) {
      if (s.start_deg == s.end_deg) {
        throw ConfigError("sector '" + s.name + "' is empty or covers the full circle");
      }
      order.push_back(&s);
    }
    std::sort(order.begin(), order.end(),
              [](const Sector* a, const Sector* b) { return a->start_deg < b->start_deg; });
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Sector* cur = order[i];
      const Sector* nxt = order[(i + 1) % order.size()];
      if (std::abs(wrap_degrees(cur->end_deg - nxt->start_deg + 180.0) - 180.0) > 1e-9) {
        throw ConfigError("sectors '" + cur->name + "' and '" + nxt->name +
                          "' leave a gap or overlap");
      }
      total += cur->span();
    }
    if (std::abs(total - 360.0) > 1e-6) {
      throw ConfigError("sectors do not tile the circle exactly once");
    }
  }

  const std::vector<Sector>& sectors() const { return sectors_; }
  const Sector& sector(std::size_t i) const { return sectors_.at(i); }

  /// Index of the sector that holds the bearing; lower index wins on ties.
  std::size_t sector_index(double bearing) const {
    for (std::size_t i = 0; i < sectors_.size(); ++i) {
      if (sectors_[i].contains(bearing)) return i;
    }
    return 0;  // unreachable for a validated layout
  }

  /// Sector index for a (bearing, distance) pair, or nullopt when the target
  /// lies beyond the sector's range.
  std::optional<std::size_t> locate(double bearing, double distance) const {
    std::size_t i = sector_index(bearing);
    if (distance <= sectors_[i].max_range) return i;
    return std::nullopt;
  }

  static ZoneLayout default_layout() {
    return ZoneLayout({
        {"Main Fwd", 345.0, 15.0, 60.0},
        {"Narrow Fwd R", 15.0, 40.0, 40.0},
        {"Narrow Fwd L", 320.0, 345.0, 40.0},
        {"Wide Fwd", 40.0, 75.0, 30.0},
        {"Wide Fwd", 285.0, 320.0, 30.0},
        {"Side Fwd R", 75.0, 110.0, 20.0},
        {"Side Fwd L", 250.0, 285.0, 20.0},
        {"Rear R", 110.0, 160.0, 20.0},
        {"Rear Center", 160.0, 200.0, 20.0},
        {"Rear L", 200.0, 250.0, 20.0},
    });
  }

  /// { "sectors": [ {"name": .., "start": deg, "end": deg, "range": m}, ... ] }
  static ZoneLayout from_json(const nlohmann::json& j) {
    std::vector<Sector> s;
    try {
      for (const auto& e : j.at("sectors")) {
        s.push_back({e.at("name").get<std::string>(), e.at("start").get<double>(),
                     e.at("end").get<double>(), e.at("range").get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("zone layout: ") + e.what());
    }
    return ZoneLayout(std::move(s));
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sectors_) {
      arr.push_back({{"name", s.name}, {"start", s.start_deg}, {"end", s.end_deg},
                     {"range", s.max_range}});
    }
    return {{"sectors", arr}};
  }

 private:
  std::vector<Sector> sectors_;
};

/// Zone of `other` relative to a subject with an explicit heading.
inline std::optional<std::string> assign_zone(double heading_rad, Vec2 subject, Vec2 other,
                                              const ZoneLayout& layout) {
  auto idx = layout.locate(bearing_deg(heading_rad, subject, other), norm(other - subject));
  if (!idx) return std::nullopt;
  return layout.sector(*idx).name;
}

/// Zone of `other` relative to the subject sample's direction of travel. The
/// subject must be moving faster than the heading threshold.
inline std::optional<std::string> assign_zone(const TrackSample& subject, Vec2 other,
                                              const ZoneLayout& layout) {
  if (!(subject.speed() > kHeadingMinSpeed)) {
    throw ArgumentError("subject heading undefined below " + std::to_string(kHeadingMinSpeed) +
                        " m/s; use the explicit-heading overload");
  }
  return assign_zone(std::atan2(subject.vy, subject.vx), {subject.x, subject.y}, other, layout);
}

}  // namespace avcons
