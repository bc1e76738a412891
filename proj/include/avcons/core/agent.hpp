#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avcons {

enum class AgentKind { AV, HDV, Pedestrian, Cyclist, Scooter, Bus, Truck };

inline constexpr std::array<AgentKind, 7> kAllAgentKinds = {
    AgentKind::AV,      AgentKind::HDV,     AgentKind::Pedestrian, AgentKind::Cyclist,
    AgentKind::Scooter, AgentKind::Bus,     AgentKind::Truck};

constexpr bool is_vru(AgentKind kind) {
  return kind == AgentKind::Pedestrian || kind == AgentKind::Cyclist ||
         kind == AgentKind::Scooter;
}

constexpr bool is_platoon_eligible(AgentKind kind) {
  return kind == AgentKind::AV || kind == AgentKind::HDV;
}

constexpr std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::AV: return "AV";
    case AgentKind::HDV: return "HDV";
    case AgentKind::Pedestrian: return "Pedestrian";
    case AgentKind::Cyclist: return "Cyclist";
    case AgentKind::Scooter: return "Scooter";
    case AgentKind::Bus: return "Bus";
    case AgentKind::Truck: return "Truck";
  }
  return "?";
}

/// Case-insensitive parse of a class label. Accepts the canonical names and a
/// few common dataset aliases ("ped", "bike", "car", "automated", ...).
inline std::optional<AgentKind> parse_agent_kind(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (s == "av" || s == "automated" || s == "automatedvehicle" || s == "autonomous") {
    return AgentKind::AV;
  }
  if (s == "hdv" || s == "car" || s == "passenger" || s == "passengervehicle" ||
      s == "humandriven" || s == "vehicle") {
    return AgentKind::HDV;
  }
  if (s == "pedestrian" || s == "ped" || s == "walker" || s == "person") {
    return AgentKind::Pedestrian;
  }
  if (s == "cyclist" || s == "bicycle" || s == "bike" || s == "bicyclist") {
    return AgentKind::Cyclist;
  }
  if (s == "scooter" || s == "escooter" || s == "scooterrider") return AgentKind::Scooter;
  if (s == "bus") return AgentKind::Bus;
  if (s == "truck" || s == "heavyvehicle") return AgentKind::Truck;
  return std::nullopt;
}

/// Road-user class. The VRU flag is derived from the kind, never stored.
struct AgentClass {
  AgentKind kind = AgentKind::HDV;

  constexpr bool vru_flag() const { return is_vru(kind); }
  constexpr bool platoon_eligible() const { return is_platoon_eligible(kind); }
  friend constexpr bool operator==(AgentClass, AgentClass) = default;
};

struct TrackSample {
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  std::string lane;

  double speed() const { return std::hypot(vx, vy); }
};

/// Signed acceleration along the direction of travel; 0 when the agent is at rest.
inline double longitudinal_accel(const TrackSample& s) {
  const double v = s.speed();
  if (v <= 1e-9) return 0.0;
  return (s.ax * s.vx + s.ay * s.vy) / v;
}

struct AgentTrack {
  std::string agent_id;
  AgentClass agent_class;
  double length = 0.0;
  double width = 0.0;
  std::vector<TrackSample> samples;

  double start_time() const { return samples.front().time; }
  double end_time() const { return samples.back().time; }
  double duration() const { return samples.empty() ? 0.0 : end_time() - start_time(); }

  bool covers(double t, double tol = 1e-9) const {
    return !samples.empty() && t >= start_time() - tol && t <= end_time() + tol;
  }

  /// Index of the sample whose time is within `tol` of t, if any.
  std::optional<std::size_t> index_at(double t, double tol = 1e-6) const {
    auto it = std::lower_bound(samples.begin(), samples.end(), t - tol,
                               [](const TrackSample& s, double v) { return s.time < v; });
    if (it == samples.end() || it->time > t + tol) return std::nullopt;
    return static_cast<std::size_t>(it - samples.begin());
  }

  const TrackSample* sample_at(double t, double tol = 1e-6) const {
    auto idx = index_at(t, tol);
    return idx ? &samples[*idx] : nullptr;
  }
};

/// Heading below this speed is held at the last valid value.
inline constexpr double kHeadingMinSpeed = 0.3;

/// Per-sample heading in radians (counter-clockwise from +x). Standstill
/// samples hold the last valid heading; samples before the first valid heading
/// take that first heading, and a track that never moves gets 0.
inline std::vector<double> compute_headings(const AgentTrack& track,
                                            double min_speed = kHeadingMinSpeed) {
  std::vector<double> out(track.samples.size(), 0.0);
  std::optional<double> last;
  std::size_t first_valid = track.samples.size();
  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    const auto& s = track.samples[i];
    if (s.speed() > min_speed) {
      last = std::atan2(s.vy, s.vx);
      if (first_valid == track.samples.size()) first_valid = i;
    }
    out[i] = last.value_or(0.0);
  }
  if (first_valid < track.samples.size()) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(first_valid),
              out[first_valid]);
  }
  return out;
}

/// Median inter-sample interval; 0 for tracks with fewer than two samples.
inline double median_interval(const AgentTrack& track) {
  if (track.samples.size() < 2) return 0.0;
  std::vector<double> gaps;
  gaps.reserve(track.samples.size() - 1);
  for (std::size_t i = 1; i < track.samples.size(); ++i) {
    gaps.push_back(track.samples[i].time - track.samples[i - 1].time);
  }
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

inline const AgentTrack* find_track(const std::vector<AgentTrack>& tracks,
                                    std::string_view id) {
  for (const auto& t : tracks) {
    if (t.agent_id == id) return &t;
  }
  return nullptr;
}

}  // namespace avcons
