#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/geometry.hpp"
#include "avcons/interaction/zones.hpp"
#include "json.hpp"

namespace avcons::synth {

struct ConstantVelocity {
  Vec2 position;
  Vec2 velocity;
};

struct ConstantAcceleration {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
};

/// Uniform motion on a circle; angular speed is counter-clockwise positive.
struct CircularArc {
  Vec2 center;
  double radius = 0.0;
  double start_angle_deg = 0.0;
  double angular_speed_deg = 0.0;
};

/// Straight-line motion with a piecewise-linear speed profile given as
/// (time since agent start, speed) knots; speed is held outside the knots.
struct PiecewiseSpeed {
  Vec2 position;
  double heading_deg = 0.0;
  std::vector<std::pair<double, double>> knots;
};

using Motion = std::variant<ConstantVelocity, ConstantAcceleration, CircularArc, PiecewiseSpeed>;

struct AgentSpec {
  std::string id;
  AgentKind kind = AgentKind::HDV;
  double length = 0.0;
  double width = 0.0;
  std::string lane;
  Motion motion;
  double start = 0.0;
  std::optional<double> end;  // defaults to scenario start + duration
};

struct ExpectedValue {
  double value = 0.0;
  std::string note;  // closed-form derivation
};

/// Seeded random crossing pairs appended to the scripted agents.
struct RandomPairs {
  std::size_t count = 0;
  std::size_t max_samples = 200;
};

struct ScenarioSpec {
  std::string name;
  double start = 0.0;
  double duration = 0.0;
  double dt = 0.1;
  std::vector<AgentSpec> agents;
  std::map<std::string, ExpectedValue> expected;
  std::optional<IntersectionGeometry> geometry;
  RandomPairs random_pairs;
};

namespace detail {

inline Vec2 vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw SpecError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Motion parse_motion(const nlohmann::json& m) {
  const auto type = m.at("type").get<std::string>();
  if (type == "constant_velocity") {
    return ConstantVelocity{vec(m.at("position")), vec(m.at("velocity"))};
  }
  if (type == "constant_acceleration") {
    return ConstantAcceleration{vec(m.at("position")), vec(m.at("velocity")), vec(m.at("acceleration"))};
  }
  if (type == "circular_arc") {
    return CircularArc{vec(m.at("center")), m.at("radius").get<double>(),
                       m.at("start_angle_deg").get<double>(), m.at("angular_speed_deg").get<double>()};
  }
  if (type == "piecewise_speed") {
    PiecewiseSpeed p;
    p.position = vec(m.at("position"));
    p.heading_deg = m.at("heading_deg").get<double>();
    for (const auto& k : m.at("knots")) p.knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    return p;
  }
  throw SpecError("unknown motion primitive '" + type + "'");
}

inline void validate_motion(const Motion& motion, const std::string& id) {
  if (const auto* arc = std::get_if<CircularArc>(&motion)) {
    if (!(arc->radius > 0.0)) throw SpecError("agent '" + id + "': arc radius must be positive");
  }
  if (const auto* pw = std::get_if<PiecewiseSpeed>(&motion)) {
    if (pw->knots.empty()) throw SpecError("agent '" + id + "': speed profile needs knots");
    for (std::size_t i = 0; i < pw->knots.size(); ++i) {
      if (pw->knots[i].second < 0.0) throw SpecError("agent '" + id + "': negative knot speed");
      if (i > 0 && !(pw->knots[i].first > pw->knots[i - 1].first)) {
        throw SpecError("agent '" + id + "': knot times must increase");
      }
    }
  }
}

struct Kinematics {
  Vec2 p, v, a;
};

inline Kinematics evaluate(const Motion& motion, double tau) {
  return std::visit(
      [tau](const auto& m) -> Kinematics {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantVelocity>) {
          return {m.position + tau * m.velocity, m.velocity, {0.0, 0.0}};
        } else if constexpr (std::is_same_v<T, ConstantAcceleration>) {
          return {m.position + tau * m.velocity + (0.5 * tau * tau) * m.acceleration,
                  m.velocity + tau * m.acceleration, m.acceleration};
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          const double w = deg_to_rad(m.angular_speed_deg);
          const double th = deg_to_rad(m.start_angle_deg) + w * tau;
          const Vec2 radial{std::cos(th), std::sin(th)};
          return {m.center + m.radius * radial,
                  {-m.radius * w * std::sin(th), m.radius * w * std::cos(th)},
                  (-m.radius * w * w) * radial};
        } else {
          const Vec2 dir{std::cos(deg_to_rad(m.heading_deg)), std::sin(deg_to_rad(m.heading_deg))};
          const auto& k = m.knots;
          double s = 0.0;
          if (tau <= k.front().first) {
            s = k.front().second * tau;
            return {m.position + s * dir, k.front().second * dir, {0.0, 0.0}};
          }
          s = k.front().second * k.front().first;
          for (std::size_t i = 0; i + 1 < k.size(); ++i) {
            const double t0 = k[i].first, t1 = k[i + 1].first;
            const double v0 = k[i].second, v1 = k[i + 1].second;
            const double slope = (v1 - v0) / (t1 - t0);
            if (tau < t1) {
              const double u = tau - t0;
              s += v0 * u + 0.5 * slope * u * u;
              return {m.position + s * dir, (v0 + slope * u) * dir, slope * dir};
            }
            s += 0.5 * (v0 + v1) * (t1 - t0);
          }
          s += k.back().second * (tau - k.back().first);
          return {m.position + s * dir, k.back().second * dir, {0.0, 0.0}};
        }
      },
      motion);
}

}  // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  try {
    s.name = j.value("name", "scenario");
    s.start = j.value("start", 0.0);
    s.duration = j.at("duration").get<double>();
    s.dt = j.value("dt", 0.1);
    for (const auto& a : j.at("agents")) {
      AgentSpec ag;
      ag.id = a.at("id").get<std::string>();
      auto kind = parse_agent_kind(a.at("class").get<std::string>());
      if (!kind) throw SpecError("agent '" + ag.id + "': unknown class");
      ag.kind = *kind;
      ag.length = a.value("length", 0.0);
      ag.width = a.value("width", 0.0);
      ag.lane = a.value("lane", std::string());
      ag.motion = detail::parse_motion(a.at("motion"));
      ag.start = a.value("start", s.start);
      if (a.contains("end")) ag.end = a.at("end").get<double>();
      s.agents.push_back(std::move(ag));
    }
    if (j.contains("expected")) {
      for (auto it = j.at("expected").begin(); it != j.at("expected").end(); ++it) {
        const auto& e = it.value();
        if (!e.is_object() || !e.contains("note") || e.at("note").get<std::string>().empty()) {
          throw SpecError("expected value '" + it.key() + "' lacks a derivation note");
        }
        s.expected[it.key()] = {e.at("value").get<double>(), e.at("note").get<std::string>()};
      }
    }
    if (j.contains("random_pairs")) {
      s.random_pairs.count = j.at("random_pairs").value("count", std::size_t{0});
      s.random_pairs.max_samples = j.at("random_pairs").value("max_samples", std::size_t{200});
      if (s.random_pairs.max_samples < 2) throw SpecError("random_pairs.max_samples must be at least 2");
    }
    if (j.contains("geometry")) s.geometry = geometry_from_json(j.at("geometry"));
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("scenario document: ") + e.what());
  }
  return s;
}

inline ScenarioSpec load_scenario(const std::string& path) {
  try {
    return scenario_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw SpecError(e.what());
  }
}

/// Samples every agent at start + k*dt with analytic positions, velocities
/// and accelerations.
inline std::vector<AgentTrack> generate(const ScenarioSpec& spec) {
  if (!(spec.dt > 0.0)) throw SpecError("scenario dt must be positive");
  if (!(spec.duration > 0.0)) throw SpecError("scenario duration must be positive");
  std::vector<AgentTrack> tracks;
  std::map<std::string, bool> ids;
  for (const auto& ag : spec.agents) {
    if (!ids.emplace(ag.id, true).second) throw SpecError("duplicate agent id '" + ag.id + "'");
    detail::validate_motion(ag.motion, ag.id);
    const double end = ag.end.value_or(spec.start + spec.duration);
    if (!(end > ag.start)) throw SpecError("agent '" + ag.id + "' has an empty time span");
    const auto k0 = static_cast<long long>(std::ceil(ag.start / spec.dt - 1e-9));
    const auto k1 = static_cast<long long>(std::floor(end / spec.dt + 1e-9));
    AgentTrack t;
    t.agent_id = ag.id;
    t.agent_class = AgentClass{ag.kind};
    t.length = ag.length;
    t.width = ag.width;
    for (long long k = k0; k <= k1; ++k) {
      const double time = static_cast<double>(k) * spec.dt;
      const auto kin = detail::evaluate(ag.motion, time - ag.start);
      t.samples.push_back({time, kin.p.x, kin.p.y, kin.v.x, kin.v.y, kin.a.x, kin.a.y, ag.lane});
    }
    if (t.samples.empty()) throw SpecError("agent '" + ag.id + "' has no samples");
    tracks.push_back(std::move(t));
  }
  return tracks;
}

}  // namespace avcons::synth
