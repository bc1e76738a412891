#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "avcons/core/agent.hpp"
#include "avcons/synth/scenario.hpp"

namespace avcons::synth {

/// Two agents on straight or gently accelerating paths that pass near a
/// common point with a random arrival offset. Samples per track <= max_samples.
inline std::pair<AgentTrack, AgentTrack> random_crossing_pair(std::mt19937_64& rng,
                                                              std::size_t max_samples = 500,
                                                              double dt = 0.1) {
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  std::uniform_real_distribution<double> speed(0.8, 12.0);
  std::uniform_real_distribution<double> offset(-4.0, 4.0);
  std::uniform_real_distribution<double> miss(-8.0, 8.0);
  std::uniform_real_distribution<double> accel(-0.3, 0.3);
  std::uniform_int_distribution<std::size_t> len(std::max<std::size_t>(2, max_samples / 4), max_samples);
  std::uniform_int_distribution<int> kind_pick(0, 3);

  ScenarioSpec spec;
  spec.dt = dt;
  const std::size_t n = len(rng);
  spec.duration = dt * static_cast<double>(n - 1);
  const Vec2 meet{miss(rng), miss(rng)};
  for (int i = 0; i < 2; ++i) {
    AgentSpec ag;
    ag.id = i == 0 ? "a" : "b";
    const int k = kind_pick(rng);
    ag.kind = k == 0 ? AgentKind::AV : k == 1 ? AgentKind::HDV : k == 2 ? AgentKind::Pedestrian
                                                                        : AgentKind::Cyclist;
    const double th = deg_to_rad(angle(rng));
    const double v = speed(rng);
    const double arrive = 0.5 * spec.duration + offset(rng);
    const Vec2 dir{std::cos(th), std::sin(th)};
    const Vec2 vel = v * dir;
    const Vec2 start = meet - (arrive * v) * dir;
    if (i == 0) {
      ag.motion = ConstantVelocity{start, vel};
    } else {
      ag.motion = ConstantAcceleration{start, vel, accel(rng) * dir};
    }
    spec.agents.push_back(std::move(ag));
  }
  auto tracks = generate(spec);
  return {std::move(tracks[0]), std::move(tracks[1])};
}

/// Scripted agents plus `spec.random_pairs.count` random crossing pairs drawn
/// from a generator seeded with `seed`.
inline std::vector<AgentTrack> generate(const ScenarioSpec& spec, std::uint64_t seed) {
  std::vector<AgentTrack> tracks;
  if (!spec.agents.empty()) tracks = generate(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < spec.random_pairs.count; ++i) {
    auto [a, b] = random_crossing_pair(rng, spec.random_pairs.max_samples, spec.dt);
    a.agent_id = "r" + std::to_string(i) + "a";
    b.agent_id = "r" + std::to_string(i) + "b";
    tracks.push_back(std::move(a));
    tracks.push_back(std::move(b));
  }
  if (tracks.empty()) throw SpecError("scenario defines no agents");
  return tracks;
}

}  // namespace avcons::synth
