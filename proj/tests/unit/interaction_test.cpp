#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "avcons/interaction/detect.hpp"
#include "support/oracles.hpp"

using namespace avcons;

namespace {

AgentTrack stationary(const std::string& id, Vec2 p, long k0, long k1, AgentKind kind = AgentKind::HDV) {
  return support::grid_track(id, kind, k0, k1, 0.1, [p](double) { return support::State{p.x, p.y, 0, 0, 0, 0}; });
}

/// Brute-force episode list for an unordered pair: maximal runs of frames with
/// distance <= radius, as (first frame, last frame).
std::vector<std::pair<long, long>> brute_episodes(const AgentTrack& a, const AgentTrack& b, double radius,
                                                  double min_duration, double dt) {
  std::vector<long> near;
  for (const auto& sa : a.samples) {
    const TrackSample* sb = b.sample_at(sa.time);
    if (sb && std::hypot(sa.x - sb->x, sa.y - sb->y) <= radius) near.push_back(std::lround(sa.time / dt));
  }
  std::vector<std::pair<long, long>> out;
  for (std::size_t i = 0; i < near.size();) {
    std::size_t j = i;
    while (j + 1 < near.size() && near[j + 1] == near[j] + 1) ++j;
    if (static_cast<double>(near[j] - near[i]) * dt >= min_duration - 1e-9) out.emplace_back(near[i], near[j]);
    i = j + 1;
  }
  return out;
}

}  // namespace

TEST(Zones, DefaultLayoutExamples) {
  const auto layout = ZoneLayout::default_layout();
  EXPECT_EQ(assign_zone(0.0, {0, 0}, {5, 0}, layout), "Main Fwd");
  const auto rear = assign_zone(0.0, {0, 0}, {-5, 0}, layout);
  ASSERT_TRUE(rear.has_value());
  EXPECT_NE(rear->find("Rear"), std::string::npos);
  EXPECT_FALSE(assign_zone(0.0, {0, 0}, {-25, 0}, layout).has_value());
  EXPECT_EQ(assign_zone(0.0, {0, 0}, {55, 0}, layout), "Main Fwd");
}

TEST(Zones, BoundaryGoesToLowerIndexedSector) {
  ZoneLayout layout({{"A", 0, 90, 10}, {"B", 90, 180, 10}, {"C", 180, 360, 10}});
  EXPECT_EQ(layout.sector_index(90.0), 1u);
  EXPECT_EQ(layout.sector_index(0.0), 0u);
  EXPECT_EQ(layout.sector_index(180.0), 2u);
  // Overlapping definitions are rejected, so the tie rule is about half-open ends.
  EXPECT_THROW(ZoneLayout({{"A", 0, 100, 10}, {"B", 90, 360, 10}}), ConfigError);
  EXPECT_THROW(ZoneLayout({{"A", 0, 80, 10}, {"B", 90, 360, 10}}), ConfigError);
  EXPECT_THROW(ZoneLayout({{"A", 0, 180, 0}, {"B", 180, 360, 10}}), ConfigError);
}

TEST(Zones, ClockwiseBearingConvention) {
  // Heading +x; an agent on the right (negative y) is at 90 degrees clockwise.
  EXPECT_NEAR(bearing_deg(0.0, {0, 0}, {0, -3}), 90.0, 1e-12);
  EXPECT_NEAR(bearing_deg(0.0, {0, 0}, {0, 3}), 270.0, 1e-12);
  const auto layout = ZoneLayout::default_layout();
  EXPECT_EQ(assign_zone(0.0, {0, 0}, {0, -3}, layout), "Side Fwd R");
  EXPECT_EQ(assign_zone(0.0, {0, 0}, {0, 3}, layout), "Side Fwd L");
}

TEST(Zones, RotationEquivariantOver360Rotations) {
  const auto layout = ZoneLayout::default_layout();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-25, 25);
  std::vector<Vec2> others;
  for (int i = 0; i < 40; ++i) others.push_back({U(rng), U(rng)});
  const Vec2 subject{3.0, -2.0};
  const double heading = 0.3;
  for (int r = 0; r < 360; ++r) {
    const double a = deg_to_rad(r + 0.5);
    auto rot = [a](Vec2 p) { return Vec2{p.x * std::cos(a) - p.y * std::sin(a), p.x * std::sin(a) + p.y * std::cos(a)}; };
    for (const auto& o : others) {
      const double b0 = bearing_deg(heading, subject, o);
      // Skip targets within rounding distance of a sector edge.
      bool near_edge = false;
      for (const auto& s : layout.sectors()) {
        for (double e : {s.start_deg, s.end_deg}) {
          if (std::abs(wrap_degrees(b0 - e + 180.0) - 180.0) < 1e-6) near_edge = true;
        }
      }
      if (near_edge) continue;
      EXPECT_EQ(assign_zone(heading, subject, o, layout), assign_zone(heading + a, rot(subject), rot(o), layout));
    }
  }
}

TEST(Zones, SampleOverloadNeedsHeading) {
  TrackSample s;
  s.vx = 0.1;
  EXPECT_THROW(assign_zone(s, {1, 0}, ZoneLayout::default_layout()), ArgumentError);
  s.vx = 2.0;
  EXPECT_EQ(assign_zone(s, {1, 0}, ZoneLayout::default_layout()), "Main Fwd");
}

TEST(Zones, JsonRoundTrip) {
  const auto layout = ZoneLayout::default_layout();
  const auto back = ZoneLayout::from_json(layout.to_json());
  ASSERT_EQ(back.sectors().size(), layout.sectors().size());
  for (std::size_t i = 0; i < layout.sectors().size(); ++i) EXPECT_EQ(back.sector(i).name, layout.sector(i).name);
}

TEST(Detect, NeverWithinRadiusGivesNothing) {
  std::vector<AgentTrack> tracks{stationary("a", {0, 0}, 0, 100), stationary("b", {100, 0}, 0, 100)};
  EXPECT_TRUE(detect_interactions(tracks, 30.0, 0.5).records.empty());
}

TEST(Detect, StationaryPairOneRecordPerDirection) {
  std::vector<AgentTrack> tracks{stationary("a", {0, 0}, 0, 300), stationary("b", {10, 0}, 50, 250)};
  auto set = detect_interactions(tracks, 15.0, 0.5);
  ASSERT_EQ(set.records.size(), 2u);
  for (const auto& r : set.records) {
    EXPECT_NEAR(r.duration(), 20.0, 1e-9);
    EXPECT_EQ(r.frames.size(), 201u);
    for (const auto& f : r.frames) EXPECT_EQ(f.distance, 10.0);
  }
  EXPECT_EQ(set.records[0].subject_id, "a");
  EXPECT_EQ(set.records[1].subject_id, "b");
}

TEST(Detect, CrossingBoundariesMatchQuadraticWithinOneFrame) {
  const double dt = 0.1;
  const double radius = 12.0;
  // a moves +x through the origin at t=10; b moves +y through it at t=12.
  auto a = support::grid_track("a", AgentKind::AV, 0, 300, dt, [](double t) {
    return support::State{4.0 * (t - 10), 0, 4, 0, 0, 0};
  });
  auto b = support::grid_track("b", AgentKind::Cyclist, 0, 300, dt, [](double t) {
    return support::State{0, 3.0 * (t - 12), 0, 3, 0, 0};
  });
  auto set = detect_interactions({a, b}, radius, 0.5, dt);
  ASSERT_EQ(set.records.size(), 2u);
  // relative position b - a = (-4(t-10), 3(t-12)) = (40, -36) + t (-4, 3)
  auto roots = support::radius_crossings({40, -36}, {-4, 3}, radius);
  ASSERT_EQ(roots.size(), 2u);
  for (const auto& r : set.records) {
    EXPECT_LE(std::abs(r.start_time - roots[0]), dt);
    EXPECT_LE(std::abs(r.end_time - roots[1]), dt);
    EXPECT_EQ(r.other_class.kind, r.subject_id == "a" ? AgentKind::Cyclist : AgentKind::AV);
  }
}

TEST(Detect, ShortEpisodesAreFiltered) {
  auto a = stationary("a", {0, 0}, 0, 100);
  auto b = support::grid_track("b", AgentKind::HDV, 0, 100, 0.1,
                               [](double t) { return support::State{-50 + 20 * t, 1, 20, 0, 0, 0}; });
  // b is within 2 m of a for 0.2 s only.
  EXPECT_TRUE(detect_interactions({a, b}, 2.0, 0.5).records.empty());
  EXPECT_FALSE(detect_interactions({a, b}, 2.0, 0.0).records.empty());
}

TEST(Detect, RejectsOffGridTracks) {
  auto a = support::cv_track("a", AgentKind::HDV, {0, 0}, {1, 0}, 0.05, 0.1, 10);
  auto b = support::cv_track("b", AgentKind::HDV, {0, 1}, {1, 0}, 0.05, 0.1, 10);
  EXPECT_THROW(detect_interactions({a, b}, 10.0, 0.0), ArgumentError);
}

class DetectRandom : public ::testing::TestWithParam<int> {};

TEST_P(DetectRandom, MatchesBruteForceAndInvariantsHold) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  std::uniform_real_distribution<double> U(-60, 60);
  std::uniform_real_distribution<double> V(-6, 6);
  std::uniform_int_distribution<long> K(0, 200);
  std::vector<AgentTrack> tracks;
  for (int i = 0; i < 25; ++i) {
    const Vec2 p{U(rng), U(rng)}, v{V(rng), V(rng)};
    long k0 = K(rng), k1 = K(rng);
    if (k0 > k1) std::swap(k0, k1);
    tracks.push_back(support::grid_track("ag" + std::to_string(i), i % 3 ? AgentKind::HDV : AgentKind::Pedestrian, k0,
                                         k1 + 1, 0.1, [p, v](double t) {
                                           return support::State{p.x + v.x * t, p.y + v.y * t, v.x, v.y, 0, 0};
                                         }));
  }
  DetectionOptions opt;
  opt.radius = 25.0;
  opt.min_duration = 0.5;
  opt.frames_per_chunk = 37;
  auto set = detect_interactions(tracks, opt);

  std::set<std::tuple<std::string, std::string, long, long>> got, want;
  for (const auto& r : set.records) {
    got.emplace(r.subject_id, r.other_id, std::lround(r.start_time / 0.1), std::lround(r.end_time / 0.1));
    for (const auto& f : r.frames) {
      EXPECT_LE(f.distance, opt.radius);
      EXPECT_GE(f.distance, 0.0);
      EXPECT_GE(f.bearing, 0.0);
      EXPECT_LT(f.bearing, 360.0);
    }
    for (std::size_t k = 1; k < r.frames.size(); ++k) EXPECT_LT(r.frames[k - 1].time, r.frames[k].time);
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if (i == j) continue;
      for (auto [f0, f1] : brute_episodes(tracks[i], tracks[j], opt.radius, opt.min_duration, 0.1)) {
        want.emplace(tracks[i].agent_id, tracks[j].agent_id, f0, f1);
      }
    }
  }
  EXPECT_EQ(got, want);

  // Symmetric support: every A->B record has a B->A twin on the same interval.
  for (const auto& [s, o, f0, f1] : got) EXPECT_TRUE(got.count({o, s, f0, f1})) << s << "->" << o;

  // Thread count and chunking never change the result.
  opt.threads = 4;
  opt.frames_per_chunk = 512;
  auto again = detect_interactions(tracks, opt);
  ASSERT_EQ(again.records.size(), set.records.size());
  for (std::size_t r = 0; r < set.records.size(); ++r) {
    ASSERT_EQ(again.records[r].frames.size(), set.records[r].frames.size());
    for (std::size_t k = 0; k < set.records[r].frames.size(); ++k) {
      EXPECT_EQ(again.records[r].frames[k].distance, set.records[r].frames[k].distance);
      EXPECT_EQ(again.records[r].frames[k].bearing, set.records[r].frames[k].bearing);
      EXPECT_EQ(again.records[r].frames[k].zone, set.records[r].frames[k].zone);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, DetectRandom, ::testing::Range(1, 9));
