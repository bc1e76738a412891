#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avcons/safety/conflict.hpp"
#include "avcons/synth/oracle.hpp"
#include "avcons/synth/random.hpp"
#include "support/oracles.hpp"

using namespace avcons;

namespace {

TrackSample at(double x, double y, double vx, double vy) {
  TrackSample s;
  s.x = x;
  s.y = y;
  s.vx = vx;
  s.vy = vy;
  return s;
}

}  // namespace

TEST(Ttc, FrameExamples) {
  EXPECT_DOUBLE_EQ(ttc_frame(10, 2), 5.0);
  EXPECT_TRUE(std::isinf(ttc_frame(7, -1)));
  EXPECT_TRUE(std::isinf(ttc_frame(7, 0)));
  EXPECT_EQ(ttc_frame(0, 3), 0.0);
  EXPECT_EQ(ttc_frame(0, -3), 0.0);
  EXPECT_THROW(ttc_frame(-1, 2), ArgumentError);
  EXPECT_THROW(ttc_frame(NAN, 2), ArgumentError);
}

TEST(Ttc, ScaleConsistent) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.01, 100);
  for (int i = 0; i < 500; ++i) {
    const double d = U(rng), v = U(rng), c = U(rng);
    EXPECT_NEAR(ttc_frame(c * d, c * v), ttc_frame(d, v), 1e-12 * ttc_frame(d, v));
  }
}

TEST(Ttc, ClosingSpeedExamples) {
  EXPECT_DOUBLE_EQ(*relative_closing_speed(at(0, 0, 2, 0), at(10, 0, -1, 0)), 3.0);
  EXPECT_DOUBLE_EQ(*relative_closing_speed(at(0, 0, 2, 1), at(3, 4, 2, 1)), 0.0);
  EXPECT_TRUE(std::isinf(ttc_between(at(0, 0, 2, 1), at(3, 4, 2, 1))));
  // Perpendicular: other at (0, 5) moving +x, subject still; dp is perpendicular to dv.
  EXPECT_DOUBLE_EQ(*relative_closing_speed(at(0, 0, 0, 0), at(0, 5, 3, 0)), 0.0);
  EXPECT_FALSE(relative_closing_speed(at(1, 1, 0, 0), at(1, 1, 5, 0)).has_value());
  EXPECT_EQ(ttc_between(at(1, 1, 0, 0), at(1, 1, 5, 0)), 0.0);
}

TEST(Ttc, MatchesAnalyticOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const auto s = at(U(rng), U(rng), U(rng) / 5, U(rng) / 5);
    const auto o = at(U(rng), U(rng), U(rng) / 5, U(rng) / 5);
    const double expect = support::analytic_ttc({o.x - s.x, o.y - s.y}, {o.vx - s.vx, o.vy - s.vy});
    const double got = ttc_between(s, o);
    if (std::isinf(expect)) {
      EXPECT_TRUE(std::isinf(got));
    } else {
      EXPECT_NEAR(got, expect, 1e-9 * expect);
    }
  }
}

TEST(Pet, Examples) {
  auto a = support::cv_track("a", AgentKind::AV, {-10, 0}, {2, 0}, 0, 0.1, 141);
  EXPECT_EQ(compute_pet(a, a), 0.0);
  // b reaches the origin 3 s after a does (a at t=5, b at t=8).
  auto b = support::cv_track("b", AgentKind::Cyclist, {0, -16}, {0, 2}, 0, 0.1, 141);
  auto pet = compute_pet(a, b);
  ASSERT_TRUE(pet.has_value());
  EXPECT_NEAR(*pet, 3.0, 1e-9);
  auto far = support::cv_track("c", AgentKind::HDV, {0, 100}, {1, 0}, 0, 0.1, 50);
  EXPECT_FALSE(compute_pet(a, far).has_value());
  EXPECT_FALSE(synth::oracle_pet(a, far).has_value());
  EXPECT_EQ(synth::oracle_pet(a, a), 0.0);
}

TEST(Pet, ThresholdIsStrict) {
  auto a = support::cv_track("a", AgentKind::AV, {0, 0}, {1, 0}, 0, 0.5, 20);
  auto b = support::cv_track("b", AgentKind::AV, {0, 5}, {1, 0}, 0, 0.5, 20);
  EXPECT_FALSE(compute_pet(a, b, 5.0).has_value());
  EXPECT_TRUE(compute_pet(a, b, 5.0 + 1e-9).has_value());
}

TEST(Pet, SymmetricAndEqualToOracle) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 150; ++i) {
    auto [a, b] = synth::random_crossing_pair(rng, 200);
    const auto p = compute_pet(a, b);
    EXPECT_EQ(p, compute_pet(b, a));
    EXPECT_EQ(p, synth::oracle_pet(a, b));
    const auto e = closest_encroachment(a, b);
    const auto o = synth::oracle_encroachment(a, b);
    EXPECT_EQ(e.min_separation, o.min_separation);
    EXPECT_EQ(e.time_gap(), o.time_gap);
    if (p) {
      EXPECT_GE(*p, 0.0);
    }
  }
}

TEST(Pet, DuplicatedPositionsTieOnSmallestGap) {
  // Both agents stand still at the same point for part of the time: every
  // overlapping pair is at distance 0, the smallest gap is 0.
  auto a = support::grid_track("a", AgentKind::Pedestrian, 0, 40, 0.1, [](double) { return support::State{}; });
  auto b = support::grid_track("b", AgentKind::AV, 20, 60, 0.1, [](double) { return support::State{}; });
  EXPECT_EQ(compute_pet(a, b), 0.0);
  EXPECT_EQ(synth::oracle_pet(a, b), 0.0);
}

TEST(Exposure, CountsFramesBelowThreshold) {
  ConflictMetrics m;
  for (int i = 0; i < 30; ++i) m.ttc_series.push_back({i * 0.1, kInfiniteTtc});
  EXPECT_EQ(ttc_exposure(m, 3.0, 0.1), 0.0);
  for (int i = 0; i < 12; ++i) m.ttc_series[static_cast<std::size_t>(i)].ttc = 1.0 + 0.1 * i;
  EXPECT_NEAR(ttc_exposure(m, 3.0, 0.1), 1.2, 1e-12);
}

TEST(Exposure, ApproachThenDivergeMatchesAnalyticWindow) {
  // Head-on at closing speed 2 m/s, 40 m apart at t=0, collision course offset
  // laterally by 1 m so TTC stays finite until passing.
  const double dt = 0.1;
  auto a = support::grid_track("a", AgentKind::AV, 0, 300, dt, [](double t) { return support::State{t, 0, 1, 0, 0, 0}; });
  auto b = support::grid_track("b", AgentKind::HDV, 0, 300, dt,
                               [](double t) { return support::State{40 - t, 1, -1, 0, 0, 0}; });
  InteractionRecord rec;
  rec.subject_id = "a";
  rec.other_id = "b";
  for (const auto& s : a.samples) rec.frames.push_back({s.time, 0, 0, 0});
  auto m = conflict_metrics(rec, a, b);
  // ttc(t) = d^2 / (2 (40 - 2t)) with d^2 = (40 - 2t)^2 + 1, for t < 20.
  // Solve ttc = 3: (40-2t)^2 - 6 (40-2t) + 1 = 0, u = 40 - 2t = 3 +- sqrt(8).
  const double u_hi = 3 + std::sqrt(8.0), u_lo = 3 - std::sqrt(8.0);
  const double window = (40 - u_lo) / 2 - (40 - u_hi) / 2;
  for (double thr : {3.0}) EXPECT_NEAR(ttc_exposure(m, thr, dt), window, dt + 1e-9);
  double prev = 0;
  for (double thr = 0.5; thr < 20; thr += 0.5) {
    const double e = ttc_exposure(m, thr, dt);
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(CoOccupancy, Examples) {
  auto geom = geometry_from_json(nlohmann::json::parse(
      R"({"crosswalks":[{"name":"cw","vertices":[[-0.05,0],[4.05,0],[4.05,10],[-0.05,10]]}]})"));
  const double dt = 0.1;
  // Vehicle at 2 m/s along y = 5: inside for x in [0, 4], t in [10, 12].
  auto veh = support::grid_track("veh", AgentKind::HDV, 0, 200, dt,
                                 [](double t) { return support::State{-20 + 2 * t, 5, 2, 0, 0, 0}; });
  EXPECT_TRUE(detect_co_occupancy({veh}, geom, 0.5, dt).empty());

  auto walker = support::grid_track("ped", AgentKind::Pedestrian, 0, 200, dt,
                                    [](double t) { return support::State{2, -6 + 1.2 * t, 0, 1.2, 0, 0}; });
  auto events = detect_co_occupancy({veh, walker}, geom, 0.5, dt);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].vehicle_id, "veh");
  EXPECT_EQ(events[0].vru_id, "ped");
  EXPECT_NEAR(events[0].end - events[0].start, 2.0, 1e-9);
  EXPECT_GT(events[0].vru_speed_at_entry, 0.5);

  auto stander = support::grid_track("ped2", AgentKind::Pedestrian, 0, 200, dt,
                                     [](double) { return support::State{2, 5, 0.2, 0, 0, 0}; });
  EXPECT_TRUE(detect_co_occupancy({veh, stander}, geom, 0.5, dt).empty());
}

TEST(CoOccupancy, DisjointPolygonsNeverShareKeys) {
  auto geom = geometry_from_json(nlohmann::json::parse(R"({"crosswalks":[
    {"name":"a","vertices":[[0,0],[4,0],[4,10],[0,10]]},
    {"name":"b","vertices":[[20,0],[24,0],[24,10],[20,10]]}]})"));
  const double dt = 0.1;
  auto veh = support::grid_track("veh", AgentKind::AV, 0, 300, dt,
                                 [](double t) { return support::State{-10 + 2 * t, 5, 2, 0, 0, 0}; });
  auto p1 = support::grid_track("p1", AgentKind::Pedestrian, 0, 300, dt,
                                [](double t) { return support::State{1, std::fmod(t, 10.0), 0, 1, 0, 0}; });
  auto p2 = support::grid_track("p2", AgentKind::Cyclist, 0, 300, dt,
                                [](double t) { return support::State{21, std::fmod(t, 10.0), 0, 1, 0, 0}; });
  auto events = detect_co_occupancy({veh, p1, p2}, geom, 0.5, dt);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_NE(events[0].zone, events[1].zone);
  for (const auto& e : events) EXPECT_LE(e.start, e.end);
  EXPECT_THROW(detect_co_occupancy({veh}, IntersectionGeometry{}, 0.5, dt), ConfigError);
}
