#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avcons/flow/gains.hpp"
#include "support/oracles.hpp"

using namespace avcons;

namespace {

IntersectionGeometry line_at_x(double entry_x, double exit_x, const std::string& lane = "L1") {
  IntersectionGeometry g;
  g.entry_lines[lane] = {{entry_x, -5}, {entry_x, 5}};
  g.exit_lines[lane] = {{exit_x, -5}, {exit_x, 5}};
  return g;
}

/// Vehicle on y = 0 moving +x at speed v, at x = x0 when t = 0.
AgentTrack mover(const std::string& id, double x0, double v, double dt = 0.1, long k1 = 300,
                 const std::string& lane = "L1", AgentKind kind = AgentKind::HDV, double length = 0.0) {
  auto t = support::grid_track(id, kind, 0, k1, dt, [=](double s) { return support::State{x0 + v * s, 0, v, 0, 0, 0}; },
                               lane);
  t.length = length;
  return t;
}

AgentTrack accel_profile(const std::string& id, const std::vector<double>& ax, const std::vector<double>& ay,
                         double t0 = 0.0, double dt = 0.1) {
  AgentTrack t;
  t.agent_id = id;
  t.agent_class = AgentClass{AgentKind::HDV};
  for (std::size_t k = 0; k < ax.size(); ++k) {
    TrackSample s;
    s.time = t0 + static_cast<double>(k) * dt;
    s.vx = 5;
    s.ax = ax[k];
    s.ay = ay[k];
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

TEST(Headway, TwoVehiclesSameLane) {
  // Exit line at x = 50; a crosses at t = 5.03, b at 7.43.
  auto a = mover("a", 50 - 5.03 * 10, 10);
  auto b = mover("b", 50 - 7.43 * 10, 10);
  auto res = compute_headways({a, b}, line_at_x(0, 50), Boundary::Exit);
  ASSERT_EQ(res.events.size(), 1u);
  EXPECT_EQ(res.events[0].leader_id, "a");
  EXPECT_EQ(res.events[0].follower_id, "b");
  EXPECT_NEAR(res.events[0].headway, 2.4, 1e-9);
  EXPECT_TRUE(res.warnings.empty());
}

TEST(Headway, CutoffExcludesSlowFollowers) {
  auto a = mover("a", -10, 5);
  auto b = mover("b", -40, 5);
  EXPECT_TRUE(compute_headways({a, b}, line_at_x(0, 50), Boundary::Entry, 5.0).events.empty());
  EXPECT_EQ(compute_headways({a, b}, line_at_x(0, 50), Boundary::Entry, 6.5).events.size(), 1u);
}

TEST(Headway, BoundaryValueFiveSecondsIsExcluded) {
  // Times are multiples of 0.25 s and positions exact, so the crossings land
  // on samples at t = 2 and t = 7 exactly.
  auto a = mover("a", -8, 4, 0.25, 60);
  auto b = mover("b", -28, 4, 0.25, 60);
  auto c = mover("c", -47, 4, 0.25, 60);
  auto res = compute_headways({a, b, c}, line_at_x(0, 80), Boundary::Entry, 5.0);
  ASSERT_EQ(res.events.size(), 1u);
  EXPECT_EQ(res.events[0].leader_id, "b");
  EXPECT_EQ(res.events[0].headway, 4.75);
  auto res2 = compute_headways({a, b}, line_at_x(0, 80), Boundary::Entry, 5.0);
  EXPECT_TRUE(res2.events.empty());
}

TEST(Headway, CrossingTimeMatchesDenseOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0, 1);
  const DirectedSegment line{{0, -20}, {3, 20}};
  for (int i = 0; i < 100; ++i) {
    const double x0 = -30 - 20 * U(rng), v = 3 + 10 * U(rng), a = U(rng) - 0.5, w = 0.1 * (U(rng) - 0.5);
    auto t = support::grid_track("v", AgentKind::HDV, 0, 200, 0.1, [=](double s) {
      return support::State{x0 + v * s + 0.5 * a * s * s, w * s * s, v + a * s, 2 * w * s, a, 2 * w};
    });
    auto got = first_crossing(t, line);
    auto want = support::dense_crossing_time(t, line);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) {
      EXPECT_NEAR(got->time, *want, 1e-6);
    }
  }
}

TEST(Headway, LaneWithoutLineIsSkippedWithWarning) {
  auto a = mover("a", -10, 5, 0.1, 300, "L1");
  auto b = mover("b", -15, 5, 0.1, 300, "L9");
  auto res = compute_headways({a, b}, line_at_x(0, 50), Boundary::Entry);
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("L9"), std::string::npos);
  EXPECT_TRUE(res.events.empty());
}

TEST(Headway, RandomLanesRespectRetentionAndOrdering) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> X(-150, -1);
  std::uniform_real_distribution<double> V(4, 15);
  std::vector<AgentTrack> tracks;
  for (int i = 0; i < 60; ++i) {
    tracks.push_back(mover("v" + std::to_string(i), X(rng), V(rng), 0.1, 400, i % 2 ? "L1" : "L2"));
  }
  IntersectionGeometry g = line_at_x(0, 60, "L1");
  g.entry_lines["L2"] = g.entry_lines["L1"];
  auto res = compute_headways(tracks, g, Boundary::Entry, 5.0);
  ASSERT_FALSE(res.events.empty());
  std::map<std::string, std::vector<const HeadwayEvent*>> by_lane;
  for (const auto& e : res.events) {
    EXPECT_GT(e.headway, 0.0);
    EXPECT_LT(e.headway, 5.0);
    EXPECT_DOUBLE_EQ(e.headway, e.t_follower - e.t_leader);
    by_lane[e.lane].push_back(&e);
  }
  for (const auto& [lane, list] : by_lane) {
    for (std::size_t i = 1; i < list.size(); ++i) {
      EXPECT_LT(list[i - 1]->t_leader, list[i]->t_leader);
      EXPECT_LE(list[i - 1]->t_follower, list[i]->t_leader);
    }
  }
  // Oracle: consecutive crossing differences per lane, filtered.
  std::size_t expected = 0;
  for (const char* lane : {"L1", "L2"}) {
    std::vector<double> times;
    for (const auto& t : tracks) {
      if (t.samples[0].lane == lane) {
        if (auto c = support::dense_crossing_time(t, g.entry_lines.at(lane), 10)) times.push_back(*c);
      }
    }
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i) expected += times[i] - times[i - 1] > 0 && times[i] - times[i - 1] < 5.0;
  }
  EXPECT_EQ(res.events.size(), expected);
}

TEST(Platoon, SpacingPolicyExamples) {
  SpacingPolicy p;
  EXPECT_DOUBLE_EQ(p.threshold(5.0), 19.0);
  EXPECT_TRUE(p.satisfied(12.0, 5.0));
  EXPECT_TRUE(p.satisfied(19.0, 5.0));
  EXPECT_FALSE(p.satisfied(25.0, 5.0));
  EXPECT_THROW((SpacingPolicy{0.0, 2.0, 5.0}.validate()), ConfigError);
  EXPECT_THROW((SpacingPolicy{4.0, 2.0, -1.0}.validate()), ConfigError);
}

TEST(Platoon, MemberAtTwelveExcludedAtTwentyFive) {
  auto lead = mover("lead", 0, 5);
  auto near = mover("near", -12, 5);
  auto far = mover("far", -25, 5);
  EXPECT_EQ(identify_platoon(lead, std::vector<AgentTrack>{near}, SpacingPolicy{}, 2.0).members,
            std::vector<std::string>{"near"});
  EXPECT_TRUE(identify_platoon(lead, std::vector<AgentTrack>{far}, SpacingPolicy{}, 2.0).members.empty());
}

TEST(Platoon, QueueTenThirtyGivesLeaderPlusOne) {
  auto lead = mover("lead", 0, 5, 0.1, 300, "L1", AgentKind::AV, 4.0);
  auto f1 = mover("f1", -14, 5, 0.1, 300, "L1", AgentKind::HDV, 4.0);
  auto f2 = mover("f2", -48, 5, 0.1, 300, "L1", AgentKind::HDV, 4.0);
  auto chain = identify_platoon(lead, std::vector<AgentTrack>{f1, f2}, SpacingPolicy{}, 2.0);
  EXPECT_EQ(chain.members, std::vector<std::string>{"f1"});
  EXPECT_EQ(chain.leader_class.kind, AgentKind::AV);
  EXPECT_EQ(support::replay_platoon({&lead, &f1, &f2}, 2.0, 4, 2, 5, 10, 5, 0.1), chain.members);
}

TEST(Platoon, SustainedViolationBreaksMembershipBriefOneDoesNot) {
  auto lead = mover("lead", 0, 10);
  // Gap 20 at v=6 satisfies the policy at entry; the follower then brakes to a stop.
  auto braking = support::grid_track("brk", AgentKind::HDV, 0, 300, 0.1, [](double s) {
    const double t = s - 2.0;
    if (t <= 0) return support::State{6 * t, 0, 6, 0, 0, 0};
    if (t >= 2) return support::State{6, 0, 0, 0, 0, 0};
    return support::State{6 * t - 1.5 * t * t, 0, 6 - 3 * t, 0, -3, 0};
  }, "L1");
  PlatoonOptions opt;
  EXPECT_TRUE(identify_platoon(lead, std::vector<AgentTrack>{braking}, SpacingPolicy{}, 2.0, opt).members.empty());
  opt.violation_frames = 1000;
  EXPECT_EQ(identify_platoon(lead, std::vector<AgentTrack>{braking}, SpacingPolicy{}, 2.0, opt).members.size(), 1u);

  // A 0.5 s blip (5 frames) never reaches the 10-frame rule.
  auto blip = support::grid_track("blip", AgentKind::HDV, 0, 300, 0.1, [](double s) {
    const bool off = s > 3.0 && s < 3.55;
    return support::State{-15 + 10 * s - (off ? 20 : 0), 0, 10, 0, 0, 0};
  }, "L1");
  EXPECT_EQ(identify_platoon(lead, std::vector<AgentTrack>{blip}, SpacingPolicy{}, 2.0).members.size(), 1u);
}

TEST(Platoon, SlowLeaderGivesLeaderOnlyChain) {
  auto lead = mover("lead", 0, 1.5);
  auto f = mover("f", -8, 1.5);
  auto chain = identify_platoon(lead, std::vector<AgentTrack>{f}, SpacingPolicy{}, 2.0);
  EXPECT_TRUE(chain.members.empty());
  EXPECT_EQ(chain.leader_id, "lead");
}

TEST(Platoon, VrusAndOtherLanesAreNotCandidates) {
  auto lead = mover("lead", 0, 5);
  auto ped = mover("ped", -6, 5, 0.1, 300, "L1", AgentKind::Pedestrian);
  auto other = mover("oth", -6, 5, 0.1, 300, "L2");
  EXPECT_TRUE(identify_platoon(lead, std::vector<AgentTrack>{ped, other}, SpacingPolicy{}, 2.0).members.empty());
}

TEST(Platoon, RandomQueuesAgreeWithReplayAndArePrefixClosed) {
  std::mt19937_64 rng(21);
  for (int q = 0; q < 60; ++q) {
    const auto queue = support::scripted_queue(rng);
    std::vector<const AgentTrack*> order;
    for (const auto& t : queue) order.push_back(&t);
    auto chain = identify_platoon(queue[0], queue, SpacingPolicy{}, 2.0);
    EXPECT_EQ(chain.members, support::replay_platoon(order, 2.0, 4, 2, 5, 10, 5, 0.1)) << "queue " << q;
    const AgentTrack* pred = &queue[0];
    for (const auto& id : chain.members) {
      const AgentTrack* m = find_track(queue, id);
      EXPECT_TRUE(detail::platoon_member(*pred, *m, SpacingPolicy{}, 2.0, PlatoonOptions{}));
      pred = m;
    }
  }
}

TEST(Platoon, FindPlatoonsHonoursSignalsAndSpeed) {
  auto lead = mover("lead", -20.25, 5, 0.1, 200, "L1", AgentKind::AV, 4.0);
  auto f1 = mover("f1", -34.25, 5, 0.1, 200, "L1", AgentKind::HDV, 4.0);
  auto g = line_at_x(0, 40);
  auto res = find_platoons({lead, f1}, g, SpacingPolicy{});
  EXPECT_EQ(res.warnings.size(), 1u);
  ASSERT_EQ(res.chains.size(), 2u);
  EXPECT_EQ(res.chains[0].leader_id, "lead");
  EXPECT_EQ(res.chains[0].members, std::vector<std::string>{"f1"});
  EXPECT_NEAR(res.chains[0].formation_time, 4.1, 1e-9);

  g.signal_phases["*"] = {{0, 3.5, SignalPhase::Green}, {3.5, 100, SignalPhase::Red}};
  res = find_platoons({lead, f1}, g, SpacingPolicy{});
  EXPECT_TRUE(res.warnings.empty());
  EXPECT_TRUE(res.chains.empty());
}

TEST(Gain, IdentityZeroAndDoubling) {
  std::vector<double> ax, ay, zero(101, 0.0), twice_x, twice_y;
  for (int k = 0; k <= 100; ++k) {
    ax.push_back(std::sin(0.3 * k));
    ay.push_back(0.2 * std::cos(0.1 * k));
    twice_x.push_back(2 * ax.back());
    twice_y.push_back(2 * ay.back());
  }
  auto lead = accel_profile("l", ax, ay);
  EXPECT_EQ(*stability_gain(lead, accel_profile("f", ax, ay), 5.0).gain, 1.0);
  EXPECT_EQ(*stability_gain(lead, accel_profile("f", zero, zero), 5.0).gain, 0.0);
  auto r = stability_gain(lead, accel_profile("f", twice_x, twice_y), 5.0);
  EXPECT_NEAR(*r.gain, 2.0, 1e-12);
  EXPECT_FALSE(r.stable());
  EXPECT_DOUBLE_EQ(r.window_start(), 0.0);
  EXPECT_DOUBLE_EQ(r.window_end(), 10.0);
}

TEST(Gain, ScaleCovariantAndShiftInvariant) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> N(0, 1);
  std::uniform_real_distribution<double> C(0.01, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lx, ly, fx, fy;
    for (int k = 0; k <= 100; ++k) {
      lx.push_back(N(rng));
      ly.push_back(N(rng));
      fx.push_back(N(rng));
      fy.push_back(N(rng));
    }
    const double c = C(rng);
    std::vector<double> cx, cy;
    for (std::size_t k = 0; k < fx.size(); ++k) {
      cx.push_back(c * fx[k]);
      cy.push_back(c * fy[k]);
    }
    const double g = *stability_gain(accel_profile("l", lx, ly), accel_profile("f", fx, fy), 5.0).gain;
    const double gc = *stability_gain(accel_profile("l", lx, ly), accel_profile("f", cx, cy), 5.0).gain;
    EXPECT_NEAR(gc / (c * g), 1.0, 1e-12);
    const double shifted =
        *stability_gain(accel_profile("l", lx, ly, 7.5), accel_profile("f", fx, fy, 7.5), 12.5).gain;
    EXPECT_NEAR(shifted, g, 1e-12 * g);
  }
}

TEST(Gain, UndefinedAndCoverage) {
  std::vector<double> zero(101, 0.0), one(101, 1.0);
  auto r = stability_gain(accel_profile("l", zero, zero), accel_profile("f", one, zero), 5.0);
  EXPECT_FALSE(r.gain.has_value());
  EXPECT_FALSE(r.stable());
  EXPECT_THROW(stability_gain(accel_profile("l", one, zero), accel_profile("f", one, zero), 6.0), WindowCoverageError);
  EXPECT_THROW(stability_gain(accel_profile("l", one, zero), accel_profile("f", one, zero), 5.0, 0.0), ArgumentError);
}

TEST(Gain, ChainGainsUseEachVehiclesOwnEntryTime) {
  auto g = line_at_x(0, 100);
  auto lead = mover("lead", -80, 10, 0.1, 400, "L1", AgentKind::AV, 4.0);
  auto f1 = mover("f1", -100, 10, 0.1, 400, "L1", AgentKind::HDV, 4.0);
  for (auto* t : {&lead, &f1}) {
    for (auto& s : t->samples) s.ax = std::sin(s.time);
  }
  auto res = find_platoons({lead, f1}, g, SpacingPolicy{});
  auto gains = chain_gains(res.chains, {lead, f1}, g);
  ASSERT_EQ(gains.size(), 1u);
  EXPECT_EQ(gains[0].status, GainStatus::Ok);
  EXPECT_NEAR(gains[0].result.leader_t0, 8.0, 1e-9);
  EXPECT_NEAR(gains[0].result.follower_t0, 10.0, 1e-9);
  EXPECT_EQ(gains[0].result.follower_position, 1);
  EXPECT_EQ(gains[0].platoon_leader_id, "lead");
}
