#include <gtest/gtest.h>

#include <random>

#include "avcons/consensus/assemble.hpp"
#include "support/oracles.hpp"

using namespace avcons;

namespace {

ConsensusFrame frame_with(int satisfied) {
  ConsensusFrame f;
  f.satisfied_count = satisfied;
  f.safety_ok = satisfied >= 1;
  f.interaction_ok = satisfied >= 2;
  f.performance_ok = satisfied >= 3;
  return f;
}

FrameContext random_context(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  FrameContext c;
  c.ttc = U(rng) < 0.1 ? kInfiniteTtc : 10 * U(rng);
  c.encounter_min_ttc = c.ttc * U(rng);
  if (U(rng) < 0.7) c.pet = 10 * U(rng);
  c.in_hesitation = U(rng) < 0.3;
  if (U(rng) < 0.9) c.speed_cv = 0.5 * U(rng);
  if (U(rng) < 0.8) c.exit_headway = 8 * U(rng);
  if (U(rng) < 0.8) c.follower_gain = 2 * U(rng);
  return c;
}

}  // namespace

TEST(Classify, Examples) {
  const ConsensusThresholds th;
  auto all = classify_frame(support::context_for(true, true, true), th);
  ASSERT_TRUE(all);
  EXPECT_EQ(all->satisfied_count, 3);

  auto ctx = support::context_for(true, true, true);
  ctx.ttc = 2.0;
  auto two = classify_frame(ctx, th);
  EXPECT_EQ(two->satisfied_count, 2);
  EXPECT_FALSE(two->safety_ok);

  ctx = support::context_for(true, true, true);
  ctx.ttc = kInfiniteTtc;
  ctx.pet.reset();
  EXPECT_TRUE(classify_frame(ctx, th)->safety_ok);
  ConsensusPolicy strict;
  strict.pet_missing = EvidencePolicy::Strict;
  EXPECT_FALSE(classify_frame(ctx, th, strict)->safety_ok);
}

TEST(Classify, BoundariesAreStrictWhereStated) {
  const ConsensusThresholds th;
  auto ctx = support::context_for(true, true, true);
  ctx.ttc = 3.0;
  EXPECT_FALSE(classify_frame(ctx, th)->safety_ok);
  ctx = support::context_for(true, true, true);
  ctx.pet = 5.0;
  EXPECT_FALSE(classify_frame(ctx, th)->safety_ok);
  ctx = support::context_for(true, true, true);
  ctx.exit_headway = 4.0;
  EXPECT_FALSE(classify_frame(ctx, th)->performance_ok);
  ctx = support::context_for(true, true, true);
  ctx.follower_gain = 1.0;
  EXPECT_TRUE(classify_frame(ctx, th)->performance_ok);
  ctx.speed_cv = 0.25;
  EXPECT_FALSE(classify_frame(ctx, th)->interaction_ok);
  ctx.speed_cv.reset();
  EXPECT_TRUE(classify_frame(ctx, th)->interaction_ok);
}

TEST(Classify, TtcSourceAndMissingPerformance) {
  const ConsensusThresholds th;
  auto ctx = support::context_for(true, true, true);
  ctx.encounter_min_ttc = 1.0;
  ConsensusPolicy enc;
  enc.ttc_source = TtcSource::EncounterMinimum;
  EXPECT_TRUE(classify_frame(ctx, th)->safety_ok);
  EXPECT_FALSE(classify_frame(ctx, th, enc)->safety_ok);

  ctx.follower_gain.reset();
  EXPECT_FALSE(classify_frame(ctx, th)->performance_ok);
  ConsensusPolicy vac;
  vac.performance_missing = EvidencePolicy::Vacuous;
  EXPECT_TRUE(classify_frame(ctx, th, vac)->performance_ok);
  ctx.exit_headway = 4.5;
  EXPECT_FALSE(classify_frame(ctx, th, vac)->performance_ok);
}

TEST(Classify, ExcludeFramePolicy) {
  const ConsensusThresholds th;
  auto ctx = support::context_for(true, true, true);
  ctx.pet.reset();
  ConsensusPolicy ex;
  ex.pet_missing = EvidencePolicy::ExcludeFrame;
  EXPECT_FALSE(classify_frame(ctx, th, ex).has_value());
  ctx = support::context_for(true, true, true);
  ctx.exit_headway.reset();
  ex = {};
  ex.performance_missing = EvidencePolicy::ExcludeFrame;
  EXPECT_FALSE(classify_frame(ctx, th, ex).has_value());
}

TEST(Classify, RealisedTriplesRoundTrip) {
  const ConsensusThresholds th;
  for (int m = 0; m < 8; ++m) {
    const bool s = m & 1, i = m & 2, p = m & 4;
    auto f = classify_frame(support::context_for(s, i, p), th);
    EXPECT_EQ(f->safety_ok, s);
    EXPECT_EQ(f->interaction_ok, i);
    EXPECT_EQ(f->performance_ok, p);
    EXPECT_EQ(f->satisfied_count, int(s) + int(i) + int(p));
  }
}

TEST(Summary, Examples) {
  auto s = summarize({frame_with(3), frame_with(2), frame_with(1), frame_with(0)});
  EXPECT_DOUBLE_EQ(s.pct_all_three(), 25.0);
  EXPECT_DOUBLE_EQ(s.pct_exactly_two(), 25.0);
  EXPECT_DOUBLE_EQ(s.pct_at_most_one(), 50.0);
  auto all = summarize(std::vector<ConsensusFrame>(7, frame_with(3)));
  EXPECT_DOUBLE_EQ(all.pct_all_three(), 100.0);
  EXPECT_DOUBLE_EQ(all.pct_exactly_two(), 0.0);
  EXPECT_DOUBLE_EQ(all.pct_at_most_one(), 0.0);
  EXPECT_THROW(summarize({}), EmptySummaryError);
  EXPECT_EQ(s.to_json()["total_frames"], 4);
}

TEST(Summary, SumsToHundredAndIgnoresOrder) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> D(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ConsensusFrame> frames(1 + trial);
    for (auto& f : frames) f = frame_with(D(rng));
    auto s = summarize(frames);
    EXPECT_NEAR(s.pct_all_three() + s.pct_exactly_two() + s.pct_at_most_one(), 100.0, 1e-9);
    std::shuffle(frames.begin(), frames.end(), rng);
    auto t = summarize(frames);
    EXPECT_EQ(s.count_by_satisfied, t.count_by_satisfied);
    EXPECT_EQ(s.pct_all_three(), t.pct_all_three());
  }
}

TEST(Classify, RelaxingThresholdsNeverLowersTheCount) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto ctx = random_context(rng);
    ConsensusThresholds th;
    ConsensusThresholds relaxed = th;
    relaxed.ttc_min *= U(rng);
    relaxed.pet_min *= U(rng);
    relaxed.exit_headway_max *= 1 + U(rng);
    relaxed.gain_max *= 1 + U(rng);
    relaxed.speed_cv_max *= 1 + U(rng);
    for (auto pet : {EvidencePolicy::Strict, EvidencePolicy::Vacuous}) {
      ConsensusPolicy pol;
      pol.pet_missing = pet;
      const auto a = classify_frame(ctx, th, pol);
      const auto b = classify_frame(ctx, relaxed, pol);
      ASSERT_TRUE(a && b);
      EXPECT_GE(b->satisfied_count, a->satisfied_count);
      EXPECT_EQ(classify_frame(ctx, th, pol)->satisfied_count, a->satisfied_count);
    }
  }
}

TEST(Thresholds, Validation) {
  ConsensusThresholds th;
  th.validate();
  th.gain_max = 0;
  EXPECT_THROW(th.validate(), ConfigError);
  EXPECT_EQ(parse_evidence_policy("exclude-frame"), EvidencePolicy::ExcludeFrame);
  EXPECT_THROW(parse_evidence_policy("lenient"), ConfigError);
}

TEST(SpeedCv, Helper) {
  EXPECT_FALSE(coefficient_of_variation({}).has_value());
  EXPECT_FALSE(coefficient_of_variation({0, 0, 0}).has_value());
  EXPECT_DOUBLE_EQ(*coefficient_of_variation({2, 2, 2}), 0.0);
  EXPECT_NEAR(*coefficient_of_variation({1, 3}), 0.5, 1e-15);
}

TEST(Assemble, FramesTakeEvidenceFromTheirEncounter) {
  std::vector<AgentTrack> tracks = {
      support::grid_track("av", AgentKind::AV, 0, 100, 0.1, [](double t) { return support::State{t, 0, 1, 0, 0, 0}; }),
      support::grid_track("ped", AgentKind::Pedestrian, 0, 100, 0.1,
                          [](double t) { return support::State{5, 1.2 * t - 6, 0, 1.2, 0, 0}; }),
  };
  auto set = detect_interactions(tracks, 10.0, 0.5, 0.1);
  std::vector<ConflictMetrics> conflicts;
  for (const auto& r : set.records) {
    if (r.subject_id == "av") conflicts.push_back(conflict_metrics(r, tracks[0], tracks[1]));
  }
  std::vector<HesitationEvent> hes(1);
  hes[0].vru_id = "ped";
  hes[0].vehicle_id = "av";
  hes[0].t_slow_start = 4.0;
  hes[0].t_recover = 5.0;
  std::vector<HeadwayEvent> heads(1);
  heads[0].follower_id = "av";
  heads[0].t_follower = 8.0;
  heads[0].headway = 2.0;
  std::vector<ChainGain> gains(1);
  gains[0].platoon_leader_id = "av";
  gains[0].result.follower_position = 1;
  gains[0].result.leader_t0 = 3.0;
  gains[0].result.gain = 0.8;

  ConsensusInputs in{&tracks, &set, &conflicts, &hes, &heads, &gains};
  auto run = build_consensus(in, ConsensusOptions{});
  ASSERT_FALSE(run.frames.empty());
  std::size_t av_frames = 0;
  for (const auto& r : set.records) av_frames += r.subject_id == "av" ? r.frames.size() : 0;
  EXPECT_EQ(run.frames.size(), av_frames);
  EXPECT_EQ(run.excluded_frames, 0u);
  for (std::size_t i = 0; i < run.frames.size(); ++i) {
    const auto& c = run.contexts[i];
    EXPECT_EQ(c.in_hesitation, c.time >= 4.0 - 1e-9 && c.time <= 5.0 + 1e-9);
    EXPECT_EQ(c.exit_headway, 2.0);
    EXPECT_EQ(c.follower_gain, 0.8);
    EXPECT_TRUE(run.frames[i].performance_ok);
    EXPECT_EQ(run.frames[i].interaction_ok, !c.in_hesitation && (!c.speed_cv || *c.speed_cv < 0.25));
  }

  ConsensusOptions tight;
  tight.evidence_max_gap = 0.0;
  heads[0].t_follower = 1000;
  auto far = build_consensus(in, tight);
  for (const auto& c : far.contexts) EXPECT_FALSE(c.exit_headway.has_value());
}
