// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "avs/selection.hpp"
#include "oracles.hpp"

namespace avs {
namespace {

ShotTable table_of(const std::vector<double>& values, const std::vector<std::size_t>& frames, double budget) {
  std::vector<std::size_t> bounds{0};
  for (std::size_t f : frames) bounds.push_back(bounds.back() + f);
  std::vector<double> scores;
  for (std::size_t i = 0; i < frames.size(); ++i) scores.insert(scores.end(), frames[i], values[i]);
  return shot_scores(scores, ShotSegmentation(bounds), budget);
}

TEST(Budget, FloorOfFractionWithRepresentationSlack) {
  EXPECT_EQ(budget_frames(60, 0.15), 9u);
  EXPECT_EQ(budget_frames(100, 0.15), 15u);
  EXPECT_EQ(budget_frames(6, 0.15), 0u);
  EXPECT_EQ(budget_frames(7, 0.15), 1u);
  EXPECT_THROW(budget_frames(10, 0.0), Error);
  EXPECT_THROW(budget_frames(10, 1.5), Error);
}

TEST(ShotScores, MeanImportanceAndNormalisedLength) {
  const ShotTable t = shot_scores(std::vector<double>{1, 3, 0, 0, 0, 6}, ShotSegmentation({0, 2, 5, 6}), 0.5);
  ASSERT_EQ(t.shots.size(), 3u);
  EXPECT_EQ(t.shots[0].importance, 2.0);
  EXPECT_EQ(t.shots[1].importance, 0.0);
  EXPECT_DOUBLE_EQ(t.shots[0].length, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.shots[1].length, 1.0);
  EXPECT_EQ(t.capacity(), 3u);
  EXPECT_THROW(shot_scores(std::vector<double>{1, 2}, ShotSegmentation({0, 3}), 0.5), Error);
}

TEST(Knapsack, WorkedExample) {
  // Capacity 4 frames: {0,2} (value 1.0) beats {1} (value 0.9).
  const Summary s = knapsack_select(table_of({0.5, 0.9, 0.5, 0.1}, {2, 4, 2, 12}, 0.2));
  EXPECT_EQ(s.selection, (std::vector<bool>{true, false, true, false}));
  EXPECT_EQ(s.intervals, (std::vector<Interval>{{0, 2}, {6, 8}}));
}

TEST(Knapsack, TiesPreferEarlierShots) {
  const Summary s = knapsack_select(table_of({0.5, 0.5, 0.5}, {2, 2, 2}, 0.5));
  EXPECT_EQ(s.selection, (std::vector<bool>{true, false, false}));
}

TEST(Knapsack, NothingFitsGivesEmptySummary) {
  const Summary s = knapsack_select(table_of({1.0, 1.0}, {3, 3}, 0.15));
  EXPECT_TRUE(s.intervals.empty());
  EXPECT_EQ(s.selected_frames(), 0u);
}

TEST(Knapsack, MatchesBruteForceAndRespectsBudget) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_real_distribution<double> budget(0.05, 0.6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + trial % 14;
    std::vector<double> values(m);
    std::vector<std::size_t> frames(m);
    for (std::size_t i = 0; i < m; ++i) {
      values[i] = value(rng);
      frames[i] = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    }
    const ShotTable t = table_of(values, frames, budget(rng));
    const Summary s = knapsack_select(t);
    oracle::KnapsackInstance k{values, frames, t.capacity()};
    for (std::size_t i = 0; i < m; ++i) k.values[i] = t.shots[i].importance;
    const auto ref = oracle::brute_force_knapsack(k);
    EXPECT_NEAR(selection_value(t, s.selection), ref.value, 1e-12) << "trial " << trial;
    double load = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (s.selection[i]) load += t.shots[i].length;
    EXPECT_LE(load, 1.0 + 1e-12);
    EXPECT_LE(s.selected_frames(), t.capacity());
  }
}

TEST(SummaryIntervals, SortedAndMerged) {
  const Summary s = Summary::from_intervals(20, {{10, 12}, {0, 3}, {2, 5}, {12, 14}});
  EXPECT_EQ(s.intervals, (std::vector<Interval>{{0, 5}, {10, 14}}));
  EXPECT_EQ(s.selected_frames(), 9u);
  EXPECT_THROW(Summary::from_intervals(5, {{3, 6}}), Error);
  EXPECT_THROW(Summary::from_intervals(5, {{3, 3}}), Error);
}

TEST(Metrics, HalfPrecisionHalfRecallIsFifty) {
  EXPECT_EQ(f_measure(0.5, 0.5), 50.0);
  const Summary s = Summary::from_intervals(10, {{0, 4}});
  const Summary g = Summary::from_intervals(10, {{2, 6}});
  const PrecisionRecall pr = precision_recall(s, g);
  EXPECT_EQ(pr.precision, 0.5);
  EXPECT_EQ(pr.recall, 0.5);
  EXPECT_EQ(pr.f_score, 50.0);
}

TEST(Metrics, EdgeCases) {
  const Summary empty = Summary::from_intervals(10, {});
  const Summary g = Summary::from_intervals(10, {{0, 4}});
  EXPECT_EQ(precision_recall(empty, g).f_score, 0.0);
  EXPECT_EQ(precision_recall(g, g).f_score, 100.0);
  EXPECT_EQ(f_measure(0.0, 0.0), 0.0);
  EXPECT_THROW(precision_recall(g, Summary::from_intervals(11, {})), Error);
}

TEST(Metrics, MatchFrameCountingOracleExactly) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t frames = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    const auto si = oracle::random_intervals(rng, frames, 8);
    const auto gi = oracle::random_intervals(rng, frames, 8);
    std::vector<Interval> sv, gv;
    for (auto [a, b] : si) sv.push_back({a, b});
    for (auto [a, b] : gi) gv.push_back({a, b});
    const PrecisionRecall pr = precision_recall(Summary::from_intervals(frames, sv), Summary::from_intervals(frames, gv));
    const auto ref = oracle::frame_counting(frames, si, gi);
    EXPECT_EQ(pr.precision, ref.precision);
    EXPECT_EQ(pr.recall, ref.recall);
    EXPECT_EQ(pr.f_score, ref.f_score);
  }
}

TEST(Aggregation, MeanAveragesEachFieldMaxTakesBestUser) {
  const Summary s = Summary::from_intervals(10, {{0, 4}});
  const std::vector<Summary> users{Summary::from_intervals(10, {{0, 4}}), Summary::from_intervals(10, {{2, 6}}),
                                   Summary::from_intervals(10, {{6, 10}})};
  const EvalResult mean = evaluate_against_users(s, users, Aggregation::mean);
  EXPECT_DOUBLE_EQ(mean.f_score, 50.0);
  EXPECT_DOUBLE_EQ(mean.precision, 0.5);
  EXPECT_DOUBLE_EQ(mean.recall, 0.5);
  ASSERT_EQ(mean.per_user.size(), 3u);
  const EvalResult best = evaluate_against_users(s, users, Aggregation::max);
  EXPECT_EQ(best.f_score, 100.0);
  EXPECT_EQ(best.precision, 1.0);
  EXPECT_THROW(evaluate_against_users(s, {}, Aggregation::mean), Error);
  EXPECT_EQ(parse_aggregation("max"), Aggregation::max);
  EXPECT_THROW(parse_aggregation("median"), Error);
}

TEST(GroundTruth, SummaryUsesTheSameKnapsack) {
  const std::vector<double> gt{0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  const Summary s = ground_truth_summary(gt, ShotSegmentation({0, 2, 10}), 0.2);
  EXPECT_EQ(s.intervals, (std::vector<Interval>{{0, 2}}));
}

}  // namespace
}  // namespace avs
