// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "avs/attention.hpp"
#include "test_support.hpp"

namespace avs {
namespace {

using testing::compare_gradients;
using testing::random_matrix;

TEST(Window, CentredAndClippedAtEnds) {
  const AttentionWindow w{3};
  EXPECT_EQ(w.range(0, 10), (std::pair<std::size_t, std::size_t>{0, 2}));
  EXPECT_EQ(w.range(5, 10), (std::pair<std::size_t, std::size_t>{4, 7}));
  EXPECT_EQ(w.range(9, 10), (std::pair<std::size_t, std::size_t>{8, 10}));
  const AttentionWindow nine{9};
  EXPECT_EQ(nine.range(10, 30), (std::pair<std::size_t, std::size_t>{6, 15}));
}

TEST(Window, ScaleZeroIsGlobal) {
  const AttentionWindow g{0};
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(g.range(t, 6), (std::pair<std::size_t, std::size_t>{0, 6}));
}

TEST(Window, NeverEmptyAndAlwaysContainsStep) {
  for (std::size_t scale : {0u, 1u, 3u, 9u, 15u})
    for (std::size_t frames = 1; frames < 20; ++frames)
      for (std::size_t t = 0; t < frames; ++t) {
        const auto [b, e] = AttentionWindow{scale}.range(t, frames);
        EXPECT_LE(b, t);
        EXPECT_GT(e, t);
        EXPECT_LE(e, frames);
        if (scale > 0) {
          EXPECT_LE(e - b, scale);
        }
      }
}

TEST(Window, RejectsStepOutsideSequence) { EXPECT_THROW(AttentionWindow{3}.range(4, 4), Error); }

TEST(Scores, MultiplicativeIdentityPicksFirstComponent) {
  Tape tape;
  const MultiplicativeAttention<Var> p{tape.constant(Matrix::identity(2))};
  const ScoredWindow s = relevance_scores(p, tape.constant(Matrix{{1, 0}}), tape.constant(Matrix{{1, 0}}),
                                          AttentionWindow{0}, 0);
  EXPECT_EQ(s.scores.value()(0, 0), 1.0);
}

TEST(Scores, AdditiveWithZeroOutputVectorIsZero) {
  std::mt19937_64 rng(1);
  Tape tape;
  const AdditiveAttention<Var> p{tape.constant(Matrix(1, 3)), tape.constant(random_matrix(rng, 3, 2)),
                                 tape.constant(random_matrix(rng, 3, 4)), tape.constant(random_matrix(rng, 1, 3))};
  const Var ann = tape.constant(random_matrix(rng, 5, 4));
  const ScoredWindow s =
      relevance_scores(p, tape.constant(random_matrix(rng, 1, 2)), additive_keys(p, ann), AttentionWindow{0}, 2);
  for (double v : s.scores.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Scores, MatchScalarLoopOracleInsideWindow) {
  // T=5, scale 3, t=3 (0-based) attends rows 2..4.
  std::mt19937_64 rng(2);
  const Matrix ann = random_matrix(rng, 5, 4);
  const Matrix state = random_matrix(rng, 1, 3);
  const Matrix wm = random_matrix(rng, 4, 3);
  const Matrix w = random_matrix(rng, 1, 2), wa = random_matrix(rng, 2, 3), ua = random_matrix(rng, 2, 4),
               ba = random_matrix(rng, 1, 2);
  Tape tape;
  const Var a = tape.constant(ann);
  const ScoredWindow mult =
      relevance_scores(MultiplicativeAttention<Var>{tape.constant(wm)}, tape.constant(state), a, AttentionWindow{3}, 3);
  const AdditiveAttention<Var> ap{tape.constant(w), tape.constant(wa), tape.constant(ua), tape.constant(ba)};
  const ScoredWindow addv = relevance_scores(ap, tape.constant(state), additive_keys(ap, a), AttentionWindow{3}, 3);
  ASSERT_EQ(mult.begin, 2u);
  ASSERT_EQ(mult.end, 5u);
  ASSERT_EQ(addv.begin, 2u);
  ASSERT_EQ(addv.end, 5u);
  for (std::size_t i = 2; i < 5; ++i) {
    long double m = 0;
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) m += ann(i, r) * wm(r, c) * state(0, c);
    EXPECT_NEAR(mult.scores.value()(i - 2, 0), static_cast<double>(m), 1e-14);
    long double e = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      long double pre = ba(0, k);
      for (std::size_t c = 0; c < 3; ++c) pre += wa(k, c) * state(0, c);
      for (std::size_t r = 0; r < 4; ++r) pre += ua(k, r) * ann(i, r);
      e += w(0, k) * std::tanh(pre);
    }
    EXPECT_NEAR(addv.scores.value()(i - 2, 0), static_cast<double>(e), 1e-14);
  }
}

AttentionWeights weights_of(Tape& tape, const Matrix& scores) {
  return attention_weights(ScoredWindow{0, scores.rows(), tape.constant(scores)});
}

TEST(Weights, EqualScoresAreUniform) {
  Tape tape;
  const AttentionWeights w = weights_of(tape, Matrix(4, 1, 2.5));
  for (double v : w.weights.value().data()) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Weights, LogTwoGapDoublesTheWeight) {
  Tape tape;
  const AttentionWeights w = weights_of(tape, Matrix{{2.0}, {2.0 + std::log(2.0)}});
  EXPECT_NEAR(w.weights.value()(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w.weights.value()(1, 0), 2.0 / 3.0, 1e-15);
}

TEST(Weights, MatchExtendedPrecisionSoftmax) {
  std::mt19937_64 rng(3);
  const Matrix s = random_matrix(rng, 9, 1, -4, 4);
  Tape tape;
  const Matrix w = weights_of(tape, s).weights.value();
  long double z = 0;
  for (double v : s.data()) z += std::exp(static_cast<long double>(v));
  for (std::size_t i = 0; i < 9; ++i)
    EXPECT_NEAR(w(i, 0), static_cast<double>(std::exp(static_cast<long double>(s(i, 0))) / z), 1e-15);
}

TEST(Weights, RejectEmptyWindow) {
  Tape tape;
  EXPECT_THROW(attention_weights(ScoredWindow{2, 2, tape.constant(Matrix(1, 1))}), Error);
}

TEST(Context, SingleAttendedRowIsThatRow) {
  Tape tape;
  const Matrix ann{{1, 2}, {3, 4}, {5, 6}};
  const AttentionWeights w{1, 2, tape.constant(Matrix{{1.0}})};
  EXPECT_EQ(context_vector(w, tape.constant(ann)).value(), (Matrix{{3, 4}}));
}

TEST(Context, IdenticalRowsReproduceTheRow) {
  std::mt19937_64 rng(4);
  Tape tape;
  Matrix ann(6, 3);
  const Matrix r = random_matrix(rng, 1, 3);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t j = 0; j < 3; ++j) ann(t, j) = r(0, j);
  const AttentionWeights w = weights_of(tape, random_matrix(rng, 6, 1, -3, 3));
  const Matrix c = context_vector(w, tape.constant(ann)).value();
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c(0, j), r(0, j), 1e-15);
}

TEST(Context, UniformWeightsGiveTheMean) {
  Tape tape;
  const Matrix ann{{1, 0}, {2, 4}, {6, 2}};
  const Matrix c = context_vector(weights_of(tape, Matrix(3, 1)), tape.constant(ann)).value();
  EXPECT_NEAR(c(0, 0), 3.0, 1e-15);
  EXPECT_NEAR(c(0, 1), 2.0, 1e-15);
}

TEST(Context, RejectsRowsOutsideAnnotations) {
  Tape tape;
  const AttentionWeights w{2, 5, tape.constant(Matrix(3, 1, 1.0 / 3))};
  EXPECT_THROW(context_vector(w, tape.constant(Matrix(4, 2))), Error);
}

// Random decode steps through both score functions: weights normalise and the
// context stays inside the attended rows' componentwise hull.
TEST(AttentionProperty, NormalisedWeightsAndConvexContext) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> frames_of(1, 25), scale_of(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t frames = frames_of(rng);
    const std::size_t scale = scale_of(rng) == 0 ? 0 : 2 * scale_of(rng) + 1;
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, frames - 1)(rng);
    Tape tape;
    const Var ann = tape.constant(random_matrix(rng, frames, 4, -2, 2));
    const Var state = tape.constant(random_matrix(rng, 1, 3, -2, 2));
    ScoredWindow scored;
    if (trial % 2 == 0) {
      scored = relevance_scores(MultiplicativeAttention<Var>{tape.constant(random_matrix(rng, 4, 3, -2, 2))}, state, ann,
                                AttentionWindow{scale}, t);
    } else {
      const AdditiveAttention<Var> p{tape.constant(random_matrix(rng, 1, 5, -2, 2)),
                                     tape.constant(random_matrix(rng, 5, 3)), tape.constant(random_matrix(rng, 5, 4)),
                                     tape.constant(random_matrix(rng, 1, 5))};
      scored = relevance_scores(p, state, additive_keys(p, ann), AttentionWindow{scale}, t);
    }
    const AttentionWeights w = attention_weights(scored);
    double total = 0;
    for (double v : w.weights.value().data()) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    const Matrix c = context_vector(w, ann).value();
    for (std::size_t j = 0; j < 4; ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = w.begin; i < w.end; ++i) {
        lo = std::min(lo, ann.value()(i, j));
        hi = std::max(hi, ann.value()(i, j));
      }
      EXPECT_GE(c(0, j), lo - 1e-12);
      EXPECT_LE(c(0, j), hi + 1e-12);
    }
  }
}

TEST(AttentionProperty, WeightsInvariantToScoreShift) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix s = random_matrix(rng, 7, 1, -5, 5);
    Tape tape;
    const Matrix a = weights_of(tape, s).weights.value();
    for (double& v : s.data()) v += 123.0;
    const Matrix b = weights_of(tape, s).weights.value();
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a(i, 0), b(i, 0), 1e-12);
  }
}

TEST(AttentionGradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  const Matrix target = random_matrix(rng, 1, 4);
  const auto mult = compare_gradients(
      [&target](Tape& t, const std::vector<Var>& v) {
        const auto w = attention_weights(relevance_scores(MultiplicativeAttention<Var>{v[0]}, v[1], v[2],
                                                          AttentionWindow{3}, 2));
        return sum(mul(context_vector(w, v[2]), t.constant(target)));
      },
      {random_matrix(rng, 4, 3), random_matrix(rng, 1, 3), random_matrix(rng, 5, 4)});
  EXPECT_LT(mult.max_relative_error, 1e-4);
  const auto addv = compare_gradients(
      [&target](Tape& t, const std::vector<Var>& v) {
        const AdditiveAttention<Var> p{v[0], v[1], v[2], v[3]};
        const auto w =
            attention_weights(relevance_scores(p, v[4], additive_keys(p, v[5]), AttentionWindow{3}, 4));
        return sum(mul(context_vector(w, v[5]), t.constant(target)));
      },
      {random_matrix(rng, 1, 2), random_matrix(rng, 2, 3), random_matrix(rng, 2, 4), random_matrix(rng, 1, 2),
       random_matrix(rng, 1, 3), random_matrix(rng, 5, 4)});
  EXPECT_LT(addv.max_relative_error, 1e-4);
}

}  // namespace
}  // namespace avs
