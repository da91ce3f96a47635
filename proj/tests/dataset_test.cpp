// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "avs/dataset.hpp"
#include "avs/synthetic.hpp"
#include "test_support.hpp"

namespace avs {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Matrix decode_bytes(const std::string& bytes) {
  ByteReader r(bytes, "mem");
  return decode_features(r);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  const Matrix m = testing::random_matrix(rng, 7, 5, -1e6, 1e6);
  const std::string bytes = encode_features(m);
  EXPECT_EQ(bytes.size(), kFeatureHeaderBytes + 7 * 5 * 8);
  EXPECT_EQ(decode_bytes(bytes), m);
}

TEST(FeatureFile, EveryHeaderMutationIsRejected) {
  const std::string good = encode_features(Matrix(3, 2, 0.25));
  // Magic bytes, version, row count and column count all change the verdict.
  for (std::size_t offset : {0u, 1u, 2u, 3u, 4u, 8u, 12u}) {
    std::string bad = good;
    bad[offset] = static_cast<char>(bad[offset] + 1);
    EXPECT_THROW(decode_bytes(bad), Error) << "offset " << offset;
  }
}

TEST(FeatureFile, PayloadMismatchNamesDeclaredShape) {
  const std::string good = encode_features(Matrix(3, 2, 0.25));
  for (const std::string& bad : {good.substr(0, good.size() - 8), good + std::string(8, '\0')}) {
    try {
      decode_bytes(bad);
      FAIL() << "expected payload error";
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("3x2"), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(decode_bytes(good.substr(0, 10)), Error);
}

TEST(FeatureFile, RejectsNonFiniteValues) {
  std::string bytes = encode_features(Matrix(1, 1, 0.0));
  const double inf = std::numeric_limits<double>::infinity();
  std::memcpy(bytes.data() + kFeatureHeaderBytes, &inf, sizeof inf);
  EXPECT_THROW(decode_bytes(bytes), Error);
}

TEST(Dataset, SaveLoadRoundTrip) {
  TempDir dir("avs_dataset_test_roundtrip");
  SyntheticSpec spec;
  spec.videos = 3;
  spec.dim = 4;
  const auto records = generate_synthetic(spec);
  save_dataset(dir.path, records);
  const auto back = load_dataset(dir.path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i], records[i]);
}

TEST(Dataset, RejectsInconsistentMetadata) {
  TempDir dir("avs_dataset_test_bad");
  SyntheticSpec spec;
  spec.videos = 1;
  spec.dim = 3;
  auto r = generate_synthetic(spec)[0];
  save_record(dir.path, r);
  const fs::path meta = dir.path / (r.id + ".json");

  auto rewrite = [&](const std::function<void(nlohmann::json&)>& edit) {
    nlohmann::json j = record_metadata(r);
    edit(j);
    std::ofstream(meta, std::ios::trunc) << j.dump();
  };
  rewrite([](nlohmann::json& j) { j["gt_scores"].erase(0); });
  EXPECT_THROW(load_record(meta), Error);
  rewrite([](nlohmann::json& j) { j["frames"] = 1; });
  EXPECT_THROW(load_record(meta), Error);
  rewrite([](nlohmann::json& j) { j["user_summaries"] = {{{0, 100000}}}; });
  EXPECT_THROW(load_record(meta), Error);
  rewrite([](nlohmann::json& j) { j["features"] = "../escape.avsf"; });
  EXPECT_THROW(load_record(meta), Error);
  rewrite([](nlohmann::json& j) { j.erase("id"); });
  EXPECT_THROW(load_record(meta), Error);
  std::ofstream(meta, std::ios::trunc) << "{ not json";
  EXPECT_THROW(load_record(meta), Error);
  rewrite([](nlohmann::json&) {});
  EXPECT_EQ(load_record(meta), r);
}

TEST(Dataset, MissingDirectoryIsAnError) { EXPECT_THROW(load_dataset("/nonexistent/avs"), Error); }

TEST(Split, DeterministicDisjointAndCovering) {
  SyntheticSpec spec;
  spec.videos = 10;
  spec.dim = 2;
  spec.min_frames = 30;
  spec.max_frames = 40;
  const auto records = generate_synthetic(spec);
  const Split a = make_split(records, SplitSpec{.seed = 3, .test_fraction = 0.2, .augment_sources = {}});
  const Split b = make_split(records, SplitSpec{.seed = 3, .test_fraction = 0.2, .augment_sources = {}});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.test.size(), 2u);
  EXPECT_EQ(a.train.size() + a.test.size(), 10u);
  for (std::size_t t : a.test) EXPECT_EQ(std::count(a.train.begin(), a.train.end(), t), 0);
}

TEST(Split, AugmentSourcesOnlyTrain) {
  SyntheticSpec native;
  native.videos = 5;
  native.dim = 2;
  native.min_frames = 30;
  native.max_frames = 40;
  auto records = generate_synthetic(native);
  SyntheticSpec extra = native;
  extra.seed = 9;
  extra.source = "extra";
  for (auto& r : generate_synthetic(extra)) records.push_back(r);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Split s = make_split(records, {.seed = seed, .test_fraction = 0.4, .augment_sources = {"extra"}});
    for (std::size_t t : s.test) EXPECT_EQ(records[t].source, "synthetic");
    EXPECT_EQ(s.train.size() + s.test.size(), 10u);
    EXPECT_EQ(s.test.size(), 2u);
  }
}

TEST(Split, RejectsTooFewNativeRecords) {
  SyntheticSpec spec;
  spec.videos = 1;
  spec.dim = 2;
  EXPECT_THROW(make_split(generate_synthetic(spec), {}), Error);
}

TEST(Synthetic, GroundTruthSummaryIsThePlantedSubsetWithinBudget) {
  for (SyntheticTask task : {SyntheticTask::content, SyntheticTask::context}) {
    SyntheticSpec spec;
    spec.task = task;
    spec.videos = 8;
    spec.seed = 4;
    for (const auto& r : generate_synthetic(spec)) {
      validate_record(r);
      ASSERT_TRUE(r.shot_boundaries);
      const ShotSegmentation seg(*r.shot_boundaries);
      const Summary gt = ground_truth_summary(r.gt_scores, seg);
      EXPECT_LE(gt.selected_frames(), budget_frames(r.frame_count(), kDefaultBudget));
      EXPECT_GT(gt.selected_frames(), 0u);
      for (std::size_t s = 0; s < seg.shot_count(); ++s)
        EXPECT_EQ(gt.selection[s], r.gt_scores[seg.begin(s)] >= spec.high_min);
      EXPECT_EQ(r.user_summaries.size(), spec.users);
    }
  }
}

TEST(Synthetic, ContextTaskMarksOnlyShotCentres) {
  SyntheticSpec spec;
  spec.task = SyntheticTask::context;
  spec.noise = 0.0;
  spec.marker_gain = 2.0;
  spec.videos = 2;
  for (const auto& r : generate_synthetic(spec)) {
    const ShotSegmentation seg(*r.shot_boundaries);
    for (std::size_t s = 0; s < seg.shot_count(); ++s)
      for (std::size_t t = seg.begin(s); t < seg.end(s); ++t) {
        const bool centre = t == seg.begin(s) + seg.length(s) / 2;
        EXPECT_EQ(r.features(t, 0), centre ? 2.0 * r.gt_scores[t] : 0.0);
      }
  }
}

TEST(Synthetic, FixedShotLengthAndDeterminism) {
  SyntheticSpec spec;
  spec.shot_length = 9;
  spec.min_frames = 90;
  spec.max_frames = 120;
  spec.videos = 4;
  const auto a = generate_synthetic(spec);
  EXPECT_EQ(a, generate_synthetic(spec));
  for (const auto& r : a) {
    const ShotSegmentation seg(*r.shot_boundaries);
    for (std::size_t s = 0; s < seg.shot_count(); ++s) EXPECT_EQ(seg.length(s), 9u);
  }
}

}  // namespace
}  // namespace avs
