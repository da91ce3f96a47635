// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "avs/binary_io.hpp"
#include "avs/decoder.hpp"
#include "avs/selection.hpp"

namespace avs {

struct VideoRecord {
  std::string id;
  double fps = 2.0;
  Matrix features;  // T × d
  ImportanceScores gt_scores;
  std::vector<std::vector<Interval>> user_summaries;
  std::string source = "synthetic";
  std::optional<std::vector<std::size_t>> shot_boundaries;  // reference segmentation, when known

  std::size_t frame_count() const { return features.rows(); }

  std::vector<Summary> user_summary_objects() const {
    std::vector<Summary> out;
    for (const auto& u : user_summaries) out.push_back(Summary::from_intervals(frame_count(), u));
    return out;
  }

  bool operator==(const VideoRecord&) const = default;
};

inline bool valid_record_id(const std::string& id) {
  return !id.empty() && id.front() != '.' && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

inline void validate_record(const VideoRecord& r) {
  const std::string where = "record '" + r.id + "': ";
  require(valid_record_id(r.id), where + "invalid id");
  require(r.features.rows() > 0 && r.features.cols() > 0, where + "empty feature matrix");
  for (std::size_t i = 0; i < r.features.size(); ++i)
    require(std::isfinite(r.features[i]), where + "non-finite feature at element " + std::to_string(i));
  require(r.gt_scores.size() == r.features.rows(), where + std::to_string(r.gt_scores.size()) +
                                                       " scores for " + std::to_string(r.features.rows()) +
                                                       " frames");
  for (std::size_t i = 0; i < r.gt_scores.size(); ++i)
    require(std::isfinite(r.gt_scores[i]), where + "non-finite score at frame " + std::to_string(i));
  require(r.fps > 0.0 && std::isfinite(r.fps), where + "fps must be positive");
  for (const auto& user : r.user_summaries)
    for (const auto& iv : user)
      require(iv.begin < iv.end && iv.end <= r.frame_count(),
              where + "user interval [" + std::to_string(iv.begin) + "," + std::to_string(iv.end) +
                  ") outside the video");
  if (r.shot_boundaries) {
    const ShotSegmentation seg(*r.shot_boundaries);
    require(seg.frame_count() == r.frame_count(), where + "shot boundaries do not cover the video");
  }
}

// ---- feature file: "AVSF" | version u32 | T u32 | d u32 | T·d f64, all little-endian ----

inline constexpr std::string_view kFeatureMagic = "AVSF";
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

inline std::string encode_features(const Matrix& features) {
  ByteWriter w;
  w.put_bytes(kFeatureMagic);
  w.put_u32(kFeatureVersion);
  w.put_u32(static_cast<std::uint32_t>(features.rows()));
  w.put_u32(static_cast<std::uint32_t>(features.cols()));
  for (double v : features.data()) w.put_f64(v);
  return w.bytes();
}

inline Matrix decode_features(ByteReader& r) {
  if (r.bytes(4) != kFeatureMagic) r.fail("bad feature-file magic");
  if (const std::uint32_t version = r.u32(); version != kFeatureVersion)
    r.fail("unsupported feature-file version " + std::to_string(version));
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (rows == 0 || cols == 0) r.fail("empty feature matrix");
  const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * 8;
  if (r.remaining() != expected)
    r.fail("payload of " + std::to_string(r.remaining()) + " bytes does not match declared " + std::to_string(rows) +
           "x" + std::to_string(cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) {
    v = r.f64();
    if (!std::isfinite(v)) r.fail("non-finite feature value");
  }
  return m;
}

// ---- metadata (JSON) ----

inline nlohmann::json record_metadata(const VideoRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["fps"] = r.fps;
  j["source"] = r.source;
  j["frames"] = r.frame_count();
  j["features"] = r.id + ".avsf";
  j["gt_scores"] = r.gt_scores;
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : r.user_summaries) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& x : u) iv.push_back({x.begin, x.end});
    users.push_back(iv);
  }
  j["user_summaries"] = users;
  if (r.shot_boundaries) j["shot_boundaries"] = *r.shot_boundaries;
  return j;
}

inline void save_record(const std::filesystem::path& dir, const VideoRecord& r) {
  validate_record(r);
  std::filesystem::create_directories(dir);
  ByteWriter w;
  w.put_bytes(encode_features(r.features));
  w.write_file(dir / (r.id + ".avsf"));
  std::ofstream meta(dir / (r.id + ".json"), std::ios::trunc);
  require(static_cast<bool>(meta), "cannot write metadata for '" + r.id + "'");
  meta << record_metadata(r).dump(1) << '\n';
}

inline void save_dataset(const std::filesystem::path& dir, const std::vector<VideoRecord>& records) {
  for (const auto& r : records) save_record(dir, r);
}

inline VideoRecord load_record(const std::filesystem::path& metadata_path) {
  const std::string where = metadata_path.string() + ": ";
  std::ifstream in(metadata_path);
  require(static_cast<bool>(in), "cannot open '" + metadata_path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + "malformed metadata: " + e.what());
  }
  VideoRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.fps = j.value("fps", 2.0);
    r.source = j.value("source", std::string("unknown"));
    r.gt_scores = j.at("gt_scores").get<std::vector<double>>();
    for (const auto& u : j.value("user_summaries", nlohmann::json::array())) {
      std::vector<Interval> intervals;
      for (const auto& iv : u) intervals.push_back({iv.at(0).get<std::size_t>(), iv.at(1).get<std::size_t>()});
      r.user_summaries.push_back(std::move(intervals));
    }
    if (j.contains("shot_boundaries")) r.shot_boundaries = j.at("shot_boundaries").get<std::vector<std::size_t>>();
    const std::string feature_file = j.value("features", r.id + ".avsf");
    require(valid_record_id(feature_file), where + "invalid feature file name");
    ByteReader reader = ByteReader::from_file(metadata_path.parent_path() / feature_file);
    r.features = decode_features(reader);
    if (j.contains("frames"))
      require(j.at("frames").get<std::size_t>() == r.features.rows(),
              where + "declared frame count does not match feature file");
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + "bad metadata field: " + e.what());
  } catch (const Error& e) {
    throw Error("record '" + r.id + "': " + e.what());
  }
  validate_record(r);
  return r;
}

// Loads every <id>.json/<id>.avsf pair in `dir`, ordered by file name.
inline std::vector<VideoRecord> load_dataset(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), "dataset directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> metas;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") metas.push_back(entry.path());
  std::sort(metas.begin(), metas.end());
  std::vector<VideoRecord> out;
  for (const auto& p : metas) out.push_back(load_record(p));
  return out;
}

// ---- train/test split ----

struct SplitSpec {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::set<std::string> augment_sources;  // records from these sources only ever train
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline Split make_split(const std::vector<VideoRecord>& records, const SplitSpec& spec) {
  require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0, "make_split: test fraction must be in (0, 1)");
  std::vector<std::size_t> native;
  std::vector<std::size_t> foreign;
  for (std::size_t i = 0; i < records.size(); ++i)
    (spec.augment_sources.count(records[i].source) ? foreign : native).push_back(i);
  require(native.size() >= 2, "make_split: need at least 2 records to split, got " + std::to_string(native.size()));
  std::mt19937_64 rng(spec.seed);
  std::shuffle(native.begin(), native.end(), rng);
  const double want = std::round(spec.test_fraction * static_cast<double>(native.size()));
  const std::size_t n_test = std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, native.size() - 1);
  Split s;
  s.test.assign(native.begin(), native.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(native.begin() + static_cast<std::ptrdiff_t>(n_test), native.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  s.train.insert(s.train.end(), foreign.begin(), foreign.end());
  return s;
}

}  // namespace avs
