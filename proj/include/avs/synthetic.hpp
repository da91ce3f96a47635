// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "avs/dataset.hpp"

namespace avs {

// How ground-truth importance is encoded in the synthetic features.
//   content: channel 0 carries the shot's score on every frame of the shot.
//   context: channel 0 is zero except at the centre frame of each shot, where it
//            carries the score; a frame's importance therefore depends on
//            the content of a neighbouring position.
enum class SyntheticTask { content, context };

inline SyntheticTask parse_task(const std::string& s) {
  if (s == "content") return SyntheticTask::content;
  if (s == "context") return SyntheticTask::context;
  throw Error("unknown synthetic task '" + s + "' (expected content or context)");
}

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t videos = 10;
  std::size_t min_frames = 60;
  std::size_t max_frames = 120;
  std::size_t dim = 16;
  std::size_t min_shots = 6;
  std::size_t max_shots = 14;
  std::size_t shot_length = 0;  // > 0 fixes every shot to this length; frames then round to a multiple
  double noise = 0.05;
  SyntheticTask task = SyntheticTask::content;
  double high_min = 0.8, high_max = 1.0;  // planted important shots
  double low_min = 0.0, low_max = 0.2;    // everything else
  double marker_gain = 1.0;               // channel-0 amplitude per unit of score
  std::size_t users = 3;
  double user_jitter = 0.05;
  double budget = kDefaultBudget;
  std::string source = "synthetic";
};

namespace detail {

inline std::size_t uniform_count(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random composition of `frames` into `shots` parts of at least `min_len` frames.
inline std::vector<std::size_t> random_lengths(std::mt19937_64& rng, std::size_t frames, std::size_t shots,
                                               std::size_t min_len) {
  const std::size_t slack = frames - shots * min_len;
  std::vector<std::size_t> cuts(shots - 1);
  for (auto& c : cuts) c = uniform_count(rng, 0, slack);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> lengths(shots);
  std::size_t prev = 0;
  for (std::size_t i = 0; i + 1 < shots; ++i) {
    lengths[i] = min_len + cuts[i] - prev;
    prev = cuts[i];
  }
  lengths.back() = min_len + slack - prev;
  return lengths;
}

struct PlantedVideo {
  std::vector<std::size_t> boundaries;
  std::vector<bool> important;
  std::vector<double> shot_scores;
};

// Draws shot lengths and a planted important subset that exactly fills the budget
// in the sense that no further shot fits, then checks the ground-truth knapsack
// selects exactly that subset. Returns false when the draw must be repeated.
inline bool plant_video(std::mt19937_64& rng, const SyntheticSpec& spec, PlantedVideo& out) {
  std::size_t shots = 0;
  std::vector<std::size_t> lengths;
  if (spec.shot_length > 0) {
    const std::size_t lo = std::max<std::size_t>(1, (spec.min_frames + spec.shot_length - 1) / spec.shot_length);
    const std::size_t hi = std::max(lo, spec.max_frames / spec.shot_length);
    shots = uniform_count(rng, lo, hi);
    lengths.assign(shots, spec.shot_length);
  } else {
    const std::size_t frames = uniform_count(rng, spec.min_frames, spec.max_frames);
    shots = std::min(uniform_count(rng, spec.min_shots, spec.max_shots), frames / 2);
    if (shots == 0) return false;
    lengths = random_lengths(rng, frames, shots, std::min<std::size_t>(2, frames / shots));
  }
  out.boundaries.assign(1, 0);
  for (std::size_t len : lengths) out.boundaries.push_back(out.boundaries.back() + len);
  const std::size_t frames = out.boundaries.back();
  const std::size_t capacity = budget_frames(frames, spec.budget);

  std::vector<std::size_t> order(shots);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  out.important.assign(shots, false);
  std::size_t used = 0;
  for (std::size_t i : order)
    if (used + lengths[i] <= capacity) {
      out.important[i] = true;
      used += lengths[i];
    }
  if (used == 0) return false;

  std::uniform_real_distribution<double> high(spec.high_min, spec.high_max);
  std::uniform_real_distribution<double> low(spec.low_min, spec.low_max);
  out.shot_scores.resize(shots);
  for (std::size_t i = 0; i < shots; ++i) out.shot_scores[i] = out.important[i] ? high(rng) : low(rng);

  std::vector<double> frame_scores(frames);
  for (std::size_t i = 0; i < shots; ++i)
    std::fill(frame_scores.begin() + static_cast<std::ptrdiff_t>(out.boundaries[i]),
              frame_scores.begin() + static_cast<std::ptrdiff_t>(out.boundaries[i + 1]), out.shot_scores[i]);
  const Summary gt = ground_truth_summary(frame_scores, ShotSegmentation(out.boundaries), spec.budget);
  return gt.selection == out.important;
}

}  // namespace detail

// Desk-scale stand-in for annotated video datasets: piecewise-constant feature
// prototypes per shot plus Gaussian noise, with ground-truth scores high on a
// planted subset of shots and user summaries from jittered ground truth.
inline std::vector<VideoRecord> generate_synthetic(const SyntheticSpec& spec) {
  require(spec.videos >= 1, "synthetic: need at least one video");
  require(spec.min_frames >= 2 && spec.min_frames <= spec.max_frames, "synthetic: bad frame range");
  require(spec.shot_length > 0 || (spec.min_shots >= 1 && spec.min_shots <= spec.max_shots),
          "synthetic: bad shot range");
  require(spec.dim >= 2, "synthetic: need at least two feature channels");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<VideoRecord> out;
  for (std::size_t v = 0; v < spec.videos; ++v) {
    detail::PlantedVideo planted;
    std::size_t attempts = 0;
    while (!detail::plant_video(rng, spec, planted))
      require(++attempts < 1000, "synthetic: cannot plant a budget-filling shot set with these ranges");

    const std::size_t shots = planted.important.size();
    const std::size_t frames = planted.boundaries.back();
    VideoRecord r;
    r.id = spec.source + "_" + std::to_string(v);
    r.source = spec.source;
    r.fps = 2.0;
    r.features = Matrix(frames, spec.dim);
    r.gt_scores.assign(frames, 0.0);
    for (std::size_t s = 0; s < shots; ++s) {
      std::vector<double> proto(spec.dim);
      for (std::size_t j = 1; j < spec.dim; ++j) proto[j] = gauss(rng);
      const std::size_t lo = planted.boundaries[s];
      const std::size_t hi = planted.boundaries[s + 1];
      for (std::size_t t = lo; t < hi; ++t) {
        r.gt_scores[t] = planted.shot_scores[s];
        double channel0 = 0.0;
        if (spec.task == SyntheticTask::content) channel0 = spec.marker_gain * planted.shot_scores[s];
        if (spec.task == SyntheticTask::context && t == lo + (hi - lo) / 2)
          channel0 = spec.marker_gain * planted.shot_scores[s];
        r.features(t, 0) = channel0;
        for (std::size_t j = 1; j < spec.dim; ++j) r.features(t, j) = proto[j];
      }
    }
    if (spec.noise > 0.0)
      for (double& x : r.features.data()) x += spec.noise * gauss(rng);
    r.shot_boundaries = planted.boundaries;

    const ShotSegmentation seg(planted.boundaries);
    std::normal_distribution<double> jitter(0.0, spec.user_jitter);
    for (std::size_t u = 0; u < spec.users; ++u) {
      std::vector<double> user_scores(frames);
      for (std::size_t s = 0; s < shots; ++s) {
        const double w = std::clamp(planted.shot_scores[s] + (spec.user_jitter > 0 ? jitter(rng) : 0.0), 0.0, 1.0);
        for (std::size_t t = seg.begin(s); t < seg.end(s); ++t) user_scores[t] = w;
      }
      r.user_summaries.push_back(ground_truth_summary(user_scores, seg, spec.budget).intervals);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace avs
