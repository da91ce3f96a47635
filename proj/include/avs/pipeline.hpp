// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "avs/dataset.hpp"
#include "avs/decoder.hpp"
#include "avs/segmentation.hpp"
#include "avs/selection.hpp"

namespace avs {

struct PipelineOptions {
  double budget = kDefaultBudget;
  double kts_penalty = 1.0;
  std::size_t max_shots = 0;  // 0: default_max_shots(T)
  Aggregation aggregation = Aggregation::mean;
  bool reference_shots = false;  // evaluation: use a record's own shot boundaries instead of KTS
};

inline ShotSegmentation segment_video(const Matrix& features, const PipelineOptions& options) {
  const std::size_t max_shots = options.max_shots > 0 ? options.max_shots : default_max_shots(features.rows());
  return kts_segment(features, max_shots, options.kts_penalty);
}

struct VideoSummary {
  ImportanceScores scores;
  ShotSegmentation segmentation;
  Summary summary;
};

inline VideoSummary summarize_scores(ImportanceScores scores, ShotSegmentation segmentation,
                                     const PipelineOptions& options) {
  Summary summary = knapsack_select(shot_scores(scores, segmentation, options.budget));
  return {std::move(scores), std::move(segmentation), std::move(summary)};
}

// Scores → KTS shots → budgeted knapsack.
inline VideoSummary summarize(const AvsModel& model, const Matrix& features, const PipelineOptions& options) {
  return summarize_scores(predict(model, features), segment_video(features, options), options);
}

// Reference summaries for evaluation: the annotators' summaries when present,
// otherwise the knapsack summary of the ground-truth scores over `segmentation`.
inline std::vector<Summary> reference_summaries(const VideoRecord& record, const ShotSegmentation& segmentation,
                                                const PipelineOptions& options) {
  if (!record.user_summaries.empty()) return record.user_summary_objects();
  return {ground_truth_summary(record.gt_scores, segmentation, options.budget)};
}

// Evaluation fixture with the (deterministic) segmentation and references cached.
struct EvalVideo {
  const VideoRecord* record = nullptr;
  ShotSegmentation segmentation = ShotSegmentation::single_shot(1);
  std::vector<Summary> references;
};

inline std::vector<EvalVideo> prepare_evaluation(std::span<const VideoRecord> records, const PipelineOptions& options) {
  std::vector<EvalVideo> out;
  out.reserve(records.size());
  for (const VideoRecord& r : records) {
    ShotSegmentation seg = options.reference_shots && r.shot_boundaries ? ShotSegmentation(*r.shot_boundaries)
                                                                         : segment_video(r.features, options);
    std::vector<Summary> refs = reference_summaries(r, seg, options);
    out.push_back({&r, std::move(seg), std::move(refs)});
  }
  return out;
}

inline EvalResult evaluate_video(const AvsModel& model, const EvalVideo& video, const PipelineOptions& options) {
  const VideoSummary s = summarize_scores(predict(model, video.record->features), video.segmentation, options);
  return evaluate_against_users(s.summary, video.references, options.aggregation);
}

// Mean F-score (percent) over the prepared videos.
inline double mean_f_score(const AvsModel& model, std::span<const EvalVideo> videos, const PipelineOptions& options) {
  require(!videos.empty(), "mean_f_score: no videos");
  double acc = 0.0;
  for (const auto& v : videos) acc += evaluate_video(model, v, options).f_score;
  return acc / static_cast<double>(videos.size());
}

}  // namespace avs
