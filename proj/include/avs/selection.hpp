// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "avs/segmentation.hpp"

namespace avs {

inline constexpr double kDefaultBudget = 0.15;

struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t length() const { return end - begin; }
  bool operator==(const Interval&) const = default;
};

// Largest whole number of frames a summary of a `frames`-long video may use.
inline std::size_t budget_frames(std::size_t frames, double budget_fraction) {
  require(budget_fraction > 0.0 && budget_fraction <= 1.0, "budget fraction must be in (0, 1]");
  // The epsilon absorbs representation error such as 0.15 * 60 = 8.999...
  return static_cast<std::size_t>(std::floor(budget_fraction * static_cast<double>(frames) + 1e-9));
}

struct ShotScore {
  double importance = 0.0;  // w_i, mean frame score
  double length = 0.0;      // l_i = frames / (budget_fraction · T)
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t frames() const { return end - begin; }
};

struct ShotTable {
  std::vector<ShotScore> shots;
  std::size_t frame_count = 0;
  double budget_fraction = kDefaultBudget;

  std::size_t capacity() const { return budget_frames(frame_count, budget_fraction); }
};

inline ShotTable shot_scores(std::span<const double> frame_scores, const ShotSegmentation& seg,
                             double budget_fraction = kDefaultBudget) {
  require(frame_scores.size() == seg.frame_count(), "shot_scores: " + std::to_string(frame_scores.size()) +
                                                        " scores but segmentation covers " +
                                                        std::to_string(seg.frame_count()) + " frames");
  require(budget_fraction > 0.0 && budget_fraction <= 1.0, "shot_scores: budget fraction must be in (0, 1]");
  ShotTable table;
  table.frame_count = seg.frame_count();
  table.budget_fraction = budget_fraction;
  const double denom = budget_fraction * static_cast<double>(seg.frame_count());
  for (std::size_t i = 0; i < seg.shot_count(); ++i) {
    double acc = 0.0;
    for (std::size_t t = seg.begin(i); t < seg.end(i); ++t) acc += frame_scores[t];
    const double n = static_cast<double>(seg.length(i));
    table.shots.push_back({acc / n, n / denom, seg.begin(i), seg.end(i)});
  }
  return table;
}

// A keyshot summary over a `frame_count`-frame timeline. `selection` is empty
// for summaries built directly from intervals (e.g. user annotations).
struct Summary {
  std::size_t frame_count = 0;
  std::vector<bool> selection;
  std::vector<Interval> intervals;  // sorted, non-overlapping

  std::size_t selected_frames() const {
    std::size_t n = 0;
    for (const auto& iv : intervals) n += iv.length();
    return n;
  }

  // Sorts and merges arbitrary intervals; rejects ones outside [0, frame_count).
  static Summary from_intervals(std::size_t frame_count, std::vector<Interval> intervals) {
    for (const auto& iv : intervals)
      require(iv.begin < iv.end && iv.end <= frame_count,
              "summary interval [" + std::to_string(iv.begin) + "," + std::to_string(iv.end) + ") outside [0," +
                  std::to_string(frame_count) + ")");
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    Summary s;
    s.frame_count = frame_count;
    for (const auto& iv : intervals) {
      if (!s.intervals.empty() && iv.begin <= s.intervals.back().end)
        s.intervals.back().end = std::max(s.intervals.back().end, iv.end);
      else
        s.intervals.push_back(iv);
    }
    return s;
  }
};

// Exact 0/1 knapsack over shots: maximise Σ u_i w_i subject to Σ u_i frames_i ≤
// ⌊budget · T⌋ (equivalently Σ u_i l_i ≤ 1). Capacity is counted in whole frames.
// Among optimal selections the lexicographically earliest one is returned, i.e.
// earlier shots are preferred on ties.
inline Summary knapsack_select(const ShotTable& table) {
  const auto& shots = table.shots;
  require(!shots.empty(), "knapsack_select: no shots");
  const std::size_t m = shots.size();
  const std::size_t cap = table.capacity();
  // best[i][c]: optimum over shots i..m-1 with c frames left.
  std::vector<double> best((m + 1) * (cap + 1), 0.0);
  auto at = [cap](std::size_t i, std::size_t c) { return i * (cap + 1) + c; };
  for (std::size_t i = m; i-- > 0;) {
    const std::size_t f = shots[i].frames();
    for (std::size_t c = 0; c <= cap; ++c) {
      double v = best[at(i + 1, c)];
      if (f <= c) v = std::max(v, shots[i].importance + best[at(i + 1, c - f)]);
      best[at(i, c)] = v;
    }
  }
  Summary s;
  s.frame_count = table.frame_count;
  s.selection.assign(m, false);
  std::size_t c = cap;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t f = shots[i].frames();
    if (f > c) continue;
    const double take = shots[i].importance + best[at(i + 1, c - f)];
    const double skip = best[at(i + 1, c)];
    const double tol = 1e-12 * std::max(1.0, std::abs(skip));
    if (take >= skip - tol) {
      s.selection[i] = true;
      s.intervals.push_back({shots[i].begin, shots[i].end});
      c -= f;
    }
  }
  return s;
}

inline double selection_value(const ShotTable& table, const std::vector<bool>& selection) {
  double v = 0.0;
  for (std::size_t i = 0; i < selection.size(); ++i)
    if (selection[i]) v += table.shots[i].importance;
  return v;
}

// Summary derived from ground-truth frame scores with the same machinery as predictions.
inline Summary ground_truth_summary(std::span<const double> gt_scores, const ShotSegmentation& seg,
                                   double budget_fraction = kDefaultBudget) {
  return knapsack_select(shot_scores(gt_scores, seg, budget_fraction));
}

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;  // percent
};

inline std::size_t overlap_frames(const Summary& a, const Summary& b) {
  std::size_t overlap = 0;
  std::size_t i = 0, j = 0;
  while (i < a.intervals.size() && j < b.intervals.size()) {
    const Interval& x = a.intervals[i];
    const Interval& y = b.intervals[j];
    const std::size_t lo = std::max(x.begin, y.begin);
    const std::size_t hi = std::min(x.end, y.end);
    if (lo < hi) overlap += hi - lo;
    if (x.end < y.end)
      ++i;
    else
      ++j;
  }
  return overlap;
}

// Temporal-overlap precision and recall of summary S against reference G.
inline PrecisionRecall precision_recall(const Summary& summary, const Summary& reference) {
  require(summary.frame_count == reference.frame_count,
          "precision_recall: timelines differ (" + std::to_string(summary.frame_count) + " vs " +
              std::to_string(reference.frame_count) + " frames)");
  const double overlap = static_cast<double>(overlap_frames(summary, reference));
  const std::size_t s = summary.selected_frames();
  const std::size_t g = reference.selected_frames();
  // 2PR/(P+R) reduces to 2|S∩G|/(|S|+|G|); one division keeps F exact in the counts.
  return {s == 0 ? 0.0 : overlap / static_cast<double>(s), g == 0 ? 0.0 : overlap / static_cast<double>(g),
          s + g == 0 ? 0.0 : 200.0 * overlap / static_cast<double>(s + g)};
}

// Harmonic mean of precision and recall, in percent.
inline double f_measure(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall) * 100.0;
}

enum class Aggregation { mean, max };

inline std::string to_string(Aggregation a) { return a == Aggregation::mean ? "mean" : "max"; }

inline Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "max") return Aggregation::max;
  throw Error("unknown aggregation '" + s + "' (expected mean or max)");
}

struct UserScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

// P, R and F (percent). With mean aggregation each field is the mean of the
// per-user values; with max aggregation all three come from the best user.
struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  Aggregation mode = Aggregation::mean;
  std::vector<UserScore> per_user;
};

inline EvalResult evaluate_against_users(const Summary& summary, std::span<const Summary> users,
                                         Aggregation mode = Aggregation::mean) {
  require(!users.empty(), "evaluate_against_users: no reference summaries");
  EvalResult r;
  r.mode = mode;
  for (const Summary& g : users) {
    const PrecisionRecall pr = precision_recall(summary, g);
    r.per_user.push_back({pr.precision, pr.recall, pr.f_score});
  }
  if (mode == Aggregation::mean) {
    for (const auto& u : r.per_user) {
      r.precision += u.precision;
      r.recall += u.recall;
      r.f_score += u.f_score;
    }
    const double n = static_cast<double>(r.per_user.size());
    r.precision /= n;
    r.recall /= n;
    r.f_score /= n;
  } else {
    const auto best = std::max_element(r.per_user.begin(), r.per_user.end(),
                                       [](const UserScore& a, const UserScore& b) { return a.f_score < b.f_score; });
    r.precision = best->precision;
    r.recall = best->recall;
    r.f_score = best->f_score;
  }
  return r;
}

}  // namespace avs
