// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "avs/matrix.hpp"

namespace avs {

// Shot boundaries 0 = b_0 < b_1 < ... < b_m = T; shot i covers frames [b_i, b_{i+1}).
class ShotSegmentation {
 public:
  explicit ShotSegmentation(std::vector<std::size_t> boundaries) : boundaries_(std::move(boundaries)) {
    require(boundaries_.size() >= 2, "segmentation: need at least one shot");
    require(boundaries_.front() == 0, "segmentation: first boundary must be 0");
    for (std::size_t i = 1; i < boundaries_.size(); ++i)
      require(boundaries_[i] > boundaries_[i - 1], "segmentation: boundaries must be strictly increasing");
  }

  static ShotSegmentation single_shot(std::size_t frames) { return ShotSegmentation({0, frames}); }

  std::size_t shot_count() const { return boundaries_.size() - 1; }
  std::size_t frame_count() const { return boundaries_.back(); }
  std::size_t begin(std::size_t shot) const { return boundaries_[shot]; }
  std::size_t end(std::size_t shot) const { return boundaries_[shot + 1]; }
  std::size_t length(std::size_t shot) const { return end(shot) - begin(shot); }
  const std::vector<std::size_t>& boundaries() const { return boundaries_; }

  bool operator==(const ShotSegmentation&) const = default;

 private:
  std::vector<std::size_t> boundaries_;
};

// Within-segment scatter of frames [lo, hi): Σ‖x_t‖² − ‖Σ x_t‖² / (hi − lo).
inline double segment_cost(const Matrix& features, std::size_t lo, std::size_t hi) {
  require(lo < hi && hi <= features.rows(), "segment_cost: empty or out-of-range segment [" + std::to_string(lo) +
                                                "," + std::to_string(hi) + ")");
  std::vector<double> total(features.cols(), 0.0);
  double squares = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    const auto x = features.row(t);
    for (std::size_t j = 0; j < x.size(); ++j) {
      total[j] += x[j];
      squares += x[j] * x[j];
    }
  }
  double norm = 0.0;
  for (double v : total) norm += v * v;
  return std::max(0.0, squares - norm / static_cast<double>(hi - lo));
}

// Linear-kernel cumulative sums giving O(1) segment scatter queries: the Gram
// diagonal prefix plus the 2-D cumulative Gram matrix.
class ScatterTable {
 public:
  explicit ScatterTable(const Matrix& features) : frames_(features.rows()) {
    const std::size_t n = frames_ + 1;
    diagonal_.assign(n, 0.0);
    cumulative_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < frames_; ++i) {
      const auto xi = features.row(i);
      double row_acc = 0.0;
      for (std::size_t j = 0; j < frames_; ++j) {
        const auto xj = features.row(j);
        double k = 0.0;
        for (std::size_t c = 0; c < xi.size(); ++c) k += xi[c] * xj[c];
        if (i == j) diagonal_[i + 1] = diagonal_[i] + k;
        row_acc += k;
        cumulative_[(i + 1) * n + (j + 1)] = cumulative_[i * n + (j + 1)] + row_acc;
      }
    }
  }

  std::size_t frames() const { return frames_; }

  double cost(std::size_t lo, std::size_t hi) const {
    require(lo < hi && hi <= frames_, "segment_cost: empty or out-of-range segment");
    const std::size_t n = frames_ + 1;
    const double block = cumulative_[hi * n + hi] - cumulative_[lo * n + hi] - cumulative_[hi * n + lo] +
                         cumulative_[lo * n + lo];
    return std::max(0.0, (diagonal_[hi] - diagonal_[lo]) - block / static_cast<double>(hi - lo));
  }

 private:
  std::size_t frames_;
  std::vector<double> diagonal_;
  std::vector<double> cumulative_;
};

// Dynamic-programming table for optimal segmentations with 1..max_shots shots.
class KtsSolver {
 public:
  KtsSolver(const Matrix& features, std::size_t max_shots) : table_(features) {
    frames_ = features.rows();
    require(frames_ >= 1, "kts: empty feature sequence");
    require(max_shots >= 1, "kts: max_shots must be at least 1");
    max_shots_ = std::min(max_shots, frames_);
    const std::size_t n = frames_ + 1;
    constexpr double inf = std::numeric_limits<double>::infinity();
    best_.assign((max_shots_ + 1) * n, inf);
    back_.assign((max_shots_ + 1) * n, 0);
    for (std::size_t t = 1; t <= frames_; ++t) best_[1 * n + t] = table_.cost(0, t);
    for (std::size_t m = 2; m <= max_shots_; ++m) {
      for (std::size_t t = m; t <= frames_; ++t) {
        double best = inf;
        std::size_t arg = m - 1;
        for (std::size_t s = m - 1; s < t; ++s) {
          const double v = best_[(m - 1) * n + s] + table_.cost(s, t);
          if (v < best) {
            best = v;
            arg = s;
          }
        }
        best_[m * n + t] = best;
        back_[m * n + t] = arg;
      }
    }
  }

  std::size_t max_shots() const { return max_shots_; }

  // Minimal total scatter using exactly `shots` shots.
  double scatter(std::size_t shots) const {
    require(shots >= 1 && shots <= max_shots_, "kts: shot count out of range");
    return best_[shots * (frames_ + 1) + frames_];
  }

  ShotSegmentation segmentation(std::size_t shots) const {
    require(shots >= 1 && shots <= max_shots_, "kts: shot count out of range");
    std::vector<std::size_t> bounds(shots + 1);
    bounds[shots] = frames_;
    std::size_t t = frames_;
    for (std::size_t m = shots; m >= 2; --m) {
      t = back_[m * (frames_ + 1) + t];
      bounds[m - 1] = t;
    }
    bounds[0] = 0;
    return ShotSegmentation(std::move(bounds));
  }

 private:
  ScatterTable table_;
  std::size_t frames_ = 0;
  std::size_t max_shots_ = 0;
  std::vector<double> best_;
  std::vector<std::size_t> back_;
};

// Model-selection penalty m (log(T/m) + 1).
inline double kts_penalty(std::size_t shots, std::size_t frames) {
  const double m = static_cast<double>(shots);
  return m * (std::log(static_cast<double>(frames) / m) + 1.0);
}

// Average shot of at least five frames.
inline std::size_t default_max_shots(std::size_t frames) { return std::max<std::size_t>(1, (frames + 4) / 5); }

// Kernel temporal segmentation with a linear kernel: the shot count minimises
// scatter(m) + penalty_weight · m (log(T/m) + 1); ties go to fewer shots.
inline ShotSegmentation kts_segment(const Matrix& features, std::size_t max_shots, double penalty_weight = 1.0) {
  require(features.rows() >= 1, "kts_segment: empty feature sequence");
  require(penalty_weight >= 0.0, "kts_segment: negative penalty weight");
  const KtsSolver solver(features, max_shots);
  std::size_t best_m = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= solver.max_shots(); ++m) {
    const double objective = solver.scatter(m) + penalty_weight * kts_penalty(m, features.rows());
    if (objective < best) {
      best = objective;
      best_m = m;
    }
  }
  return solver.segmentation(best_m);
}

}  // namespace avs
