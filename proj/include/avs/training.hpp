// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "avs/dataset.hpp"
#include "avs/decoder.hpp"
#include "avs/pipeline.hpp"

namespace avs {

struct TrainConfig {
  double learning_rate = 0.15;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::optional<double> clip_norm;
  std::size_t workers = 1;  // per-sequence gradients in a batch may run concurrently
  bool teacher_forcing = true;  // false: the decoder consumes its own outputs in training too

  void validate() const {
    require(learning_rate > 0.0, "train: learning rate must be positive");
    require(batch_size >= 1, "train: batch size must be at least 1");
    require(patience >= 1, "train: patience must be at least 1");
    require(max_epochs >= 1, "train: max_epochs must be at least 1");
    require(!clip_norm || *clip_norm > 0.0, "train: clip norm must be positive");
    require(workers >= 1, "train: need at least one worker");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f_score = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t stop_epoch = 0;
  std::size_t best_epoch = 0;
  double best_f_score = 0.0;
  bool early_stopped = false;
  double wall_seconds = 0.0;

  // Equality on everything but wall time.
  bool same_run(const TrainReport& o) const {
    return epochs == o.epochs && stop_epoch == o.stop_epoch && best_epoch == o.best_epoch &&
           best_f_score == o.best_f_score && early_stopped == o.early_stopped;
  }
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what)
      : Error("training diverged in epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// Stops once the validation F-score has strictly decreased, relative to the
// preceding epoch, for `patience` consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {
    require(patience >= 1, "early stopping: patience must be at least 1");
  }

  // Feeds one epoch's score; returns true when training should stop.
  bool update(double f_score) {
    if (f_score < previous_)
      ++descending_;
    else
      descending_ = 0;
    previous_ = f_score;
    return descending_ >= patience_;
  }

 private:
  std::size_t patience_;
  std::size_t descending_ = 0;
  double previous_ = std::numeric_limits<double>::quiet_NaN();  // compares false before the first epoch
};

inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
  require(pred.size() == target.size(), "mse_loss: length mismatch (" + std::to_string(pred.size()) + " vs " +
                                            std::to_string(target.size()) + ")");
  require(!pred.empty(), "mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - target[i]) * (pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

inline Var mse_loss(Var pred, std::span<const double> target) {
  require(pred.value().size() == target.size(), "mse_loss: length mismatch (" +
                                                    std::to_string(pred.value().size()) + " vs " +
                                                    std::to_string(target.size()) + ")");
  const Var diff = sub(pred, pred.tape->constant(Matrix(pred.rows(), pred.cols(),
                                                          std::vector<double>(target.begin(), target.end()))));
  return mean(mul(diff, diff));
}

using Gradients = AvsParams<Matrix>;

inline std::vector<Matrix*> flatten(AvsParams<Matrix>& p) {
  std::vector<Matrix*> out;
  p.for_each([&out](Matrix& m) { out.push_back(&m); });
  return out;
}
inline std::vector<const Matrix*> flatten(const AvsParams<Matrix>& p) {
  std::vector<const Matrix*> out;
  p.for_each([&out](const Matrix& m) { out.push_back(&m); });
  return out;
}

inline Gradients zero_gradients(const AvsModel& model) {
  return model.params.map([](const Matrix& m) { return Matrix(m.rows(), m.cols()); });
}

struct SequenceGradient {
  Gradients grads;
  double loss = 0.0;
};

// MSE of one sequence and its gradient for every parameter. Without teacher
// forcing the gradient also flows through the fed-back outputs.
inline SequenceGradient sequence_gradient(const AvsModel& model, const Matrix& features,
                                          std::span<const double> target, bool teacher_forcing = true) {
  Tape tape;
  const AvsParams<Var> params = bind(tape, model.params);
  std::optional<std::span<const double>> teacher;
  if (teacher_forcing) teacher = target;
  const Var pred = forward(params, AttentionWindow{model.config.attention_scale}, tape.constant(features), teacher);
  const Var loss = mse_loss(pred, target);
  tape.backward(loss);
  SequenceGradient out;
  out.loss = loss.value()(0, 0);
  out.grads = params.map([&tape](const Var& v) { return tape.grad(v); });
  return out;
}

inline void add_into(Gradients& acc, const Gradients& g) {
  auto dst = flatten(acc);
  const auto src = flatten(g);
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] += *src[i];
}

inline double gradient_norm(const Gradients& g) {
  double acc = 0.0;
  for (const Matrix* m : flatten(g)) acc += squared_norm(*m);
  return std::sqrt(acc);
}

// Rescales g so its global L2 norm is at most max_norm.
inline void clip_gradients(Gradients& g, double max_norm) {
  const double norm = gradient_norm(g);
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (Matrix* m : flatten(g))
    for (double& v : m->data()) v *= s;
}

inline void sgd_step(AvsModel& model, const Gradients& g, double learning_rate) {
  auto params = flatten(model.params);
  const auto grads = flatten(g);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    const auto d = grads[i]->data();
    for (std::size_t k = 0; k < p.size(); ++k) p[k] -= learning_rate * d[k];
  }
}

// Sum of per-sequence gradients over `batch`, reduced in batch order. With more
// than one worker the per-sequence passes run concurrently; the result is the same.
inline SequenceGradient batch_gradient(const AvsModel& model, std::span<const VideoRecord> data,
                                       std::span<const std::size_t> batch, std::size_t workers = 1,
                                       bool teacher_forcing = true) {
  std::vector<SequenceGradient> parts(batch.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < batch.size(); k += stride) {
      const VideoRecord& r = data[batch[k]];
      parts[k] = sequence_gradient(model, r.features, r.gt_scores, teacher_forcing);
    }
  };
  const std::size_t n = std::min(workers, batch.size());
  if (n <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work, w, n);
  }
  SequenceGradient total{zero_gradients(model), 0.0};
  for (const auto& p : parts) {
    add_into(total.grads, p.grads);
    total.loss += p.loss;
  }
  return total;
}

using Validator = std::function<double(const AvsModel&)>;

// Mean F-score over `validation` through the full keyshot pipeline.
inline Validator f_score_validator(std::span<const VideoRecord> validation, PipelineOptions options = {}) {
  auto videos = std::make_shared<std::vector<EvalVideo>>(prepare_evaluation(validation, options));
  return [videos, options](const AvsModel& m) { return mean_f_score(m, *videos, options); };
}

struct TrainResult {
  AvsModel model;  // parameters from the epoch with the best validation F-score
  TrainReport report;
};

// Mini-batch SGD, teacher-forced unless configured otherwise. Each epoch shuffles the training set
// (seeded), sums per-sequence gradients over each batch and applies one update
// per batch, then scores the validation set. Stops on max_epochs or the
// early-stopping rule and returns the best-scoring checkpoint (earliest on ties).
inline TrainResult train(AvsModel model, std::span<const VideoRecord> data, const TrainConfig& config,
                         const Validator& validate, std::ostream* log = nullptr) {
  config.validate();
  require(!data.empty(), "train: empty training set");
  for (const auto& r : data)
    require(r.features.cols() == model.config.input_dim,
            "train: record '" + r.id + "' has feature dim " + std::to_string(r.features.cols()) +
                ", model expects " + std::to_string(model.config.input_dim));
  const auto started = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{model, {}};
  double best = -std::numeric_limits<double>::infinity();
  EarlyStopping stopper(config.patience);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      SequenceGradient g =
          batch_gradient(model, data, std::span<const std::size_t>(order).subspan(start, stop - start),
                         config.workers, config.teacher_forcing);
      if (!std::isfinite(g.loss)) throw TrainingDiverged(epoch, "loss is not finite");
      if (config.clip_norm) clip_gradients(g.grads, *config.clip_norm);
      sgd_step(model, g.grads, config.learning_rate);
      loss_sum += g.loss;
    }
    const double train_loss = loss_sum / static_cast<double>(data.size());
    for (const Matrix* m : flatten(model.params))
      if (!m->all_finite()) throw TrainingDiverged(epoch, "parameters are not finite");
    const double f = validate ? validate(model) : 0.0;
    result.report.epochs.push_back({epoch, train_loss, f});
    if (log)
      *log << "epoch " << epoch << " loss " << train_loss << " val_f " << f << '\n';
    if (f > best) {
      best = f;
      result.model = model;
      result.report.best_epoch = epoch;
      result.report.best_f_score = f;
    }
    result.report.stop_epoch = epoch;
    if (stopper.update(f)) {
      result.report.early_stopped = true;
      break;
    }
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// ---- gradient check ----

struct GradCheckDims {
  std::size_t frames = 4;
  std::size_t input_dim = 3;
  std::size_t hidden = 3;  // encoder and decoder
  std::size_t layers = 2;
  std::size_t attention_hidden = 3;
  std::size_t attention_scale = 3;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checked = 0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

// Relative error with an absolute floor so that entries whose true gradient is
// numerically zero are judged on the finite-difference noise scale.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares the analytic gradient of the full teacher-forced loss against central
// finite differences for every parameter entry of a random small model.
inline GradCheckResult grad_check(Variant variant, const GradCheckDims& dims, std::uint64_t seed) {
  ModelConfig config;
  config.variant = variant;
  config.input_dim = dims.input_dim;
  config.encoder_hidden = dims.hidden;
  config.decoder_hidden = dims.hidden;
  config.encoder_layers = dims.layers;
  config.decoder_layers = dims.layers;
  config.attention_hidden = dims.attention_hidden;
  config.attention_scale = dims.attention_scale;
  AvsModel model = init_model(config, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  // Spread parameters beyond the small training init so every gate is exercised.
  std::uniform_real_distribution<double> spread(-0.5, 0.5);
  for (Matrix* m : flatten(model.params))
    for (double& v : m->data()) v = spread(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix features(dims.frames, dims.input_dim);
  for (double& v : features.data()) v = gauss(rng);
  std::vector<double> target(dims.frames);
  for (double& v : target) v = unit(rng);

  const SequenceGradient analytic = sequence_gradient(model, features, target);
  auto loss_at = [&](const AvsModel& m) {
    Tape tape;
    const AvsParams<Var> params = bind_constant(tape, m.params);
    const Var pred = forward(params, AttentionWindow{m.config.attention_scale}, tape.constant(features), target);
    return mse_loss(pred, target).value()(0, 0);
  };

  GradCheckResult result;
  auto params = flatten(model.params);
  const auto grads = flatten(analytic.grads);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t k = 0; k < params[p]->size(); ++k) {
      double& x = (*params[p])[k];
      const double saved = x;
      x = saved + kFiniteDifferenceStep;
      const double up = loss_at(model);
      x = saved - kFiniteDifferenceStep;
      const double down = loss_at(model);
      x = saved;
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      const double a = (*grads[p])[k];
      result.max_relative_error = std::max(result.max_relative_error, relative_error(a, numeric));
      result.max_absolute_error = std::max(result.max_absolute_error, std::abs(a - numeric));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace avs
