// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avs/model.hpp"

namespace avs {

// Per-frame importance scores in [0, 1], one per frame.
using ImportanceScores = std::vector<double>;

struct DecoderState {
  std::vector<CellState> layers;  // s_t, one (h, c) pair per decoder layer
  Var y_prev;                     // 1×1

  Var top() const { return layers.back().h; }
};

inline DecoderState initial_decoder_state(Tape& tape, const LstmStack<Var>& decoder) {
  DecoderState state;
  for (const auto& layer : decoder) state.layers.push_back(zero_cell_state(tape, hidden_size(layer)));
  state.y_prev = tape.constant(Matrix(1, 1, 0.0));
  return state;
}

struct DecoderStep {
  Var y;  // 1×1
  DecoderState state;
};

// One decoder step: the stacked LSTM consumes [y_{t-1}, context] and the top
// hidden state is read out through a sigmoid. The returned state carries the
// emitted y as y_prev; callers substitute a teacher value when training.
inline DecoderStep decoder_step(const LstmStack<Var>& decoder, const ReadoutParams<Var>& readout,
                                const DecoderState& state, Var context) {
  require(!decoder.empty() && state.layers.size() == decoder.size(), "decoder_step: state/layer count mismatch");
  require(context.rows() == 1 && context.cols() + 1 == input_size(decoder.front()),
          "decoder_step: context " + context.value().shape_string() + " does not match decoder input dim " +
              std::to_string(input_size(decoder.front())));
  Var x = concat_cols({state.y_prev, context});
  DecoderState next;
  next.layers.reserve(decoder.size());
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    next.layers.push_back(lstm_cell_step(decoder[l], x, state.layers[l]));
    x = next.layers.back().h;
  }
  const Var y = sigmoid(add(matmul_nt(x, readout.weights), readout.bias));
  next.y_prev = y;
  return {y, std::move(next)};
}

inline Var encode(const AvsParams<Var>& params, Var features) {
  return bilstm_encode(params.encoder_forward, params.encoder_backward, features);
}

// Decodes T importance scores (T×1) from T×2H annotations. With `teacher`, the
// previous-output input is the teacher's score (training); otherwise the model's
// own previous output (inference). y_0 = 0. When `trace` is given, the attention
// weights of every step are appended to it.
inline Var decode_sequence(const AvsParams<Var>& params, AttentionWindow window, Var annotations,
                           std::optional<std::span<const double>> teacher = std::nullopt,
                           std::vector<AttentionWeights>* trace = nullptr) {
  const std::size_t frames = annotations.rows();
  require(frames > 0, "decode_sequence: empty annotations");
  if (teacher)
    require(teacher->size() == frames, "decode_sequence: teacher length " + std::to_string(teacher->size()) +
                                           " does not match " + std::to_string(frames) + " frames");
  Tape& tape = *annotations.tape;
  DecoderState state = initial_decoder_state(tape, params.decoder);

  Var fixed_context;
  Var keys;
  if (params.variant == Variant::plain) fixed_context = mean_rows(annotations);
  if (params.variant == Variant::additive) keys = additive_keys(params.additive, annotations);

  std::vector<Var> outputs;
  outputs.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    Var context = fixed_context;
    if (params.variant != Variant::plain) {
      const ScoredWindow scored =
          params.variant == Variant::additive
              ? relevance_scores(params.additive, state.top(), keys, window, t)
              : relevance_scores(params.multiplicative, state.top(), annotations, window, t);
      const AttentionWeights weights = attention_weights(scored);
      if (trace) trace->push_back(weights);
      context = context_vector(weights, annotations);
    }
    DecoderStep step = decoder_step(params.decoder, params.readout, state, context);
    outputs.push_back(step.y);
    state = std::move(step.state);
    if (teacher) state.y_prev = tape.constant(Matrix(1, 1, (*teacher)[t]));
  }
  return concat_rows(outputs);
}

// Encoder + decoder on a T×D feature matrix; returns T×1 scores.
inline Var forward(const AvsParams<Var>& params, AttentionWindow window, Var features,
                   std::optional<std::span<const double>> teacher = std::nullopt) {
  return decode_sequence(params, window, encode(params, features), teacher);
}

// Free-running inference.
inline ImportanceScores predict(const AvsModel& model, const Matrix& features) {
  require(features.cols() == model.config.input_dim,
          "predict: feature dim " + std::to_string(features.cols()) + " does not match model input dim " +
              std::to_string(model.config.input_dim));
  Tape tape;
  const AvsParams<Var> params = bind_constant(tape, model.params);
  const Var scores =
      forward(params, AttentionWindow{model.config.attention_scale}, tape.constant(features));
  const auto d = scores.value().data();
  return {d.begin(), d.end()};
}

}  // namespace avs
