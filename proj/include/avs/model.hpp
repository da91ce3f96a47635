// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>

#include "avs/attention.hpp"
#include "avs/lstm.hpp"

namespace avs {

enum class Variant : std::uint32_t {
  additive = 0,        // A-AVS
  multiplicative = 1,  // M-AVS
  plain = 2,           // LSTM-VS, no attention
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::additive: return "a-avs";
    case Variant::multiplicative: return "m-avs";
    case Variant::plain: return "lstm-vs";
  }
  return "unknown";
}

inline Variant parse_variant(const std::string& name) {
  if (name == "a-avs") return Variant::additive;
  if (name == "m-avs") return Variant::multiplicative;
  if (name == "lstm-vs") return Variant::plain;
  throw Error("unknown variant '" + name + "' (expected a-avs, m-avs or lstm-vs)");
}

struct ModelConfig {
  Variant variant = Variant::multiplicative;
  std::size_t input_dim = 1024;
  std::size_t encoder_hidden = 256;  // per direction; annotations are 2× this wide
  std::size_t encoder_layers = 3;
  std::size_t decoder_hidden = 256;
  std::size_t decoder_layers = 3;
  std::size_t attention_hidden = 256;  // additive variant only
  std::size_t attention_scale = 9;

  std::size_t annotation_dim() const { return 2 * encoder_hidden; }

  void validate() const {
    require(input_dim > 0 && encoder_hidden > 0 && decoder_hidden > 0, "model config: zero dimension");
    require(encoder_layers > 0 && decoder_layers > 0, "model config: zero layer count");
    require(variant != Variant::additive || attention_hidden > 0, "model config: zero attention size");
    require(attention_scale == 0 || attention_scale % 2 == 1,
            "model config: attention scale " + std::to_string(attention_scale) + " must be odd, or 0 for global");
  }
};

// Sigmoid readout y = σ(s·wᵀ + b) from the top decoder state.
template <class T>
struct ReadoutParams {
  T weights;  // 1 × S
  T bias;     // 1 × 1

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
    return ReadoutParams<U>{f(weights), f(bias)};
  }
  template <class F>
  void for_each(F&& f) {
    f(weights);
    f(bias);
  }
  template <class F>
  void for_each(F&& f) const {
    f(weights);
    f(bias);
  }
};

// Every trainable tensor of the encoder-decoder. Only the attention block that
// matches `variant` is populated and visited. Declared (and serialised) order:
// encoder forward layers, encoder backward layers, attention, decoder layers, readout.
template <class T>
struct AvsParams {
  Variant variant = Variant::multiplicative;
  LstmStack<T> encoder_forward;
  LstmStack<T> encoder_backward;
  AdditiveAttention<T> additive;
  MultiplicativeAttention<T> multiplicative;
  LstmStack<T> decoder;
  ReadoutParams<T> readout;

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
    AvsParams<U> out;
    out.variant = variant;
    out.encoder_forward = map_stack(encoder_forward, f);
    out.encoder_backward = map_stack(encoder_backward, f);
    if (variant == Variant::additive) out.additive = additive.map(f);
    if (variant == Variant::multiplicative) out.multiplicative = multiplicative.map(f);
    out.decoder = map_stack(decoder, f);
    out.readout = readout.map(f);
    return out;
  }

  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    for (auto& layer : self.encoder_forward) layer.for_each(f);
    for (auto& layer : self.encoder_backward) layer.for_each(f);
    if (self.variant == Variant::additive) self.additive.for_each(f);
    if (self.variant == Variant::multiplicative) self.multiplicative.for_each(f);
    for (auto& layer : self.decoder) layer.for_each(f);
    self.readout.for_each(f);
  }
};

// A model at rest: configuration plus parameter values.
struct AvsModel {
  ModelConfig config;
  AvsParams<Matrix> params;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    params.for_each([&n](const Matrix& m) { n += m.size(); });
    return n;
  }
};

inline AvsModel init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  AvsModel model;
  model.config = config;
  AvsParams<Matrix>& p = model.params;
  p.variant = config.variant;
  p.encoder_forward = init_lstm_stack(rng, config.input_dim, config.encoder_hidden, config.encoder_layers);
  p.encoder_backward = init_lstm_stack(rng, config.input_dim, config.encoder_hidden, config.encoder_layers);
  if (config.variant == Variant::additive)
    p.additive = init_additive_attention(rng, config.attention_hidden, config.decoder_hidden, config.annotation_dim());
  if (config.variant == Variant::multiplicative)
    p.multiplicative = init_multiplicative_attention(rng, config.annotation_dim(), config.decoder_hidden);
  // Decoder input at each step is [y_{t-1}, context].
  p.decoder = init_lstm_stack(rng, 1 + config.annotation_dim(), config.decoder_hidden, config.decoder_layers);
  // A unit-range readout; a Glorot-sized one damps every upstream gradient.
  p.readout = {Matrix(1, config.decoder_hidden), Matrix(1, 1)};
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& v : p.readout.weights.data()) v = unit(rng);
  return model;
}

// Places every parameter on `tape` as a gradient-tracked leaf.
inline AvsParams<Var> bind(Tape& tape, const AvsParams<Matrix>& params) {
  return params.map([&tape](const Matrix& m) { return tape.variable(m); });
}

// Places every parameter on `tape` as a constant (inference).
inline AvsParams<Var> bind_constant(Tape& tape, const AvsParams<Matrix>& params) {
  return params.map([&tape](const Matrix& m) { return tape.constant(m); });
}

}  // namespace avs
