// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <type_traits>
#include <utility>

#include "avs/tape.hpp"

namespace avs {

// Additive score  e_i = wᵀ tanh(W s + U v_i + b).
//   w    1 × A
//   w_a  A × S   (decoder state)
//   u_a  A × 2H  (annotations)
//   b_a  1 × A
template <class T>
struct AdditiveAttention {
  T w;
  T w_a;
  T u_a;
  T b_a;

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
    return AdditiveAttention<U>{f(w), f(w_a), f(u_a), f(b_a)};
  }
  template <class F>
  void for_each(F&& f) {
    f(w);
    f(w_a);
    f(u_a);
    f(b_a);
  }
  template <class F>
  void for_each(F&& f) const {
    f(w);
    f(w_a);
    f(u_a);
    f(b_a);
  }
};

// Multiplicative score  e_i = v_iᵀ W s,  with W of shape 2H × S.
template <class T>
struct MultiplicativeAttention {
  T w_a;

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
    return MultiplicativeAttention<U>{f(w_a)};
  }
  template <class F>
  void for_each(F&& f) {
    f(w_a);
  }
  template <class F>
  void for_each(F&& f) const {
    f(w_a);
  }
};

inline AdditiveAttention<Matrix> init_additive_attention(std::mt19937_64& rng, std::size_t attn, std::size_t state,
                                                         std::size_t annotation) {
  AdditiveAttention<Matrix> p{Matrix(1, attn), Matrix(attn, state), Matrix(attn, annotation), Matrix(1, attn)};
  fill_glorot(rng, p.w);
  fill_glorot(rng, p.w_a);
  fill_glorot(rng, p.u_a);
  return p;
}

inline MultiplicativeAttention<Matrix> init_multiplicative_attention(std::mt19937_64& rng, std::size_t annotation,
                                                                     std::size_t state) {
  MultiplicativeAttention<Matrix> p{Matrix(annotation, state)};
  fill_glorot(rng, p.w_a);
  return p;
}

// Local attention window: the `scale` annotations centred on the decode step,
// clipped at the sequence ends. Scale 0 attends to the whole sequence; a
// centred window of T frames would not reach both ends from every step.
struct AttentionWindow {
  std::size_t scale = 9;

  // Half-open range [begin, end) of attended rows for 0-based step t of a T-frame sequence.
  std::pair<std::size_t, std::size_t> range(std::size_t t, std::size_t frames) const {
    require(t < frames, "attention window: step " + std::to_string(t) + " outside sequence of " +
                            std::to_string(frames) + " frames");
    if (scale == 0) return {0, frames};
    const std::size_t before = (scale - 1) / 2;
    const std::size_t after = scale / 2;
    const std::size_t begin = t >= before ? t - before : 0;
    const std::size_t end = std::min(frames, t + after + 1);
    return {begin, end};
  }
};

// Relevance scores e_t^i for the attended rows [begin, end); scores is (end-begin)×1.
struct ScoredWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
  Var scores;
};

// Normalised attention weights α_t^i over [begin, end); weights is (end-begin)×1.
struct AttentionWeights {
  std::size_t begin = 0;
  std::size_t end = 0;
  Var weights;
};

// U_a v_i for every annotation row, shared across decode steps (T×A).
inline Var additive_keys(const AdditiveAttention<Var>& params, Var annotations) {
  return matmul_nt(annotations, params.u_a);
}

// Additive scores using precomputed keys from additive_keys().
inline ScoredWindow relevance_scores(const AdditiveAttention<Var>& params, Var s_prev, Var keys,
                                     AttentionWindow window, std::size_t t) {
  const auto [begin, end] = window.range(t, keys.rows());
  require(s_prev.rows() == 1 && s_prev.cols() == params.w_a.cols(),
          "relevance_scores: decoder state " + s_prev.value().shape_string() + " does not match w_a " +
              params.w_a.value().shape_string());
  const Var query = add(matmul_nt(s_prev, params.w_a), params.b_a);
  const Var hidden = tanh(add_row(slice_rows(keys, begin, end), query));
  return {begin, end, matmul_nt(hidden, params.w)};
}

inline ScoredWindow relevance_scores(const MultiplicativeAttention<Var>& params, Var s_prev, Var annotations,
                                     AttentionWindow window, std::size_t t) {
  const auto [begin, end] = window.range(t, annotations.rows());
  require(s_prev.rows() == 1 && s_prev.cols() == params.w_a.cols(),
          "relevance_scores: decoder state " + s_prev.value().shape_string() + " does not match W_a " +
              params.w_a.value().shape_string());
  require(annotations.cols() == params.w_a.rows(), "relevance_scores: annotation width does not match W_a");
  const Var projected = matmul_nt(s_prev, params.w_a);  // (W_a s)ᵀ, 1×2H
  return {begin, end, matmul_nt(slice_rows(annotations, begin, end), projected)};
}

inline AttentionWeights attention_weights(const ScoredWindow& scored) {
  require(scored.end > scored.begin, "attention_weights: empty attended set");
  return {scored.begin, scored.end, softmax(scored.scores)};
}

// V_t = Σ α_t^i v_i over the attended rows; returns 1×2H.
inline Var context_vector(const AttentionWeights& weights, Var annotations) {
  require(weights.end <= annotations.rows() && weights.begin < weights.end,
          "context_vector: attended rows [" + std::to_string(weights.begin) + "," + std::to_string(weights.end) +
              ") outside " + std::to_string(annotations.rows()) + " annotations");
  require(weights.weights.rows() == weights.end - weights.begin, "context_vector: weight count mismatch");
  return matmul(transpose(weights.weights), slice_rows(annotations, weights.begin, weights.end));
}

}  // namespace avs
