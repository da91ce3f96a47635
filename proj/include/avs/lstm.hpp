// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "avs/tape.hpp"

namespace avs {

// Parameters of one LSTM layer, generic over storage (Matrix at rest, Var on a tape).
// Gate blocks are stacked along rows in the order input, forget, output, candidate:
//   input_weights      4H × D
//   recurrent_weights  4H × H
//   bias               1 × 4H
template <class T>
struct LstmLayer {
  T input_weights;
  T recurrent_weights;
  T bias;

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
    return LstmLayer<U>{f(input_weights), f(recurrent_weights), f(bias)};
  }
  template <class F>
  void for_each(F&& f) {
    f(input_weights);
    f(recurrent_weights);
    f(bias);
  }
  template <class F>
  void for_each(F&& f) const {
    f(input_weights);
    f(recurrent_weights);
    f(bias);
  }
};

template <class T>
using LstmStack = std::vector<LstmLayer<T>>;

template <class T, class F>
auto map_stack(const LstmStack<T>& stack, F&& f) {
  using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
  LstmStack<U> out;
  out.reserve(stack.size());
  for (const auto& layer : stack) out.push_back(layer.map(f));
  return out;
}

inline std::size_t hidden_size(const LstmLayer<Matrix>& layer) { return layer.recurrent_weights.cols(); }
inline std::size_t hidden_size(const LstmLayer<Var>& layer) { return layer.recurrent_weights.cols(); }
inline std::size_t input_size(const LstmLayer<Var>& layer) { return layer.input_weights.cols(); }

// Glorot-uniform weights, zero biases except the forget gate at 1.
inline LstmLayer<Matrix> init_lstm_layer(std::mt19937_64& rng, std::size_t input_dim, std::size_t hidden) {
  LstmLayer<Matrix> layer{Matrix(4 * hidden, input_dim), Matrix(4 * hidden, hidden), Matrix(1, 4 * hidden)};
  fill_glorot(rng, layer.input_weights);
  fill_glorot(rng, layer.recurrent_weights);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) layer.bias(0, j) = 1.0;
  return layer;
}

inline LstmStack<Matrix> init_lstm_stack(std::mt19937_64& rng, std::size_t input_dim, std::size_t hidden,
                                         std::size_t layers) {
  require(layers >= 1, "LSTM stack needs at least one layer");
  LstmStack<Matrix> stack;
  for (std::size_t l = 0; l < layers; ++l) stack.push_back(init_lstm_layer(rng, l == 0 ? input_dim : hidden, hidden));
  return stack;
}

struct CellState {
  Var h;  // 1×H
  Var c;  // 1×H
};

inline CellState zero_cell_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(Matrix(1, hidden)), tape.constant(Matrix(1, hidden))};
}

namespace detail {

// Gate nonlinearities and state update from the 1×4H pre-activation z.
inline CellState lstm_gates(Var z, Var c_prev, std::size_t hidden) {
  const Var ifo = sigmoid(slice_cols(z, 0, 3 * hidden));
  const Var input_gate = slice_cols(ifo, 0, hidden);
  const Var forget_gate = slice_cols(ifo, hidden, 2 * hidden);
  const Var output_gate = slice_cols(ifo, 2 * hidden, 3 * hidden);
  const Var candidate = tanh(slice_cols(z, 3 * hidden, 4 * hidden));
  const Var c = add(mul(forget_gate, c_prev), mul(input_gate, candidate));
  const Var h = mul(output_gate, tanh(c));
  return {h, c};
}

}  // namespace detail

// One step of a standard LSTM cell:
//   i, f, o = sigmoid(W x + U h + b),  g = tanh(W x + U h + b)
//   c' = f ⊙ c + i ⊙ g,  h' = o ⊙ tanh(c')
inline CellState lstm_cell_step(const LstmLayer<Var>& layer, Var x, const CellState& state) {
  require(x.rows() == 1 && x.cols() == input_size(layer),
          "lstm_cell_step: input " + x.value().shape_string() + " does not match layer input dim " +
              std::to_string(input_size(layer)));
  const std::size_t hidden = hidden_size(layer);
  require(state.h.cols() == hidden && state.c.cols() == hidden, "lstm_cell_step: state width mismatch");
  const Var z = add(add(matmul_nt(x, layer.input_weights), layer.bias), matmul_nt(state.h, layer.recurrent_weights));
  return detail::lstm_gates(z, state.c, hidden);
}

// Runs a stacked LSTM over the rows of `inputs` (T×D) from zero initial state. With
// `reverse` the sequence is consumed from the last row to the first. Returns the
// top-layer hidden states (T×H) in the original time order either way.
inline Var lstm_forward(const LstmStack<Var>& stack, Var inputs, bool reverse) {
  require(!stack.empty(), "lstm_forward: empty stack");
  const std::size_t steps = inputs.rows();
  require(steps > 0, "lstm_forward: empty sequence");
  require(inputs.cols() == input_size(stack.front()),
          "lstm_forward: input dim " + std::to_string(inputs.cols()) + " does not match layer-0 input dim " +
              std::to_string(input_size(stack.front())));
  Tape& tape = *inputs.tape;
  Var layer_input = inputs;
  for (const auto& layer : stack) {
    const std::size_t hidden = hidden_size(layer);
    // Input projections for every step at once; row t equals x_t W^T + b.
    const Var projected = add_row(matmul_nt(layer_input, layer.input_weights), layer.bias);
    CellState state = zero_cell_state(tape, hidden);
    std::vector<Var> outputs(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t t = reverse ? steps - 1 - k : k;
      const Var z = add(row(projected, t), matmul_nt(state.h, layer.recurrent_weights));
      state = detail::lstm_gates(z, state.c, hidden);
      outputs[t] = state.h;
    }
    layer_input = concat_rows(outputs);
  }
  return layer_input;
}

// Bidirectional encoder: row t is concat(forward h_t, backward h_t), width 2H.
inline Var bilstm_encode(const LstmStack<Var>& forward, const LstmStack<Var>& backward, Var inputs) {
  require(!forward.empty() && !backward.empty(), "bilstm_encode: empty stack");
  require(hidden_size(forward.back()) == hidden_size(backward.back()),
          "bilstm_encode: forward and backward hidden sizes differ");
  require(input_size(forward.front()) == input_size(backward.front()),
          "bilstm_encode: forward and backward input dims differ");
  const Var fwd = lstm_forward(forward, inputs, false);
  const Var bwd = lstm_forward(backward, inputs, true);
  return concat_cols({fwd, bwd});
}

}  // namespace avs
