#pragma once

#include <cstddef>

#include "ahmca/matrix.hpp"
#include "ahmca/random.hpp"
#include "ahmca/tape.hpp"

namespace ahmca {

/// One LSTM direction. Gate blocks are stacked input, forget, cell, output;
/// each block maps [x; h_prev] (2k) to k.
template <class T>
struct LstmDirection {
  Matrix<T> weights;  // 4k x 2k
  Matrix<T> bias;     // 4k x 1

  std::size_t hidden() const noexcept { return weights.rows() / 4; }
};

template <class T>
struct LstmParams {
  LstmDirection<T> forward;
  LstmDirection<T> backward;

  std::size_t hidden() const noexcept { return forward.hidden(); }
};

template <class T>
struct LstmState {
  Matrix<T> hidden;  // k x 1
  Matrix<T> cell;    // k x 1

  static LstmState zero(std::size_t k) { return {Matrix<T>(k, 1), Matrix<T>(k, 1)}; }
};

/// Rows are token positions for both directions.
template <class T>
struct EncoderOutput {
  Matrix<T> forward;   // N x k
  Matrix<T> backward;  // N x k
};

/// uniform(-1/sqrt(k), 1/sqrt(k)) everywhere, then forget-gate bias = 1.
template <class T>
LstmDirection<T> init_lstm_direction(std::size_t k, Rng& rng);

template <class T>
LstmParams<T> init_lstm(std::size_t k, Rng& rng) {
  LstmParams<T> p;
  p.forward = init_lstm_direction<T>(k, rng);
  p.backward = init_lstm_direction<T>(k, rng);
  return p;
}

/// Standard LSTM cell: sigmoid gates, tanh candidate, h = o * tanh(c).
template <class T>
LstmState<T> lstm_step(const LstmState<T>& state, const Matrix<T>& input, const LstmDirection<T>& p);

/// Forward pass left to right and backward pass right to left, both from
/// zero state. EmptyInput for N = 0.
template <class T>
EncoderOutput<T> bilstm_encode(const Matrix<T>& tokens, const LstmParams<T>& p);

// Tape forms, used for training and gradient checks.

struct LstmDirectionVars {
  Var weights;
  Var bias;
};

struct LstmStateVars {
  Var hidden;
  Var cell;
};

struct EncoderVars {
  Var forward;   // N x k
  Var backward;  // N x k
};

template <class T>
LstmStateVars tape_lstm_step(Tape<T>& tape, LstmStateVars state, Var input, LstmDirectionVars p);

template <class T>
EncoderVars tape_bilstm_encode(Tape<T>& tape, Var tokens, LstmDirectionVars forward,
                               LstmDirectionVars backward);

}  // namespace ahmca
