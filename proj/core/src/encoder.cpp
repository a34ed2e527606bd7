#include "ahmca/encoder.hpp"

#include <cmath>
#include <vector>

namespace ahmca {

template <class T>
LstmDirection<T> init_lstm_direction(std::size_t k, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(k));
  LstmDirection<T> d{Matrix<T>(4 * k, 2 * k), Matrix<T>(4 * k, 1)};
  for (auto& w : d.weights.data()) w = static_cast<T>(rng.uniform(-bound, bound));
  for (auto& b : d.bias.data()) b = static_cast<T>(rng.uniform(-bound, bound));
  for (std::size_t i = k; i < 2 * k; ++i) d.bias[i] = T{1};
  return d;
}

template <class T>
LstmStateVars tape_lstm_step(Tape<T>& tape, LstmStateVars state, Var input, LstmDirectionVars p) {
  const std::size_t k = tape.value(state.hidden).rows();
  if (tape.value(input).rows() != k || tape.value(input).cols() != 1 ||
      tape.value(p.weights).rows() != 4 * k || tape.value(p.weights).cols() != 2 * k) {
    throw Error(ErrorKind::DimMismatch, "lstm_step: input " + shape_string(tape.value(input)) +
                                            " weights " + shape_string(tape.value(p.weights)) +
                                            " hidden size " + std::to_string(k));
  }
  const Var xh_parts[] = {input, state.hidden};
  const Var xh = tape.vstack(xh_parts);
  const Var z = tape.affine(p.weights, xh, p.bias);
  const Var in_gate = tape.activate(Activation::sigmoid, tape.slice_rows(z, 0, k));
  const Var forget_gate = tape.activate(Activation::sigmoid, tape.slice_rows(z, k, k));
  const Var candidate = tape.activate(Activation::tanh, tape.slice_rows(z, 2 * k, k));
  const Var out_gate = tape.activate(Activation::sigmoid, tape.slice_rows(z, 3 * k, k));
  const Var cell = tape.add(tape.hadamard(forget_gate, state.cell), tape.hadamard(in_gate, candidate));
  const Var hidden = tape.hadamard(out_gate, tape.activate(Activation::tanh, cell));
  return {hidden, cell};
}

template <class T>
EncoderVars tape_bilstm_encode(Tape<T>& tape, Var tokens, LstmDirectionVars forward,
                               LstmDirectionVars backward) {
  const std::size_t n = tape.value(tokens).rows();
  if (n == 0) throw Error(ErrorKind::EmptyInput, "bilstm_encode: no tokens");
  const std::size_t k = tape.value(forward.weights).rows() / 4;

  std::vector<Var> inputs;
  inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) inputs.push_back(tape.row_as_column(tokens, i));

  auto run = [&](LstmDirectionVars p, bool reverse) {
    LstmStateVars s{tape.constant(Matrix<T>(k, 1)), tape.constant(Matrix<T>(k, 1))};
    std::vector<Var> hidden(n);
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t pos = reverse ? n - 1 - step : step;
      s = tape_lstm_step(tape, s, inputs[pos], p);
      hidden[pos] = s.hidden;
    }
    return tape.columns_to_rows(hidden);
  };
  const Var fwd = run(forward, false);
  const Var bwd = run(backward, true);
  return {fwd, bwd};
}

template <class T>
LstmState<T> lstm_step(const LstmState<T>& state, const Matrix<T>& input, const LstmDirection<T>& p) {
  Tape<T> tape(false);
  const LstmStateVars s{tape.constant(state.hidden), tape.constant(state.cell)};
  const LstmDirectionVars pv{tape.constant(p.weights), tape.constant(p.bias)};
  const LstmStateVars next = tape_lstm_step(tape, s, tape.constant(input), pv);
  return {tape.value(next.hidden), tape.value(next.cell)};
}

template <class T>
EncoderOutput<T> bilstm_encode(const Matrix<T>& tokens, const LstmParams<T>& p) {
  if (tokens.rows() == 0) throw Error(ErrorKind::EmptyInput, "bilstm_encode: no tokens");
  Tape<T> tape(false);
  const LstmDirectionVars f{tape.constant(p.forward.weights), tape.constant(p.forward.bias)};
  const LstmDirectionVars b{tape.constant(p.backward.weights), tape.constant(p.backward.bias)};
  const EncoderVars out = tape_bilstm_encode(tape, tape.constant(tokens), f, b);
  return {tape.value(out.forward), tape.value(out.backward)};
}

template LstmDirection<float> init_lstm_direction<float>(std::size_t, Rng&);
template LstmDirection<double> init_lstm_direction<double>(std::size_t, Rng&);
template LstmStateVars tape_lstm_step<float>(Tape<float>&, LstmStateVars, Var, LstmDirectionVars);
template LstmStateVars tape_lstm_step<double>(Tape<double>&, LstmStateVars, Var, LstmDirectionVars);
template EncoderVars tape_bilstm_encode<float>(Tape<float>&, Var, LstmDirectionVars, LstmDirectionVars);
template EncoderVars tape_bilstm_encode<double>(Tape<double>&, Var, LstmDirectionVars, LstmDirectionVars);
template LstmState<float> lstm_step<float>(const LstmState<float>&, const Matrix<float>&,
                                           const LstmDirection<float>&);
template LstmState<double> lstm_step<double>(const LstmState<double>&, const Matrix<double>&,
                                             const LstmDirection<double>&);
template EncoderOutput<float> bilstm_encode<float>(const Matrix<float>&, const LstmParams<float>&);
template EncoderOutput<double> bilstm_encode<double>(const Matrix<double>&, const LstmParams<double>&);

}  // namespace ahmca
