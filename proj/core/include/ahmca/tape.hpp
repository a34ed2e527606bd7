#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ahmca/matrix.hpp"

namespace ahmca {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

/// Reverse-mode gradient tape over dense matrices.
///
/// Nodes are appended in evaluation order; backward() walks them in reverse
/// and calls each node's pullback with the node's accumulated output
/// gradient. Parameters are referenced, not copied, so they must outlive the
/// tape. Nodes whose inputs are all constants carry no pullback.
template <class T>
class Tape {
 public:
  using Mat = Matrix<T>;
  /// Pullback: receives the output gradient and the tape, accumulates into inputs.
  using Pullback = std::function<void(const Mat& out_grad, Tape& tape)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Mat value);
  /// Leaf whose gradient is collected; `value` must outlive the tape.
  Var parameter(const Mat& value);
  /// Constant leaf held by reference; `value` must outlive the tape.
  Var reference(const Mat& value);

  const Mat& value(Var v) const;
  /// Accumulated gradient; a zero matrix of the value's shape if none arrived.
  Mat grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }

  /// Adds g into the gradient of v (used by pullbacks).
  void accumulate(Var v, const Mat& g);
  /// Adds scale * g into row r of v's gradient.
  void accumulate_row(Var v, std::size_t r, std::span<const T> g, T scale = T{1});
  /// Mutable gradient buffer for v, allocated on first use.
  Mat& grad_buffer(Var v);

  /// Seeds d(root)/d(root) = 1 and propagates; root must be 1x1.
  void backward(Var root);

  /// Records an op node. The pullback is dropped when no input needs gradients.
  Var record(Mat value, std::span<const Var> inputs, Pullback pullback);

  // Elementwise and linear-algebra ops.
  Var matmul(Var a, Var b);
  /// W * x + b, with b (rows x 1) broadcast across x's columns.
  Var affine(Var w, Var x, Var b);
  Var add(Var a, Var b);
  Var scale(Var a, T s);
  Var hadamard(Var a, Var b);
  Var activate(Activation kind, Var a);
  /// Concatenates along rows; all inputs share a column count.
  Var vstack(std::span<const Var> parts);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);
  /// Row r of a, as a column vector.
  Var row_as_column(Var a, std::size_t r);
  /// Stacks n column vectors (k x 1) into an n x k matrix.
  Var columns_to_rows(std::span<const Var> columns);
  /// Row s of the output = mean of table rows listed in segments[s].
  Var segment_mean(Var table, std::vector<std::vector<std::size_t>> segments);
  /// Sum of all entries, 1x1.
  Var sum(Var a);
  /// Sum of 1x1 nodes.
  Var add_scalars(std::span<const Var> scalars);

 private:
  struct Node {
    Mat value;
    const Mat* ref = nullptr;
    std::optional<Mat> grad;
    Pullback pullback;
    bool requires_grad = false;
  };

  const Mat& node_value(const Node& n) const { return n.ref ? *n.ref : n.value; }

  bool record_;
  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace ahmca
