#include "ahmca/tape.hpp"

#include <string>

namespace ahmca {

template <class T>
Var Tape<T>::constant(Mat value) {
  require_finite(value, "constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class T>
Var Tape<T>::parameter(const Mat& value) {
  require_finite(value, "parameter");
  Node n;
  n.ref = &value;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class T>
Var Tape<T>::reference(const Mat& value) {
  require_finite(value, "reference");
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class T>
const Matrix<T>& Tape<T>::value(Var v) const {
  return node_value(nodes_.at(v.index));
}

template <class T>
Matrix<T> Tape<T>::grad(Var v) const {
  const Node& n = nodes_.at(v.index);
  if (n.grad) return *n.grad;
  const Mat& val = node_value(n);
  return Mat(val.rows(), val.cols());
}

template <class T>
Matrix<T>& Tape<T>::grad_buffer(Var v) {
  Node& n = nodes_[v.index];
  if (!n.grad) {
    const Mat& val = node_value(n);
    n.grad.emplace(val.rows(), val.cols());
  }
  return *n.grad;
}

template <class T>
void Tape<T>::accumulate(Var v, const Mat& g) {
  if (!nodes_[v.index].requires_grad) return;
  Mat& buf = grad_buffer(v);
  require_same_shape(buf, g, "gradient accumulation");
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

template <class T>
void Tape<T>::accumulate_row(Var v, std::size_t r, std::span<const T> g, T scale) {
  if (!nodes_[v.index].requires_grad) return;
  Mat& buf = grad_buffer(v);
  auto row = buf.row(r);
  for (std::size_t j = 0; j < g.size(); ++j) row[j] += scale * g[j];
}

template <class T>
void Tape<T>::backward(Var root) {
  const Mat& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw Error(ErrorKind::DimMismatch, "backward root must be 1x1, got " + shape_string(rv));
  }
  if (!record_) return;
  grad_buffer(root)[0] += T{1};
  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad || !n.pullback) continue;
    require_finite(*n.grad, "backward");
    n.pullback(*n.grad, *this);
  }
}

template <class T>
Var Tape<T>::record(Mat value, std::span<const Var> inputs, Pullback pullback) {
  require_finite(value, "tape op");
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var in : inputs) n.requires_grad = n.requires_grad || nodes_[in.index].requires_grad;
    if (n.requires_grad) n.pullback = std::move(pullback);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class T>
Var Tape<T>::matmul(Var a, Var b) {
  Mat out = ahmca::matmul(value(a), value(b));
  const Var in[] = {a, b};
  return record(std::move(out), in, [a, b](const Mat& g, Tape& t) {
    if (t.requires_grad(a)) t.accumulate(a, ahmca::matmul(g, transpose(t.value(b))));
    if (t.requires_grad(b)) t.accumulate(b, ahmca::matmul(transpose(t.value(a)), g));
  });
}

template <class T>
Var Tape<T>::affine(Var w, Var x, Var b) {
  const Mat& W = value(w);
  const Mat& X = value(x);
  const Mat& B = value(b);
  if (W.cols() != X.rows() || B.rows() != W.rows() || B.cols() != 1) {
    throw Error(ErrorKind::DimMismatch,
                "affine W " + shape_string(W) + " x " + shape_string(X) + " b " + shape_string(B));
  }
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  const std::size_t c = X.cols();
  Mat out(m, c);
  for (std::size_t i = 0; i < m; ++i) {
    const T* wr = W.row(i).data();
    for (std::size_t j = 0; j < c; ++j) {
      T acc = B[i];
      for (std::size_t p = 0; p < n; ++p) acc += wr[p] * X(p, j);
      out(i, j) = acc;
    }
  }
  const Var in[] = {w, x, b};
  return record(std::move(out), in, [w, x, b](const Mat& g, Tape& t) {
    const Mat& W = t.value(w);
    const Mat& X = t.value(x);
    const std::size_t m = W.rows();
    const std::size_t n = W.cols();
    const std::size_t c = X.cols();
    if (t.requires_grad(w)) {
      Mat& gw = t.grad_buffer(w);
      for (std::size_t i = 0; i < m; ++i) {
        T* gr = gw.row(i).data();
        for (std::size_t j = 0; j < c; ++j) {
          const T gij = g(i, j);
          if (gij == T{0}) continue;
          for (std::size_t p = 0; p < n; ++p) gr[p] += gij * X(p, j);
        }
      }
    }
    if (t.requires_grad(x)) {
      Mat& gx = t.grad_buffer(x);
      for (std::size_t i = 0; i < m; ++i) {
        const T* wr = W.row(i).data();
        for (std::size_t j = 0; j < c; ++j) {
          const T gij = g(i, j);
          if (gij == T{0}) continue;
          for (std::size_t p = 0; p < n; ++p) gx(p, j) += wr[p] * gij;
        }
      }
    }
    if (t.requires_grad(b)) {
      Mat& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[i] += g(i, j);
    }
  });
}

template <class T>
Var Tape<T>::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Mat out = value(a);
  const Mat& B = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  const Var in[] = {a, b};
  return record(std::move(out), in, [a, b](const Mat& g, Tape& t) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <class T>
Var Tape<T>::scale(Var a, T s) {
  Mat out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  const Var in[] = {a};
  return record(std::move(out), in, [a, s](const Mat& g, Tape& t) {
    Mat& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

template <class T>
Var Tape<T>::hadamard(Var a, Var b) {
  require_same_shape(value(a), value(b), "hadamard");
  Mat out = value(a);
  const Mat& B = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  const Var in[] = {a, b};
  return record(std::move(out), in, [a, b](const Mat& g, Tape& t) {
    const Mat& A = t.value(a);
    const Mat& B = t.value(b);
    if (t.requires_grad(a)) {
      Mat& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
    }
    if (t.requires_grad(b)) {
      Mat& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
    }
  });
}

template <class T>
Var Tape<T>::activate(Activation kind, Var a) {
  Mat out = ahmca::activate(kind, value(a));
  const Var in[] = {a};
  const std::size_t self = nodes_.size();
  return record(std::move(out), in, [a, kind, self](const Mat& g, Tape& t) {
    const Mat& y = t.value(Var{self});
    Mat& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * activation_derivative(kind, y[i]);
  });
}

template <class T>
Var Tape<T>::vstack(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorKind::DimMismatch, "vstack of nothing");
  const std::size_t cols = value(parts.front()).cols();
  std::size_t rows = 0;
  for (const Var p : parts) {
    if (value(p).cols() != cols) {
      throw Error(ErrorKind::DimMismatch, "vstack column mismatch: " + std::to_string(cols) +
                                              " vs " + std::to_string(value(p).cols()));
    }
    rows += value(p).rows();
  }
  std::vector<T> data;
  data.reserve(rows * cols);
  for (const Var p : parts) {
    const auto d = value(p).data();
    data.insert(data.end(), d.begin(), d.end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return record(Mat(rows, cols, std::move(data)), parts, [inputs](const Mat& g, Tape& t) {
    std::size_t offset = 0;
    for (const Var p : inputs) {
      const std::size_t n = t.value(p).size();
      if (t.requires_grad(p)) {
        Mat& gp = t.grad_buffer(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

template <class T>
Var Tape<T>::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Mat& A = value(a);
  if (begin + count > A.rows()) {
    throw Error(ErrorKind::DimMismatch, "slice_rows past end of " + shape_string(A));
  }
  const std::size_t cols = A.cols();
  std::vector<T> data(A.data().begin() + begin * cols, A.data().begin() + (begin + count) * cols);
  const Var in[] = {a};
  return record(Mat(count, cols, std::move(data)), in, [a, begin, cols](const Mat& g, Tape& t) {
    Mat& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin * cols + i] += g[i];
  });
}

template <class T>
Var Tape<T>::row_as_column(Var a, std::size_t r) {
  const Mat& A = value(a);
  if (r >= A.rows()) throw Error(ErrorKind::DimMismatch, "row index out of range");
  const auto row = A.row(r);
  Mat out = Mat::column(std::vector<T>(row.begin(), row.end()));
  const Var in[] = {a};
  return record(std::move(out), in, [a, r](const Mat& g, Tape& t) {
    t.accumulate_row(a, r, g.data());
  });
}

template <class T>
Var Tape<T>::columns_to_rows(std::span<const Var> columns) {
  if (columns.empty()) throw Error(ErrorKind::EmptyInput, "columns_to_rows of nothing");
  const std::size_t k = value(columns.front()).rows();
  Mat out(columns.size(), k);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const Mat& c = value(columns[i]);
    if (c.cols() != 1 || c.rows() != k) {
      throw Error(ErrorKind::DimMismatch, "columns_to_rows expects " + std::to_string(k) + "x1");
    }
    std::copy(c.data().begin(), c.data().end(), out.row(i).begin());
  }
  std::vector<Var> inputs(columns.begin(), columns.end());
  return record(std::move(out), columns, [inputs](const Mat& g, Tape& t) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!t.requires_grad(inputs[i])) continue;
      Mat& gc = t.grad_buffer(inputs[i]);
      const auto gr = g.row(i);
      for (std::size_t j = 0; j < gr.size(); ++j) gc[j] += gr[j];
    }
  });
}

template <class T>
Var Tape<T>::segment_mean(Var table, std::vector<std::vector<std::size_t>> segments) {
  const Mat& tab = value(table);
  Mat out(segments.size(), tab.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.empty()) throw Error(ErrorKind::EmptyInput, "segment_mean: empty segment");
    auto orow = out.row(s);
    for (const std::size_t r : seg) {
      if (r >= tab.rows()) throw Error(ErrorKind::DimMismatch, "segment_mean: row out of range");
      const auto trow = tab.row(r);
      for (std::size_t j = 0; j < orow.size(); ++j) orow[j] += trow[j];
    }
    const T inv = T{1} / static_cast<T>(seg.size());
    for (auto& v : orow) v *= inv;
  }
  const Var in[] = {table};
  return record(std::move(out), in,
                [table, segs = std::move(segments)](const Mat& g, Tape& t) {
                  for (std::size_t s = 0; s < segs.size(); ++s) {
                    const T inv = T{1} / static_cast<T>(segs[s].size());
                    for (const std::size_t r : segs[s]) t.accumulate_row(table, r, g.row(s), inv);
                  }
                });
}

template <class T>
Var Tape<T>::sum(Var a) {
  T acc{};
  for (const T v : value(a).data()) acc += v;
  const Var in[] = {a};
  return record(Mat(1, 1, acc), in, [a](const Mat& g, Tape& t) {
    Mat& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  });
}

template <class T>
Var Tape<T>::add_scalars(std::span<const Var> scalars) {
  T acc{};
  for (const Var s : scalars) {
    const Mat& v = value(s);
    if (v.size() != 1) throw Error(ErrorKind::DimMismatch, "add_scalars expects 1x1 inputs");
    acc += v[0];
  }
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return record(Mat(1, 1, acc), scalars, [inputs](const Mat& g, Tape& t) {
    for (const Var s : inputs) {
      if (t.requires_grad(s)) t.grad_buffer(s)[0] += g[0];
    }
  });
}

template class Tape<float>;
template class Tape<double>;

}  // namespace ahmca
