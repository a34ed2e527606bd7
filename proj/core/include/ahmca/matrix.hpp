#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ahmca/error.hpp"

namespace ahmca {

/// Dense row-major matrix. Column vectors are n x 1.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorKind::DimMismatch, "matrix data length " + std::to_string(data_.size()) +
                                              " != " + std::to_string(rows_ * cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<T> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw Error(ErrorKind::DimMismatch, "ragged row list");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }

  static Matrix column(std::vector<T> values) {
    const std::size_t n = values.size();
    return Matrix(n, 1, std::move(values));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  const std::vector<T>& values() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <class U>
  Matrix<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return Matrix<U>(rows_, cols_, std::move(out));
  }

  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

template <class T>
std::string shape_string(const Matrix<T>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Throws NonFinite if any entry is NaN or infinite.
template <class T>
void require_finite(const Matrix<T>& m, std::string_view where) {
  for (const T v : m.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, std::string(where));
  }
}

template <class T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, std::string_view where) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::DimMismatch,
                std::string(where) + ": " + shape_string(a) + " vs " + shape_string(b));
  }
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimMismatch, "matmul " + shape_string(a) + " * " + shape_string(b));
  }
  Matrix<T> c(a.rows(), b.cols());
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* out = c.row(i).data();
    for (std::size_t p = 0; p < n; ++p) {
      const T aip = a(i, p);
      if (aip == T{0}) continue;
      const T* brow = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) out[j] += aip * brow[j];
    }
  }
  require_finite(c, "matmul");
  return c;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

enum class Activation { sigmoid, relu, tanh };

template <class T>
T activate_scalar(Activation kind, T x) noexcept {
  switch (kind) {
    case Activation::sigmoid:
      // Split on sign so exp never overflows.
      if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
      else {
        const T e = std::exp(x);
        return e / (T{1} + e);
      }
    case Activation::relu: return x > T{0} ? x : T{0};
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

/// Derivative expressed in terms of the activation output y.
template <class T>
T activation_derivative(Activation kind, T y) noexcept {
  switch (kind) {
    case Activation::sigmoid: return y * (T{1} - y);
    case Activation::relu: return y > T{0} ? T{1} : T{0};
    case Activation::tanh: return T{1} - y * y;
  }
  return T{1};
}

template <class T>
Matrix<T> activate(Activation kind, const Matrix<T>& x) {
  Matrix<T> y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = activate_scalar(kind, x[i]);
  return y;
}

}  // namespace ahmca
