#pragma once

// Fixtures and brute-force reference implementations shared by the unit and
// acceptance tests. The oracles deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ahmca/corpus.hpp"
#include "ahmca/encoder.hpp"
#include "ahmca/random.hpp"
#include "ahmca/taxonomy.hpp"

namespace ahmca::testing {

inline Label make_label(std::string id, int level, std::optional<std::string> parent,
                        std::string text = "") {
  if (text.empty()) text = id;
  return Label{std::move(id), std::move(text), level, std::move(parent)};
}

// {A <- A1, A2; B <- B1}
inline Taxonomy ab_taxonomy() {
  return Taxonomy::from_labels({
      make_label("A", 1, std::nullopt, "alpha"),
      make_label("B", 1, std::nullopt, "beta"),
      make_label("A1", 2, "A", "alpha one"),
      make_label("A2", 2, "A", "alpha two"),
      make_label("B1", 2, "B", "beta one"),
  });
}

inline MatrixD random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                             double hi = 1.0) {
  MatrixD m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(lo, hi);
  return m;
}

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One LSTM step written out gate by gate. Weight rows are ordered i, f, g, o
// and columns are [input; hidden].
inline void scalar_lstm_step(const MatrixD& w, const MatrixD& b, const std::vector<double>& x,
                             std::vector<double>& h, std::vector<double>& c) {
  const std::size_t k = h.size();
  std::vector<double> pre(4 * k);
  for (std::size_t r = 0; r < 4 * k; ++r) {
    double s = b(r, 0);
    for (std::size_t j = 0; j < k; ++j) s += w(r, j) * x[j];
    for (std::size_t j = 0; j < k; ++j) s += w(r, k + j) * h[j];
    pre[r] = s;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double i = sig(pre[j]);
    const double f = sig(pre[k + j]);
    const double g = std::tanh(pre[2 * k + j]);
    const double o = sig(pre[3 * k + j]);
    c[j] = f * c[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

// Raw token weights: for each token row, the largest dot product against any
// context row, found by visiting every (token, row) pair.
inline std::vector<double> oracle_token_weights(const MatrixD& hidden, const MatrixD& context) {
  std::vector<double> out;
  for (std::size_t n = 0; n < hidden.rows(); ++n) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < context.rows(); ++l) {
      double dot = 0.0;
      for (std::size_t j = 0; j < hidden.cols(); ++j) dot += hidden(n, j) * context(l, j);
      best = std::max(best, dot);
    }
    out.push_back(best);
  }
  return out;
}

enum class OracleMode { sum, none, softmax };

inline std::vector<double> oracle_pool(const MatrixD& hidden, const std::vector<double>& w,
                                       OracleMode mode) {
  std::vector<double> coef(w.size());
  if (mode == OracleMode::none) {
    coef = w;
  } else if (mode == OracleMode::sum) {
    double s = 0.0;
    for (double v : w) s += v;
    for (std::size_t n = 0; n < w.size(); ++n) {
      coef[n] = std::abs(s) < 1e-8 ? 1.0 / static_cast<double>(w.size()) : w[n] / s;
    }
  } else {
    const double m = *std::max_element(w.begin(), w.end());
    double z = 0.0;
    for (double v : w) z += std::exp(v - m);
    for (std::size_t n = 0; n < w.size(); ++n) coef[n] = std::exp(w[n] - m) / z;
  }
  std::vector<double> out(hidden.cols(), 0.0);
  for (std::size_t n = 0; n < hidden.rows(); ++n)
    for (std::size_t j = 0; j < hidden.cols(); ++j) out[j] += coef[n] * hidden(n, j);
  return out;
}

// Per-class confusion counts from scratch, then macro averages with the
// zero convention for empty denominators.
struct OracleMetrics {
  double p = 0.0, r = 0.0, f1 = 0.0;
};

inline OracleMetrics oracle_macro(const std::vector<std::set<int>>& pred,
                                  const std::vector<std::set<int>>& truth, int classes) {
  OracleMetrics m;
  for (int c = 0; c < classes; ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t d = 0; d < pred.size(); ++d) {
      const bool p = pred[d].count(c) > 0;
      const bool t = truth[d].count(c) > 0;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    m.p += tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    m.r += tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  }
  m.p /= classes;
  m.r /= classes;
  m.f1 = m.p + m.r == 0.0 ? 0.0 : 2.0 * m.p * m.r / (m.p + m.r);
  return m;
}

// P@k by full sort with an explicit (score desc, index asc) order.
inline double oracle_precision_at_k(const std::vector<std::vector<double>>& scores,
                                    const std::vector<std::set<int>>& truth, int k) {
  double total = 0.0;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    std::vector<int> idx(scores[d].size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores[d][a] > scores[d][b]; });
    int hits = 0;
    for (int i = 0; i < k && i < static_cast<int>(idx.size()); ++i) hits += truth[d].count(idx[i]);
    total += static_cast<double>(hits) / k;
  }
  return total / static_cast<double>(scores.size());
}

inline SynthSpec criterion_spec() {
  SynthSpec spec;
  spec.level_sizes = {4, 16};
  spec.docs_per_leaf = 100;
  spec.doc_length = 30;
  spec.keywords_per_doc = 3;
  spec.noise_rate = 0.2;
  spec.seed = 7;
  return spec;
}

}  // namespace ahmca::testing
