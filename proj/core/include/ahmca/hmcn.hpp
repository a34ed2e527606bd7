#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ahmca/matrix.hpp"
#include "ahmca/random.hpp"
#include "ahmca/tape.hpp"
#include "ahmca/taxonomy.hpp"

namespace ahmca {

/// Fully connected layer: y = weights * x + bias.
template <class T>
struct Dense {
  Matrix<T> weights;  // out x in
  Matrix<T> bias;     // out x 1

  std::size_t in() const noexcept { return weights.cols(); }
  std::size_t out() const noexcept { return weights.rows(); }
};

/// Chain across levels plus the final classifier over all labels.
/// levels[0] maps 2k -> g; levels[h] (h >= 1) maps g + 2k -> g. The
/// classifier maps g (+ 2k when x^0 is used) -> |C|.
template <class T>
struct GlobalFlowParams {
  std::vector<Dense<T>> levels;
  Dense<T> classifier;
};

/// Per-level transition (g -> d_L) and classification (d_L -> |C^h|).
template <class T>
struct LocalLevel {
  Dense<T> transition;
  Dense<T> classify;
};

template <class T>
struct LocalFlowParams {
  std::vector<LocalLevel<T>> levels;
};

template <class T>
struct HeadParams {
  GlobalFlowParams<T> global;
  LocalFlowParams<T> local;
};

struct HeadShape {
  std::size_t k = 64;    // encoder hidden size; level embeddings are 2k
  std::size_t g = 384;   // global hidden size
  std::size_t d_l = 384; // local hidden size
  std::vector<std::size_t> level_sizes;
  bool use_x0 = true;

  std::size_t total_classes() const;
};

HeadShape head_shape(const Taxonomy& taxonomy, std::size_t k, std::size_t g, std::size_t d_l,
                     bool use_x0);

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
template <class T>
HeadParams<T> init_head(const HeadShape& shape, Rng& rng);

/// Probabilities are kept this far away from 0 and 1.
inline constexpr double kProbabilityFloor = 1e-12;

/// Scores in global order: level 1 labels, then level 2, and so on.
struct Prediction {
  std::vector<double> global;              // P_G
  std::vector<std::vector<double>> local;  // P_L^h, one vector per level
  std::vector<double> fused;               // P_F
};

/// relu(W * [a_prev; x_h] + b); a_prev is null for the first level.
template <class T>
Matrix<T> global_step(const Matrix<T>* a_prev, const Matrix<T>& x_h, const Dense<T>& layer);

/// sigmoid(W * [a_last; x0] + b); x0 is null when the classifier does not use it.
template <class T>
Matrix<T> global_predict(const Matrix<T>& a_last, const Matrix<T>* x0, const Dense<T>& classifier);

/// sigmoid(classify(relu(transition(a_h)))).
template <class T>
Matrix<T> local_predict(const Matrix<T>& a_h, const LocalLevel<T>& level);

/// beta * concat(local) + (1 - beta) * global.
std::vector<double> fuse(const std::vector<std::vector<double>>& local,
                         std::span<const double> global, double beta);

/// Logistic function followed by clamping into [floor, 1 - floor].
double probability(double logit);

enum class PenaltyTarget { global, fused };

std::string_view to_string(PenaltyTarget p) noexcept;
PenaltyTarget parse_penalty_target(std::string_view s);

/// Sum over labels with a parent of max(0, p[child] - p[parent])^2.
double hierarchy_penalty(std::span<const double> p, const Taxonomy& taxonomy);

/// BCE(P_G, concat targets) + sum_h BCE(P_L^h, targets_h) + lambda * penalty.
/// Each BCE term is the mean over its entries.
double hmcn_loss(const Prediction& pred, const std::vector<std::vector<double>>& targets,
                 const Taxonomy& taxonomy, double lambda,
                 PenaltyTarget target = PenaltyTarget::global);

// Tape forms.

struct DenseVars {
  Var weights;
  Var bias;
};

struct HeadVars {
  std::vector<DenseVars> global_levels;
  DenseVars classifier;
  std::vector<DenseVars> transitions;
  std::vector<DenseVars> classifies;
};

/// Global and local logits for one document.
struct HeadLogits {
  Var global;              // |C| x 1
  std::vector<Var> local;  // |C^h| x 1 each
};

/// `x` holds x^0 followed by x^1..x^H, each 2k x 1.
template <class T>
HeadLogits tape_head(Tape<T>& tape, const HeadVars& head, std::span<const Var> x, bool use_x0);

/// Mean over entries of the logistic loss of `logits` against 0/1 targets.
template <class T>
Var tape_bce_with_logits(Tape<T>& tape, Var logits, const Matrix<T>& targets);

/// Squared-hinge penalty on a probability column; parents[j] is the global
/// index of label j's parent, or none.
template <class T>
Var tape_hierarchy_penalty(Tape<T>& tape, Var probs,
                           std::span<const std::optional<std::size_t>> parents);

}  // namespace ahmca
