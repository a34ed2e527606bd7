#include "ahmca/hmcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ahmca {

std::size_t HeadShape::total_classes() const {
  return std::accumulate(level_sizes.begin(), level_sizes.end(), std::size_t{0});
}

HeadShape head_shape(const Taxonomy& taxonomy, std::size_t k, std::size_t g, std::size_t d_l,
                     bool use_x0) {
  HeadShape s{k, g, d_l, {}, use_x0};
  for (std::size_t h = 1; h <= taxonomy.depth(); ++h) {
    s.level_sizes.push_back(taxonomy.level_size(static_cast<int>(h)));
  }
  return s;
}

namespace {

template <class T>
Dense<T> init_dense(std::size_t out, std::size_t in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Dense<T> d{Matrix<T>(out, in), Matrix<T>(out, 1)};
  for (auto& w : d.weights.data()) w = static_cast<T>(rng.uniform(-bound, bound));
  return d;
}

template <class T>
DenseVars constant_dense(Tape<T>& tape, const Dense<T>& d) {
  return {tape.constant(d.weights), tape.constant(d.bias)};
}

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double mean_bce(std::span<const double> p, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = clamp_probability(p[i]);
    acc -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return p.empty() ? 0.0 : acc / static_cast<double>(p.size());
}

}  // namespace

template <class T>
HeadParams<T> init_head(const HeadShape& shape, Rng& rng) {
  HeadParams<T> p;
  const std::size_t two_k = 2 * shape.k;
  for (std::size_t h = 0; h < shape.level_sizes.size(); ++h) {
    p.global.levels.push_back(init_dense<T>(shape.g, h == 0 ? two_k : shape.g + two_k, rng));
  }
  p.global.classifier =
      init_dense<T>(shape.total_classes(), shape.use_x0 ? shape.g + two_k : shape.g, rng);
  for (const std::size_t size : shape.level_sizes) {
    LocalLevel<T> level;
    level.transition = init_dense<T>(shape.d_l, shape.g, rng);
    level.classify = init_dense<T>(size, shape.d_l, rng);
    p.local.levels.push_back(std::move(level));
  }
  return p;
}

template <class T>
Matrix<T> global_step(const Matrix<T>* a_prev, const Matrix<T>& x_h, const Dense<T>& layer) {
  Tape<T> tape(false);
  Var input = tape.constant(x_h);
  if (a_prev) {
    const Var parts[] = {tape.constant(*a_prev), input};
    input = tape.vstack(parts);
  }
  const DenseVars d = constant_dense(tape, layer);
  return tape.value(tape.activate(Activation::relu, tape.affine(d.weights, input, d.bias)));
}

template <class T>
Matrix<T> global_predict(const Matrix<T>& a_last, const Matrix<T>* x0, const Dense<T>& classifier) {
  Tape<T> tape(false);
  Var input = tape.constant(a_last);
  if (x0) {
    const Var parts[] = {input, tape.constant(*x0)};
    input = tape.vstack(parts);
  }
  const DenseVars d = constant_dense(tape, classifier);
  Matrix<T> z = tape.value(tape.affine(d.weights, input, d.bias));
  for (auto& v : z.data()) v = static_cast<T>(probability(static_cast<double>(v)));
  return z;
}

template <class T>
Matrix<T> local_predict(const Matrix<T>& a_h, const LocalLevel<T>& level) {
  Tape<T> tape(false);
  const DenseVars tr = constant_dense(tape, level.transition);
  const DenseVars cl = constant_dense(tape, level.classify);
  const Var hidden =
      tape.activate(Activation::relu, tape.affine(tr.weights, tape.constant(a_h), tr.bias));
  Matrix<T> z = tape.value(tape.affine(cl.weights, hidden, cl.bias));
  for (auto& v : z.data()) v = static_cast<T>(probability(static_cast<double>(v)));
  return z;
}

std::vector<double> fuse(const std::vector<std::vector<double>>& local,
                         std::span<const double> global, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "beta must lie in [0, 1], got " + std::to_string(beta));
  }
  std::vector<double> flat;
  for (const auto& level : local) flat.insert(flat.end(), level.begin(), level.end());
  if (flat.size() != global.size()) {
    throw Error(ErrorKind::DimMismatch, "fuse: " + std::to_string(flat.size()) + " local scores vs " +
                                            std::to_string(global.size()) + " global");
  }
  // The endpoints are handled apart so that they reproduce an operand exactly.
  if (beta == 1.0) return flat;
  if (beta == 0.0) return {global.begin(), global.end()};
  std::vector<double> out(flat.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = beta * flat[j] + (1.0 - beta) * global[j];
  return out;
}

double probability(double logit) {
  return clamp_probability(activate_scalar(Activation::sigmoid, logit));
}

std::string_view to_string(PenaltyTarget p) noexcept {
  return p == PenaltyTarget::global ? "global" : "fused";
}

PenaltyTarget parse_penalty_target(std::string_view s) {
  if (s == "global") return PenaltyTarget::global;
  if (s == "fused") return PenaltyTarget::fused;
  throw Error(ErrorKind::RangeError, "penalty_target must be global or fused");
}

double hierarchy_penalty(std::span<const double> p, const Taxonomy& taxonomy) {
  const auto parents = taxonomy.parent_indices();
  if (p.size() != parents.size()) {
    throw Error(ErrorKind::DimMismatch, "penalty: " + std::to_string(p.size()) + " scores for " +
                                            std::to_string(parents.size()) + " labels");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!parents[j]) continue;
    const double d = std::max(0.0, p[j] - p[*parents[j]]);
    acc += d * d;
  }
  return acc;
}

double hmcn_loss(const Prediction& pred, const std::vector<std::vector<double>>& targets,
                 const Taxonomy& taxonomy, double lambda, PenaltyTarget target) {
  if (targets.size() != taxonomy.depth() || pred.local.size() != taxonomy.depth()) {
    throw Error(ErrorKind::DimMismatch, "loss: level count mismatch");
  }
  std::vector<double> flat;
  double loss = 0.0;
  for (std::size_t h = 0; h < targets.size(); ++h) {
    const std::size_t n = taxonomy.level_size(static_cast<int>(h + 1));
    if (targets[h].size() != n || pred.local[h].size() != n) {
      throw Error(ErrorKind::DimMismatch, "loss: level " + std::to_string(h + 1) + " expects " +
                                              std::to_string(n) + " entries, target has " +
                                              std::to_string(targets[h].size()));
    }
    flat.insert(flat.end(), targets[h].begin(), targets[h].end());
    loss += mean_bce(pred.local[h], targets[h]);
  }
  if (pred.global.size() != flat.size()) throw Error(ErrorKind::DimMismatch, "loss: global size");
  loss += mean_bce(pred.global, flat);
  if (lambda != 0.0) {
    loss += lambda * hierarchy_penalty(target == PenaltyTarget::global ? pred.global : pred.fused,
                                       taxonomy);
  }
  return loss;
}

template <class T>
HeadLogits tape_head(Tape<T>& tape, const HeadVars& head, std::span<const Var> x, bool use_x0) {
  const std::size_t depth = head.global_levels.size();
  if (x.size() != depth + 1) {
    throw Error(ErrorKind::DimMismatch, "head: expected " + std::to_string(depth + 1) +
                                            " level embeddings, got " + std::to_string(x.size()));
  }
  HeadLogits out;
  std::vector<Var> activations;
  for (std::size_t h = 0; h < depth; ++h) {
    Var input = x[h + 1];
    if (h > 0) {
      const Var parts[] = {activations.back(), x[h + 1]};
      input = tape.vstack(parts);
    }
    const DenseVars& d = head.global_levels[h];
    activations.push_back(tape.activate(Activation::relu, tape.affine(d.weights, input, d.bias)));
  }
  Var final_input = activations.back();
  if (use_x0) {
    const Var parts[] = {final_input, x[0]};
    final_input = tape.vstack(parts);
  }
  out.global = tape.affine(head.classifier.weights, final_input, head.classifier.bias);
  for (std::size_t h = 0; h < depth; ++h) {
    const DenseVars& tr = head.transitions[h];
    const DenseVars& cl = head.classifies[h];
    const Var hidden =
        tape.activate(Activation::relu, tape.affine(tr.weights, activations[h], tr.bias));
    out.local.push_back(tape.affine(cl.weights, hidden, cl.bias));
  }
  return out;
}

template <class T>
Var tape_bce_with_logits(Tape<T>& tape, Var logits, const Matrix<T>& targets) {
  const Matrix<T>& z = tape.value(logits);
  require_same_shape(z, targets, "bce targets");
  const T n = static_cast<T>(z.size());
  T acc{};
  for (std::size_t i = 0; i < z.size(); ++i) {
    // max(z, 0) - z*y + log(1 + exp(-|z|)) avoids overflow for large |z|.
    acc += std::max(z[i], T{0}) - z[i] * targets[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  Matrix<T> out(1, 1, acc / n);
  const Var in[] = {logits};
  return tape.record(std::move(out), in, [logits, targets, n](const Matrix<T>& g, Tape<T>& t) {
    const Matrix<T>& z = t.value(logits);
    Matrix<T>& gz = t.grad_buffer(logits);
    for (std::size_t i = 0; i < z.size(); ++i) {
      gz[i] += g[0] * (activate_scalar(Activation::sigmoid, z[i]) - targets[i]) / n;
    }
  });
}

template <class T>
Var tape_hierarchy_penalty(Tape<T>& tape, Var probs,
                           std::span<const std::optional<std::size_t>> parents) {
  const Matrix<T>& p = tape.value(probs);
  if (p.size() != parents.size()) {
    throw Error(ErrorKind::DimMismatch, "penalty: " + std::to_string(p.size()) + " scores for " +
                                            std::to_string(parents.size()) + " labels");
  }
  T acc{};
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!parents[j]) continue;
    const T d = std::max(T{0}, p[j] - p[*parents[j]]);
    acc += d * d;
  }
  std::vector<std::optional<std::size_t>> owned(parents.begin(), parents.end());
  const Var in[] = {probs};
  return tape.record(Matrix<T>(1, 1, acc), in,
                     [probs, owned = std::move(owned)](const Matrix<T>& g, Tape<T>& t) {
                       const Matrix<T>& p = t.value(probs);
                       Matrix<T>& gp = t.grad_buffer(probs);
                       for (std::size_t j = 0; j < p.size(); ++j) {
                         if (!owned[j]) continue;
                         const T d = p[j] - p[*owned[j]];
                         if (d <= T{0}) continue;
                         gp[j] += g[0] * T{2} * d;
                         gp[*owned[j]] -= g[0] * T{2} * d;
                       }
                     });
}

#define AHMCA_INSTANTIATE(T)                                                                   \
  template HeadParams<T> init_head<T>(const HeadShape&, Rng&);                                  \
  template Matrix<T> global_step<T>(const Matrix<T>*, const Matrix<T>&, const Dense<T>&);       \
  template Matrix<T> global_predict<T>(const Matrix<T>&, const Matrix<T>*, const Dense<T>&);    \
  template Matrix<T> local_predict<T>(const Matrix<T>&, const LocalLevel<T>&);                  \
  template HeadLogits tape_head<T>(Tape<T>&, const HeadVars&, std::span<const Var>, bool);      \
  template Var tape_bce_with_logits<T>(Tape<T>&, Var, const Matrix<T>&);                        \
  template Var tape_hierarchy_penalty<T>(Tape<T>&, Var,                                         \
                                         std::span<const std::optional<std::size_t>>);

AHMCA_INSTANTIATE(float)
AHMCA_INSTANTIATE(double)

#undef AHMCA_INSTANTIATE

}  // namespace ahmca
