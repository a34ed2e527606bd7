#include "ahmca/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ahmca {

std::string_view to_string(Normalization n) noexcept {
  switch (n) {
    case Normalization::sum_normalized: return "sum_normalized";
    case Normalization::none: return "none";
    case Normalization::softmax: return "softmax";
  }
  return "?";
}

std::string_view to_string(Similarity s) noexcept {
  return s == Similarity::dot ? "dot" : "cosine";
}

Normalization parse_normalization(std::string_view s) {
  if (s == "sum_normalized") return Normalization::sum_normalized;
  if (s == "none") return Normalization::none;
  if (s == "softmax") return Normalization::softmax;
  throw Error(ErrorKind::RangeError, "attention_mode must be sum_normalized, none or softmax");
}

Similarity parse_similarity(std::string_view s) {
  if (s == "dot") return Similarity::dot;
  if (s == "cosine") return Similarity::cosine;
  throw Error(ErrorKind::RangeError, "similarity must be dot or cosine");
}

namespace {

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T norm(std::span<const T> a) {
  return std::sqrt(dot(a, a));
}

template <class T>
T similarity(std::span<const T> h, std::span<const T> t, Similarity sim) {
  if (sim == Similarity::dot) return dot(h, t);
  const T nh = norm(h);
  const T nt = norm(t);
  if (nh == T{0} || nt == T{0}) return T{0};
  return dot(h, t) / (nh * nt);
}

template <class T>
struct MaxResult {
  std::vector<T> weights;
  std::vector<std::size_t> argmax;
};

template <class T>
MaxResult<T> max_similarity(const Matrix<T>& hidden, const Matrix<T>& context, Similarity sim) {
  if (context.rows() == 0) throw Error(ErrorKind::EmptyContext, "context has no rows");
  if (hidden.cols() != context.cols()) {
    throw Error(ErrorKind::DimMismatch, "token_weights: hidden " + shape_string(hidden) +
                                            " vs context " + shape_string(context));
  }
  MaxResult<T> r;
  r.weights.resize(hidden.rows());
  r.argmax.resize(hidden.rows());
  for (std::size_t j = 0; j < hidden.rows(); ++j) {
    const auto h = hidden.row(j);
    T best = similarity<T>(h, context.row(0), sim);
    std::size_t arg = 0;
    for (std::size_t l = 1; l < context.rows(); ++l) {
      const T s = similarity<T>(h, context.row(l), sim);
      if (s > best) {
        best = s;
        arg = l;
      }
    }
    r.weights[j] = best;
    r.argmax[j] = arg;
  }
  return r;
}

template <class T>
struct PoolForward {
  Matrix<T> x;
  std::vector<T> alpha;  // effective coefficient per row
  T sum{};
  bool degenerate = false;
};

template <class T>
PoolForward<T> pool_forward(const Matrix<T>& hidden, std::span<const T> w, Normalization mode) {
  const std::size_t n = hidden.rows();
  if (w.size() != n) {
    throw Error(ErrorKind::DimMismatch, "pool: " + std::to_string(w.size()) + " weights for " +
                                            std::to_string(n) + " rows");
  }
  if (n == 0) throw Error(ErrorKind::EmptyInput, "pool: no rows");
  PoolForward<T> f;
  f.alpha.assign(w.begin(), w.end());
  switch (mode) {
    case Normalization::none: break;
    case Normalization::sum_normalized: {
      for (const T v : w) f.sum += v;
      if (std::abs(static_cast<double>(f.sum)) <= kDegenerateWeightSum) {
        f.degenerate = true;
        std::fill(f.alpha.begin(), f.alpha.end(), T{1} / static_cast<T>(n));
      } else {
        for (T& a : f.alpha) a /= f.sum;
      }
      break;
    }
    case Normalization::softmax: {
      const T mx = *std::max_element(w.begin(), w.end());
      T z{};
      for (T& a : f.alpha) {
        a = std::exp(a - mx);
        z += a;
      }
      for (T& a : f.alpha) a /= z;
      break;
    }
  }
  f.x = Matrix<T>(hidden.cols(), 1);
  for (std::size_t j = 0; j < n; ++j) {
    const auto h = hidden.row(j);
    for (std::size_t c = 0; c < h.size(); ++c) f.x[c] += f.alpha[j] * h[c];
  }
  return f;
}

}  // namespace

template <class T>
LevelContext<T> splice_level(int level, const Matrix<T>& labels, const Matrix<T>& keywords) {
  LevelContext<T> ctx;
  ctx.level = level;
  ctx.label_count = labels.rows();
  if (keywords.rows() == 0) {
    ctx.rows = labels;
    return ctx;
  }
  if (labels.cols() != keywords.cols()) {
    throw Error(ErrorKind::DimMismatch, "splice_level: labels " + shape_string(labels) +
                                            " vs keywords " + shape_string(keywords));
  }
  std::vector<T> data(labels.data().begin(), labels.data().end());
  data.insert(data.end(), keywords.data().begin(), keywords.data().end());
  ctx.rows = Matrix<T>(labels.rows() + keywords.rows(), labels.cols(), std::move(data));
  return ctx;
}

template <class T>
std::vector<T> token_weights(const Matrix<T>& hidden, const Matrix<T>& context, Similarity sim) {
  return max_similarity(hidden, context, sim).weights;
}

template <class T>
Matrix<T> pool_hidden(const Matrix<T>& hidden, std::span<const T> weights, Normalization mode,
                      bool* degenerate) {
  auto f = pool_forward(hidden, weights, mode);
  if (degenerate) *degenerate = f.degenerate;
  return std::move(f.x);
}

template <class T>
LevelEmbedding<T> level_embedding(const EncoderOutput<T>& enc, std::span<const T> w_forward,
                                  std::span<const T> w_backward, Normalization mode) {
  bool dg_f = false;
  bool dg_b = false;
  const Matrix<T> xf = pool_hidden(enc.forward, w_forward, mode, &dg_f);
  const Matrix<T> xb = pool_hidden(enc.backward, w_backward, mode, &dg_b);
  std::vector<T> data(xf.data().begin(), xf.data().end());
  data.insert(data.end(), xb.data().begin(), xb.data().end());
  LevelEmbedding<T> out;
  out.x = Matrix<T>::column(std::move(data));
  out.degenerate = dg_f || dg_b;
  return out;
}

template <class T>
LevelEmbeddings<T> build_all_levels(const EncoderOutput<T>& enc,
                                    const std::vector<LevelContext<T>>& contexts,
                                    Normalization mode, Similarity sim) {
  LevelEmbeddings<T> out;
  const std::vector<T> ones(enc.forward.rows(), T{1});
  out.x.push_back(level_embedding<T>(enc, ones, ones, mode).x);
  for (const auto& ctx : contexts) {
    AttentionWeights<T> w{token_weights(enc.forward, ctx.rows, sim),
                          token_weights(enc.backward, ctx.rows, sim), mode};
    auto e = level_embedding<T>(enc, w.forward, w.backward, mode);
    out.degenerate = out.degenerate || e.degenerate;
    out.x.push_back(std::move(e.x));
    out.weights.push_back(std::move(w));
  }
  return out;
}

template <class T>
Var tape_token_weights(Tape<T>& tape, Var hidden, Var context, Similarity sim) {
  auto r = max_similarity(tape.value(hidden), tape.value(context), sim);
  Matrix<T> out = Matrix<T>::column(r.weights);
  const Var in[] = {hidden, context};
  return tape.record(
      std::move(out), in,
      [hidden, context, sim, argmax = std::move(r.argmax)](const Matrix<T>& g, Tape<T>& t) {
        const Matrix<T>& H = t.value(hidden);
        const Matrix<T>& C = t.value(context);
        const std::size_t k = H.cols();
        std::vector<T> gh(k), gt(k);
        for (std::size_t j = 0; j < H.rows(); ++j) {
          if (g[j] == T{0}) continue;
          const auto h = H.row(j);
          const auto c = C.row(argmax[j]);
          if (sim == Similarity::dot) {
            for (std::size_t i = 0; i < k; ++i) {
              gh[i] = c[i];
              gt[i] = h[i];
            }
          } else {
            const T nh = norm(h);
            const T nc = norm(c);
            if (nh == T{0} || nc == T{0}) continue;
            const T cs = dot(h, c) / (nh * nc);
            for (std::size_t i = 0; i < k; ++i) {
              gh[i] = c[i] / (nh * nc) - cs * h[i] / (nh * nh);
              gt[i] = h[i] / (nh * nc) - cs * c[i] / (nc * nc);
            }
          }
          t.accumulate_row(hidden, j, gh, g[j]);
          t.accumulate_row(context, argmax[j], gt, g[j]);
        }
      });
}

template <class T>
Var tape_pool(Tape<T>& tape, Var hidden, Var weights, Normalization mode, bool* degenerate) {
  const Matrix<T>& w = tape.value(weights);
  if (w.cols() != 1) throw Error(ErrorKind::DimMismatch, "pool weights must be a column");
  auto f = pool_forward(tape.value(hidden), w.data(), mode);
  if (degenerate) *degenerate = f.degenerate;
  Matrix<T> x = f.x;
  const Var in[] = {hidden, weights};
  return tape.record(
      std::move(x), in,
      [hidden, weights, mode, f = std::move(f)](const Matrix<T>& g, Tape<T>& t) {
        const Matrix<T>& H = t.value(hidden);
        const Matrix<T>& W = t.value(weights);
        const std::size_t n = H.rows();
        for (std::size_t j = 0; j < n; ++j) t.accumulate_row(hidden, j, g.data(), f.alpha[j]);
        if (!t.requires_grad(weights)) return;
        T gx{};
        for (std::size_t c = 0; c < g.size(); ++c) gx += g[c] * f.x[c];
        Matrix<T>& gw = t.grad_buffer(weights);
        for (std::size_t j = 0; j < n; ++j) {
          const T gh = dot<T>(g.data(), H.row(j));
          switch (mode) {
            case Normalization::none: gw[j] += gh; break;
            case Normalization::sum_normalized:
              if (!f.degenerate) gw[j] += (gh - gx) / f.sum;
              break;
            case Normalization::softmax: gw[j] += f.alpha[j] * (gh - gx); break;
          }
        }
        (void)W;
      });
}

template <class T>
Var tape_level_embedding(Tape<T>& tape, EncoderVars enc, Var context, Normalization mode,
                         Similarity sim, bool* degenerate) {
  bool dg_f = false;
  bool dg_b = false;
  const Var wf = tape_token_weights(tape, enc.forward, context, sim);
  const Var wb = tape_token_weights(tape, enc.backward, context, sim);
  const Var parts[] = {tape_pool(tape, enc.forward, wf, mode, &dg_f),
                       tape_pool(tape, enc.backward, wb, mode, &dg_b)};
  if (degenerate) *degenerate = dg_f || dg_b;
  return tape.vstack(parts);
}

template <class T>
Var tape_global_embedding(Tape<T>& tape, EncoderVars enc, Normalization mode) {
  const std::size_t n = tape.value(enc.forward).rows();
  const Var ones = tape.constant(Matrix<T>(n, 1, T{1}));
  const Var parts[] = {tape_pool(tape, enc.forward, ones, mode),
                       tape_pool(tape, enc.backward, ones, mode)};
  return tape.vstack(parts);
}

#define AHMCA_INSTANTIATE(T)                                                                      \
  template LevelContext<T> splice_level<T>(int, const Matrix<T>&, const Matrix<T>&);               \
  template std::vector<T> token_weights<T>(const Matrix<T>&, const Matrix<T>&, Similarity);        \
  template Matrix<T> pool_hidden<T>(const Matrix<T>&, std::span<const T>, Normalization, bool*);   \
  template LevelEmbedding<T> level_embedding<T>(const EncoderOutput<T>&, std::span<const T>,       \
                                                std::span<const T>, Normalization);                \
  template LevelEmbeddings<T> build_all_levels<T>(const EncoderOutput<T>&,                         \
                                                  const std::vector<LevelContext<T>>&,             \
                                                  Normalization, Similarity);                      \
  template Var tape_token_weights<T>(Tape<T>&, Var, Var, Similarity);                              \
  template Var tape_pool<T>(Tape<T>&, Var, Var, Normalization, bool*);                             \
  template Var tape_level_embedding<T>(Tape<T>&, EncoderVars, Var, Normalization, Similarity,      \
                                       bool*);                                                     \
  template Var tape_global_embedding<T>(Tape<T>&, EncoderVars, Normalization);

AHMCA_INSTANTIATE(float)
AHMCA_INSTANTIATE(double)

#undef AHMCA_INSTANTIATE

}  // namespace ahmca
