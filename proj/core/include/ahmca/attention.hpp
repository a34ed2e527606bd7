#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ahmca/encoder.hpp"
#include "ahmca/matrix.hpp"
#include "ahmca/tape.hpp"

namespace ahmca {

/// How raw token weights combine hidden rows into one vector.
///   sum_normalized: divide by the weight sum (uniform if |sum| <= 1e-8)
///   none:           plain weighted sum
///   softmax:        softmax over the weights
enum class Normalization { sum_normalized, none, softmax };
enum class Similarity { dot, cosine };

inline constexpr double kDegenerateWeightSum = 1e-8;

std::string_view to_string(Normalization n) noexcept;
std::string_view to_string(Similarity s) noexcept;
Normalization parse_normalization(std::string_view s);
Similarity parse_similarity(std::string_view s);

/// Label rows of one level followed by the document's keyword rows.
template <class T>
struct LevelContext {
  int level = 1;
  Matrix<T> rows;  // (|C^i| + M) x k
  std::size_t label_count = 0;
};

/// Raw (pre-normalization) weights, one per token and direction.
template <class T>
struct AttentionWeights {
  std::vector<T> forward;
  std::vector<T> backward;
  Normalization mode = Normalization::sum_normalized;
};

template <class T>
struct LevelEmbedding {
  Matrix<T> x;  // 2k x 1: forward half, then backward half
  bool degenerate = false;
};

/// x[0] is the unweighted global embedding, x[i] the level-i embedding.
template <class T>
struct LevelEmbeddings {
  std::vector<Matrix<T>> x;
  std::vector<AttentionWeights<T>> weights;  // weights[i-1] for level i
  bool degenerate = false;
};

/// Row-stacks T^i over K_e. DimMismatch when column counts differ; an empty
/// keyword matrix (M = 0) leaves the labels alone.
template <class T>
LevelContext<T> splice_level(int level, const Matrix<T>& labels, const Matrix<T>& keywords);

/// weight[j] = max over context rows t of sim(hidden[j], t).
template <class T>
std::vector<T> token_weights(const Matrix<T>& hidden, const Matrix<T>& context,
                             Similarity sim = Similarity::dot);

/// Combines hidden rows (N x k) into a k x 1 vector.
template <class T>
Matrix<T> pool_hidden(const Matrix<T>& hidden, std::span<const T> weights, Normalization mode,
                      bool* degenerate = nullptr);

template <class T>
LevelEmbedding<T> level_embedding(const EncoderOutput<T>& enc, std::span<const T> w_forward,
                                  std::span<const T> w_backward, Normalization mode);

template <class T>
LevelEmbeddings<T> build_all_levels(const EncoderOutput<T>& enc,
                                    const std::vector<LevelContext<T>>& contexts,
                                    Normalization mode = Normalization::sum_normalized,
                                    Similarity sim = Similarity::dot);

// Tape forms. The max picks the lowest row index among equal maxima and
// routes the whole gradient to it.

template <class T>
Var tape_token_weights(Tape<T>& tape, Var hidden, Var context, Similarity sim);

template <class T>
Var tape_pool(Tape<T>& tape, Var hidden, Var weights, Normalization mode, bool* degenerate = nullptr);

/// 2k x 1 level embedding from an encoder output and a spliced context.
template <class T>
Var tape_level_embedding(Tape<T>& tape, EncoderVars enc, Var context, Normalization mode,
                         Similarity sim, bool* degenerate = nullptr);

/// 2k x 1 embedding with all-ones weights.
template <class T>
Var tape_global_embedding(Tape<T>& tape, EncoderVars enc, Normalization mode);

}  // namespace ahmca
