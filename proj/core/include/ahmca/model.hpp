#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ahmca/attention.hpp"
#include "ahmca/config.hpp"
#include "ahmca/corpus.hpp"
#include "ahmca/embedding.hpp"
#include "ahmca/encoder.hpp"
#include "ahmca/hmcn.hpp"
#include "ahmca/taxonomy.hpp"

namespace ahmca {

/// All trainable arrays of the pipeline.
template <class T>
struct ModelParams {
  Matrix<T> embeddings;  // (V + 1) x k, the last row is the unknown-token vector
  LstmParams<T> lstm;
  HeadParams<T> head;

  /// Arrays with their checkpoint names, in a fixed order.
  std::vector<std::pair<std::string, Matrix<T>*>> named();
  std::vector<std::pair<std::string, const Matrix<T>*>> named() const;

  /// Copies `other`, converting element type and adopting its shapes.
  template <class U>
  void assign(const ModelParams<U>& other) {
    head.global.levels.resize(other.head.global.levels.size());
    head.local.levels.resize(other.head.local.levels.size());
    auto dst = named();
    const auto src = other.named();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].second = src[i].second->template cast<T>();
  }

  template <class U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.assign(*this);
    return out;
  }
};

/// Token -> row lookup; unknown tokens map to size().
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t unk_index() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t index_or_unk(std::string_view token) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A trained (or freshly initialized) model together with what it was
/// trained against.
struct Checkpoint {
  TrainConfig config;
  Taxonomy taxonomy;
  Vocabulary vocab;
  ModelParams<float> params;
};

/// Fresh parameters seeded from cfg.seed. The embedding rows (and unknown
/// vector) are copied from `embeddings`. DimMismatch if its dim is not cfg.k.
Checkpoint init_checkpoint(const TrainConfig& cfg, const Taxonomy& taxonomy,
                           const EmbeddingTable& embeddings);

/// Throws TaxonomyMismatch unless `hash` is the checkpoint taxonomy's hash.
void require_taxonomy(const Checkpoint& ckpt, std::string_view hash);

/// Taxonomy facts the forward pass needs.
struct ModelLayout {
  /// labels[h][j]: embedding rows of the words of label j at level h+1.
  std::vector<std::vector<std::vector<std::size_t>>> labels;
  std::vector<std::optional<std::size_t>> parents;
  std::vector<std::size_t> level_sizes;
};

ModelLayout make_layout(const Taxonomy& taxonomy, const Vocabulary& vocab);

/// A document reduced to embedding rows and 0/1 targets.
struct EncodedDocument {
  std::vector<std::size_t> tokens;
  std::vector<std::vector<std::size_t>> keywords;
  std::vector<std::vector<double>> targets;  // per level; empty without labels
  std::vector<std::size_t> leaf_indices;     // positions within the leaf level
};

/// EmptyText when the document has no tokens.
EncodedDocument encode_document(const Document& doc, const Taxonomy& taxonomy,
                                const Vocabulary& vocab);

/// Loss of one document. When `grads` is non-null it receives the gradient
/// of every array in named() order; the embedding entry stays empty when
/// embeddings are frozen.
template <class T>
T document_loss(const ModelParams<T>& params, const EncodedDocument& doc,
                const ModelLayout& layout, const TrainConfig& cfg,
                std::vector<Matrix<T>>* grads = nullptr);

/// Forward-only scoring against fixed parameters; `params` must outlive it.
/// Label matrices are built once at construction.
class Predictor {
 public:
  Predictor(const ModelParams<float>& params, const ModelLayout& layout, const TrainConfig& cfg);

  Prediction operator()(const EncodedDocument& doc) const;

 private:
  const ModelParams<float>* params_;
  TrainConfig cfg_;
  std::vector<MatrixF> label_cache_;
};

}  // namespace ahmca
