#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ahmca/matrix.hpp"
#include "ahmca/taxonomy.hpp"

namespace ahmca {

/// Token -> k-vector map with a shared out-of-vocabulary vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  /// `vectors` holds one row per token. `unk` defaults to the row mean
  /// (zero for an empty table). Throws DuplicateToken, DimMismatch, NonFinite.
  EmbeddingTable(std::vector<std::string> tokens, MatrixD vectors,
                 std::optional<std::vector<double>> unk = std::nullopt);

  /// Seeded random unit vectors, one per token.
  static EmbeddingTable random(std::vector<std::string> tokens, std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const MatrixD& vectors() const noexcept { return vectors_; }
  std::span<const double> unk() const noexcept { return unk_; }

  bool frozen() const noexcept { return frozen_; }
  void set_frozen(bool f) noexcept { frozen_ = f; }

  std::optional<std::size_t> find(std::string_view token) const;
  /// Row index in full_table(): the token's row, or size() for OOV.
  std::size_t index_or_unk(std::string_view token) const;
  std::span<const double> lookup(std::string_view token) const;

  /// (size()+1) x k: vocabulary rows followed by the unk row.
  MatrixD full_table() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  MatrixD vectors_;
  std::vector<double> unk_;
  bool frozen_ = true;
};

/// Parses word2vec text format: "vocab_size dim" header, then one
/// "token v1 ... v_dim" line per entry.
EmbeddingTable load_embeddings(std::string_view text);
/// word2vec text form, round-trippable through load_embeddings.
std::string write_embeddings(const EmbeddingTable& table);

/// N x k matrix of token vectors; EmptyInput for no tokens.
MatrixD embed_sequence(std::span<const std::string> tokens, const EmbeddingTable& table);

/// One matrix per level, rows in taxonomy order.
struct LabelMatrices {
  std::vector<MatrixD> levels;
};

/// Each label row is the mean of its text's word vectors.
LabelMatrices build_label_matrices(const Taxonomy& taxonomy, const EmbeddingTable& table);

/// M x k; a multi-word keyword is the mean of its word vectors.
MatrixD keyword_matrix(std::span<const std::string> keywords, const EmbeddingTable& table);

/// Row indices (into full_table()) of the words making up `phrase`.
std::vector<std::size_t> phrase_rows(std::string_view phrase, const EmbeddingTable& table);

/// Rows of a normalized keyword (words separated by single spaces).
std::vector<std::size_t> keyword_rows(std::string_view keyword, const EmbeddingTable& table);

/// phrase_rows for each label text of a level; EmptyLabelText if a text has no words.
std::vector<std::vector<std::size_t>> label_rows(const Taxonomy& taxonomy, int level,
                                                 const EmbeddingTable& table);

}  // namespace ahmca
