#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ahmca/embedding.hpp"
#include "ahmca/taxonomy.hpp"
#include "ahmca/text.hpp"

namespace ahmca {

struct Document {
  std::string id;
  std::vector<std::string> title_tokens;
  std::vector<std::string> abstract_tokens;
  /// One entry per keyword; a multi-word keyword is kept as its
  /// space-joined tokens.
  std::vector<std::string> keywords;
  /// Leaf label ids, as given.
  std::vector<std::string> leaf_labels;
  /// level_labels[i] = labels at level i+1, ancestor closure of leaf_labels,
  /// in taxonomy order.
  std::vector<std::vector<std::string>> level_labels;

  /// title + abstract + keyword words, the sequence the encoder reads.
  std::vector<std::string> combined_tokens() const;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Fills level_labels from leaf_labels. UnknownLabel if a leaf is missing
/// or not at the deepest level.
void derive_level_labels(Document& doc, const Taxonomy& taxonomy);

struct Corpus {
  std::vector<Document> documents;
  std::string taxonomy_hash;

  std::size_t size() const noexcept { return documents.size(); }
};

/// JSON Lines, one document per line. Raw strings go through tokenize();
/// arrays are taken as already tokenized.
/// Errors: MalformedRecord, UnknownLabel, EmptyText, DuplicateId.
/// With require_labels = false, records may omit "labels" (prediction input).
Corpus load_corpus(std::string_view jsonl, const Taxonomy& taxonomy, bool require_labels = true);

/// Serializes with pre-tokenized arrays; load_corpus reads it back unchanged.
std::string write_corpus(const Corpus& corpus);

struct Split {
  Corpus train;
  Corpus val;
  Corpus test;
};

/// Seeded, stratified by first leaf label. Sizes: val = floor(n*r1/sum),
/// test = floor(n*r2/sum), remainder to train. TooFewDocuments when n is
/// below the ratio sum; ConfigInvalid for a zero ratio.
Split split_corpus(const Corpus& corpus, const Taxonomy& taxonomy,
                   std::array<unsigned, 3> ratios, std::uint64_t seed);

struct SynthSpec {
  std::vector<std::size_t> level_sizes;
  std::size_t docs_per_leaf = 10;
  std::size_t doc_length = 30;
  std::size_t keywords_per_doc = 3;
  std::size_t leaf_vocab_size = 10;
  double noise_rate = 0.2;
  std::uint64_t seed = 1;
  /// Not part of the document model; sizes the generated vectors.
  std::size_t embedding_dim = 64;
};

/// Throws SpecInvalid on counts < 1, noise outside [0,1], or a level size
/// that is not a multiple of the level above.
void validate(const SynthSpec& spec);

/// Parses a SynthSpec JSON object; absent fields keep their defaults.
SynthSpec load_synth_spec(std::string_view json_text);

struct SyntheticData {
  Taxonomy taxonomy;
  Corpus corpus;
  EmbeddingTable embeddings;
  /// Per-label lexicon in taxonomy global order.
  std::vector<std::vector<std::string>> lexicons;
};

/// Deterministic synthetic hierarchy, documents and embeddings.
///
/// Each label owns a disjoint lexicon of leaf_vocab_size tokens. A document of
/// leaf c draws round((1-noise_rate)*doc_length) tokens from the lexicons of c
/// and its ancestors and the rest uniformly from the whole vocabulary.
/// Keywords are the document's most frequent leaf-lexicon tokens. Each label's
/// text is one reserved token that never appears in documents.
SyntheticData generate_synthetic(const SynthSpec& spec);

}  // namespace ahmca
