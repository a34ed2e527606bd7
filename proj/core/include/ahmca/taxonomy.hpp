#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ahmca {

struct Label {
  std::string id;
  std::string text;
  int level = 1;
  std::optional<std::string> parent;

  friend bool operator==(const Label&, const Label&) = default;
};

/// Leveled label tree. Immutable once constructed.
///
/// Labels keep declaration order within each level. The "global" ordering
/// used by prediction vectors is levels 1..H concatenated in that order.
/// The parent relation is the strict (irreflexive) PARENT-OF order.
class Taxonomy {
 public:
  Taxonomy() = default;

  /// Validates and builds. Throws DuplicateId, OrphanParent, Cycle, LevelGap
  /// or MalformedTaxonomy.
  static Taxonomy from_labels(std::vector<Label> labels);

  std::size_t depth() const noexcept { return levels_.size(); }
  std::size_t total_classes() const noexcept { return labels_.size(); }
  std::size_t level_size(int level) const;

  /// Label ids at level (1-based) in stable order; LevelOutOfRange otherwise.
  const std::vector<std::string>& labels_at_level(int level) const;
  const std::vector<std::string>& leaves() const { return labels_at_level(static_cast<int>(depth())); }

  bool contains(std::string_view id) const;
  /// UnknownLabel when absent.
  const Label& label(std::string_view id) const;
  /// Strict ancestors, nearest first.
  std::vector<std::string> ancestors_of(std::string_view id) const;

  /// Position within the label's own level.
  std::size_t index_in_level(std::string_view id) const;
  /// Position in the concatenated level ordering.
  std::size_t global_index(std::string_view id) const;
  /// Offset of the first label of `level` in the global ordering.
  std::size_t level_offset(int level) const;
  /// Global index of each label's parent (nullopt at level 1), global order.
  std::vector<std::optional<std::size_t>> parent_indices() const;

  /// Labels in declaration order (as loaded).
  const std::vector<Label>& labels() const noexcept { return labels_; }
  /// Labels in global order.
  std::vector<const Label*> ordered_labels() const;

  /// 16 hex digits, FNV-1a over the canonical serialization.
  const std::string& hash() const noexcept { return hash_; }

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<Label> labels_;
  std::vector<std::vector<std::string>> levels_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> global_;
  std::vector<std::size_t> offsets_;
  std::string hash_;
};

/// Parses the JSON taxonomy file format and validates it.
Taxonomy load_taxonomy(std::string_view json_text);
/// Canonical JSON form; load_taxonomy(serialize_taxonomy(t)) == t.
std::string serialize_taxonomy(const Taxonomy& t);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace ahmca
