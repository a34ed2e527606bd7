#include "ahmca/taxonomy.hpp"

#include <cstdint>
#include <cstdio>

#include "ahmca/error.hpp"
#include <nlohmann/json.hpp>

namespace ahmca {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Taxonomy Taxonomy::from_labels(std::vector<Label> labels) {
  if (labels.empty()) throw Error(ErrorKind::MalformedTaxonomy, "taxonomy has no labels");

  Taxonomy t;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label& l = labels[i];
    if (l.id.empty()) throw Error(ErrorKind::MalformedTaxonomy, "label with empty id");
    if (l.level < 1) {
      throw Error(ErrorKind::MalformedTaxonomy, "label '" + l.id + "' has level < 1");
    }
    if (!t.by_id_.emplace(l.id, i).second) {
      throw Error(ErrorKind::DuplicateId, "label id '" + l.id + "' declared twice");
    }
  }
  for (const Label& l : labels) {
    if (l.parent && !t.by_id_.contains(*l.parent)) {
      throw Error(ErrorKind::OrphanParent,
                  "label '" + l.id + "' names unknown parent '" + *l.parent + "'");
    }
  }
  // Any chain longer than the label count must revisit a label.
  for (const Label& l : labels) {
    const Label* cur = &l;
    for (std::size_t steps = 0; cur->parent; ++steps) {
      if (steps >= labels.size() || *cur->parent == l.id) {
        throw Error(ErrorKind::Cycle, "parent chain of '" + l.id + "' loops");
      }
      cur = &labels[t.by_id_.at(*cur->parent)];
    }
  }
  for (const Label& l : labels) {
    if (l.level == 1) {
      if (l.parent) {
        throw Error(ErrorKind::LevelGap, "level-1 label '" + l.id + "' has a parent");
      }
      continue;
    }
    if (!l.parent) {
      throw Error(ErrorKind::OrphanParent,
                  "label '" + l.id + "' at level " + std::to_string(l.level) + " has no parent");
    }
    const Label& p = labels[t.by_id_.at(*l.parent)];
    if (p.level + 1 != l.level) {
      throw Error(ErrorKind::LevelGap, "label '" + l.id + "' at level " + std::to_string(l.level) +
                                           " under '" + p.id + "' at level " +
                                           std::to_string(p.level));
    }
  }

  int depth = 0;
  for (const Label& l : labels) depth = std::max(depth, l.level);
  t.levels_.resize(static_cast<std::size_t>(depth));
  for (const Label& l : labels) t.levels_[static_cast<std::size_t>(l.level - 1)].push_back(l.id);

  std::size_t offset = 0;
  for (const auto& level : t.levels_) {
    t.offsets_.push_back(offset);
    for (std::size_t i = 0; i < level.size(); ++i) t.global_.emplace(level[i], offset + i);
    offset += level.size();
  }
  t.labels_ = std::move(labels);
  t.hash_ = fnv1a_hex(serialize_taxonomy(t));
  return t;
}

std::size_t Taxonomy::level_size(int level) const { return labels_at_level(level).size(); }

const std::vector<std::string>& Taxonomy::labels_at_level(int level) const {
  if (level < 1 || static_cast<std::size_t>(level) > levels_.size()) {
    throw Error(ErrorKind::LevelOutOfRange, "level " + std::to_string(level) + " not in 1.." +
                                                std::to_string(levels_.size()));
  }
  return levels_[static_cast<std::size_t>(level - 1)];
}

bool Taxonomy::contains(std::string_view id) const { return by_id_.contains(std::string(id)); }

const Label& Taxonomy::label(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw Error(ErrorKind::UnknownLabel, "'" + std::string(id) + "'");
  return labels_[it->second];
}

std::vector<std::string> Taxonomy::ancestors_of(std::string_view id) const {
  std::vector<std::string> out;
  const Label* cur = &label(id);
  while (cur->parent) {
    out.push_back(*cur->parent);
    cur = &label(*cur->parent);
  }
  return out;
}

std::size_t Taxonomy::index_in_level(std::string_view id) const {
  const Label& l = label(id);
  return global_.at(l.id) - offsets_[static_cast<std::size_t>(l.level - 1)];
}

std::size_t Taxonomy::global_index(std::string_view id) const { return global_.at(label(id).id); }

std::size_t Taxonomy::level_offset(int level) const {
  labels_at_level(level);
  return offsets_[static_cast<std::size_t>(level - 1)];
}

std::vector<std::optional<std::size_t>> Taxonomy::parent_indices() const {
  std::vector<std::optional<std::size_t>> out;
  out.reserve(labels_.size());
  for (const Label* l : ordered_labels()) {
    if (l->parent) out.emplace_back(global_.at(*l->parent));
    else out.emplace_back(std::nullopt);
  }
  return out;
}

std::vector<const Label*> Taxonomy::ordered_labels() const {
  std::vector<const Label*> out;
  out.reserve(labels_.size());
  for (const auto& level : levels_)
    for (const auto& id : level) out.push_back(&labels_[by_id_.at(id)]);
  return out;
}

Taxonomy load_taxonomy(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedTaxonomy, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array()) {
    throw Error(ErrorKind::MalformedTaxonomy, "expected an object with a \"labels\" array");
  }
  std::vector<Label> labels;
  for (const auto& rec : doc["labels"]) {
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("level") || !rec["level"].is_number_integer()) {
      throw Error(ErrorKind::MalformedTaxonomy, "label record needs string id and integer level");
    }
    Label l;
    l.id = rec["id"].get<std::string>();
    l.level = rec["level"].get<int>();
    if (rec.contains("text")) {
      if (!rec["text"].is_string()) throw Error(ErrorKind::MalformedTaxonomy, "text must be a string");
      l.text = rec["text"].get<std::string>();
    }
    if (rec.contains("parent") && !rec["parent"].is_null()) {
      if (!rec["parent"].is_string()) {
        throw Error(ErrorKind::MalformedTaxonomy, "parent must be a string or null");
      }
      l.parent = rec["parent"].get<std::string>();
    }
    labels.push_back(std::move(l));
  }
  return Taxonomy::from_labels(std::move(labels));
}

std::string serialize_taxonomy(const Taxonomy& t) {
  json labels = json::array();
  for (const Label& l : t.labels()) {
    json rec = json::object();
    rec["id"] = l.id;
    rec["text"] = l.text;
    rec["level"] = l.level;
    rec["parent"] = l.parent ? json(*l.parent) : json(nullptr);
    labels.push_back(std::move(rec));
  }
  json doc = json::object();
  doc["labels"] = std::move(labels);
  return doc.dump();
}

}  // namespace ahmca
