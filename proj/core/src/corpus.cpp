#include "ahmca/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ahmca/random.hpp"
#include <nlohmann/json.hpp>

namespace ahmca {

using nlohmann::json;

namespace {

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::vector<std::string> Document::combined_tokens() const {
  std::vector<std::string> out = title_tokens;
  out.insert(out.end(), abstract_tokens.begin(), abstract_tokens.end());
  for (const auto& kw : keywords) {
    auto words = split_spaces(kw);
    out.insert(out.end(), words.begin(), words.end());
  }
  return out;
}

void derive_level_labels(Document& doc, const Taxonomy& taxonomy) {
  const std::size_t depth = taxonomy.depth();
  std::vector<std::vector<bool>> present(depth);
  for (std::size_t l = 0; l < depth; ++l) present[l].assign(taxonomy.level_size(static_cast<int>(l + 1)), false);
  for (const auto& leaf : doc.leaf_labels) {
    if (!taxonomy.contains(leaf)) {
      throw Error(ErrorKind::UnknownLabel, "document '" + doc.id + "': '" + leaf + "'");
    }
    const Label& l = taxonomy.label(leaf);
    if (static_cast<std::size_t>(l.level) != depth) {
      throw Error(ErrorKind::UnknownLabel, "document '" + doc.id + "': '" + leaf +
                                               "' is not a leaf-level label");
    }
    present[depth - 1][taxonomy.index_in_level(leaf)] = true;
    for (const auto& anc : taxonomy.ancestors_of(leaf)) {
      const Label& a = taxonomy.label(anc);
      present[static_cast<std::size_t>(a.level - 1)][taxonomy.index_in_level(anc)] = true;
    }
  }
  doc.level_labels.assign(depth, {});
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& ids = taxonomy.labels_at_level(static_cast<int>(l + 1));
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (present[l][i]) doc.level_labels[l].push_back(ids[i]);
  }
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> read_text_field(const json& rec, const char* raw_key,
                                         const char* tokens_key, std::size_t line_no,
                                         bool& pretokenized) {
  const json* field = nullptr;
  if (rec.contains(tokens_key)) {
    field = &rec[tokens_key];
    if (!field->is_array()) malformed(line_no, std::string(tokens_key) + " must be an array");
  } else if (rec.contains(raw_key)) {
    field = &rec[raw_key];
  } else {
    return {};
  }
  if (field->is_string()) return tokenize(field->get<std::string>());
  if (!field->is_array()) malformed(line_no, std::string(raw_key) + " must be a string or array");
  pretokenized = true;
  std::vector<std::string> out;
  for (const auto& t : *field) {
    if (!t.is_string()) malformed(line_no, std::string(raw_key) + " array holds a non-string");
    if (!t.get<std::string>().empty()) out.push_back(t.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus load_corpus(std::string_view jsonl, const Taxonomy& taxonomy, bool require_labels) {
  Corpus corpus;
  corpus.taxonomy_hash = taxonomy.hash();
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < jsonl.size()) {
    const std::size_t nl = jsonl.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? jsonl.size() : nl;
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) malformed(line_no, "record is not an object");
    if (!rec.contains("id") || !rec["id"].is_string()) malformed(line_no, "missing string id");

    Document doc;
    doc.id = rec["id"].get<std::string>();
    bool pretokenized = false;
    doc.title_tokens = read_text_field(rec, "title", "title_tokens", line_no, pretokenized);
    doc.abstract_tokens = read_text_field(rec, "abstract", "abstract_tokens", line_no, pretokenized);
    if (rec.contains("keywords")) {
      if (!rec["keywords"].is_array()) malformed(line_no, "keywords must be an array");
      for (const auto& kw : rec["keywords"]) {
        if (!kw.is_string()) malformed(line_no, "keywords array holds a non-string");
        const auto s = kw.get<std::string>();
        const std::string phrase = pretokenized ? s : join_tokens(tokenize(s));
        if (!phrase.empty()) doc.keywords.push_back(phrase);
      }
    }
    if (rec.contains("labels")) {
      if (!rec["labels"].is_array()) malformed(line_no, "labels must be an array");
      for (const auto& l : rec["labels"]) {
        if (!l.is_string()) malformed(line_no, "labels array holds a non-string");
        const auto id = l.get<std::string>();
        if (std::find(doc.leaf_labels.begin(), doc.leaf_labels.end(), id) == doc.leaf_labels.end())
          doc.leaf_labels.push_back(id);
      }
    }
    if (require_labels && doc.leaf_labels.empty()) malformed(line_no, "no labels");
    if (doc.combined_tokens().empty()) {
      throw Error(ErrorKind::EmptyText, "document '" + doc.id + "' has no tokens");
    }
    derive_level_labels(doc, taxonomy);
    if (!seen.insert(doc.id).second) {
      throw Error(ErrorKind::DuplicateId, "document id '" + doc.id + "' repeated");
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::string write_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents) {
    json rec = json::object();
    rec["id"] = d.id;
    rec["title"] = d.title_tokens;
    rec["abstract"] = d.abstract_tokens;
    rec["keywords"] = d.keywords;
    rec["labels"] = d.leaf_labels;
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

Split split_corpus(const Corpus& corpus, const Taxonomy& taxonomy, std::array<unsigned, 3> ratios,
                   std::uint64_t seed) {
  for (const unsigned r : ratios)
    if (r == 0) throw Error(ErrorKind::ConfigInvalid, "split ratios must be positive");
  const std::size_t parts = std::size_t{ratios[0]} + ratios[1] + ratios[2];
  const std::size_t n = corpus.size();
  if (n < parts) {
    throw Error(ErrorKind::TooFewDocuments,
                std::to_string(n) + " documents for ratio sum " + std::to_string(parts));
  }

  // Strata keyed by first leaf label, ordered by taxonomy position.
  std::map<std::size_t, std::vector<std::size_t>> strata;
  const std::size_t unlabeled = taxonomy.total_classes();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = corpus.documents[i];
    const std::size_t key = d.leaf_labels.empty() || !taxonomy.contains(d.leaf_labels.front())
                                ? unlabeled
                                : taxonomy.global_index(d.leaf_labels.front());
    strata[key].push_back(i);
  }

  Rng rng(seed);
  std::vector<std::size_t> val, test, pool;
  std::vector<std::vector<std::size_t>> train_shares;
  for (auto& [key, members] : strata) {
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t g = members.size();
    if (g < parts) {
      pool.insert(pool.end(), members.begin(), members.end());
      continue;
    }
    const std::size_t nv = g * ratios[1] / parts;
    const std::size_t nt = g * ratios[2] / parts;
    val.insert(val.end(), members.begin(), members.begin() + nv);
    test.insert(test.end(), members.begin() + nv, members.begin() + nv + nt);
    train_shares.emplace_back(members.begin() + nv + nt, members.end());
  }
  rng.shuffle(std::span<std::size_t>(pool));

  const std::size_t target_val = n * ratios[1] / parts;
  const std::size_t target_test = n * ratios[2] / parts;
  std::size_t pool_next = 0;
  auto take_donor = [&]() -> std::size_t {
    if (pool_next < pool.size()) return pool[pool_next++];
    // Largest remaining train share gives one document from its end.
    auto it = std::max_element(train_shares.begin(), train_shares.end(),
                               [](const auto& a, const auto& b) { return a.size() < b.size(); });
    const std::size_t doc = it->back();
    it->pop_back();
    return doc;
  };
  while (val.size() < target_val) val.push_back(take_donor());
  while (test.size() < target_test) test.push_back(take_donor());

  std::vector<std::size_t> train(pool.begin() + static_cast<std::ptrdiff_t>(pool_next), pool.end());
  for (const auto& share : train_shares) train.insert(train.end(), share.begin(), share.end());

  auto build = [&](std::vector<std::size_t>& idx) {
    std::sort(idx.begin(), idx.end());
    Corpus c;
    c.taxonomy_hash = corpus.taxonomy_hash;
    for (const std::size_t i : idx) c.documents.push_back(corpus.documents[i]);
    return c;
  };
  return Split{build(train), build(val), build(test)};
}

void validate(const SynthSpec& spec) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::SpecInvalid, m); };
  if (spec.level_sizes.empty()) fail("level_sizes is empty");
  for (std::size_t i = 0; i < spec.level_sizes.size(); ++i) {
    if (spec.level_sizes[i] < 1) fail("level sizes must be >= 1");
    if (i > 0 && spec.level_sizes[i] % spec.level_sizes[i - 1] != 0) {
      fail("level " + std::to_string(i + 1) + " size " + std::to_string(spec.level_sizes[i]) +
           " is not a multiple of level " + std::to_string(i) + " size " +
           std::to_string(spec.level_sizes[i - 1]));
    }
  }
  if (spec.docs_per_leaf < 1) fail("docs_per_leaf must be >= 1");
  if (spec.doc_length < 1) fail("doc_length must be >= 1");
  if (spec.keywords_per_doc < 1) fail("keywords_per_doc must be >= 1");
  if (spec.leaf_vocab_size < 1) fail("leaf_vocab_size must be >= 1");
  if (spec.embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) fail("noise_rate must lie in [0,1]");
}

SynthSpec load_synth_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SpecInvalid, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::SpecInvalid, "spec must be a JSON object");
  SynthSpec spec;
  auto count = [&](const std::string& key, std::size_t& out) {
    const auto& v = doc[key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw Error(ErrorKind::SpecInvalid, key + " must be a non-negative integer");
    }
    out = v.get<std::size_t>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "level_sizes") {
      if (!value.is_array()) throw Error(ErrorKind::SpecInvalid, "level_sizes must be an array");
      spec.level_sizes.clear();
      for (const auto& s : value) {
        if (!s.is_number_integer() || s.get<long long>() < 0) {
          throw Error(ErrorKind::SpecInvalid, "level_sizes entries must be integers");
        }
        spec.level_sizes.push_back(s.get<std::size_t>());
      }
    } else if (key == "docs_per_leaf") count(key, spec.docs_per_leaf);
    else if (key == "doc_length") count(key, spec.doc_length);
    else if (key == "keywords_per_doc") count(key, spec.keywords_per_doc);
    else if (key == "leaf_vocab_size") count(key, spec.leaf_vocab_size);
    else if (key == "embedding_dim") count(key, spec.embedding_dim);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) throw Error(ErrorKind::SpecInvalid, "seed must be an unsigned integer");
      spec.seed = value.get<std::uint64_t>();
    } else if (key == "noise_rate") {
      if (!value.is_number()) throw Error(ErrorKind::SpecInvalid, "noise_rate must be a number");
      spec.noise_rate = value.get<double>();
    } else {
      throw Error(ErrorKind::SpecInvalid, "unknown key '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  const std::size_t depth = spec.level_sizes.size();

  std::vector<Label> labels;
  std::vector<std::vector<std::string>> lexicons;
  std::vector<std::string> label_tokens;
  for (std::size_t level = 1; level <= depth; ++level) {
    const std::size_t count = spec.level_sizes[level - 1];
    const std::size_t fanout = level == 1 ? 1 : count / spec.level_sizes[level - 2];
    for (std::size_t i = 0; i < count; ++i) {
      Label l;
      l.id = "c" + std::to_string(level) + "_" + std::to_string(i);
      l.text = "label_" + l.id;
      l.level = static_cast<int>(level);
      if (level > 1) l.parent = "c" + std::to_string(level - 1) + "_" + std::to_string(i / fanout);
      std::vector<std::string> lex;
      for (std::size_t j = 0; j < spec.leaf_vocab_size; ++j) {
        lex.push_back("w" + std::to_string(level) + "_" + std::to_string(i) + "_" + std::to_string(j));
      }
      lexicons.push_back(std::move(lex));
      label_tokens.push_back(l.text);
      labels.push_back(std::move(l));
    }
  }
  Taxonomy taxonomy = Taxonomy::from_labels(std::move(labels));

  std::vector<std::string> vocabulary;
  for (const auto& lex : lexicons) vocabulary.insert(vocabulary.end(), lex.begin(), lex.end());

  Rng rng(spec.seed);
  Corpus corpus;
  corpus.taxonomy_hash = taxonomy.hash();
  const auto signal_count = static_cast<std::size_t>(
      std::llround((1.0 - spec.noise_rate) * static_cast<double>(spec.doc_length)));
  const std::size_t title_length = spec.doc_length / 5;
  const auto& leaves = taxonomy.leaves();
  std::size_t doc_counter = 0;
  for (const auto& leaf : leaves) {
    const std::size_t leaf_global = taxonomy.global_index(leaf);
    const auto& leaf_lex = lexicons[leaf_global];
    std::vector<std::string> signal_pool = leaf_lex;
    for (const auto& anc : taxonomy.ancestors_of(leaf)) {
      const auto& lex = lexicons[taxonomy.global_index(anc)];
      signal_pool.insert(signal_pool.end(), lex.begin(), lex.end());
    }
    std::unordered_map<std::string, std::size_t> leaf_rank;
    for (std::size_t j = 0; j < leaf_lex.size(); ++j) leaf_rank.emplace(leaf_lex[j], j);

    for (std::size_t d = 0; d < spec.docs_per_leaf; ++d) {
      std::vector<std::string> tokens;
      tokens.reserve(spec.doc_length);
      for (std::size_t t = 0; t < spec.doc_length; ++t) {
        if (t < signal_count) tokens.push_back(signal_pool[rng.below(signal_pool.size())]);
        else tokens.push_back(vocabulary[rng.below(vocabulary.size())]);
      }
      rng.shuffle(std::span<std::string>(tokens));

      std::vector<std::size_t> freq(leaf_lex.size(), 0);
      for (const auto& tok : tokens) {
        if (const auto it = leaf_rank.find(tok); it != leaf_rank.end()) ++freq[it->second];
      }
      std::vector<std::size_t> order(leaf_lex.size());
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });

      Document doc;
      char id[32];
      std::snprintf(id, sizeof id, "doc%06zu", doc_counter++);
      doc.id = id;
      doc.title_tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(title_length));
      doc.abstract_tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(title_length), tokens.end());
      for (std::size_t j = 0; j < std::min(spec.keywords_per_doc, order.size()); ++j) {
        doc.keywords.push_back(leaf_lex[order[j]]);
      }
      doc.leaf_labels = {leaf};
      derive_level_labels(doc, taxonomy);
      corpus.documents.push_back(std::move(doc));
    }
  }

  std::vector<std::string> emb_tokens = vocabulary;
  emb_tokens.insert(emb_tokens.end(), label_tokens.begin(), label_tokens.end());
  EmbeddingTable embeddings = EmbeddingTable::random(
      std::move(emb_tokens), spec.embedding_dim, spec.seed * 0x9E3779B97F4A7C15ULL + 0x5EED);

  return SyntheticData{std::move(taxonomy), std::move(corpus), std::move(embeddings),
                       std::move(lexicons)};
}

}  // namespace ahmca
