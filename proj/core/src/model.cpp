#include "ahmca/model.hpp"

#include <string>

#include "ahmca/text.hpp"

namespace ahmca {

template <class T>
std::vector<std::pair<std::string, Matrix<T>*>> ModelParams<T>::named() {
  std::vector<std::pair<std::string, Matrix<T>*>> out;
  out.emplace_back("embeddings", &embeddings);
  out.emplace_back("lstm.fwd.W", &lstm.forward.weights);
  out.emplace_back("lstm.fwd.b", &lstm.forward.bias);
  out.emplace_back("lstm.bwd.W", &lstm.backward.weights);
  out.emplace_back("lstm.bwd.b", &lstm.backward.bias);
  for (std::size_t h = 0; h < head.global.levels.size(); ++h) {
    const std::string prefix = "global." + std::to_string(h + 1);
    out.emplace_back(prefix + ".W", &head.global.levels[h].weights);
    out.emplace_back(prefix + ".b", &head.global.levels[h].bias);
  }
  out.emplace_back("global.out.W", &head.global.classifier.weights);
  out.emplace_back("global.out.b", &head.global.classifier.bias);
  for (std::size_t h = 0; h < head.local.levels.size(); ++h) {
    const std::string prefix = "local." + std::to_string(h + 1);
    out.emplace_back(prefix + ".transition.W", &head.local.levels[h].transition.weights);
    out.emplace_back(prefix + ".transition.b", &head.local.levels[h].transition.bias);
    out.emplace_back(prefix + ".classify.W", &head.local.levels[h].classify.weights);
    out.emplace_back(prefix + ".classify.b", &head.local.levels[h].classify.bias);
  }
  return out;
}

template <class T>
std::vector<std::pair<std::string, const Matrix<T>*>> ModelParams<T>::named() const {
  auto mutable_view = const_cast<ModelParams<T>*>(this)->named();
  std::vector<std::pair<std::string, const Matrix<T>*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, m] : mutable_view) out.emplace_back(std::move(name), m);
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw Error(ErrorKind::DuplicateToken, "'" + tokens_[i] + "' appears twice in the vocabulary");
    }
  }
}

std::size_t Vocabulary::index_or_unk(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_index() : it->second;
}

Checkpoint init_checkpoint(const TrainConfig& cfg, const Taxonomy& taxonomy,
                           const EmbeddingTable& embeddings) {
  validate(cfg);
  if (embeddings.dim() != cfg.k) {
    throw Error(ErrorKind::DimMismatch, "embedding dim " + std::to_string(embeddings.dim()) +
                                            " but k = " + std::to_string(cfg.k));
  }
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.taxonomy = taxonomy;
  ckpt.vocab = Vocabulary(embeddings.tokens());
  ckpt.params.embeddings = embeddings.full_table().cast<float>();
  Rng rng(cfg.seed);
  ckpt.params.lstm = init_lstm<float>(cfg.k, rng);
  ckpt.params.head =
      init_head<float>(head_shape(taxonomy, cfg.k, cfg.g, cfg.d_l, cfg.use_x0_in_global), rng);
  return ckpt;
}

void require_taxonomy(const Checkpoint& ckpt, std::string_view hash) {
  if (hash != ckpt.taxonomy.hash()) {
    throw Error(ErrorKind::TaxonomyMismatch, "data is bound to taxonomy " + std::string(hash) +
                                                 ", model to " + ckpt.taxonomy.hash());
  }
}

namespace {

std::vector<std::size_t> keyword_indices(std::string_view keyword, const Vocabulary& vocab) {
  std::vector<std::size_t> rows;
  std::size_t i = 0;
  while (i < keyword.size()) {
    while (i < keyword.size() && keyword[i] == ' ') ++i;
    std::size_t j = i;
    while (j < keyword.size() && keyword[j] != ' ') ++j;
    if (j > i) rows.push_back(vocab.index_or_unk(keyword.substr(i, j - i)));
    i = j;
  }
  return rows;
}

template <class T>
struct BoundModel {
  Var embeddings;
  LstmDirectionVars forward;
  LstmDirectionVars backward;
  HeadVars head;
  std::vector<Var> ordered;  // same order as ModelParams::named()
};

template <class T>
BoundModel<T> bind(Tape<T>& tape, const ModelParams<T>& p, bool train_embeddings) {
  BoundModel<T> m;
  auto param = [&](const Matrix<T>& value) {
    const Var v = tape.parameter(value);
    m.ordered.push_back(v);
    return v;
  };
  auto dense = [&](const Dense<T>& d) { return DenseVars{param(d.weights), param(d.bias)}; };

  m.embeddings = train_embeddings ? tape.parameter(p.embeddings) : tape.reference(p.embeddings);
  m.ordered.push_back(m.embeddings);
  m.forward = {param(p.lstm.forward.weights), param(p.lstm.forward.bias)};
  m.backward = {param(p.lstm.backward.weights), param(p.lstm.backward.bias)};
  for (const auto& level : p.head.global.levels) m.head.global_levels.push_back(dense(level));
  m.head.classifier = dense(p.head.global.classifier);
  for (const auto& level : p.head.local.levels) {
    m.head.transitions.push_back(dense(level.transition));
    m.head.classifies.push_back(dense(level.classify));
  }
  return m;
}

template <class T>
HeadLogits forward(Tape<T>& tape, const BoundModel<T>& m, const EncodedDocument& doc,
                   std::span<const Var> labels, const TrainConfig& cfg) {
  if (doc.tokens.empty()) throw Error(ErrorKind::EmptyText, "document has no tokens");
  std::vector<std::vector<std::size_t>> token_rows;
  token_rows.reserve(doc.tokens.size());
  for (const std::size_t t : doc.tokens) token_rows.push_back({t});
  const Var tokens = tape.segment_mean(m.embeddings, std::move(token_rows));
  const EncoderVars enc = tape_bilstm_encode(tape, tokens, m.forward, m.backward);

  std::optional<Var> keywords;
  if (!doc.keywords.empty()) keywords = tape.segment_mean(m.embeddings, doc.keywords);

  std::vector<Var> x{tape_global_embedding(tape, enc, cfg.attention_mode)};
  for (const Var label_rows : labels) {
    Var context = label_rows;
    if (keywords) {
      const Var parts[] = {label_rows, *keywords};
      context = tape.vstack(parts);
    }
    x.push_back(tape_level_embedding(tape, enc, context, cfg.attention_mode, cfg.similarity));
  }
  return tape_head(tape, m.head, x, cfg.use_x0_in_global);
}

template <class T>
Var loss_node(Tape<T>& tape, const HeadLogits& logits, const EncodedDocument& doc,
              const ModelLayout& layout, const TrainConfig& cfg) {
  if (doc.targets.size() != layout.level_sizes.size()) {
    throw Error(ErrorKind::DimMismatch, "document has no targets for every level");
  }
  std::vector<T> flat;
  std::vector<Var> terms;
  for (std::size_t h = 0; h < doc.targets.size(); ++h) {
    std::vector<T> level(doc.targets[h].begin(), doc.targets[h].end());
    flat.insert(flat.end(), level.begin(), level.end());
    terms.push_back(tape_bce_with_logits(tape, logits.local[h], Matrix<T>::column(std::move(level))));
  }
  terms.insert(terms.begin(), tape_bce_with_logits(tape, logits.global, Matrix<T>::column(std::move(flat))));
  if (cfg.lambda > 0.0) {
    Var probs = tape.activate(Activation::sigmoid, logits.global);
    if (cfg.penalty_target == PenaltyTarget::fused) {
      std::vector<Var> local;
      for (const Var z : logits.local) local.push_back(tape.activate(Activation::sigmoid, z));
      const T beta = static_cast<T>(cfg.beta);
      probs = tape.add(tape.scale(tape.vstack(local), beta), tape.scale(probs, T{1} - beta));
    }
    const Var penalty = tape_hierarchy_penalty(tape, probs, std::span(layout.parents));
    terms.push_back(tape.scale(penalty, static_cast<T>(cfg.lambda)));
  }
  return tape.add_scalars(terms);
}

}  // namespace

ModelLayout make_layout(const Taxonomy& taxonomy, const Vocabulary& vocab) {
  ModelLayout layout;
  layout.parents = taxonomy.parent_indices();
  for (std::size_t h = 1; h <= taxonomy.depth(); ++h) {
    const int level = static_cast<int>(h);
    layout.level_sizes.push_back(taxonomy.level_size(level));
    std::vector<std::vector<std::size_t>> rows;
    for (const auto& id : taxonomy.labels_at_level(level)) {
      std::vector<std::size_t> words;
      for (const auto& w : tokenize(taxonomy.label(id).text)) words.push_back(vocab.index_or_unk(w));
      if (words.empty()) throw Error(ErrorKind::EmptyLabelText, "label '" + id + "'");
      rows.push_back(std::move(words));
    }
    layout.labels.push_back(std::move(rows));
  }
  return layout;
}

EncodedDocument encode_document(const Document& doc, const Taxonomy& taxonomy,
                                const Vocabulary& vocab) {
  EncodedDocument out;
  for (const auto& t : doc.combined_tokens()) out.tokens.push_back(vocab.index_or_unk(t));
  if (out.tokens.empty()) throw Error(ErrorKind::EmptyText, "document '" + doc.id + "' has no tokens");
  for (const auto& kw : doc.keywords) {
    auto rows = keyword_indices(kw, vocab);
    if (!rows.empty()) out.keywords.push_back(std::move(rows));
  }
  if (doc.leaf_labels.empty()) return out;

  Document labelled = doc;
  if (labelled.level_labels.empty()) derive_level_labels(labelled, taxonomy);
  for (std::size_t h = 0; h < taxonomy.depth(); ++h) {
    std::vector<double> target(taxonomy.level_size(static_cast<int>(h + 1)), 0.0);
    for (const auto& id : labelled.level_labels[h]) target[taxonomy.index_in_level(id)] = 1.0;
    out.targets.push_back(std::move(target));
  }
  for (const auto& id : labelled.leaf_labels) out.leaf_indices.push_back(taxonomy.index_in_level(id));
  return out;
}

template <class T>
T document_loss(const ModelParams<T>& params, const EncodedDocument& doc,
                const ModelLayout& layout, const TrainConfig& cfg, std::vector<Matrix<T>>* grads) {
  Tape<T> tape(grads != nullptr);
  const bool train_embeddings = !cfg.freeze_embeddings;
  const BoundModel<T> m = bind(tape, params, train_embeddings);
  std::vector<Var> labels;
  for (const auto& rows : layout.labels) labels.push_back(tape.segment_mean(m.embeddings, rows));
  const HeadLogits logits = forward(tape, m, doc, labels, cfg);
  const Var loss = loss_node(tape, logits, doc, layout, cfg);
  if (grads) {
    tape.backward(loss);
    grads->clear();
    grads->reserve(m.ordered.size());
    for (std::size_t i = 0; i < m.ordered.size(); ++i) {
      if (i == 0 && !train_embeddings) grads->emplace_back();
      else grads->push_back(tape.grad(m.ordered[i]));
    }
  }
  return tape.value(loss)[0];
}

template float document_loss<float>(const ModelParams<float>&, const EncodedDocument&,
                                     const ModelLayout&, const TrainConfig&, std::vector<MatrixF>*);
template double document_loss<double>(const ModelParams<double>&, const EncodedDocument&,
                                      const ModelLayout&, const TrainConfig&, std::vector<MatrixD>*);

Predictor::Predictor(const ModelParams<float>& params, const ModelLayout& layout,
                     const TrainConfig& cfg)
    : params_(&params), cfg_(cfg) {
  Tape<float> tape(false);
  const Var table = tape.reference(params.embeddings);
  for (const auto& rows : layout.labels) label_cache_.push_back(tape.value(tape.segment_mean(table, rows)));
}

Prediction Predictor::operator()(const EncodedDocument& doc) const {
  Tape<float> tape(false);
  const BoundModel<float> m = bind(tape, *params_, false);
  std::vector<Var> labels;
  for (const auto& cached : label_cache_) labels.push_back(tape.reference(cached));
  const HeadLogits logits = forward(tape, m, doc, labels, cfg_);

  Prediction p;
  for (const float z : tape.value(logits.global).data()) p.global.push_back(probability(z));
  for (const Var v : logits.local) {
    std::vector<double> level;
    for (const float z : tape.value(v).data()) level.push_back(probability(z));
    p.local.push_back(std::move(level));
  }
  p.fused = fuse(p.local, p.global, cfg_.beta);
  return p;
}

}  // namespace ahmca
