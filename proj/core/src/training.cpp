#include "ahmca/training.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

namespace ahmca {

std::string History::to_csv() const {
  std::string out = "epoch,train_loss,val_macro_f1_at_1,val_p_at_1\n";
  char line[160];
  for (const auto& r : epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss,
                  r.val_macro_f1_at_1, r.val_p_at_1);
    out += line;
  }
  return out;
}

History History::from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_macro_f1_at_1,val_p_at_1") {
    throw Error(ErrorKind::MalformedHeader, "history CSV header");
  }
  History h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochRecord r;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &r.epoch, &r.train_loss, &r.val_macro_f1_at_1,
                    &r.val_p_at_1) != 4) {
      throw Error(ErrorKind::RowArity, "history row '" + line + "'");
    }
    h.epochs.push_back(r);
  }
  return h;
}

namespace {

std::vector<EncodedDocument> encode_all(const Corpus& data, const Taxonomy& taxonomy,
                                        const Vocabulary& vocab, bool require_labels) {
  std::vector<EncodedDocument> out;
  out.reserve(data.size());
  for (const auto& doc : data.documents) {
    out.push_back(encode_document(doc, taxonomy, vocab));
    if (require_labels && out.back().targets.empty()) {
      throw Error(ErrorKind::MalformedRecord, "document '" + doc.id + "' has no labels");
    }
  }
  return out;
}

void require_bound(const Corpus& data, const Taxonomy& taxonomy, std::string_view what) {
  if (data.taxonomy_hash != taxonomy.hash()) {
    throw Error(ErrorKind::TaxonomyMismatch, std::string(what) + " corpus is bound to taxonomy " +
                                                 data.taxonomy_hash + ", expected " + taxonomy.hash());
  }
}

std::vector<double> leaf_slice(const std::vector<double>& fused, std::size_t offset) {
  return {fused.begin() + static_cast<std::ptrdiff_t>(offset), fused.end()};
}

/// Scores every document once and derives all requested metrics.
MetricsReport score(const Predictor& predictor, const Taxonomy& taxonomy,
                    const std::vector<EncodedDocument>& docs, const std::vector<std::size_t>& ks) {
  const std::size_t depth = taxonomy.depth();
  const std::size_t offset = taxonomy.level_offset(static_cast<int>(depth));
  const auto& leaves = taxonomy.leaves();

  std::vector<std::vector<double>> fused;
  std::vector<std::vector<double>> leaf_scores;
  std::vector<std::vector<std::size_t>> truth;
  LabelSets predicted;
  LabelSets truth_ids;
  for (const auto& doc : docs) {
    Prediction p = predictor(doc);
    leaf_scores.push_back(leaf_slice(p.fused, offset));
    fused.push_back(std::move(p.fused));
    truth.push_back(doc.leaf_indices);
    predicted.push_back({leaves[top_k(leaf_scores.back(), 1).front()]});
    std::vector<std::string> ids;
    for (const std::size_t j : doc.leaf_indices) ids.push_back(leaves[j]);
    truth_ids.push_back(std::move(ids));
  }

  MetricsReport r;
  r.n_documents = docs.size();
  r.n_classes = leaves.size();
  if (docs.empty()) return r;
  const PrecisionRecall pr = macro_precision_recall(predicted, truth_ids, leaves);
  r.macro_p = pr.precision;
  r.macro_r = pr.recall;
  r.macro_f1 = macro_f1(pr.precision, pr.recall);
  for (const std::size_t k : ks) r.p_at_k[k] = precision_at_k(leaf_scores, truth, k);
  r.violation_rate = violation_rate(fused, taxonomy.parent_indices(), 0.5);
  return r;
}

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<MatrixF> m;
  std::vector<MatrixF> v;

  void update(std::vector<std::pair<std::string, MatrixF*>>& params, const std::vector<MatrixF>& grads) {
    if (m.empty()) {
      for (const auto& g : grads) {
        m.emplace_back(g.rows(), g.cols());
        v.emplace_back(g.rows(), g.cols());
      }
    }
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const auto b1 = static_cast<float>(beta1);
    const auto b2 = static_cast<float>(beta2);
    const auto step_size = static_cast<float>(lr / c1);
    const auto inv_c2 = static_cast<float>(1.0 / c2);
    const auto e = static_cast<float>(eps);
    for (std::size_t i = 0; i < grads.size(); ++i) {
      const MatrixF& g = grads[i];
      if (g.empty()) continue;
      MatrixF& p = *params[i].second;
      for (std::size_t j = 0; j < g.size(); ++j) {
        m[i][j] = b1 * m[i][j] + (1.0f - b1) * g[j];
        v[i][j] = b2 * v[i][j] + (1.0f - b2) * g[j] * g[j];
        p[j] -= step_size * m[i][j] / (std::sqrt(v[i][j] * inv_c2) + e);
      }
    }
  }
};

struct ExampleResult {
  float loss = 0.0f;
  std::vector<MatrixF> grads;
  std::exception_ptr error;
};

void run_examples(const ModelParams<float>& params, const std::vector<EncodedDocument>& docs,
                  std::span<const std::size_t> batch, const ModelLayout& layout,
                  const TrainConfig& cfg, std::size_t threads, std::vector<ExampleResult>& out) {
  out.assign(batch.size(), {});
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < batch.size(); i += stride) {
      try {
        out[i].loss = document_loss(params, docs[batch[i]], layout, cfg, &out[i].grads);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(threads, batch.size());
  if (n <= 1) {
    work(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
  for (auto& th : pool) th.join();
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Corpus& train_data, const Corpus& val_data,
                  const Taxonomy& taxonomy, const EmbeddingTable& embeddings,
                  const TrainOptions& options) {
  validate(cfg);
  require_bound(train_data, taxonomy, "training");
  if (val_data.size() > 0) require_bound(val_data, taxonomy, "validation");
  if (train_data.size() == 0) throw Error(ErrorKind::EmptyInput, "training corpus is empty");

  Checkpoint ckpt = init_checkpoint(cfg, taxonomy, embeddings);
  const ModelLayout layout = make_layout(taxonomy, ckpt.vocab);
  const auto train_docs = encode_all(train_data, taxonomy, ckpt.vocab, true);
  const auto val_docs = encode_all(val_data, taxonomy, ckpt.vocab, true);

  TrainResult result;
  ModelParams<float> best = ckpt.params;
  double best_f1 = -1.0;
  std::size_t since_best = 0;

  Adam adam;
  adam.lr = cfg.learning_rate;
  Rng order_rng(cfg.seed ^ 0xA5A5A5A55A5A5A5AULL);
  std::vector<std::size_t> order(train_docs.size());
  std::vector<ExampleResult> examples;
  std::vector<MatrixF> batch_grad;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, count);
      run_examples(ckpt.params, train_docs, batch, layout, cfg, options.threads, examples);

      // Reduce in example order so the sum does not depend on scheduling.
      for (std::size_t i = 0; i < count; ++i) {
        const std::string& id = train_data.documents[batch[i]].id;
        if (examples[i].error) {
          try {
            std::rethrow_exception(examples[i].error);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonFinite) throw;
            throw Error(ErrorKind::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", document '" +
                                                      id + "': " + e.what());
          }
        }
        if (!std::isfinite(examples[i].loss)) {
          throw Error(ErrorKind::NonFiniteLoss,
                      "epoch " + std::to_string(epoch) + ", document '" + id + "': loss is not finite");
        }
        loss_sum += examples[i].loss;
        if (i == 0) {
          batch_grad = std::move(examples[0].grads);
          continue;
        }
        for (std::size_t p = 0; p < batch_grad.size(); ++p) {
          const MatrixF& g = examples[i].grads[p];
          for (std::size_t j = 0; j < g.size(); ++j) batch_grad[p][j] += g[j];
        }
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (auto& g : batch_grad) {
        for (auto& x : g.data()) x *= inv;
      }
      auto named = ckpt.params.named();
      adam.update(named, batch_grad);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_docs.size());
    if (!val_docs.empty()) {
      const Predictor predictor(ckpt.params, layout, cfg);
      const MetricsReport r = score(predictor, taxonomy, val_docs, {1});
      rec.val_macro_f1_at_1 = r.macro_f1;
      rec.val_p_at_1 = r.p_at_k.at(1);
    }
    result.history.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    if (val_docs.empty() || rec.val_macro_f1_at_1 > best_f1) {
      best_f1 = rec.val_macro_f1_at_1;
      best = ckpt.params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
      break;
    }
  }

  ckpt.params = std::move(best);
  result.checkpoint = std::move(ckpt);
  return result;
}

MetricsReport evaluate(const Checkpoint& ckpt, const Corpus& data, std::vector<std::size_t> ks,
                       std::vector<std::string>* warnings) {
  require_taxonomy(ckpt, data.taxonomy_hash);
  const std::size_t leaves = ckpt.taxonomy.leaves().size();
  for (auto& k : ks) {
    if (k == 0) throw Error(ErrorKind::RangeError, "k must be at least 1");
    if (k > leaves) {
      if (warnings) {
        warnings->push_back("k=" + std::to_string(k) + " exceeds the " + std::to_string(leaves) +
                            " leaf labels; clamped to " + std::to_string(leaves));
      }
      k = leaves;
    }
  }
  const ModelLayout layout = make_layout(ckpt.taxonomy, ckpt.vocab);
  const auto docs = encode_all(data, ckpt.taxonomy, ckpt.vocab, true);
  const Predictor predictor(ckpt.params, layout, ckpt.config);
  return score(predictor, ckpt.taxonomy, docs, ks);
}

namespace {

DecodedPrediction decode(const Checkpoint& ckpt, const Predictor& predictor, const Document& doc,
                         std::size_t top_n, double threshold, bool enforce) {
  const Taxonomy& t = ckpt.taxonomy;
  DecodedPrediction out;
  out.id = doc.id;
  out.scores = predictor(encode_document(doc, t, ckpt.vocab));

  const std::size_t depth = t.depth();
  const std::size_t offset = t.level_offset(static_cast<int>(depth));
  const auto leaf_scores = leaf_slice(out.scores.fused, offset);
  const auto& leaves = t.leaves();
  for (const std::size_t j : top_k(leaf_scores, top_n)) out.top.emplace_back(leaves[j], leaf_scores[j]);

  std::vector<char> kept(t.total_classes(), 0);
  const auto parents = t.parent_indices();
  for (std::size_t h = 1; h <= depth; ++h) {
    std::vector<std::string> level;
    const std::size_t base = t.level_offset(static_cast<int>(h));
    const auto& ids = t.labels_at_level(static_cast<int>(h));
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const std::size_t g = base + j;
      if (out.scores.fused[g] < threshold) continue;
      if (enforce && parents[g] && !kept[*parents[g]]) continue;
      kept[g] = 1;
      level.push_back(ids[j]);
    }
    out.levels.push_back(std::move(level));
  }
  return out;
}

}  // namespace

DecodedPrediction predict(const Checkpoint& ckpt, const Document& doc, std::size_t top_n,
                          double threshold, bool enforce_consistency) {
  const ModelLayout layout = make_layout(ckpt.taxonomy, ckpt.vocab);
  const Predictor predictor(ckpt.params, layout, ckpt.config);
  return decode(ckpt, predictor, doc, top_n, threshold, enforce_consistency);
}

std::vector<DecodedPrediction> predict(const Checkpoint& ckpt, const Corpus& data,
                                       std::size_t top_n, double threshold,
                                       bool enforce_consistency) {
  require_taxonomy(ckpt, data.taxonomy_hash);
  const ModelLayout layout = make_layout(ckpt.taxonomy, ckpt.vocab);
  const Predictor predictor(ckpt.params, layout, ckpt.config);
  std::vector<DecodedPrediction> out;
  out.reserve(data.size());
  for (const auto& doc : data.documents) {
    out.push_back(decode(ckpt, predictor, doc, top_n, threshold, enforce_consistency));
  }
  return out;
}

}  // namespace ahmca
