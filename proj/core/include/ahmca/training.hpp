#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ahmca/checkpoint.hpp"
#include "ahmca/config.hpp"
#include "ahmca/corpus.hpp"
#include "ahmca/embedding.hpp"
#include "ahmca/metrics.hpp"
#include "ahmca/model.hpp"

namespace ahmca {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1_at_1 = 0.0;
  double val_p_at_1 = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// One record per completed epoch, numbered 1..E.
struct History {
  std::vector<EpochRecord> epochs;

  /// Header "epoch,train_loss,val_macro_f1_at_1,val_p_at_1", values with 17
  /// significant digits.
  std::string to_csv() const;
  static History from_csv(std::string_view text);

  friend bool operator==(const History&, const History&) = default;
};

struct TrainOptions {
  /// Worker threads for per-example gradients inside a batch. Results do
  /// not depend on this value.
  std::size_t threads = 1;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  Checkpoint checkpoint;  // parameters of the best validation epoch
  History history;
  std::size_t best_epoch = 0;
};

/// Adam on mini-batches of per-example gradients, with early stopping on
/// validation macro-F1@1. With an empty validation corpus the last epoch is
/// kept. Throws ConfigInvalid, DimMismatch, TaxonomyMismatch, EmptyInput or
/// NonFiniteLoss.
TrainResult train(const TrainConfig& cfg, const Corpus& train_data, const Corpus& val_data,
                  const Taxonomy& taxonomy, const EmbeddingTable& embeddings,
                  const TrainOptions& options = {});

/// P@k for each k, macro P/R/F1 with top-1 leaf assignment and the violation
/// rate of P_F thresholded at 0.5. A k above the leaf count is clamped and a
/// warning appended to `warnings`. Throws TaxonomyMismatch.
MetricsReport evaluate(const Checkpoint& ckpt, const Corpus& data, std::vector<std::size_t> ks,
                       std::vector<std::string>* warnings = nullptr);

struct DecodedPrediction {
  std::string id;
  Prediction scores;
  /// Leaf labels by P_F, highest first, ties in label order.
  std::vector<std::pair<std::string, double>> top;
  /// Labels with P_F >= threshold, one list per level, taxonomy order.
  std::vector<std::vector<std::string>> levels;
};

/// Throws EmptyText for a document without tokens.
DecodedPrediction predict(const Checkpoint& ckpt, const Document& doc, std::size_t top_n,
                          double threshold = 0.5, bool enforce_consistency = true);

/// Decodes every document of `data`; TaxonomyMismatch if it is bound to
/// another taxonomy.
std::vector<DecodedPrediction> predict(const Checkpoint& ckpt, const Corpus& data,
                                       std::size_t top_n, double threshold = 0.5,
                                       bool enforce_consistency = true);

}  // namespace ahmca
