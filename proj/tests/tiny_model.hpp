#pragma once

// The smallest complete model: k=4, a five-token document, two levels with two
// labels each and g = d_l = 8, evaluated in double precision.

#include <chrono>

#include "ahmca/grad_check.hpp"
#include "ahmca/model.hpp"
#include "support.hpp"

namespace ahmca::testing {

struct TinyGradResult {
  GradReport report;
  double seconds = 0.0;
};

inline TinyGradResult tiny_model_grad_check(Normalization mode = Normalization::sum_normalized,
                                            bool freeze_embeddings = false, double lambda = 0.1,
                                            std::uint64_t seed = 17) {
  const Taxonomy tax = Taxonomy::from_labels({make_label("P", 1, std::nullopt, "red"),
                                              make_label("Q", 1, std::nullopt, "blue"),
                                              make_label("P1", 2, "P", "red apple"),
                                              make_label("Q1", 2, "Q", "blue sky")});
  const EmbeddingTable table =
      EmbeddingTable::random({"red", "blue", "apple", "sky", "tree", "sun"}, 4, seed);

  TrainConfig cfg;
  cfg.k = 4;
  cfg.g = 8;
  cfg.d_l = 8;
  cfg.lambda = lambda;
  cfg.attention_mode = mode;
  cfg.freeze_embeddings = freeze_embeddings;
  cfg.seed = seed;
  const Checkpoint ckpt = init_checkpoint(cfg, tax, table);

  Document doc;
  doc.id = "tiny";
  doc.title_tokens = {"red", "tree"};
  doc.abstract_tokens = {"apple", "sun"};
  doc.keywords = {"apple"};
  doc.leaf_labels = {"P1"};
  derive_level_labels(doc, tax);
  const EncodedDocument enc = encode_document(doc, tax, ckpt.vocab);

  const ModelLayout layout = make_layout(tax, ckpt.vocab);
  ModelParams<double> params = ckpt.params.cast<double>();
  // Push the classifier weights away from zero so that every relu unit carries signal.
  Rng rng(seed + 1);
  for (auto& [name, m] : params.named()) {
    if (name == "embeddings") continue;
    for (auto& v : m->data()) v += rng.uniform(-0.3, 0.3);
  }

  GradProblem problem;
  for (auto& [name, m] : params.named()) {
    if (name == "embeddings" && freeze_embeddings) continue;
    problem.groups.push_back({name, m});
  }
  problem.loss = [&] { return document_loss(params, enc, layout, cfg); };
  problem.gradient = [&] {
    std::vector<MatrixD> grads;
    document_loss(params, enc, layout, cfg, &grads);
    if (freeze_embeddings) grads.erase(grads.begin());
    return grads;
  };
  const auto t0 = std::chrono::steady_clock::now();
  TinyGradResult out;
  out.report = grad_check(problem, 1e-3);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace ahmca::testing
