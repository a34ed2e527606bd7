#include <gtest/gtest.h>

#include "ahmca/error.hpp"
#include "ahmca/model.hpp"
#include "tiny_model.hpp"

namespace ahmca {
namespace {

TEST(Vocabulary, IndexAndUnknown) {
  const Vocabulary v({"a", "b"});
  EXPECT_EQ(v.index_or_unk("b"), 1u);
  EXPECT_EQ(v.index_or_unk("zzz"), v.unk_index());
  EXPECT_EQ(v.unk_index(), 2u);
  EXPECT_THROW(Vocabulary({"a", "a"}), Error);
}

TEST(InitCheckpoint, ShapesAndEmbeddings) {
  const EmbeddingTable table = EmbeddingTable::random({"alpha", "beta", "one", "two"}, 4, 1);
  TrainConfig cfg;
  cfg.k = 4;
  cfg.g = 6;
  cfg.d_l = 5;
  const Checkpoint c = init_checkpoint(cfg, testing::ab_taxonomy(), table);
  EXPECT_EQ(c.params.embeddings.rows(), 5u);
  EXPECT_EQ(c.params.embeddings(1, 2), static_cast<float>(table.vectors()(1, 2)));
  EXPECT_EQ(c.params.embeddings(4, 0), static_cast<float>(table.unk()[0]));
  const auto named = c.params.named();
  EXPECT_EQ(named.size(), 1u + 4u + 2u * 2u + 2u + 2u * 4u);
  cfg.k = 5;
  EXPECT_THROW(init_checkpoint(cfg, testing::ab_taxonomy(), table), Error);
}

TEST(EncodeDocument, TargetsFollowLevels) {
  const Taxonomy t = testing::ab_taxonomy();
  Document d;
  d.id = "d";
  d.title_tokens = {"alpha", "new"};
  d.keywords = {"alpha one"};
  d.leaf_labels = {"A2"};
  const Vocabulary v({"alpha", "one"});
  const EncodedDocument e = encode_document(d, t, v);
  EXPECT_EQ(e.tokens, (std::vector<std::size_t>{0, v.unk_index(), 0, 1}));
  ASSERT_EQ(e.keywords.size(), 1u);
  EXPECT_EQ(e.keywords[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(e.targets[0], (std::vector<double>{1, 0}));
  EXPECT_EQ(e.targets[1], (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(e.leaf_indices, std::vector<std::size_t>{1});
}

TEST(DocumentLoss, TinyModelGradientsAllModes) {
  for (const Normalization mode : {Normalization::sum_normalized, Normalization::none, Normalization::softmax}) {
    const auto r = testing::tiny_model_grad_check(mode);
    for (const auto& g : r.report.groups) EXPECT_LT(g.max_rel_error, 1e-3) << to_string(mode) << " " << g.name;
  }
}

TEST(DocumentLoss, FrozenEmbeddingsHaveNoGradient) {
  const auto r = testing::tiny_model_grad_check(Normalization::sum_normalized, true);
  EXPECT_TRUE(r.report.passed);
  for (const auto& g : r.report.groups) EXPECT_NE(g.name, "embeddings");
}

TEST(Predictor, ProbabilitiesInsideUnitInterval) {
  const SynthSpec spec = [] {
    SynthSpec s;
    s.level_sizes = {2, 4};
    s.docs_per_leaf = 2;
    s.embedding_dim = 6;
    return s;
  }();
  const SyntheticData data = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.k = 6;
  cfg.g = 8;
  cfg.d_l = 8;
  const Checkpoint c = init_checkpoint(cfg, data.taxonomy, data.embeddings);
  const Predictor predictor(c.params, make_layout(data.taxonomy, c.vocab), cfg);
  for (const auto& d : data.corpus.documents) {
    const Prediction p = predictor(encode_document(d, data.taxonomy, c.vocab));
    ASSERT_EQ(p.global.size(), 6u);
    ASSERT_EQ(p.local.size(), 2u);
    EXPECT_EQ(p.local[1].size(), 4u);
    for (const auto* v : {&p.global, &p.fused, &p.local[0], &p.local[1]})
      for (double x : *v) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
      }
    for (std::size_t j = 0; j < 6; ++j) {
      const double flat = j < 2 ? p.local[0][j] : p.local[1][j - 2];
      EXPECT_NEAR(p.fused[j], 0.5 * flat + 0.5 * p.global[j], 1e-6);
    }
  }
}

}  // namespace
}  // namespace ahmca
