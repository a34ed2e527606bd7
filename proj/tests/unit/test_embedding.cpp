#include <gtest/gtest.h>

#include "ahmca/embedding.hpp"
#include "ahmca/error.hpp"
#include "support.hpp"

namespace ahmca {
namespace {

ErrorKind load_error(std::string_view text) {
  try {
    load_embeddings(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

TEST(LoadEmbeddings, ParsesWord2VecText) {
  const EmbeddingTable t = load_embeddings("3 4\ncat 1 2 3 4\ndog 0 0 0 1\nfish -1 0.5 2 3\n");
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.dim(), 4u);
  EXPECT_EQ(t.lookup("dog")[3], 1.0);
  EXPECT_TRUE(t.frozen());
}

TEST(LoadEmbeddings, Errors) {
  EXPECT_EQ(load_error("1 4\ncat 1 2 3\n"), ErrorKind::RowArity);
  EXPECT_EQ(load_error("2 1\ncat 1\ncat 2\n"), ErrorKind::DuplicateToken);
  EXPECT_EQ(load_error("two 4\n"), ErrorKind::MalformedHeader);
  EXPECT_EQ(load_error(""), ErrorKind::MalformedHeader);
  EXPECT_EQ(load_error("3 1\na 1\nb 2\n"), ErrorKind::CountMismatch);
  EXPECT_EQ(load_error("1 1\na x\n"), ErrorKind::RowArity);
}

TEST(LoadEmbeddings, WriteRoundTripIsExact) {
  const EmbeddingTable t = EmbeddingTable::random({"a", "b", "c"}, 5, 3);
  const EmbeddingTable back = load_embeddings(write_embeddings(t));
  EXPECT_EQ(back.tokens(), t.tokens());
  EXPECT_EQ(back.vectors(), t.vectors());
}

TEST(EmbedSequence, KnownAndUnknownTokens) {
  const EmbeddingTable t = load_embeddings("2 2\nx 1 0\ny 0 3\n");
  const std::vector<std::string> toks = {"x", "y", "zzz"};
  const MatrixD m = embed_sequence(toks, t);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m(0, 0), 1.0);
  EXPECT_EQ(m(1, 1), 3.0);
  // The shared unknown vector is the vocabulary mean.
  EXPECT_EQ(m(2, 0), 0.5);
  EXPECT_EQ(m(2, 1), 1.5);
  EXPECT_THROW(embed_sequence(std::vector<std::string>{}, t), Error);
}

TEST(EmbedSequenceProperty, LookupIsTotal) {
  const EmbeddingTable t = EmbeddingTable::random({"a", "b"}, 3, 1);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> toks;
    for (std::size_t n = 0; n <= rng.below(6); ++n) toks.push_back("t" + std::to_string(rng.below(5)));
    EXPECT_NO_THROW(embed_sequence(toks, t));
  }
}

TEST(EmbeddingProperty, RowOrderDoesNotMatter) {
  const std::string a = "3 2\np 1 2\nq 3 4\nr 5 6\n";
  const std::string b = "3 2\nr 5 6\np 1 2\nq 3 4\n";
  const EmbeddingTable ta = load_embeddings(a), tb = load_embeddings(b);
  for (const char* tok : {"p", "q", "r", "missing"}) {
    const auto va = ta.lookup(tok), vb = tb.lookup(tok);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(va[j], vb[j], 1e-15) << tok;
  }
}

TEST(LabelMatrices, SingleAndMultiWordLabels) {
  const Taxonomy tax = Taxonomy::from_labels(
      {testing::make_label("L", 1, std::nullopt, "learning"),
       testing::make_label("M", 1, std::nullopt, "machine learning"),
       testing::make_label("N", 1, std::nullopt, "machine")});
  const EmbeddingTable t = load_embeddings("2 2\nmachine 1 0\nlearning 0 1\n");
  const LabelMatrices m = build_label_matrices(tax, t);
  ASSERT_EQ(m.levels.size(), 1u);
  ASSERT_EQ(m.levels[0].rows(), 3u);
  EXPECT_EQ(m.levels[0](0, 0), 0.0);
  EXPECT_EQ(m.levels[0](0, 1), 1.0);
  EXPECT_EQ(m.levels[0](1, 0), 0.5);
  EXPECT_EQ(m.levels[0](1, 1), 0.5);
  EXPECT_EQ(m.levels[0](2, 0), 1.0);
}

TEST(LabelMatricesProperty, MultiWordRowIsMeanOfWords) {
  Rng rng(6);
  std::vector<std::string> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
  const EmbeddingTable t = EmbeddingTable::random(words, 6, 9);
  std::vector<Label> labels;
  std::vector<std::vector<std::string>> texts;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> ws;
    std::string text;
    for (std::size_t n = 0; n <= rng.below(4); ++n) {
      ws.push_back(words[rng.below(words.size())]);
      text += (text.empty() ? "" : " ") + ws.back();
    }
    labels.push_back(testing::make_label("l" + std::to_string(i), 1, std::nullopt, text));
    texts.push_back(ws);
  }
  const LabelMatrices m = build_label_matrices(Taxonomy::from_labels(labels), t);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double mean = 0.0;
      for (const auto& w : texts[i]) mean += t.lookup(w)[j];
      mean /= static_cast<double>(texts[i].size());
      EXPECT_NEAR(m.levels[0](i, j), mean, 1e-12);
    }
  }
}

TEST(LabelMatrices, LevelOrderRows) {
  const EmbeddingTable t = EmbeddingTable::random({"alpha", "beta", "one", "two"}, 3, 1);
  const LabelMatrices m = build_label_matrices(testing::ab_taxonomy(), t);
  ASSERT_EQ(m.levels.size(), 2u);
  EXPECT_EQ(m.levels[1].rows(), 3u);
  EXPECT_EQ(m.levels[0].row(1)[0], t.lookup("beta")[0]);
}

}  // namespace
}  // namespace ahmca
