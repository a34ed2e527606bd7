#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "ahmca/error.hpp"
#include "ahmca/metrics.hpp"
#include "support.hpp"

namespace ahmca {
namespace {

const std::vector<std::string> kAB = {"A", "B"};

TEST(MacroPR, PerfectPredictions) {
  const LabelSets truth = {{"A"}, {"B"}, {"A", "B"}};
  const auto pr = macro_precision_recall(truth, truth, kAB);
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
}

TEST(MacroPR, HandFixture) {
  // A: TP=1, FP=1, FN=0. B: TP=1, FP=0, FN=1.
  const LabelSets pred = {{"A"}, {"A"}, {"B"}, {}};
  const LabelSets truth = {{"A"}, {}, {"B"}, {"B"}};
  const auto pr = macro_precision_recall(pred, truth, kAB);
  EXPECT_EQ(pr.precision, 0.75);
  EXPECT_EQ(pr.recall, 0.75);
  EXPECT_EQ(macro_f1(pr.precision, pr.recall), 0.75);
}

TEST(MacroPR, AbsentClassCountsAsZero) {
  const LabelSets truth = {{"A"}};
  const auto pr = macro_precision_recall(truth, truth, {"A", "B"});
  EXPECT_EQ(pr.precision, 0.5);
  EXPECT_EQ(pr.recall, 0.5);
}

TEST(MacroPR, Errors) {
  EXPECT_THROW(macro_precision_recall({{"Q"}}, {{"A"}}, kAB), Error);
  EXPECT_THROW(macro_precision_recall({{"A"}}, {}, kAB), Error);
}

TEST(MacroF1, Arithmetic) {
  EXPECT_EQ(macro_f1(0.75, 0.75), 0.75);
  EXPECT_NEAR(macro_f1(1.0, 0.5), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(macro_f1(0.0, 0.0), 0.0);
}

TEST(MacroF1Property, Bounds) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform01(), r = rng.uniform01();
    const double f = macro_f1(p, r);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, std::max(p, r) + 1e-15);
  }
}

TEST(PrecisionAtK, Examples) {
  EXPECT_EQ(precision_at_k({{0.9, 0.1, 0.3}}, {{0}}, 1), 1.0);
  EXPECT_NEAR(precision_at_k({{0.9, 0.8, 0.7, 0.6, 0.5, 0.4}}, {{1, 3}}, 5), 0.4, 1e-15);
  EXPECT_NEAR(precision_at_k({{0.9, 0.8, 0.7, 0.1}}, {{2}}, 3), 1.0 / 3.0, 1e-15);
}

TEST(PrecisionAtK, Errors) {
  auto kind = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind([] { precision_at_k({{0.5}}, {{}}, 1); }), ErrorKind::EmptyTruth);
  EXPECT_EQ(kind([] { precision_at_k({{0.5}}, {{0}}, 0); }), ErrorKind::RangeError);
}

TEST(TopK, TiesGoToLowerIndex) {
  EXPECT_EQ(top_k(std::vector<double>{0.5, 0.9, 0.5, 0.9}, 3), (std::vector<std::size_t>{1, 3, 0}));
  EXPECT_EQ(top_k(std::vector<double>{0.1, 0.2}, 5).size(), 2u);
}

// With one true label per document the hit count k * P@k can only grow with k,
// while P@k itself is bounded by 1/k.
TEST(PrecisionAtKProperty, SingleLabelHitsGrowWithK) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> scores(6, std::vector<double>(7));
    std::vector<std::vector<std::size_t>> truth(6);
    for (std::size_t d = 0; d < 6; ++d) {
      for (auto& v : scores[d]) v = rng.uniform01();
      truth[d] = {static_cast<std::size_t>(rng.below(7))};
    }
    for (std::size_t k = 1; k < 7; ++k) {
      const double pk = precision_at_k(scores, truth, k);
      const double next = precision_at_k(scores, truth, k + 1);
      EXPECT_LE(pk * k, next * (k + 1) + 1e-12);
      EXPECT_LE(pk, 1.0 / k + 1e-12);
    }
    EXPECT_NEAR(precision_at_k(scores, truth, 7), 1.0 / 7.0, 1e-15);
  }
}

// A single document whose true label ranks second: P@1 = 0 but P@2 = 0.5.
TEST(PrecisionAtK, CanRiseWithKForSingleLabel) {
  EXPECT_EQ(precision_at_k({{0.9, 0.8, 0.1}}, {{1}}, 1), 0.0);
  EXPECT_EQ(precision_at_k({{0.9, 0.8, 0.1}}, {{1}}, 2), 0.5);
}

TEST(MacroProperty, ClassPermutationInvariance) {
  Rng rng(3);
  const std::vector<std::string> classes = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    LabelSets pred(8), truth(8);
    for (std::size_t d = 0; d < 8; ++d)
      for (const auto& c : classes) {
        if (rng.below(2)) pred[d].push_back(c);
        if (rng.below(2)) truth[d].push_back(c);
      }
    std::vector<std::string> shuffled = classes;
    rng.shuffle(std::span<std::string>(shuffled));
    const auto a = macro_precision_recall(pred, truth, classes);
    const auto b = macro_precision_recall(pred, truth, shuffled);
    EXPECT_NEAR(a.precision, b.precision, 1e-15);
    EXPECT_NEAR(a.recall, b.recall, 1e-15);
  }
}

TEST(ViolationRate, CountsDocumentsWithOrphanedChildren) {
  const std::vector<std::optional<std::size_t>> parents = {std::nullopt, std::nullopt, 0, 0, 1};
  const std::vector<std::vector<double>> scores = {
      {0.9, 0.1, 0.8, 0.1, 0.1},  // consistent
      {0.1, 0.1, 0.8, 0.1, 0.1},  // child without parent
      {0.9, 0.2, 0.1, 0.1, 0.7},  // child without parent
      {0.1, 0.1, 0.1, 0.1, 0.1}};
  EXPECT_EQ(violation_rate(scores, parents), 0.5);
  EXPECT_EQ(violation_rate({}, parents), 0.0);
}

TEST(Report, JsonCarriesTableColumns) {
  MetricsReport r;
  r.macro_p = 0.5;
  r.macro_r = 0.25;
  r.macro_f1 = macro_f1(0.5, 0.25);
  r.p_at_k = {{1, 0.9}, {3, 0.3}, {5, 0.2}};
  r.n_documents = 10;
  r.n_classes = 4;
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"p@1", "p@3", "p@5", "macro_f1@1", "macro_p", "macro_r", "violation_rate",
                          "n_documents", "n_classes"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["p@3"].get<double>(), 0.3);
  EXPECT_EQ(j["p_at_k"]["5"].get<double>(), 0.2);
}

}  // namespace
}  // namespace ahmca
