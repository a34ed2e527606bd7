#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ahmca {

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

using LabelSets = std::vector<std::vector<std::string>>;

/// Macro averages over `classes` of per-class TP/(TP+FP) and TP/(TP+FN).
/// A class with an empty denominator contributes 0. Throws UnknownLabel for
/// labels outside `classes` and DimMismatch when the document counts differ.
PrecisionRecall macro_precision_recall(const LabelSets& predicted, const LabelSets& truth,
                                       const std::vector<std::string>& classes);

/// 2PR / (P + R), or 0 when P + R = 0.
double macro_f1(double precision, double recall);

/// Indices of the k highest scores; equal scores keep index order.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

/// Mean over documents of |top_k(scores) & truth| / k. `truth` holds score
/// indices. Throws EmptyTruth for a document without labels.
double precision_at_k(const std::vector<std::vector<double>>& scores,
                      const std::vector<std::vector<std::size_t>>& truth, std::size_t k);

/// Fraction of documents whose thresholded scores contain a label whose
/// parent is not also present. parents[j] is the index of j's parent.
double violation_rate(const std::vector<std::vector<double>>& scores,
                      std::span<const std::optional<std::size_t>> parents, double threshold = 0.5);

struct MetricsReport {
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;
  std::map<std::size_t, double> p_at_k;
  double violation_rate = 0.0;
  std::size_t n_documents = 0;
  std::size_t n_classes = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// JSON object with the field names above; p_at_k is an object keyed by k.
/// The shorthand keys "p@k" and "macro_f1@1" are added alongside.
std::string to_json(const MetricsReport& report);

}  // namespace ahmca
