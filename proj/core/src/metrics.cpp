#include "ahmca/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "ahmca/error.hpp"
#include <nlohmann/json.hpp>

namespace ahmca {

PrecisionRecall macro_precision_recall(const LabelSets& predicted, const LabelSets& truth,
                                       const std::vector<std::string>& classes) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::DimMismatch, std::to_string(predicted.size()) + " predictions for " +
                                            std::to_string(truth.size()) + " documents");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index.emplace(classes[i], i);
  auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw Error(ErrorKind::UnknownLabel, "'" + label + "' is not a class");
    return it->second;
  };

  const std::size_t n = classes.size();
  std::vector<std::size_t> tp(n), fp(n), fn(n);
  std::vector<char> in_pred(n), in_true(n);
  for (std::size_t d = 0; d < truth.size(); ++d) {
    std::fill(in_pred.begin(), in_pred.end(), 0);
    std::fill(in_true.begin(), in_true.end(), 0);
    for (const auto& l : predicted[d]) in_pred[lookup(l)] = 1;
    for (const auto& l : truth[d]) in_true[lookup(l)] = 1;
    for (std::size_t c = 0; c < n; ++c) {
      if (in_pred[c] && in_true[c]) ++tp[c];
      else if (in_pred[c]) ++fp[c];
      else if (in_true[c]) ++fn[c];
    }
  }

  PrecisionRecall out;
  if (n == 0) return out;
  for (std::size_t c = 0; c < n; ++c) {
    if (tp[c] + fp[c] > 0) out.precision += static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    if (tp[c] + fn[c] > 0) out.recall += static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
  }
  out.precision /= static_cast<double>(n);
  out.recall /= static_cast<double>(n);
  return out;
}

double macro_f1(double precision, double recall) {
  const double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  order.resize(k);
  return order;
}

double precision_at_k(const std::vector<std::vector<double>>& scores,
                      const std::vector<std::vector<std::size_t>>& truth, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::RangeError, "k must be at least 1");
  if (scores.size() != truth.size()) {
    throw Error(ErrorKind::DimMismatch, std::to_string(scores.size()) + " score vectors for " +
                                            std::to_string(truth.size()) + " documents");
  }
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (truth[d].empty()) {
      throw Error(ErrorKind::EmptyTruth, "document " + std::to_string(d) + " has no leaf labels");
    }
    std::size_t hits = 0;
    for (const std::size_t j : top_k(scores[d], k)) {
      if (std::find(truth[d].begin(), truth[d].end(), j) != truth[d].end()) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(scores.size());
}

double violation_rate(const std::vector<std::vector<double>>& scores,
                      std::span<const std::optional<std::size_t>> parents, double threshold) {
  if (scores.empty()) return 0.0;
  std::size_t violating = 0;
  for (const auto& s : scores) {
    if (s.size() != parents.size()) {
      throw Error(ErrorKind::DimMismatch, "violation_rate: score length " + std::to_string(s.size()) +
                                              " vs " + std::to_string(parents.size()) + " labels");
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= threshold && parents[j] && s[*parents[j]] < threshold) {
        ++violating;
        break;
      }
    }
  }
  return static_cast<double>(violating) / static_cast<double>(scores.size());
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["macro_p"] = report.macro_p;
  j["macro_r"] = report.macro_r;
  j["macro_f1"] = report.macro_f1;
  j["macro_f1@1"] = report.macro_f1;
  nlohmann::ordered_json pk = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.p_at_k) {
    pk[std::to_string(k)] = v;
    j["p@" + std::to_string(k)] = v;
  }
  j["p_at_k"] = pk;
  j["violation_rate"] = report.violation_rate;
  j["n_documents"] = report.n_documents;
  j["n_classes"] = report.n_classes;
  return j.dump(2);
}

}  // namespace ahmca
