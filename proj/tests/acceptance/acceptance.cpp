// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ahmca/attention.hpp"
#include "ahmca/checkpoint.hpp"
#include "ahmca/hmcn.hpp"
#include "ahmca/metrics.hpp"
#include "ahmca/training.hpp"
#include "support.hpp"
#include "tiny_model.hpp"

namespace {

using namespace ahmca;
using namespace ahmca::testing;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct SyntheticRun {
  TrainResult result;
  MetricsReport test;
  double seconds = 0.0;
};

// The synthetic benchmark setup, trained once per lambda and shared by several criteria.
class Benchmark {
 public:
  Benchmark() : data_(generate_synthetic(criterion_spec())),
                split_(split_corpus(data_.corpus, data_.taxonomy, {3, 1, 1}, 7)) {}

  const SyntheticRun& run(double lambda) {
    for (auto& [l, r] : runs_)
      if (l == lambda) return r;
    TrainConfig cfg;
    cfg.lambda = lambda;
    const auto t0 = Clock::now();
    TrainOptions options;
    options.on_epoch = [lambda](const EpochRecord& r) {
      std::fprintf(stderr, "  [lambda=%g] epoch %zu loss %.5f val macro-F1@1 %.4f\n", lambda, r.epoch,
                   r.train_loss, r.val_macro_f1_at_1);
    };
    SyntheticRun run;
    run.result = train(cfg, split_.train, split_.val, data_.taxonomy, data_.embeddings, options);
    run.seconds = seconds_since(t0);
    run.test = evaluate(run.result.checkpoint, split_.test, {1, 3, 5});
    runs_.emplace_back(lambda, std::move(run));
    return runs_.back().second;
  }

  const SyntheticData& data() const { return data_; }
  const Split& split() const { return split_; }

 private:
  SyntheticData data_;
  Split split_;
  std::vector<std::pair<double, SyntheticRun>> runs_;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome synthetic_end_to_end(Benchmark& bench) {
  const SyntheticRun& r = bench.run(0.1);
  const double f1 = r.test.macro_f1;
  const double p1 = r.test.p_at_k.at(1);
  const std::size_t epochs = r.result.history.epochs.size();
  return {f1 >= 0.90 && p1 >= 0.90 && epochs <= 20 && r.seconds <= 600.0,
          fmt("test macro-F1@1 %.4f, P@1 %.4f after %zu epochs (best %zu) in %.1f s", f1, p1, epochs,
              r.result.best_epoch, r.seconds)};
}

Outcome tiny_gradients() {
  const TinyGradResult r = tiny_model_grad_check();
  std::string worst;
  double worst_err = -1.0;
  for (const auto& g : r.report.groups) {
    if (g.max_rel_error > worst_err) {
      worst_err = g.max_rel_error;
      worst = g.name;
    }
  }
  return {r.report.passed && r.report.groups.size() == 19 && r.seconds < 30.0,
          fmt("%zu parameter groups, max relative error %.2e (%s) in %.2f s", r.report.groups.size(),
              worst_err, worst.c_str(), r.seconds)};
}

Outcome attention_oracle() {
  Rng rng(20240301);
  double worst = 0.0;
  const std::pair<Normalization, OracleMode> modes[] = {{Normalization::sum_normalized, OracleMode::sum},
                                                        {Normalization::none, OracleMode::none},
                                                        {Normalization::softmax, OracleMode::softmax}};
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = 1 + rng.below(12), q = 1 + rng.below(10), k = 1 + rng.below(8);
    const EncoderOutput<double> enc{random_matrix(rng, n, k), random_matrix(rng, n, k)};
    const MatrixD context = random_matrix(rng, q, k);
    const auto wf = token_weights(enc.forward, context);
    const auto wb = token_weights(enc.backward, context);
    const auto of = oracle_token_weights(enc.forward, context);
    const auto ob = oracle_token_weights(enc.backward, context);
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max({worst, std::abs(wf[i] - of[i]), std::abs(wb[i] - ob[i])});
    for (const auto& [mode, oracle_mode] : modes) {
      const auto x = level_embedding<double>(enc, wf, wb, mode).x;
      const auto xf = oracle_pool(enc.forward, of, oracle_mode);
      const auto xb = oracle_pool(enc.backward, ob, oracle_mode);
      for (std::size_t j = 0; j < k; ++j)
        worst = std::max({worst, std::abs(x[j] - xf[j]), std::abs(x[k + j] - xb[j])});
    }
  }
  return {worst <= 1e-9, fmt("100 instances x 3 modes, max deviation %.2e", worst)};
}

Outcome metrics_oracle() {
  Rng rng(77);
  int mismatches = 0;
  for (int fixture = 0; fixture < 200; ++fixture) {
    const int classes = 1 + static_cast<int>(rng.below(5));
    const std::size_t docs = 1 + rng.below(20);
    std::vector<std::string> names;
    for (int c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
    std::vector<std::set<int>> pred(docs), truth(docs);
    LabelSets pred_ids(docs), truth_ids(docs);
    std::vector<std::vector<double>> scores(docs);
    std::vector<std::vector<std::size_t>> truth_idx(docs);
    for (std::size_t d = 0; d < docs; ++d) {
      for (int c = 0; c < classes; ++c) {
        if (rng.below(2)) {
          pred[d].insert(c);
          pred_ids[d].push_back(names[c]);
        }
        if (rng.below(3) == 0) {
          truth[d].insert(c);
          truth_ids[d].push_back(names[c]);
          truth_idx[d].push_back(static_cast<std::size_t>(c));
        }
        // Coarse scores so that ties are common.
        scores[d].push_back(static_cast<double>(rng.below(4)) / 4.0);
      }
      if (truth[d].empty()) {
        truth[d].insert(0);
        truth_ids[d].push_back(names[0]);
        truth_idx[d].push_back(0);
      }
    }
    const OracleMetrics o = oracle_macro(pred, truth, classes);
    const PrecisionRecall pr = macro_precision_recall(pred_ids, truth_ids, names);
    if (pr.precision != o.p || pr.recall != o.r || macro_f1(pr.precision, pr.recall) != o.f1) ++mismatches;
    for (int k = 1; k <= classes; ++k) {
      if (precision_at_k(scores, truth_idx, static_cast<std::size_t>(k)) !=
          oracle_precision_at_k(scores, truth, k))
        ++mismatches;
    }
  }
  const LabelSets hand_pred = {{"A"}, {"A"}, {"B"}, {}};
  const LabelSets hand_truth = {{"A"}, {}, {"B"}, {"B"}};
  const PrecisionRecall hand = macro_precision_recall(hand_pred, hand_truth, {"A", "B"});
  const double hand_f1 = macro_f1(hand.precision, hand.recall);
  const bool hand_ok = hand.precision == 0.75 && hand.recall == 0.75 && hand_f1 == 0.75;
  return {mismatches == 0 && hand_ok,
          fmt("200 fixtures, %d mismatches; hand fixture P=%.17g R=%.17g F1=%.17g", mismatches,
              hand.precision, hand.recall, hand_f1)};
}

Outcome fusion_endpoints() {
  Rng rng(15);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> local(1 + rng.below(3));
    std::vector<double> flat;
    for (auto& level : local) {
      level.resize(1 + rng.below(6));
      for (auto& v : level) {
        v = rng.uniform01();
        flat.push_back(v);
      }
    }
    std::vector<double> global(flat.size());
    for (auto& v : global) v = rng.uniform01();
    for (const double beta : {0.0, 0.5, 1.0}) {
      const auto f = fuse(local, global, beta);
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (beta == 0.0 && f[j] != global[j]) ++failures;
        if (beta == 1.0 && f[j] != flat[j]) ++failures;
        if (f[j] < std::min(flat[j], global[j]) - 1e-12 || f[j] > std::max(flat[j], global[j]) + 1e-12)
          ++failures;
      }
    }
  }
  return {failures == 0, fmt("1000 random predictions x 3 betas, %d violations", failures)};
}

Outcome hierarchy_consistency(Benchmark& bench) {
  const double with_penalty = bench.run(0.1).test.violation_rate;
  const double without = bench.run(0.0).test.violation_rate;
  return {with_penalty <= 0.05 && without > with_penalty,
          fmt("test violation rate %.4f at lambda=0.1, %.4f at lambda=0", with_penalty, without)};
}

Outcome rising_history(Benchmark& bench) {
  const History parsed = History::from_csv(bench.run(0.1).result.history.to_csv());
  if (parsed.epochs.size() < 10) {
    return {false, fmt("history stops at epoch %zu", parsed.epochs.size())};
  }
  const double first = parsed.epochs[0].val_macro_f1_at_1;
  const double tenth = parsed.epochs[9].val_macro_f1_at_1;
  return {tenth > first, fmt("val macro-F1@1 %.4f at epoch 1, %.4f at epoch 10", first, tenth)};
}

Outcome determinism(Benchmark& bench) {
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto& s = bench.split();
  const auto& d = bench.data();
  const TrainResult a = train(cfg, s.train, s.val, d.taxonomy, d.embeddings);
  const TrainResult b = train(cfg, s.train, s.val, d.taxonomy, d.embeddings);
  const std::string bytes_a = save_checkpoint(a.checkpoint);
  const std::string bytes_b = save_checkpoint(b.checkpoint);
  const bool same_runs = bytes_a == bytes_b && a.history.to_csv() == b.history.to_csv();

  const Checkpoint loaded = load_checkpoint(bytes_a);
  const bool round_trip = save_checkpoint(loaded) == bytes_a;
  const MetricsReport original = evaluate(a.checkpoint, s.test, {1, 3, 5});
  const MetricsReport reloaded = evaluate(loaded, s.test, {1, 3, 5});
  const bool same_report = original == reloaded && to_json(original) == to_json(reloaded);
  return {same_runs && round_trip && same_report,
          fmt("identical runs %s, bitwise round trip %s, identical report %s (%zu-byte checkpoint)",
              same_runs ? "yes" : "no", round_trip ? "yes" : "no", same_report ? "yes" : "no",
              bytes_a.size())};
}

}  // namespace

int main() {
  Benchmark bench;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"synthetic end-to-end accuracy", [&] { return synthetic_end_to_end(bench); }},
      {"tiny-model gradient correctness", tiny_gradients},
      {"attention oracle equivalence", attention_oracle},
      {"metrics oracle equivalence", metrics_oracle},
      {"fusion endpoints and betweenness", fusion_endpoints},
      {"hierarchy consistency under the penalty", [&] { return hierarchy_consistency(bench); }},
      {"validation macro-F1 rises over epochs", [&] { return rising_history(bench); }},
      {"determinism and persistence", [&] { return determinism(bench); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
