#include <benchmark/benchmark.h>

#include "ahmca/attention.hpp"
#include "ahmca/corpus.hpp"
#include "ahmca/encoder.hpp"
#include "ahmca/model.hpp"
#include "ahmca/random.hpp"

namespace {

using namespace ahmca;

MatrixF random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  MatrixF m(rows, cols);
  for (auto& v : m.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const MatrixF a = random_matrix(rng, n, n), b = random_matrix(rng, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(384);

void BM_BiLstmEncode(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto params = init_lstm<float>(64, rng);
  const MatrixF x = random_matrix(rng, tokens, 64);
  for (auto _ : state) benchmark::DoNotOptimize(bilstm_encode(x, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_BiLstmEncode)->Arg(16)->Arg(33)->Arg(128);

void BM_BuildAllLevels(benchmark::State& state) {
  const auto labels = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const EncoderOutput<float> enc{random_matrix(rng, 33, 64), random_matrix(rng, 33, 64)};
  const std::vector<LevelContext<float>> ctx = {
      splice_level(1, random_matrix(rng, labels / 4, 64), random_matrix(rng, 3, 64)),
      splice_level(2, random_matrix(rng, labels, 64), random_matrix(rng, 3, 64))};
  for (auto _ : state) benchmark::DoNotOptimize(build_all_levels(enc, ctx));
}
BENCHMARK(BM_BuildAllLevels)->Arg(16)->Arg(248);

struct ModelFixture {
  SyntheticData data;
  TrainConfig cfg;
  Checkpoint ckpt;
  ModelLayout layout;
  EncodedDocument doc;

  ModelFixture() {
    SynthSpec spec;
    spec.level_sizes = {4, 16};
    spec.docs_per_leaf = 2;
    spec.seed = 7;
    data = generate_synthetic(spec);
    ckpt = init_checkpoint(cfg, data.taxonomy, data.embeddings);
    layout = make_layout(data.taxonomy, ckpt.vocab);
    doc = encode_document(data.corpus.documents.front(), data.taxonomy, ckpt.vocab);
  }
};

// One training example: forward pass, loss and full reverse pass at default sizes.
void BM_DocumentLossAndGradient(benchmark::State& state) {
  const ModelFixture f;
  std::vector<MatrixF> grads;
  for (auto _ : state) benchmark::DoNotOptimize(document_loss(f.ckpt.params, f.doc, f.layout, f.cfg, &grads));
}
BENCHMARK(BM_DocumentLossAndGradient)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const ModelFixture f;
  const Predictor predictor(f.ckpt.params, f.layout, f.cfg);
  for (auto _ : state) benchmark::DoNotOptimize(predictor(f.doc));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
