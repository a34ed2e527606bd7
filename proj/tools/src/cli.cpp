#include "ahmca/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ahmca/checkpoint.hpp"
#include "ahmca/corpus.hpp"
#include "ahmca/training.hpp"

namespace ahmca::cli {

namespace fs = std::filesystem;

TrainConfig load_config(std::string_view json_text) { return config_from_json(json_text); }

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Cycle:
    case ErrorKind::OrphanParent:
    case ErrorKind::LevelGap:
    case ErrorKind::DuplicateId:
    case ErrorKind::LevelOutOfRange:
    case ErrorKind::UnknownLabel:
    case ErrorKind::MalformedTaxonomy:
    case ErrorKind::MalformedRecord:
    case ErrorKind::EmptyText:
    case ErrorKind::EmptyLabelText:
    case ErrorKind::TooFewDocuments:
    case ErrorKind::TaxonomyMismatch:
      return kExitValidation;
    case ErrorKind::SpecInvalid:
    case ErrorKind::MalformedHeader:
    case ErrorKind::RowArity:
    case ErrorKind::DuplicateToken:
    case ErrorKind::CountMismatch:
    case ErrorKind::ConfigInvalid:
    case ErrorKind::UnknownKey:
    case ErrorKind::TypeError:
    case ErrorKind::RangeError:
    case ErrorKind::BadMagic:
    case ErrorKind::VersionMismatch:
    case ErrorKind::CorruptPayload:
    case ErrorKind::DimMismatch:
    case ErrorKind::EmptyInput:
    case ErrorKind::Io:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::RangeError, "--k expects positive integers separated by commas, got '" +
                                             text + "'");
    }
  }
  if (ks.empty()) throw Error(ErrorKind::RangeError, "--k is empty");
  return ks;
}

/// Seeded random vectors for every token the corpora and label texts use.
EmbeddingTable random_embeddings(const Corpus& a, const Corpus& b, const Taxonomy& t,
                                 const TrainConfig& cfg) {
  std::set<std::string> vocab;
  for (const Corpus* c : {&a, &b}) {
    for (const auto& doc : c->documents) {
      for (auto& tok : doc.combined_tokens()) vocab.insert(std::move(tok));
    }
  }
  for (const Label& l : t.labels()) {
    for (auto& tok : tokenize(l.text)) vocab.insert(std::move(tok));
  }
  return EmbeddingTable::random({vocab.begin(), vocab.end()}, cfg.k, cfg.seed);
}

struct TrainArgs {
  std::string config, train, val, taxonomy, embeddings, out, history;
  std::size_t threads = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_config(read_file(a.config));
  const Taxonomy taxonomy = load_taxonomy(read_file(a.taxonomy));
  const Corpus train_data = load_corpus(read_file(a.train), taxonomy);
  const Corpus val_data = load_corpus(read_file(a.val), taxonomy);
  const EmbeddingTable embeddings = a.embeddings.empty()
                                        ? random_embeddings(train_data, val_data, taxonomy, cfg)
                                        : load_embeddings(read_file(a.embeddings));

  TrainOptions options;
  options.threads = std::max<std::size_t>(1, a.threads);
  options.on_epoch = [&](const EpochRecord& r) {
    char line[200];
    std::snprintf(line, sizeof line, "epoch %zu train_loss %.6f val_macro_f1@1 %.4f val_p@1 %.4f",
                  r.epoch, r.train_loss, r.val_macro_f1_at_1, r.val_p_at_1);
    out << line << std::endl;
  };
  const TrainResult result = train(cfg, train_data, val_data, taxonomy, embeddings, options);
  write_file(a.out, save_checkpoint(result.checkpoint));
  if (!a.history.empty()) write_file(a.history, result.history.to_csv());
  out << "best epoch " << result.best_epoch << ", model written to " << a.out << std::endl;
  return kExitOk;
}

struct EvalArgs {
  std::string model, data, taxonomy, report;
  std::string ks = "1,3,5";
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Checkpoint ckpt = load_checkpoint(read_file(a.model));
  const std::vector<std::size_t> ks = parse_ks(a.ks);
  Corpus data;
  if (a.taxonomy.empty()) {
    data = load_corpus(read_file(a.data), ckpt.taxonomy);
  } else {
    data = load_corpus(read_file(a.data), load_taxonomy(read_file(a.taxonomy)));
  }
  std::vector<std::string> warnings;
  const MetricsReport report = evaluate(ckpt, data, ks, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  const std::string json = to_json(report);
  out << json << '\n';
  if (!a.report.empty()) write_file(a.report, json + "\n");
  return kExitOk;
}

struct PredictArgs {
  std::string model, input;
  std::size_t top = 5;
  double threshold = 0.5;
  bool no_consistency = false;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(read_file(a.model));
  const Corpus docs = load_corpus(read_file(a.input), ckpt.taxonomy, /*require_labels=*/false);
  for (const auto& p : predict(ckpt, docs, a.top, a.threshold, !a.no_consistency)) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    nlohmann::ordered_json top = nlohmann::ordered_json::array();
    for (const auto& [label, score] : p.top) top.push_back({{"label", label}, {"score", score}});
    j["top"] = top;
    j["levels"] = p.levels;
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    const auto ordered = ckpt.taxonomy.ordered_labels();
    for (std::size_t i = 0; i < ordered.size(); ++i) scores[ordered[i]->id] = p.scores.fused[i];
    j["scores"] = scores;
    out << j.dump() << '\n';
  }
  return kExitOk;
}

struct SynthArgs {
  std::string spec, out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec = load_synth_spec(read_file(a.spec));
  if (a.seed) spec.seed = *a.seed;
  const SyntheticData data = generate_synthetic(spec);
  const Split split = split_corpus(data.corpus, data.taxonomy, {3, 1, 1}, spec.seed);

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + a.out_dir + "': " + ec.message());
  write_file(dir / "taxonomy.json", serialize_taxonomy(data.taxonomy) + "\n");
  write_file(dir / "corpus.jsonl", write_corpus(data.corpus));
  write_file(dir / "train.jsonl", write_corpus(split.train));
  write_file(dir / "val.jsonl", write_corpus(split.val));
  write_file(dir / "test.jsonl", write_corpus(split.test));
  write_file(dir / "embeddings.txt", write_embeddings(data.embeddings));
  out << "wrote " << data.corpus.size() << " documents (" << split.train.size() << " train, "
      << split.val.size() << " val, " << split.test.size() << " test) to " << a.out_dir << std::endl;
  return kExitOk;
}

int cmd_inspect(const std::string& model, std::ostream& out) {
  const std::string bytes = read_file(model);
  const Checkpoint ckpt = load_checkpoint(bytes);
  out << "format " << kCheckpointMagic << " v" << kCheckpointVersion << '\n';
  out << "config " << config_to_json(ckpt.config) << '\n';
  out << "taxonomy " << ckpt.taxonomy.hash() << " depth " << ckpt.taxonomy.depth() << " labels "
      << ckpt.taxonomy.total_classes() << '\n';
  out << "vocab " << ckpt.vocab.size() << '\n';
  for (const auto& e : checkpoint_manifest(bytes)) {
    out << e.name << ' ' << e.rows << 'x' << e.cols << " @" << e.offset << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical multi-label text classifier", args.empty() ? "ahmca" : args[0]};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--config", train_args.config, "JSON training configuration");
  train_cmd->add_option("--train", train_args.train, "Training corpus (JSON Lines)")->required();
  train_cmd->add_option("--val", train_args.val, "Validation corpus (JSON Lines)")->required();
  train_cmd->add_option("--taxonomy", train_args.taxonomy, "Taxonomy JSON")->required();
  train_cmd->add_option("--embeddings", train_args.embeddings,
                        "word2vec text file; seeded random vectors when absent");
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--history", train_args.history, "Per-epoch history CSV path");
  train_cmd->add_option("--threads", train_args.threads, "Worker threads per batch")
      ->check(CLI::PositiveNumber);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a labelled corpus");
  eval_cmd->add_option("--model", eval_args.model, "Checkpoint path")->required();
  eval_cmd->add_option("--data", eval_args.data, "Corpus (JSON Lines)")->required();
  eval_cmd->add_option("--k", eval_args.ks, "Comma-separated k values for P@k")->capture_default_str();
  eval_cmd->add_option("--taxonomy", eval_args.taxonomy,
                       "Bind the corpus to this taxonomy instead of the model's");
  eval_cmd->add_option("--report", eval_args.report, "Also write the metrics JSON here");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Score unlabelled documents");
  predict_cmd->add_option("--model", predict_args.model, "Checkpoint path")->required();
  predict_cmd->add_option("--input", predict_args.input, "Documents (JSON Lines)")->required();
  predict_cmd->add_option("--top", predict_args.top, "Leaf labels to list")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  predict_cmd->add_option("--threshold", predict_args.threshold, "Per-level score threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  predict_cmd->add_flag("--no-consistency", predict_args.no_consistency,
                        "Keep labels whose parent is below the threshold");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", synth_args.spec, "SynthSpec JSON")->required();
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "Overrides the spec's seed");

  std::string inspect_model;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a checkpoint's manifest");
  inspect_cmd->add_option("--model", inspect_model, "Checkpoint path")->required();

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out, err);
    if (*predict_cmd) return cmd_predict(predict_args, out);
    if (*synth_cmd) return cmd_gen_synth(synth_args, out);
    if (*inspect_cmd) return cmd_inspect(inspect_model, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ahmca::cli
