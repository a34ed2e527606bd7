#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ahmca/cli.hpp"
#include "ahmca/error.hpp"

namespace ahmca {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ahmca");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliWorkspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ahmca_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    spit(dir_ / "spec.json",
         R"({"level_sizes": [2, 4], "docs_per_leaf": 5, "doc_length": 10, "embedding_dim": 8, "seed": 3})");
    spit(dir_ / "config.json",
         R"({"k": 8, "g": 12, "d_l": 12, "epochs": 2, "batch_size": 4, "learning_rate": 0.01})");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST(CliConfig, Defaults) {
  EXPECT_EQ(cli::load_config("{}").beta, 0.5);
  EXPECT_THROW(cli::load_config(R"({"beta": 2.0})"), Error);
}

TEST(CliExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code(ErrorKind::Cycle), cli::kExitValidation);
  EXPECT_EQ(cli::exit_code(ErrorKind::UnknownLabel), cli::kExitValidation);
  EXPECT_EQ(cli::exit_code(ErrorKind::TaxonomyMismatch), cli::kExitValidation);
  EXPECT_EQ(cli::exit_code(ErrorKind::Io), cli::kExitUsage);
  EXPECT_EQ(cli::exit_code(ErrorKind::UnknownKey), cli::kExitUsage);
  EXPECT_EQ(cli::exit_code(ErrorKind::BadMagic), cli::kExitUsage);
  EXPECT_EQ(cli::exit_code(ErrorKind::NonFiniteLoss), cli::kExitInternal);
}

TEST(Cli, UnknownFlagPrintsUsage) {
  const Outcome o = run_cli({"eval", "--frobnicate"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("--model"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run_cli({}).code, 2); }

TEST(Cli, MissingModelFile) {
  const Outcome o = run_cli({"eval", "--model", "/nonexistent/model.bin", "--data", "/nonexistent/x"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("cannot open"), std::string::npos);
}

TEST_F(CliWorkspace, GenerateTrainEvaluatePredictInspect) {
  ASSERT_EQ(run_cli({"gen-synth", "--spec", path("spec.json"), "--out-dir", path("data")}).code, 0);
  for (const char* f : {"taxonomy.json", "corpus.jsonl", "embeddings.txt", "train.jsonl", "val.jsonl", "test.jsonl"})
    EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;

  const Outcome train = run_cli({"train", "--config", path("config.json"), "--train", path("data/train.jsonl"),
                                 "--val", path("data/val.jsonl"), "--taxonomy", path("data/taxonomy.json"),
                                 "--embeddings", path("data/embeddings.txt"), "--out", path("model.bin"),
                                 "--history", path("history.csv")});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("epoch 1 "), std::string::npos);
  EXPECT_NE(train.out.find("epoch 2 "), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "history.csv").substr(0, 5), "epoch");

  const Outcome eval = run_cli({"eval", "--model", path("model.bin"), "--data", path("data/test.jsonl"),
                                "--k", "1,3,5", "--report", path("report.json")});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto report = nlohmann::json::parse(eval.out);
  EXPECT_TRUE(report.contains("p@3"));
  EXPECT_TRUE(report.contains("macro_f1@1"));
  EXPECT_NE(eval.err.find("clamped"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "report.json")), report);

  const Outcome pred = run_cli({"predict", "--model", path("model.bin"), "--input", path("data/test.jsonl"),
                                "--top", "2"});
  ASSERT_EQ(pred.code, 0) << pred.err;
  std::istringstream lines(pred.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["top"].size(), 2u);
    ++n;
  }
  EXPECT_EQ(n, 4u);

  const Outcome inspect = run_cli({"inspect", "--model", path("model.bin")});
  ASSERT_EQ(inspect.code, 0);
  EXPECT_NE(inspect.out.find("lstm.fwd.W 32x16 @"), std::string::npos);
}

TEST_F(CliWorkspace, RerunsProduceIdenticalFiles) {
  ASSERT_EQ(run_cli({"gen-synth", "--spec", path("spec.json"), "--out-dir", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"gen-synth", "--spec", path("spec.json"), "--out-dir", path("b")}).code, 0);
  for (const char* f : {"taxonomy.json", "corpus.jsonl", "train.jsonl", "embeddings.txt"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  for (const char* out : {"m1.bin", "m2.bin"}) {
    ASSERT_EQ(run_cli({"train", "--config", path("config.json"), "--train", path("a/train.jsonl"), "--val",
                       path("a/val.jsonl"), "--taxonomy", path("a/taxonomy.json"), "--out", path(out)})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(dir_ / "m1.bin"), slurp(dir_ / "m2.bin"));
}

TEST_F(CliWorkspace, ValidationFailuresExitThree) {
  ASSERT_EQ(run_cli({"gen-synth", "--spec", path("spec.json"), "--out-dir", path("data")}).code, 0);
  spit(dir_ / "bad_tax.json", R"({"labels": [{"id": "X", "text": "x", "level": 2, "parent": "Y"},
                                             {"id": "Y", "text": "y", "level": 2, "parent": "X"}]})");
  EXPECT_EQ(run_cli({"train", "--train", path("data/train.jsonl"), "--val", path("data/val.jsonl"),
                     "--taxonomy", path("bad_tax.json"), "--out", path("m.bin")})
                .code,
            3);
  spit(dir_ / "bad.jsonl", R"({"id": "q", "title": "w", "abstract": "", "keywords": [], "labels": ["nope"]})");
  EXPECT_EQ(run_cli({"train", "--train", path("bad.jsonl"), "--val", path("data/val.jsonl"), "--taxonomy",
                     path("data/taxonomy.json"), "--out", path("m.bin")})
                .code,
            3);
  EXPECT_FALSE(fs::exists(dir_ / "m.bin"));
}

TEST_F(CliWorkspace, BadConfigIsUsageError) {
  ASSERT_EQ(run_cli({"gen-synth", "--spec", path("spec.json"), "--out-dir", path("data")}).code, 0);
  spit(dir_ / "typo.json", R"({"betta": 0.5})");
  const Outcome o = run_cli({"train", "--config", path("typo.json"), "--train", path("data/train.jsonl"), "--val",
                             path("data/val.jsonl"), "--taxonomy", path("data/taxonomy.json"), "--out",
                             path("m.bin")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("betta"), std::string::npos);
}

}  // namespace
}  // namespace ahmca
