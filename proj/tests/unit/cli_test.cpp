#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "emfend/cli.hpp"
#include "json.hpp"

namespace emfend::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("emfend_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(path("config.json"))
        << R"({"d":8,"heads":2,"L_max":32,"encoder_layers":1,"vocab_size":1024,"d_visual":8,)"
        << R"("batch_size":16,"max_epochs":2,"patience":1,"lr":0.01,"dropout":0.1,"seed":4})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void make_data(std::size_t n = 60) {
    ASSERT_EQ(run({"synth", "--kind", "entity-mismatch", "--n", std::to_string(n), "--seed", "2",
                   "--d-visual", "8", "--out", path("data.jsonl")})
                  .code,
              kOk);
    ASSERT_EQ(run({"split", "--data", path("data.jsonl"), "--out", path("split.json"), "--seed", "5",
                   "--clusters", "10"})
                  .code,
              kOk);
  }

  Outcome train(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"train",    "--data", path("data.jsonl"), "--split",
                                  path("split.json"), "--config", path("config.json"), "--out", path(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, kOk);
  EXPECT_EQ(run({}).code, kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kUsage);
  EXPECT_EQ(run({"train", "--data", "x"}).code, kUsage);
  EXPECT_EQ(run({"synth", "--out", path("x.jsonl"), "--n", "many"}).code, kUsage);
  EXPECT_EQ(run({"synth", "--out", path("x.jsonl"), "--kind", "nonsense"}).code, kUsage);
}

TEST_F(CliTest, TrainWritesRunDirectory) {
  make_data();
  const Outcome r = train("run");
  ASSERT_EQ(r.code, kOk) << r.err;
  for (const char* f : {"manifest.json", "config.json", "checkpoint.bin", "history.csv", "metrics.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "run" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["split"]["seed"], 5);
  EXPECT_EQ(manifest["data"]["file"], "data.jsonl");
  EXPECT_EQ(manifest["config"]["d"], 8);
  EXPECT_EQ(manifest["run_id"].get<std::string>().size(), 16u);
  const std::string history = slurp(dir_ / "run" / "history.csv");
  EXPECT_EQ(history.rfind("epoch,train_loss,val_acc,val_f1\n", 0), 0u);
}

TEST_F(CliTest, RepeatedTrainingIsByteIdentical) {
  make_data();
  ASSERT_EQ(train("a").code, kOk);
  ASSERT_EQ(train("b").code, kOk);
  for (const char* f : {"manifest.json", "history.csv", "checkpoint.bin", "metrics.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(CliTest, SeedOverrideChangesRunId) {
  make_data();
  ASSERT_EQ(train("a").code, kOk);
  ASSERT_EQ(train("b", {"--seed", "99"}).code, kOk);
  const auto a = nlohmann::json::parse(slurp(dir_ / "a" / "manifest.json"));
  const auto b = nlohmann::json::parse(slurp(dir_ / "b" / "manifest.json"));
  EXPECT_NE(a["run_id"], b["run_id"]);
  EXPECT_EQ(b["config"]["seed"], 99);
}

TEST_F(CliTest, ConsistencyFlagsReachConfig) {
  make_data();
  ASSERT_EQ(train("run", {"--no-clamp", "--consistency-gradient"}).code, kOk);
  const auto config = nlohmann::json::parse(slurp(dir_ / "run" / "config.json"));
  EXPECT_EQ(config["clamp_consistency"], false);
  EXPECT_EQ(config["consistency_gradient"], true);
}

TEST_F(CliTest, PredictAndEvaluateAgree) {
  make_data();
  ASSERT_EQ(train("run").code, kOk);
  const std::string ckpt = path("run/checkpoint.bin");
  ASSERT_EQ(run({"predict", "--checkpoint", ckpt, "--data", path("data.jsonl"), "--out",
                 path("pred.jsonl")})
                .code,
            kOk);
  std::ifstream preds(path("pred.jsonl"));
  std::ifstream data(path("data.jsonl"));
  std::string pl, dl;
  std::size_t n = 0, correct = 0;
  while (std::getline(preds, pl) && std::getline(data, dl)) {
    const auto p = nlohmann::json::parse(pl);
    const auto d = nlohmann::json::parse(dl);
    EXPECT_EQ(p["id"], d["id"]);
    EXPECT_NEAR(p["p_real"].get<double>() + p["p_fake"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(p["label_pred"].get<int>(), p["p_fake"].get<double>() > p["p_real"].get<double>() ? 1 : 0);
    correct += p["label_pred"].get<int>() == d["label"].get<int>();
    ++n;
  }
  EXPECT_EQ(n, 60u);

  const Outcome ev = run({"evaluate", "--checkpoint", ckpt, "--data", path("data.jsonl"), "--out", path("ev")});
  ASSERT_EQ(ev.code, kOk) << ev.err;
  const auto metrics = nlohmann::json::parse(slurp(dir_ / "ev" / "metrics.json"));
  EXPECT_DOUBLE_EQ(metrics["accuracy"].get<double>(), static_cast<double>(correct) / 60.0);
  EXPECT_TRUE(metrics.contains("auc"));
  EXPECT_EQ(slurp(dir_ / "ev" / "roc.csv").rfind("fpr,tpr,threshold\n", 0), 0u);
}

TEST_F(CliTest, EvaluateSubsetRestrictsPosts) {
  make_data();
  ASSERT_EQ(train("run").code, kOk);
  const auto split = nlohmann::json::parse(slurp(dir_ / "split.json"));
  int test_count = 0;
  for (const auto& [id, s] : split["assignment"].items()) test_count += s == "test";
  const Outcome ev = run({"evaluate", "--checkpoint", path("run/checkpoint.bin"), "--data",
                      path("data.jsonl"), "--split", path("split.json"), "--subset", "test", "--out",
                      path("ev")});
  ASSERT_EQ(ev.code, kOk) << ev.err;
  const auto metrics = nlohmann::json::parse(slurp(dir_ / "ev" / "metrics.json"));
  EXPECT_EQ(metrics["tp"].get<int>() + metrics["fp"].get<int>() + metrics["tn"].get<int>() +
                metrics["fn"].get<int>(),
            test_count);
  EXPECT_EQ(run({"evaluate", "--checkpoint", path("run/checkpoint.bin"), "--data", path("data.jsonl"),
                 "--split", path("split.json"), "--subset", "holdout"})
                .code,
            kUsage);
}

TEST_F(CliTest, AblateSingleVariant) {
  make_data();
  const Outcome r = run({"ablate", "--data", path("data.jsonl"), "--split", path("split.json"), "--config",
                     path("config.json"), "--variant", "w/o OCR text", "--out", path("ab")});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("EM-FEND"), std::string::npos);
  EXPECT_NE(r.out.find("w/o OCR text"), std::string::npos);
  const auto table = nlohmann::json::parse(slurp(dir_ / "ab" / "ablation.json"));
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[1]["variant"], "w/o OCR text");
  EXPECT_EQ(run({"ablate", "--data", path("data.jsonl"), "--split", path("split.json"), "--variant",
                 "w/o everything"})
                .code,
            kUsage);
}

TEST_F(CliTest, DataProblemsExitWithTwo) {
  make_data();
  EXPECT_EQ(run({"split", "--data", path("missing.jsonl"), "--out", path("s.json")}).code, kDataError);
  EXPECT_EQ(run({"evaluate", "--checkpoint", path("data.jsonl"), "--data", path("data.jsonl")}).code,
            kDataError);
  std::ofstream(path("bad.json")) << R"({"d":10,"heads":3})";
  EXPECT_EQ(run({"train", "--data", path("data.jsonl"), "--split", path("split.json"), "--config",
                 path("bad.json"), "--out", path("r")})
                .code,
            kDataError);
  std::ofstream(path("broken.jsonl")) << "{not json\n";
  EXPECT_EQ(run({"predict", "--checkpoint", path("x"), "--data", path("broken.jsonl")}).code, kDataError);
}

TEST_F(CliTest, SplitCoversEveryPost) {
  make_data(80);
  const auto split = nlohmann::json::parse(slurp(dir_ / "split.json"));
  EXPECT_EQ(split["assignment"].size(), 80u);
  EXPECT_EQ(split["seed"], 5);
}

}  // namespace
}  // namespace emfend::cli
