//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stgg/checkpoint.hpp"
#include "stgg/dataset.hpp"
#include "stgg/smiles.hpp"
#include "stgg_cli/cli.hpp"

namespace stgg {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return { code, out.str(), err.str() };
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("stgg_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }
  std::string write(const std::string &name, const std::string &text) const {
    std::ofstream(dir_ / name) << text;
    return path(name);
  }

  /// Synthetic corpus, vocabulary and spec in dir_.
  void corpus(int n) {
    ASSERT_EQ(run({ "gen-synth", "--vocab", STGG_SEED_VOCAB, "--n",
                    std::to_string(n), "--max-len", "24", "--seed", "3",
                    "--out", path("c.smi") })
                  .code,
              0);
    ASSERT_EQ(run({ "build-vocab", "--data", path("c.smi"), "--props",
                    path("c.csv"), "--columns", "molWt,ring_count", "--out",
                    path("v.json") })
                  .code,
              0);
  }

  std::vector<std::string> train_args(const std::string &out) const {
    return { "train",    "--data",    path("c.smi"),      "--props",
             path("c.csv"), "--vocab", path("v.json"),    "--spec",
             path("v.props.json"), "--epochs", "1", "--d-model", "16",
             "--layers", "1", "--heads", "2", "--batch-size", "16", "--out",
             path(out) };
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({ "frobnicate" }).code, cli::kExitUsage);
  EXPECT_EQ(run({ "build-vocab" }).code, cli::kExitUsage);
  EXPECT_EQ(run({ "build-vocab", "--data", "x", "--bogus" }).code,
            cli::kExitUsage);
  const Result h = run({ "train", "--help" });
  EXPECT_EQ(h.code, cli::kExitOk);
  EXPECT_NE(h.out.find("--legacy-arch"), std::string::npos);
  EXPECT_EQ(run({ "sample", "--model", "m", "--vocab", "v", "--w", "1.5",
                  "--w-uniform", "0.5", "2.0" })
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, BuildVocabSalt) {
  const auto smi = write("nacl.smi", "[Na+].[Cl-]\n[Na+].[Cl-]\n");
  const Result r = run({ "build-vocab", "--data", smi, "--out", path("v.json") });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("atom tokens: 2\n"), std::string::npos) << r.out;
  EXPECT_EQ(load_vocab(path("v.json")).atom_count(), 2);
  const auto j = nlohmann::json::parse(slurp(path("v.json")));
  EXPECT_EQ(j.at("run_config").at("command"), "build-vocab");
  EXPECT_TRUE(fs::exists(path("v.props.json")));
}

TEST_F(CliTest, BuildVocabQm9Tokens) {
  const Result r = run({ "build-vocab", "--data",
                         std::string(STGG_TEST_DATA_DIR) + "/qm9_like.smi",
                         "--out", path("v.json") });
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("atom tokens: 21\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, BuildVocabDataErrors) {
  const auto smi = write("a.smi", "CCO\nCC\nCN\n");
  const auto csv = write("a.csv", "x,y\n1,2\n3,oops\n5,6\n");
  const Result r = run({ "build-vocab", "--data", smi, "--props", csv, "--out",
                         path("v.json") });
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("row 2"), std::string::npos) << r.err;

  const auto bad = write("b.smi", "CCO\nC(\nCC\nCN\n");
  const Result f = run({ "build-vocab", "--data", bad, "--out", path("v.json") });
  EXPECT_EQ(f.code, cli::kExitData);
  EXPECT_NE(f.err.find("line 2"), std::string::npos) << f.err;
  EXPECT_EQ(run({ "build-vocab", "--data", bad, "--out", path("v.json"),
                  "--max-failure-rate", "0.5" })
                .code,
            0);
  EXPECT_EQ(run({ "build-vocab", "--data", path("missing.smi") }).code,
            cli::kExitData);
}

TEST_F(CliTest, GenSynthDeterministicAndConsistent) {
  const std::vector<std::string> base = { "gen-synth", "--vocab",
                                          STGG_SEED_VOCAB, "--n", "300",
                                          "--seed", "9" };
  auto a = base, b = base;
  a.insert(a.end(), { "--out", path("a.smi") });
  b.insert(b.end(), { "--out", path("b.smi") });
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("a.smi")), slurp(path("b.smi")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));

  const auto lines = read_smiles_file(path("a.smi"));
  ASSERT_EQ(lines.size(), 300u);
  const PropertyTable t = read_property_csv(path("a.csv"));
  ASSERT_EQ(t.rows.size(), 300u);
  ASSERT_EQ(t.columns, (std::vector<std::string> { "molWt", "ring_count",
                                                   "heavy_atom_count" }));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const MolGraph g = parse_smiles(lines[i].smiles);
    // Atom order differs after reparsing, so the sums can differ in the last bit.
    EXPECT_NEAR(*t.rows[i][0], molecular_weight(g), 1e-9);
    EXPECT_EQ(*t.rows[i][1], ring_count(g));
    EXPECT_EQ(*t.rows[i][2], heavy_atom_count(g));
  }
  const auto cfg = nlohmann::json::parse(slurp(path("a.smi.config.json")));
  EXPECT_EQ(cfg.at("seed"), 9);
  EXPECT_EQ(cfg.at("n"), 300);
}

TEST_F(CliTest, ConfigFileAndOverride) {
  write("cfg.json", R"({"n": 50, "seed": 4, "max-len": 20})");
  ASSERT_EQ(run({ "gen-synth", "--vocab", STGG_SEED_VOCAB, "--config",
                  path("cfg.json"), "--out", path("a.smi") })
                .code,
            0);
  EXPECT_EQ(read_smiles_file(path("a.smi")).size(), 50u);
  ASSERT_EQ(run({ "gen-synth", "--vocab", STGG_SEED_VOCAB, "--config",
                  path("cfg.json"), "--n", "7", "--out", path("b.smi") })
                .code,
            0);
  EXPECT_EQ(read_smiles_file(path("b.smi")).size(), 7u);
  const auto echo = nlohmann::json::parse(slurp(path("b.smi.config.json")));
  EXPECT_EQ(echo.at("n"), 7);
  EXPECT_EQ(echo.at("seed"), 4);
  EXPECT_EQ(echo.at("max-len"), 20);

  write("bad.json", R"({"no-such-flag": 1})");
  EXPECT_EQ(run({ "gen-synth", "--vocab", STGG_SEED_VOCAB, "--config",
                  path("bad.json"), "--out", path("c.smi") })
                .code,
            cli::kExitUsage);
  write("list.json", "[1, 2]");
  EXPECT_EQ(run({ "gen-synth", "--vocab", STGG_SEED_VOCAB, "--config",
                  path("list.json"), "--out", path("c.smi") })
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, EncodeDecode) {
  const auto smi = write("m.smi", "CC(=O)O\nC1CCCCC1\n");
  ASSERT_EQ(run({ "build-vocab", "--data", smi, "--out", path("v.json") }).code, 0);
  const Result e = run({ "encode", "--vocab", path("v.json"), "CC(=O)O" });
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out, "<bos> CH3 - C ( = O ) - OH <eos>\n");
  const Result d = run({ "decode", "--vocab", path("v.json"),
                         "<bos> CH3 - C ( = O ) - OH <eos>" });
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_TRUE(is_isomorphic(parse_smiles(d.out.substr(0, d.out.size() - 1)),
                            parse_smiles("CC(=O)O")));
  const Result rnd = run({ "encode", "--vocab", path("v.json"), "--data", smi,
                           "--random-order", "--seed", "5" });
  ASSERT_EQ(rnd.code, 0);
  write("t.txt", rnd.out);
  const Result back = run({ "decode", "--vocab", path("v.json"), "--data",
                            path("t.txt") });
  ASSERT_EQ(back.code, 0) << back.err;
  EXPECT_EQ(std::count(back.out.begin(), back.out.end(), '\n'), 2);

  EXPECT_EQ(run({ "decode", "--vocab", path("v.json"), "<bos> CH3 ( <eos>" }).code,
            cli::kExitData);
  EXPECT_EQ(run({ "encode", "--vocab", path("v.json"), "CN" }).code,
            cli::kExitData);
}

TEST_F(CliTest, RoundtripCheck) {
  corpus(200);
  const Result r = run({ "roundtrip-check", "--vocab", path("v.json"), "--data",
                         path("c.smi"), "--seeds", "5" });
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("checks"), 200 * 6);
  EXPECT_EQ(j.at("failures"), 0);
}

TEST_F(CliTest, EvaluateGoldenReport) {
  const fs::path fixture = fs::path(STGG_TEST_DATA_DIR) / "eval_fixture";
  const fs::path cwd = fs::current_path();
  fs::current_path(fixture);
  const Result r = run({ "evaluate", "--samples", "samples.jsonl", "--train",
                         "train.smi", "--target", "molWt=46" });
  fs::current_path(cwd);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fixture / "golden_report.json"));

  // Hand counts for the fixture.
  const auto j = nlohmann::json::parse(r.out).at("efficiency").at("counts");
  EXPECT_EQ(j.at("total"), 10);
  EXPECT_EQ(j.at("valid"), 8);
  EXPECT_EQ(j.at("unique"), 5);
  EXPECT_EQ(j.at("novel"), 5);
  EXPECT_EQ(j.at("efficient"), 3);
}

TEST_F(CliTest, TrainSampleDeterministic) {
  corpus(300);
  auto args = train_args("m.ckpt");
  args.insert(args.end(), { "--log", path("log.jsonl"), "--seed", "2" });
  const Result t = run(args);
  ASSERT_EQ(t.code, 0) << t.err;
  const Checkpoint ck = load_checkpoint(path("m.ckpt"));
  EXPECT_EQ(ck.run_config.at("command"), "train");
  EXPECT_EQ(ck.run_config.at("resolved").at("model").at("d_model"), 16);
  const std::string log = slurp(path("log.jsonl"));
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);

  auto sample = [&](const std::string &out, const std::string &threads) {
    return run({ "sample", "--model", path("m.ckpt"), "--vocab", path("v.json"),
                 "--n", "6", "--k", "3", "--w-uniform", "0.5", "2.0", "--target",
                 "molWt=80", "--seed", "8", "--threads", threads, "--out",
                 path(out) });
  };
  ASSERT_EQ(sample("a.jsonl", "1").code, 0);
  ASSERT_EQ(sample("b.jsonl", "3").code, 0);
  const std::string a = slurp(path("a.jsonl")), b = slurp(path("b.jsonl"));
  // Only the echoed thread count may differ.
  EXPECT_EQ(a.substr(a.find('\n')), b.substr(b.find('\n')));
  std::istringstream lines(a);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(nlohmann::json::parse(line).at("format"), "stgg-samples");
  int n = 0;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::json::parse(line);
    ASSERT_EQ(rec.at("candidates").size(), 3u);
    EXPECT_EQ(rec.at("best"), rec.at("candidates").at(rec.at("best_index").get<int>()));
    EXPECT_NEAR(rec.at("target").at("molWt").get<double>(), 80.0, 1e-9);
    const auto best = rec.at("best");
    EXPECT_NO_THROW(parse_smiles(best.at("smiles").get<std::string>()));
    EXPECT_GE(best.at("w").get<double>(), 0.5);
    EXPECT_LE(best.at("w").get<double>(), 2.0);
    ++n;
  }
  EXPECT_EQ(n, 6);

  const Result p = run({ "predict", "--model", path("m.ckpt"), "--vocab",
                         path("v.json"), "--data", path("c.smi") });
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out.substr(0, p.out.find('\n')), "line,smiles,molWt,ring_count");
  EXPECT_EQ(std::count(p.out.begin(), p.out.end(), '\n'), 301);

  // Checkpoint from another vocabulary.
  const auto other = write("o.smi", "CCO\n");
  ASSERT_EQ(run({ "build-vocab", "--data", other, "--out", path("o.json") }).code, 0);
  EXPECT_EQ(run({ "sample", "--model", path("m.ckpt"), "--vocab", path("o.json") })
                .code,
            cli::kExitData);
  EXPECT_EQ(run({ "sample", "--model", path("m.ckpt"), "--vocab", path("v.json"),
                  "--target", "logP=1" })
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, AblationFlagsReachTheRun) {
  corpus(200);
  const std::vector<std::pair<std::string, std::string>> flags = {
    { "--legacy-arch", "legacy_arch" },
    { "--single-layer-prop-encoder", "single_layer_prop_encoder" },
  };
  ASSERT_EQ(run(train_args("base.ckpt")).code, 0);
  const Checkpoint base = load_checkpoint(path("base.ckpt"));
  EXPECT_FALSE(base.config.legacy_arch);
  for (const auto &[flag, key]: flags) {
    auto args = train_args("x.ckpt");
    args.push_back(flag);
    ASSERT_EQ(run(args).code, 0) << flag;
    const Checkpoint ck = load_checkpoint(path("x.ckpt"));
    EXPECT_EQ(ck.config.to_json().at(key), true) << flag;
  }
  auto args = train_args("s.ckpt");
  args.insert(args.end(), { "--no-standardize", "--no-prop-loss", "--no-random-order" });
  ASSERT_EQ(run(args).code, 0);
  const Checkpoint ck = load_checkpoint(path("s.ckpt"));
  EXPECT_FALSE(ck.spec.standardizes());
  const auto &tr = ck.run_config.at("resolved").at("train");
  EXPECT_EQ(tr.at("lambda_prop"), 0.0);
  EXPECT_EQ(tr.at("augment_random_order"), false);
}

}  // namespace
}  // namespace stgg
