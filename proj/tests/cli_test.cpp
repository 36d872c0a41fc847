// Copyright 2026 The ctrlgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the ctrlgraph binary end to end in a scratch directory.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ctrlgraph/dataset.hpp"
#include "ctrlgraph/training.hpp"
#include "json.hpp"

namespace ctrlgraph {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CountLines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ctrlgraph_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult Run(const std::string& args, const std::string& env = "") {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" +
                            CTRLGRAPH_CLI_PATH + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }

  void Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  // A small trained model on a random corpus, shared by several tests.
  void TrainToy(const std::string& extra = "") {
    ASSERT_EQ(Run("synth --count 24 --min-nodes 5 --max-nodes 9 --seed 3 "
                  "--out corpus.jsonl")
                  .code,
              0);
    ASSERT_EQ(Run("make-dataset --records corpus.jsonl --max-nodes 10 "
                  "--splits 0.75,0,0.25 --out ds")
                  .code,
              0);
    Write("run.ini",
          "[model]\nlatent_dim = 6\nencoder_channels = 2,4\n"
          "decoder_channels = 4,2\nattr_hidden = 12\n"
          "[training]\nepochs = 4\nbatch_size = 8\nseed = 5\n");
    auto r = Run("train --dataset ds --config run.ini --out m.ckpt --quiet " +
                 extra);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, MakeDatasetOnToyEdgeList) {
  Write("toy.txt", "0 1\n1 2\n2 3\n3 4\n4 0\n");
  auto r = Run("make-dataset --input toy.txt --k 1 --max-nodes 8 "
               "--splits 1,0,0 --out ds");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "train 5\nval 0\ntest 0\ndiscarded 0\n");
  EXPECT_EQ(ReadRecords(dir_ / "ds" / "train.jsonl").size(), 5u);
  EXPECT_TRUE(ReadRecords(dir_ / "ds" / "test.jsonl").empty());

  ASSERT_EQ(Run("make-dataset --input toy.txt --k 1 --max-nodes 8 "
                "--splits 1,0,0 --out ds2")
                .code,
            0);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "stats.json"}) {
    EXPECT_EQ(Slurp(dir_ / "ds" / f), Slurp(dir_ / "ds2" / f)) << f;
  }
}

TEST_F(CliTest, MakeDatasetErrors) {
  Write("toy.txt", "0 1\n1 2\n");
  auto missing = Run("make-dataset --input nope.txt --out ds");
  EXPECT_NE(missing.code, 0);
  EXPECT_EQ(CountLines(missing.err), 1u);
  auto bad = Run("make-dataset --input toy.txt --splits 0.5,0.6,0.1 --out ds");
  EXPECT_NE(bad.code, 0);
  EXPECT_EQ(CountLines(bad.err), 1u);
  EXPECT_NE(bad.err.find("error"), std::string::npos);
}

TEST_F(CliTest, ExtractAttributes) {
  std::vector<GraphRecord> recs = {
      MakeRecord("k3", Graph::Complete(3)),
      MakeRecord("p4a", Graph::Path(4)),
      MakeRecord("p4b", Graph::Path(4).Relabeled(std::vector<NodeId>{2, 0, 3, 1}))};
  WriteRecords(dir_ / "g.jsonl", recs);
  auto r = Run("extract-attrs --graphs g.jsonl --out table.tsv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(Slurp(dir_ / "table.tsv"));
  std::string header, k3, p4a, p4b;
  std::getline(table, header);
  std::getline(table, k3);
  std::getline(table, p4a);
  std::getline(table, p4b);
  EXPECT_EQ(header.substr(0, 9), "id\tnodes\t");
  EXPECT_EQ(k3, "k3\t3\t3\t0\t0.5\t2\t2\t1\t1\t2\t1\t1\t1");
  EXPECT_EQ(p4a.substr(3), p4b.substr(3));

  Write("empty.jsonl", "");
  auto e = Run("extract-attrs --graphs empty.jsonl");
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(CountLines(e.out), 1u);
  EXPECT_NE(e.err.find("warning"), std::string::npos);

  Write("bad.jsonl", "{\"id\": 3}\n");
  auto b = Run("extract-attrs --graphs bad.jsonl");
  EXPECT_NE(b.code, 0);
  EXPECT_EQ(CountLines(b.err), 1u);
}

TEST_F(CliTest, TrainWritesLoadableCheckpoint) {
  TrainToy("--disable-attrs nodes,edges");
  Checkpoint ckpt = LoadCheckpoint(dir_ / "m.ckpt");
  EXPECT_EQ(ckpt.epoch, 4u);
  EXPECT_EQ(ckpt.model_config.latent_dim, 6u);
  EXPECT_EQ(ckpt.model_config.max_nodes, 10u);
  EXPECT_FALSE(ckpt.training_config.enabled(Attr::kNodes));
  EXPECT_FALSE(ckpt.training_config.enabled(Attr::kEdges));
  EXPECT_TRUE(ckpt.training_config.enabled(Attr::kDensity));
  const std::string log = Slurp(dir_ / "m.ckpt.log.jsonl");
  EXPECT_EQ(CountLines(log), 4u);
  auto first = nlohmann::json::parse(log.substr(0, log.find('\n')));
  EXPECT_EQ(first["epoch"], 1);
  EXPECT_TRUE(std::isfinite(first["loss"].get<double>()));
}

TEST_F(CliTest, TrainRejectsBadConfig) {
  TrainToy();
  auto zero = Run("train --dataset ds --config run.ini --out z.ckpt --epochs 0");
  EXPECT_NE(zero.code, 0);
  EXPECT_EQ(CountLines(zero.err), 1u);
  EXPECT_FALSE(fs::exists(dir_ / "z.ckpt"));
  Write("typo.ini", "[training]\nepoch = 3\n");
  auto typo = Run("train --dataset ds --config typo.ini --out z.ckpt");
  EXPECT_NE(typo.code, 0);
  EXPECT_NE(typo.err.find("epoch"), std::string::npos);
}

TEST_F(CliTest, ConfigFromEnvironmentAndOverrides) {
  TrainToy();
  auto r = Run("train --dataset ds --out e.ckpt --quiet --set model.latent_dim=6 "
               "--set model.attr_hidden=12 --set model.encoder_channels=2,4 "
               "--set model.decoder_channels=4,2",
               "CTRLGRAPH_CONFIG=run.ini");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(Slurp(dir_ / "e.ckpt.log.jsonl")), 4u);
  auto flag = Run("train --dataset ds --out f.ckpt --quiet --epochs 2",
                  "CTRLGRAPH_CONFIG=run.ini");
  ASSERT_EQ(flag.code, 0) << flag.err;
  EXPECT_EQ(CountLines(Slurp(dir_ / "f.ckpt.log.jsonl")), 2u);
}

TEST_F(CliTest, TrainingIsDeterministic) {
  TrainToy();
  ASSERT_EQ(Run("train --dataset ds --config run.ini --out m2.ckpt --quiet").code, 0);
  EXPECT_EQ(Slurp(dir_ / "m.ckpt"), Slurp(dir_ / "m2.ckpt"));
}

TEST_F(CliTest, GenerateThresholdDeterministicAndMasked) {
  TrainToy();
  ASSERT_EQ(Run("extract-attrs --graphs corpus.jsonl --out attrs.tsv").code, 0);
  for (const char* out : {"a.jsonl", "b.jsonl"}) {
    auto r = Run(std::string("generate --checkpoint m.ckpt --attrs attrs.tsv "
                             "--num 2 --mode threshold --seed 4 --out ") +
                 out);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(Slurp(dir_ / "a.jsonl"), Slurp(dir_ / "b.jsonl"));
  EXPECT_EQ(ReadRecords(dir_ / "a.jsonl").size(), 48u);

  auto masked = Run("generate --checkpoint m.ckpt --attrs attrs.tsv "
                    "--mask-attr diameter --dot-dir dots");
  ASSERT_EQ(masked.code, 0) << masked.err;
  std::size_t dots = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "dots")) {
    dots += e.path().extension() == ".dot";
  }
  EXPECT_EQ(dots, 24u);

  auto inline_attrs = Run(
      "generate --checkpoint m.ckpt --out i.jsonl --mask-attr diameter --attrs "
      "nodes=6,edges=7,local_bridges=2,density=0.46,edge_connectivity=1,"
      "node_connectivity=1,max_cliques=4,treewidth_min_degree=2,"
      "closeness_centrality=0.6,clustering_coefficient=0.4,transitivity=0.4");
  ASSERT_EQ(inline_attrs.code, 0) << inline_attrs.err;

  Write("short.tsv", "id\tnodes\tedges\nx\t3\t2\n");
  auto mismatch = Run("generate --checkpoint m.ckpt --attrs short.tsv --out s.jsonl");
  EXPECT_NE(mismatch.code, 0);
  EXPECT_NE(mismatch.err.find("attribute"), std::string::npos);
}

TEST_F(CliTest, OutOfDistributionFlow) {
  TrainToy();
  ASSERT_EQ(Run("synth --kind ba --count 5 --min-nodes 6 --max-nodes 9 --m 2 "
                "--seed 8 --out ba.jsonl")
                .code,
            0);
  ASSERT_EQ(Run("extract-attrs --graphs ba.jsonl --out ba.tsv").code, 0);
  auto r = Run("generate --checkpoint m.ckpt --attrs ba.tsv --out ood.jsonl");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadRecords(dir_ / "ood.jsonl").size(), 5u);
}

TEST_F(CliTest, EvaluateReports) {
  TrainToy();
  auto same = Run("evaluate --checkpoint m.ckpt --dataset ds --against generated "
                  "--metrics sd,ged --out same.json");
  ASSERT_EQ(same.code, 0) << same.err;
  auto j = nlohmann::json::parse(Slurp(dir_ / "same.json"));
  EXPECT_EQ(j["summary"]["sd_mean"].get<double>(), 0.0);
  EXPECT_EQ(j["summary"]["ged_mean"].get<double>(), 0.0);
  EXPECT_FALSE(j["summary"].contains("mad"));
  EXPECT_EQ(j["metrics"].size(), 2u);

  auto full = Run("evaluate --checkpoint m.ckpt --dataset ds --out full.json");
  ASSERT_EQ(full.code, 0) << full.err;
  auto f = nlohmann::json::parse(Slurp(dir_ / "full.json"));
  for (const char* key : {"sd_mean", "ged_mean", "novelty"}) {
    ASSERT_TRUE(f["summary"].contains(key)) << key;
    EXPECT_TRUE(std::isfinite(f["summary"][key].get<double>())) << key;
  }
  EXPECT_TRUE(std::isfinite(f["summary"]["mad"]["overall"].get<double>()));
  EXPECT_TRUE(std::isfinite(f["summary"]["mmd"]["mean"].get<double>()));
  EXPECT_EQ(f["pairs"].size(), 6u);
  for (const auto& p : f["pairs"]) {
    EXPECT_TRUE(p["ged_method"] == "exact" || p["ged_method"] == "approx");
  }

  auto unknown = Run("evaluate --checkpoint m.ckpt --dataset ds --metrics sd,gedd");
  EXPECT_NE(unknown.code, 0);
  EXPECT_EQ(CountLines(unknown.err), 1u);
  EXPECT_NE(unknown.err.find("gedd"), std::string::npos);
}

TEST_F(CliTest, ScheduleTables) {
  auto linear = Run("schedule --alpha 1 --gamma 1 --beta0 0 --epochs 10");
  ASSERT_EQ(linear.code, 0) << linear.err;
  std::istringstream in(linear.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch\tt\tbeta");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    double e, t, beta;
    cells >> e >> t >> beta;
    EXPECT_NEAR(beta, t, 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 11u);

  auto capped = Run("schedule --alpha 1 --gamma 0.2 --epochs 10");
  ASSERT_EQ(capped.code, 0);
  EXPECT_NE(capped.out.find("10\t1\t0.2\n"), std::string::npos);
  EXPECT_NE(capped.out.find("5\t0.5\t0.2\n"), std::string::npos);

  auto one = Run("schedule --epochs 1");
  EXPECT_EQ(CountLines(one.out), 3u);
  EXPECT_NE(Run("schedule --gamma 2").code, 0);
  EXPECT_NE(Run("schedule --alpha 0").code, 0);
}

TEST_F(CliTest, HelpListsDefaultsAndBadFlagsFail) {
  auto help = Run("train --help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("--epochs UINT [200]"), std::string::npos);
  EXPECT_NE(help.out.find("--gamma FLOAT [0.1]"), std::string::npos);
  auto make_help = Run("make-dataset --help");
  EXPECT_NE(make_help.out.find("[as-is]"), std::string::npos);
  auto bad = Run("train --bogus");
  EXPECT_NE(bad.code, 0);
  EXPECT_EQ(CountLines(bad.err), 1u);
  EXPECT_NE(Run("").code, 0);
}

}  // namespace
}  // namespace ctrlgraph
