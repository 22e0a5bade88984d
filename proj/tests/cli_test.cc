// Copyright 2026 The Sciex Authors.
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

// Runs the sciex binary.

#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "sciex/checkpoint.h"
#include "sciex/common.h"
#include "sciex/pipeline.h"
#include "testing.h"

namespace sciex {
namespace {

using nlohmann::json;
using testing::RunCli;
using testing::TestData;

std::string Schema() { return " --schema " + TestData("toy_schema.json"); }
std::string Corpus() { return " --data " + TestData("toy_corpus.json"); }

class CliTest : public ::testing::Test {
 protected:
  // Small and quick; not meant to score well.
  std::string Config() {
    const std::string path = dir_.File("run.json");
    WriteFileAtomic(path, R"({"epochs": 3, "encoder": {"d_tok": 8, "d_sent": 4}})");
    return " --config " + path;
  }

  std::string TrainSmall(const std::string& name, const std::string& extra = "") {
    const std::string out = dir_.File(name);
    const auto r = RunCli("train" + Corpus() + Schema() + Config() + " -o " + out + extra);
    EXPECT_EQ(r.exit_code, 0) << r.output;
    return out;
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(RunCli("").exit_code, 1);
  EXPECT_EQ(RunCli("frobnicate").exit_code, 1);
  EXPECT_EQ(RunCli("train" + Schema()).exit_code, 1);  // --data missing
  const auto r = RunCli("extract " + TestData("fixture.blocks.json"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("--model is required"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("Usage"), std::string::npos);
  EXPECT_EQ(RunCli("train" + Corpus() + " -o " + dir_.File("x.ckpt")).exit_code, 1);
  const auto help = RunCli("--help");
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.output.find("extract"), std::string::npos);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(RunCli("train --data /nonexistent.json" + Schema() + " -o " + dir_.File("m")).exit_code,
            2);
  const std::string bad = dir_.File("bad.json");
  WriteFileAtomic(bad, R"([{"tokens": ["a"], "entities": [{"type": "Planet", "start": 0, "end": 1}]}])");
  auto r = RunCli("train --data " + bad + Schema() + " -o " + dir_.File("m"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("Planet"), std::string::npos) << r.output;

  const std::string model = TrainSmall("m.ckpt");
  std::string bytes = ReadFileBytes(model);
  bytes[bytes.size() / 2] ^= 0x5a;
  const std::string corrupt = dir_.File("corrupt.ckpt");
  WriteFileAtomic(corrupt, bytes);
  r = RunCli("extract " + TestData("fixture.blocks.json") + " --model " + corrupt);
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = RunCli("eval" + Corpus() + " --model " + dir_.File("missing.ckpt"));
  EXPECT_EQ(r.exit_code, 2);
  r = RunCli("extract /nonexistent.blocks.json --model " + model);
  EXPECT_EQ(r.exit_code, 2);
  r = RunCli("retrain --model " + model + " --store " + dir_.File("empty.log") + " -o " +
             dir_.File("next.ckpt"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("no verified records"), std::string::npos);
}

TEST_F(CliTest, TrainIsDeterministic) {
  const std::string log = dir_.File("log.ndjson");
  const std::string a = TrainSmall("a.ckpt", " --log " + log);
  const std::string b = TrainSmall("b.ckpt");
  EXPECT_EQ(ReadFileBytes(a), ReadFileBytes(b));
  const std::string c = TrainSmall("c.ckpt", " --seed 9");
  EXPECT_NE(ReadFileBytes(a), ReadFileBytes(c));

  std::ifstream in(log);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_TRUE(j.contains("loss_total"));
    EXPECT_TRUE(j.contains("epoch"));
    ++lines;
  }
  EXPECT_EQ(lines, 3 * 10);  // 20 sentences, batches of 2
}

TEST_F(CliTest, ExtractEvalIngest) {
  const std::string model = TrainSmall("m.ckpt");
  const std::string dump = TestData("fixture.blocks.json");
  const std::string out1 = dir_.File("1.json"), out2 = dir_.File("2.json");
  ASSERT_EQ(RunCli("extract " + dump + " --model " + model + " -o " + out1).exit_code, 0);
  ASSERT_EQ(RunCli("extract " + dump + " --model " + model + " -o " + out2).exit_code, 0);
  EXPECT_EQ(ReadFileBytes(out1), ReadFileBytes(out2));
  const auto a = PreAnnotation::FromJson(json::parse(ReadFileBytes(out1)));
  EXPECT_FALSE(CheckPreAnnotation(a, &LoadCheckpoint(model)->schema()).has_value());

  const auto only_front = RunCli("extract " + dump + " --model " + model + " --no-public");
  EXPECT_EQ(only_front.exit_code, 0);

  const auto eval = RunCli("eval" + Corpus() + " --model " + model);
  ASSERT_EQ(eval.exit_code, 0) << eval.output;
  EXPECT_NE(eval.output.find("macro_f1"), std::string::npos);

  const auto ingest = RunCli("ingest " + dump);
  ASSERT_EQ(ingest.exit_code, 0) << ingest.output;
  const auto report = json::parse(ingest.output);
  EXPECT_EQ(report["doc_id"], "fixture-001");
}

TEST_F(CliTest, CrossValidation) {
  const auto r = RunCli("xval" + Corpus() + Schema() + Config() + " -k 2 --epochs 1");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto j = json::parse(r.output);
  EXPECT_EQ(j["folds"].size(), 2u);
  EXPECT_EQ(RunCli("xval" + Corpus() + Schema() + " -k 1").exit_code, 1);
  EXPECT_EQ(RunCli("xval" + Corpus() + Schema() + " -k 21").exit_code, 2);
}

}  // namespace
}  // namespace sciex

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
