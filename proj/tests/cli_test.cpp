/* Copyright 2026 The memaudit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Drives the built executable end to end.

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>

#include "memaudit/io.hpp"
#include "test_util.hpp"

namespace memaudit {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(cli("synth-corpus --records 200 --dim 32 --seed 4 --memorized 6 --rate 0.4"
                  " --out-manifest " + p("corpus.jsonl") + " --out-store " + p("corpus.membed") +
                  " --mock-config " + p("mock.json")),
              0);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  std::string corpus_args() const {
    return " --corpus-manifest " + p("corpus.jsonl") + " --corpus-store " + p("corpus.membed") +
           " --backend mock:" + p("mock.json");
  }

  int cli(const std::string& args) const {
    const std::string cmd = std::string(MEMAUDIT_CLI) + " " + args + " >" + p("stdout.txt") +
                            " 2>" + p("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, MineIsDeterministic) {
  ASSERT_EQ(cli("mine --sample 200 --seed 1" + corpus_args() + " --out " + p("a.json")), 0);
  ASSERT_EQ(cli("mine --sample 200 --seed 1" + corpus_args() + " --out " + p("b.json")), 0);
  const auto a = nlohmann::json::parse(read_file(p("a.json")));
  const auto b = nlohmann::json::parse(read_file(p("b.json")));
  EXPECT_EQ(a.at("caption_ids"), b.at("caption_ids"));
  EXPECT_EQ(a["caption_ids"].size(), 6u);
}

TEST_F(CliTest, RejectsBadTau) {
  EXPECT_EQ(cli("mine --sample 10 --tau 1.5" + corpus_args() + " --out " + p("x.json")), 2);
  EXPECT_EQ(cli("run --captions " + p("none.json") + " --tau 1.5 --out " + p("run") + corpus_args()), 2);
  EXPECT_NE(cli("bogus"), 0);
}

TEST_F(CliTest, RunReportAndResume) {
  write_file(p("caps.json"), R"(["rec-000001","rec-000003","rec-000100"])");
  ASSERT_EQ(cli("run --captions " + p("caps.json") + " --seeds 5 --out " + p("full") + corpus_args()), 0);
  const auto outcomes = read_file(p("full/outcomes.jsonl"));
  EXPECT_EQ(std::count(outcomes.begin(), outcomes.end(), '\n'), 3 * 4 * 5);

  EXPECT_NE(cli("run --captions " + p("caps.json") + " --seeds 5 --stop-after 17 --out " +
                p("part") + corpus_args()),
            0);
  ASSERT_EQ(cli("run --resume " + p("part")), 0);
  EXPECT_EQ(read_file(p("part/outcomes.jsonl")), outcomes);

  ASSERT_EQ(cli("report --run " + p("full") + " --out " + p("r1") + " --svg"), 0);
  ASSERT_EQ(cli("report --run " + p("part") + " --out " + p("r2") + " --svg"), 0);
  EXPECT_EQ(read_file(p("r1/summary.csv")), read_file(p("r2/summary.csv")));
  EXPECT_EQ(read_file(p("r1/correlations.json")), read_file(p("r2/correlations.json")));
  ASSERT_EQ(cli("report --run " + p("full") + " --out " + p("r3") + " --svg"), 0);
  EXPECT_EQ(read_file(p("r1/report.md")), read_file(p("r3/report.md")));
}

TEST_F(CliTest, SingleStrategy) {
  write_file(p("caps.json"), R"(["rec-000002"])");
  ASSERT_EQ(cli("run --captions " + p("caps.json") + " --strategies chain_of_thought --seeds 4 --out " +
                p("run") + corpus_args()),
            0);
  const auto outcomes = read_file(p("run/outcomes.jsonl"));
  EXPECT_EQ(std::count(outcomes.begin(), outcomes.end(), '\n'), 4);
  EXPECT_EQ(outcomes.find("\"baseline\""), std::string::npos);
}

TEST_F(CliTest, RefusesToOverwriteRun) {
  write_file(p("caps.json"), R"(["rec-000002"])");
  const auto args = "run --captions " + p("caps.json") + " --seeds 2 --out " + p("run") + corpus_args();
  ASSERT_EQ(cli(args), 0);
  EXPECT_NE(cli(args), 0);
}

TEST_F(CliTest, MalformedRecordsIsUsageError) {
  write_file(p("caps.json"), R"(["rec-000002"])");
  ASSERT_EQ(cli("run --captions " + p("caps.json") + " --seeds 2 --out " + p("bad") + corpus_args()), 0);
  ASSERT_TRUE(std::filesystem::exists(p("bad/records.json")));
  write_file(p("bad/records.json"), "{not json");
  EXPECT_EQ(cli("report --run " + p("bad") + " --out " + p("out")), 2);
}

TEST_F(CliTest, RenderAndRecommend) {
  ASSERT_EQ(cli("render --strategy baseline --caption 'a red apple'"), 0);
  EXPECT_EQ(read_file(p("stdout.txt")), "Generate an image of a red apple\n");
  ASSERT_EQ(cli("recommend --tier high"), 0);
  EXPECT_EQ(read_file(p("stdout.txt")), "chain_of_thought\n");
  EXPECT_EQ(cli("recommend --tier extreme"), 2);
}

}  // namespace
}  // namespace memaudit
