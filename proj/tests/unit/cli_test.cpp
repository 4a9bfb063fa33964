/*
Copyright 2026 The gcinet Authors. All rights reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Drives the gcinet binary end to end and checks exit statuses.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "gci/signal.hpp"
#include "scratch.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(GCINET_BIN) + " --log-level quiet " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("experiment --set model.nope=1"), 1);
  EXPECT_EQ(run("detect --checkpoint /no/such.ckpt --input /no/such.wav --labels x.txt"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, PipelineAndExitCodes) {
  gci::testing_support::ScratchDir dir("cli");
  const std::string d = dir.path().string();
  ASSERT_EQ(run("synth --output " + d + "/corpus --utterances 3 --duration 0.4"), 0);
  const std::string common = " --manifest " + d + "/corpus/manifest.csv --output " + d +
                             "/run --channels 2 --head-hidden 2 --epochs 1 --train-fraction 0.34";
  EXPECT_EQ(run("train" + common), 2);  // nothing prepared yet
  ASSERT_EQ(run("prepare" + common), 0);
  ASSERT_EQ(run("train" + common), 0);
  const std::string ckpt = d + "/run/train_clean/model.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));

  ASSERT_EQ(run("detect --checkpoint " + ckpt + " --input " + d + "/corpus/wav/utt001.wav --labels " +
                d + "/det/utt001.txt --candidates " + d + "/cands.txt"),
            0);
  std::ifstream cands(d + "/cands.txt");
  std::size_t n_cands = 0;
  for (std::string line; std::getline(cands, line);) ++n_cands;
  EXPECT_GE(n_cands, gci::read_labels(d + "/det/utt001.txt").size());
  EXPECT_EQ(run("detect --checkpoint " + ckpt + " --input " + d + "/corpus/wav/utt001.wav --labels " +
                d + "/x.txt --wd-ms 3"),
            1);

  EXPECT_EQ(run("eval --reference " + d + "/corpus/labels/utt001.txt --detected " + d +
                "/det/utt001.txt --csv " + d + "/e.csv"),
            0);
  EXPECT_TRUE(fs::exists(d + "/e.csv"));
  EXPECT_EQ(run("eval --reference " + d + "/corpus/labels --detected " + d + "/det"), 2);

  // A learning rate this large overflows the first forward pass after one step.
  EXPECT_EQ(run("train" + common + " --lr 1e300 --epochs 3"), 3);
}

}  // namespace
