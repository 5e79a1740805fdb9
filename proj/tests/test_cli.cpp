#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "scratch.hpp"

namespace {

struct CliResult {
  int status;
  std::string output;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(RIBCAGE_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::filesystem::path& p) {
  const std::string t = bytes(p);
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

}  // namespace

TEST(Cli, HelpListsFlagsWithDefaults) {
  const CliResult r = run("--help-all");
  EXPECT_EQ(r.status, 0);
  for (const char* s : {"--seed UINT [0]", "--out-dir TEXT [out]", "--dims", "[128,128,128]",
                        "--working-dims", "--lr FLOAT [0.001]", "--steps INT [500]",
                        "--loss TEXT [mse+err+gf]", "--hd-percentile FLOAT [100]",
                        "--fd-step FLOAT [0.001]", "--weight-decay FLOAT [0.0001]"}) {
    EXPECT_NE(r.output.find(s), std::string::npos) << s;
  }
}

TEST(Cli, UnknownFlagRejected) {
  EXPECT_NE(run("phantom --colour blue").status, 0);
  EXPECT_NE(run("--bogus phantom").status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST(Cli, GradcheckPasses) {
  const CliResult r = run("gradcheck --samples 5");
  EXPECT_EQ(r.status, 0) << r.output;
  for (const char* k : {"dice max_rel_err", "mse max_rel_err", "mse+err max_rel_err",
                        "mse+err+gf max_rel_err"}) {
    EXPECT_NE(r.output.find(k), std::string::npos) << r.output;
  }
  EXPECT_NE(run("gradcheck --samples 2 --tolerance 1e-30").status, 0);
}

TEST(Cli, PipelineEndToEndAndRepeatable) {
  Scratch s;
  const std::string a = (s / "a").string(), b = (s / "b").string();
  for (const std::string& dir : {a, b}) {
    const std::string g = "--seed 5 --out-dir " + dir + " ";
    ASSERT_EQ(run(g + "phantom --cases 2 --dims 64 64 64 --torso-semi-x 27 --torso-semi-y 21 "
                      "--rib-pairs 6 --rib-radius 1.5").status,
              0);
    ASSERT_EQ(run(g + "prep --working-dims 32 32 16").status, 0);
    ASSERT_EQ(run(g + "train --depth 1 --base-channels 2 --steps 3 --head-prior 0.6").status, 0);
    const CliResult e = run(g + "eval");
    ASSERT_EQ(e.status, 0) << e.output;
  }
  EXPECT_EQ(lines(s / "a/metrics.csv"), 3u);
  EXPECT_EQ(lines(s / "a/train_log.csv"), 4u);
  for (const char* f : {"phantom_000.nii", "case_001/defective.nii", "case_001/case.manifest",
                        "checkpoint.bin", "train_log.csv", "metrics.csv"}) {
    EXPECT_EQ(bytes(s / (std::string("a/") + f)), bytes(s / (std::string("b/") + f))) << f;
  }
}

TEST(Cli, MissingInputFailsWithDiagnostic) {
  Scratch s;
  const CliResult r = run("--out-dir " + s.dir().string() + " train");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
}
