#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jcl/checkpoint.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(JCL_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Column `col` of every data row of a CSV document.
std::vector<std::string> column(const std::string& csv, std::size_t col) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ls, cell, ',');
    out.push_back(cell);
  }
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("jcl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_spec(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    jcl::write_text_file(p, body);
    return p;
  }

  std::string toy_spec(const std::string& extra = "") {
    return R"({"instances": 32, "ambient_dim": 12, "style_dims": 4, "embed_dim": 6, "hidden_dim": 10,)"
           R"( "batch_size": 8, "queue_capacity": 32, "epochs": 3)" +
           extra + "}";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VerifyBoundIsDeterministic) {
  const Result a = run("verify-bound --trials 5 --samples 2000 --seed 3 --out " + (dir_ / "v").string());
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out.rfind("suite,trials,passed,failed,worst_margin\n", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "v" / "verify_bound.csv"), a.out);
  EXPECT_TRUE(fs::exists(dir_ / "v" / "spec.json"));
  const Result b = run("verify-bound --trials 5 --samples 2000 --seed 3");
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, TrainWritesArtifactsAndReproduces) {
  const fs::path spec = write_spec("spec.json", toy_spec());
  ASSERT_EQ(run("train --spec " + spec.string() + " --method vanilla --out " + (dir_ / "a").string()).status, 0);
  ASSERT_EQ(run("train --spec " + spec.string() + " --method vanilla --out " + (dir_ / "b").string()).status, 0);
  for (const char* f : {"spec.json", "checkpoint.json", "train_log.csv", "steps.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir_ / "a" / "timing.csv"));
}

TEST_F(Cli, InfoNceAndReducedJclGiveIdenticalLossColumns) {
  const fs::path spec = write_spec("spec.json", toy_spec(R"(, "lambda": 0, "positive_keys": 1)"));
  ASSERT_EQ(run("train --spec " + spec.string() + " --method jcl --out " + (dir_ / "jcl").string()).status, 0);
  ASSERT_EQ(run("train --spec " + spec.string() + " --method infonce --out " + (dir_ / "nce").string()).status, 0);
  EXPECT_EQ(column(slurp(dir_ / "jcl" / "train_log.csv"), 1), column(slurp(dir_ / "nce" / "train_log.csv"), 1));
  EXPECT_EQ(column(slurp(dir_ / "jcl" / "steps.csv"), 2), column(slurp(dir_ / "nce" / "steps.csv"), 2));
}

TEST_F(Cli, TrainRejectsBadSpecs) {
  EXPECT_EQ(run("train --spec " + write_spec("typo.json", R"({"lamda": 1})").string() + " --out " + (dir_ / "x").string()).status, 2);
  EXPECT_EQ(run("train --spec " + write_spec("bad.json", "{").string() + " --out " + (dir_ / "x").string()).status, 2);
  EXPECT_NE(run("train --spec " + (dir_ / "missing.json").string() + " --out " + (dir_ / "x").string()).status, 0);
  EXPECT_NE(run("train --spec " + write_spec("ok.json", toy_spec()).string() + " --method simclr --out x").status, 0);
}

TEST_F(Cli, TrainingAbortExitsWithDiagnostic) {
  const fs::path spec = write_spec("spec.json", toy_spec(R"(, "tau": 1e-310)"));
  EXPECT_EQ(run("train --spec " + spec.string() + " --out " + (dir_ / "run").string()).status, 3);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "diagnostic.json"));
}

TEST_F(Cli, ProbeIsDeterministic) {
  const fs::path spec = write_spec("spec.json", toy_spec());
  ASSERT_EQ(run("train --spec " + spec.string() + " --out " + (dir_ / "run").string()).status, 0);
  const std::string ckpt = (dir_ / "run" / "checkpoint.json").string();
  const Result a = run("probe --checkpoint " + ckpt + " --seed 5 --epochs 5 --out " + (dir_ / "p").string());
  const Result b = run("probe --checkpoint " + ckpt + " --seed 5 --epochs 5");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("method,tap,seed,", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "p" / "probe.csv"));

  jcl::write_text_file(dir_ / "broken.json", R"({"format_version": 1})");
  EXPECT_EQ(run("probe --checkpoint " + (dir_ / "broken.json").string()).status, 2);
}

TEST_F(Cli, SweepEmitsOneRowPerValue) {
  const fs::path spec = write_spec("spec.json", toy_spec());
  const Result r = run("sweep --param lambda --values 0,0.2,4,100 --spec " + spec.string() + " --out " +
                       (dir_ / "s").string());
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(column(r.out, 1), (std::vector<std::string>{"0", "0.20000000000000001", "4", "100"}));
  EXPECT_EQ(slurp(dir_ / "s" / "sweep.csv"), r.out);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "spec.json"));
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(fs::exists(dir_ / "s" / ("run_" + std::to_string(i)) / "checkpoint.json"));
  EXPECT_NE(run("sweep --param lambda --values 1,x --spec " + spec.string()).status, 0);
}

TEST_F(Cli, AnalyzeFeaturesHistogramsSumToInstances) {
  const fs::path spec = write_spec("spec.json", toy_spec());
  ASSERT_EQ(run("train --spec " + spec.string() + " --out " + (dir_ / "run").string()).status, 0);
  const std::string ckpt = (dir_ / "run" / "checkpoint.json").string();
  const Result a = run("analyze-features --checkpoint " + ckpt +
                       " --instances 64 --augmentations 4 --seed 1 --bins 8 --out " + (dir_ / "f").string());
  ASSERT_EQ(a.status, 0);
  for (const char* f : {"similarity_hist.csv", "variance_hist.csv"}) {
    std::size_t total = 0;
    for (const std::string& c : column(slurp(dir_ / "f" / f), 2)) total += std::stoul(c);
    EXPECT_EQ(total, 64u) << f;
  }
  const Result b = run("analyze-features --checkpoint " + ckpt + " --instances 64 --augmentations 4 --seed 1 --bins 8");
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, RequiresASubcommand) { EXPECT_NE(run("").status, 0); }
