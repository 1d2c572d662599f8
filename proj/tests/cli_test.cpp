#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const std::string kCli = CRPX_CLI_PATH;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("crpx_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary inside the scratch directory; stdout lands in out_.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" + kCli + "' " + args + " > stdout.txt 2> stderr.txt";
    const int raw = std::system(cmd.c_str());
    out_ = slurp(dir_ / "stdout.txt");
    err_ = slurp(dir_ / "stderr.txt");
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::string out_, err_;
};

}  // namespace

TEST_F(Cli, RejectsBadParameters) {
  EXPECT_EQ(run("simulate --theta 0 --n 10 --seed 1"), 2);
  EXPECT_NE(err_.find("theta"), std::string::npos);
  EXPECT_EQ(run("simulate --theta 1 --n 10"), 2);
  EXPECT_EQ(run("simulate --theta 1 --n 10 --seed 1 --format xml"), 2);
  EXPECT_EQ(run("verify nosuch"), 2);
  EXPECT_EQ(run("probe --family '3,7,11,19;6,12,21,24' --theta -1"), 2);
  EXPECT_EQ(run("plotdata X1 --grid 0.5,1,2"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, SimulateWritesAtomsAndManifest) {
  ASSERT_EQ(run("simulate --theta 1 --n 2000 --seed 7 --reps 3 --track-atoms 2 --out a"), 0) << err_;
  ASSERT_TRUE(fs::exists(dir_ / "a/atoms_N1.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "a/atoms_N2.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "a/trajectories.jsonl"));
  const auto csv = slurp(dir_ / "a/atoms_N2.csv");
  EXPECT_EQ(csv.rfind("replicate,N,k1,k2,m\r\n", 0), 0u);

  const auto m = Json::parse(slurp(dir_ / "a/manifest.json"));
  EXPECT_EQ(m["tool"], "crpx");
  EXPECT_FALSE(m["version"].get<std::string>().empty());
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["config"]["seed"], 7);

  std::ifstream lines(dir_ / "a/trajectories.jsonl");
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = Json::parse(line);
    EXPECT_EQ(j["replicate"], count);
    ++count;
  }
  EXPECT_EQ(count, 3);
}

TEST_F(Cli, SameSeedSameBytes) {
  ASSERT_EQ(run("simulate --theta 1.5 --n 3000 --seed 11 --reps 4 --first-singleton --out a"), 0) << err_;
  ASSERT_EQ(run("simulate --theta 1.5 --n 3000 --seed 11 --reps 4 --first-singleton --out b --workers 1"), 0) << err_;
  for (const char* f : {"atoms_N1.csv", "trajectories.jsonl", "manifest.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  ASSERT_EQ(run("simulate --theta 1.5 --n 3000 --seed 12 --reps 4 --out c"), 0);
  EXPECT_NE(slurp(dir_ / "a/atoms_N1.csv"), slurp(dir_ / "c/atoms_N1.csv"));
}

TEST_F(Cli, ReplayReproducesOutputs) {
  ASSERT_EQ(run("simulate --theta 2 --n 1500 --seed 5 --reps 2 --track-atoms 3 --out a"), 0) << err_;
  ASSERT_EQ(run("replay a/manifest.json --out r"), 0) << err_;
  for (const char* f : {"atoms_N1.csv", "atoms_N3.csv", "trajectories.jsonl", "manifest.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "r" / f)) << f;
}

TEST_F(Cli, ConfigFileAndPrecedence) {
  std::ofstream(dir_ / "run.ini") << "theta = 2.0\nn = 1000\nseed = 4\nreps = 2\n";
  ASSERT_EQ(run("simulate --config run.ini --seed 9 --out a"), 0) << err_;
  auto m = Json::parse(slurp(dir_ / "a/manifest.json"));
  EXPECT_EQ(m["config"]["theta"], 2.0);
  EXPECT_EQ(m["config"]["seed"], 9);
  EXPECT_EQ(m["config"]["reps"], 2);

  std::ofstream(dir_ / "bad.ini") << "theta = 1\nn = 100\nseed = 1\nbogus = 3\n";
  std::ofstream(dir_ / "partial.ini") << "theta = 2.0\nseed = 4\n";
  EXPECT_EQ(run("simulate --config partial.ini --out p"), 2);
  EXPECT_NE(err_.find("--n"), std::string::npos);

  EXPECT_EQ(run("simulate --config bad.ini --out b"), 2);
  EXPECT_NE(err_.find("bogus"), std::string::npos);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  ASSERT_EQ(run("simulate --theta 1 --n 500 --seed 2", "CRPX_OUT_DIR=envdir"), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "envdir/manifest.json"));
  ASSERT_EQ(run("simulate --theta 1 --n 500 --seed 2 --out flagdir", "CRPX_OUT_DIR=envdir2"), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "flagdir/manifest.json"));
  EXPECT_FALSE(fs::exists(dir_ / "envdir2"));
}

TEST_F(Cli, VerifyExitStatus) {
  EXPECT_EQ(run("verify oracle --families 1000 --seed 3 --out v"), 0) << out_ << err_;
  EXPECT_NE(out_.find("PASS"), std::string::npos);
  const auto rep = Json::parse(slurp(dir_ / "v/verify_oracle.json"));
  EXPECT_EQ(rep["pass"], true);
  const auto m = Json::parse(slurp(dir_ / "v/manifest.json"));
  EXPECT_EQ(m["config"]["families"], 1000);

  EXPECT_EQ(run("verify ewens --n 5 --theta 2 --reps 20000 --quiet --out e"), 0) << out_ << err_;
  EXPECT_EQ(run("verify lemma2 --threshold 2 --out f"), 2);
  EXPECT_EQ(run("verify qprocess --reps 300 --n 2000 --threshold 0.9999 --out g"), 1) << out_ << err_;
  EXPECT_NE(out_.find("FAIL"), std::string::npos);
}

TEST_F(Cli, ProbeWorkedExample) {
  ASSERT_EQ(run("probe --family '3,7,11,19;6,12,21,24' --theta 1"), 0) << err_;
  const auto j = Json::parse(out_);
  const double want = 36.0 / (57120.0 * 255024.0);
  EXPECT_NEAR(j["joint"]["value"].get<double>(), want, 1e-13 * want);
  EXPECT_NEAR(j["stepwise"]["value"].get<double>(), want, 1e-13 * want);
  EXPECT_EQ(j["l"], Json::parse("[2,0]"));
}

TEST_F(Cli, MassAndLaw) {
  ASSERT_EQ(run("mass --window '{\"x\":[[0,1]],\"y\":[1,2]}' --theta 1"), 0) << err_;
  auto j = Json::parse(out_);
  EXPECT_NEAR(j["mass"].get<double>(), 0.5, 1e-14);

  ASSERT_EQ(run("law --theta 1 --grid 1,2 --z 0.5,0.5 --x 0.5,0.5"), 0) << err_;
  j = Json::parse(out_);
  EXPECT_NEAR(j["pgf_X1"].get<double>(), std::exp(-0.875), 1e-14);
}

TEST_F(Cli, SampleLimit) {
  ASSERT_EQ(run("sample-limit --window '{\"x\":[[0,1]],\"y\":[1,\"inf\"]}' --theta 1 --seed 3 --reps 200 --out s"), 0)
      << err_;
  EXPECT_TRUE(fs::exists(dir_ / "s/atoms.csv"));
  const auto j = Json::parse(out_);
  EXPECT_EQ(j["replicates"], 200);
}

TEST_F(Cli, PlotData) {
  ASSERT_EQ(run("plotdata L --seed 1 --out l"), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "l/atoms.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "l/path.csv"));
  ASSERT_EQ(run("plotdata X1 --grid 0.5,1,2 --seed 1 --out x"), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "x/path.csv"));
  ASSERT_EQ(run("plotdata Tij --seed 1 --out t"), 0) << err_;
  const auto boxes = slurp(dir_ / "t/boxes.csv");
  EXPECT_EQ(boxes.rfind("i,j,x_lo,x_hi,y_lo,y_hi,count,lambda", 0), 0u);
}
