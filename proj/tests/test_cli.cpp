#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {
const fs::path& workdir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / ("xxzim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

int run(const std::string& args, const std::string& env = "") {
  std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" XXZIM_CLI_PATH "' " + args + " > last.out 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(workdir() / name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST(Cli, InvalidFlagsExitOne) {
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("build-im --method circuit --N 0 --out x.json"), 1);
  EXPECT_EQ(run("build-im --method nope --N 1 --out x.json"), 1);
  EXPECT_EQ(run("build-im --method bethe --N 2 --digits 5 --out x.json"), 1);
}

TEST(Cli, CapacityExitThree) {
  EXPECT_EQ(run("build-im --method circuit --N 6 --out x.json"), 3);
  EXPECT_EQ(run("build-im --method circuit --N 2 --out x.json", "IM_CAP_QUBITS=4"), 3);
  EXPECT_EQ(run("build-im --method circuit --N 1 --out x.json", "IM_CAP_QUBITS=4"), 0);
}

TEST(Cli, RoutesAgreeAndToleranceExitTwo) {
  ASSERT_EQ(run("build-im --method circuit --N 2 --u 0.6 --q 1.5 --out c.json"), 0);
  ASSERT_EQ(run("build-im --method fermion --N 2 --u 0.6 --q 1.5 --out f.json"), 0);
  EXPECT_EQ(run("compare-im --a c.json --b f.json --tol 1e-10"), 0);
  EXPECT_NE(slurp("last.out").find("threshold"), std::string::npos);
  EXPECT_EQ(run("compare-im --a c.json --b f.json --tol 1e-30"), 2);
  auto j = slurp("c.json");
  EXPECT_NE(j.find("\"ordering\""), std::string::npos);
  EXPECT_NE(j.find("appendixC"), std::string::npos);
}

TEST(Cli, BetheOutputCarriesLadder) {
  ASSERT_EQ(run("build-im --method bethe --N 1 --u 0.6 --q 1.5 --out b.json"), 0);
  auto j = slurp("b.json");
  EXPECT_NE(j.find("\"digits\""), std::string::npos);
  EXPECT_NE(j.find("\"epsilon_ladder\""), std::string::npos);
}

TEST(Cli, FixedPointAndCorrelator) {
  ASSERT_EQ(run("build-im --method circuit --N 2 --eta 0.2+0.9i --u 0.4 --q 1.3 --out g.json"), 0);
  EXPECT_EQ(run("fixed-point --N 2 --eta 0.2+0.9i --u 0.4 --q 1.3 --v 0.2+0.1i"), 0);
  EXPECT_EQ(run("correlator --left g.json --right g.json --obs sz"), 0);
  EXPECT_EQ(run("correlator --left g.json --right g.json --obs nonsense"), 1);
}

TEST(Cli, JordanMultCsv) {
  ASSERT_EQ(run("jordan-mult --N 4 --n 2,2,2,2 --exact --out m.csv"), 0);
  std::istringstream in(slurp("m.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "N,n1,n2,n3,n4,D,exact,saddle_leading,saddle_numeric,rel_err");
  long sum = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_GE(f.size(), 7u);
    sum += std::stol(f[5]) * std::stol(f[6]);
  }
  EXPECT_EQ(sum, 1296);
  EXPECT_EQ(run("jordan-mult --N 4 --n 2,2,2 --exact --out m.csv"), 1);
}

TEST(Cli, Deterministic) {
  ASSERT_EQ(run("build-im --method circuit --N 2 --u 0.6 --q 1.5 --out d1.json"), 0);
  ASSERT_EQ(run("build-im --method circuit --N 2 --u 0.6 --q 1.5 --out d2.json"), 0);
  EXPECT_EQ(slurp("d1.json"), slurp("d2.json"));
  ASSERT_EQ(run("verify-identities --eta 0.3+0.8i --u 0.4 --trials 20 --seed 3"), 0);
  auto a = slurp("last.out");
  ASSERT_EQ(run("verify-identities --eta 0.3+0.8i --u 0.4 --trials 20 --seed 3"), 0);
  EXPECT_EQ(a, slurp("last.out"));
  ASSERT_EQ(run("basis --family jacobi --N 12 --s 0.5 --out b1.csv"), 0);
  ASSERT_EQ(run("basis --family jacobi --N 12 --s 0.5 --out b2.csv"), 0);
  EXPECT_EQ(slurp("b1.csv"), slurp("b2.csv"));
  EXPECT_EQ(slurp("b1.csv").substr(0, 18), "sector,m,site,re,i");
}

TEST(Cli, FreeFermionCheck) {
  EXPECT_EQ(run("ff-check --N 2 --u 0.7 --v 0.35+0.2i --q 2"), 0);
  EXPECT_EQ(run("ff-check --N 2 --u 0.7 --v 0 --q 2"), 1);
}
