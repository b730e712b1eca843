#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "romkit/cli.hpp"
#include "romkit/csv.hpp"
#include "romkit/package.hpp"
#include "romkit/pod.hpp"
#include "test_support.hpp"

using namespace romkit;
using romkit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

// Greedy package without surrogates, built once through the CLI.
const fs::path& greedy_package() {
  static TempDir dir("cli-greedy");
  static const bool built = [] {
    const CliRun r = cli({"offline", "--model", (dir.path() / "m").string(), "--surrogates", "none"});
    EXPECT_EQ(r.code, 0) << r.err;
    return true;
  }();
  (void)built;
  static const fs::path p = dir.path() / "m";
  return p;
}

}  // namespace

TEST(Cli, ArgumentErrorsExitWithTwo) {
  EXPECT_EQ(cli({}).code, exit_argument);
  EXPECT_EQ(cli({"frobnicate"}).code, exit_argument);
  EXPECT_EQ(cli({"offline", "--model", "x", "--bogus"}).code, exit_argument);
  EXPECT_EQ(cli({"offline", "--model", "x", "--refine", "1"}).code, exit_argument);
  EXPECT_EQ(cli({"offline", "--model", "x", "--train-grid", "10by10"}).code, exit_argument);
  EXPECT_EQ(cli({"offline", "--model", "x", "--method", "svd"}).code, exit_argument);
  EXPECT_EQ(cli({"solve", "--model", greedy_package().string()}).code, exit_argument);
  const CliRun r = cli({"solve", "--model", greedy_package().string(), "--mu", "20,0"});
  EXPECT_EQ(r.code, exit_argument);
  EXPECT_NE(r.err.find("mu0"), std::string::npos);
  EXPECT_EQ(cli({"solve", "--model", greedy_package().string(), "--mu", "1,1", "--n", "99"}).code,
            exit_argument);
  EXPECT_EQ(cli({"solve", "--model", greedy_package().string(), "--mu", "1,1", "--method", "pod-rbf"}).code,
            exit_argument);
}

TEST(Cli, IoErrorsExitWithFour) {
  TempDir dir("cli-io");
  EXPECT_EQ(cli({"solve", "--model", (dir.path() / "nope").string(), "--mu", "1,1"}).code, exit_io);
  fs::copy(greedy_package(), dir.path() / "copy", fs::copy_options::recursive);
  std::ofstream(dir.path() / "copy" / "ops" / "A0.romx", std::ios::trunc) << "ROMX";
  const CliRun r = cli({"solve", "--model", (dir.path() / "copy").string(), "--mu", "1,1"});
  EXPECT_EQ(r.code, exit_io);
  EXPECT_NE(r.err.find("ops/A0.romx"), std::string::npos);
}

TEST(Cli, NumericErrorsExitWithThree) {
  TempDir dir("cli-num");
  const CliRun r = cli({"offline", "--model", dir.path().string(), "--method", "pod", "--n", "3",
                     "--train-grid", "3x3", "--mu0-fixed", "2", "--refine", "8"});
  EXPECT_EQ(r.code, exit_numeric) << r.err;
  EXPECT_FALSE(fs::exists(dir.path() / "manifest.json"));
}

TEST(Cli, GreedyOfflinePrintsTrace) {
  const auto manifest = read_manifest(greedy_package());
  const std::size_t n = manifest["basis"]["dim"].get<std::size_t>();
  EXPECT_GE(n, 3u);
  EXPECT_LE(n, 6u);
  const auto trace = read_csv(greedy_package() / "traces" / "greedy.csv");
  EXPECT_EQ(trace.size(), n + 1);
}

TEST(Cli, SolveWithFomComparisonIsCertified) {
  TempDir dir("cli-solve");
  const CliRun r = cli({"solve", "--model", greedy_package().string(), "--mu", "8,-1", "--n", "4",
                     "--compare-fom", "--output", (dir.path() / "f.csv").string(), "--report",
                     (dir.path() / "r.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir.path() / "r.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "method");
  EXPECT_EQ(rows[1][0], "rb");
  const double en = std::stod(rows[1][5]);
  const double eta = std::stod(rows[1][6]);
  const double eff = std::stod(rows[1][7]);
  EXPECT_LE(en, eta + 1e-12);
  EXPECT_GE(eff, 1.0 - 1e-6);
  EXPECT_LE(eff, std::sqrt(8.0) + 1e-6);
  const auto field = read_csv(dir.path() / "f.csv");
  EXPECT_EQ(field[0], (std::vector<std::string>{"node_index", "x", "y", "value"}));
  EXPECT_EQ(field.size(), 289u + 1);
}

TEST(Cli, ZeroFluxSolveIsZeroField) {
  TempDir dir("cli-zero");
  const CliRun r = cli({"solve", "--model", greedy_package().string(), "--mu", "1,0", "--output",
                     (dir.path() / "f.csv").string(), "--report", (dir.path() / "r.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto field = read_csv(dir.path() / "f.csv");
  for (std::size_t i = 1; i < field.size(); ++i) EXPECT_EQ(std::stod(field[i][3]), 0.0);
}

TEST(Cli, ModelDirectoryFromEnvironment) {
  TempDir dir("cli-env");
  ::setenv("ROM_MODEL_DIR", greedy_package().c_str(), 1);
  const CliRun r = cli({"solve", "--mu", "2,0.5", "--output", (dir.path() / "f.csv").string(),
                     "--report", (dir.path() / "r.csv").string()});
  ::unsetenv("ROM_MODEL_DIR");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir.path() / "f.csv"));
  EXPECT_EQ(cli({"solve", "--mu", "2,0.5"}).code, exit_argument);
}

TEST(Cli, OfflineAndValidateAreDeterministic) {
  TempDir dir("cli-det");
  const std::vector<std::string> offline_flags{"--refine", "8", "--train-grid", "4x4", "--seed", "7",
                                               "--nn-epochs", "300"};
  for (const char* run : {"a", "b"}) {
    std::vector<std::string> args{"offline", "--model", (dir.path() / run / "pkg").string()};
    args.insert(args.end(), offline_flags.begin(), offline_flags.end());
    ASSERT_EQ(cli(args).code, 0);
    ASSERT_EQ(cli({"validate", "--model", (dir.path() / run / "pkg").string(), "--grid", "4x4",
                   "--methods", "all", "--output-dir", (dir.path() / run).string()})
                  .code,
              0);
  }
  for (const char* f : {"report.csv", "convergence.csv", "pkg/manifest.json", "pkg/traces/greedy.csv",
                        "pkg/surrogates/pod_nn/loss.csv"}) {
    const std::string a = slurp(dir.path() / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir.path() / "b" / f)) << f;
  }
  const auto timing = read_csv(dir.path() / "a" / "timing.csv");
  EXPECT_EQ(timing[0], (std::vector<std::string>{"mean_fom_ms", "mean_online_ms", "speedup"}));
}

TEST(Cli, ValidateConvergenceTable) {
  TempDir dir("cli-val");
  ASSERT_EQ(cli({"validate", "--model", greedy_package().string(), "--grid", "5x5", "--output-dir",
                 dir.path().string()})
                .code,
            0);
  const auto rows = read_csv(dir.path() / "convergence.csv");
  ASSERT_GE(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "method");
  EXPECT_EQ(rows[0][2], "mean_en_err");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_LE(std::stod(rows[i][2]), std::stod(rows[i - 1][2]));
    EXPECT_LE(std::stod(rows[i][3]), std::stod(rows[i - 1][3]));
  }
  const auto report = read_csv(dir.path() / "report.csv");
  EXPECT_EQ(report.size(), 1 + 25 * (rows.size() - 1));
  for (std::size_t i = 1; i < report.size(); ++i) {
    EXPECT_LE(std::stod(report[i][5]), std::stod(report[i][6]) + 1e-12);
  }
}

TEST(Cli, PodFixedDimensionSpectrumIdentity) {
  TempDir dir("cli-pod");
  const CliRun r = cli({"offline", "--model", dir.path().string(), "--method", "pod", "--n", "4",
                     "--train-grid", "6x6", "--surrogates", "none"});
  ASSERT_EQ(r.code, 0) << r.err;
  const ModelArtifacts m = load_package(dir.path());
  EXPECT_EQ(m.reduced.dim(), 4u);
  const auto spectrum = read_csv(dir.path() / "traces" / "spectrum.csv");
  ASSERT_EQ(spectrum.size(), 37u);
  double total = 0.0;
  std::vector<double> lambda;
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    lambda.push_back(std::stod(spectrum[i][1]));
    total += lambda.back();
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    double tail = 0.0;
    for (std::size_t k = n; k < lambda.size(); ++k) tail += lambda[k];
    const double direct = mean_projection_error_sq(m.snapshots->fields, m.reduced.basis, n, m.system->gram_x());
    EXPECT_LE(std::abs(direct - tail), 1e-10 * total) << n;
  }
}

TEST(Cli, FixedConductivityPodIsRankOne) {
  TempDir dir("cli-rank1");
  const CliRun r = cli({"offline", "--model", dir.path().string(), "--method", "pod", "--energy", "0.9999",
                     "--train-grid", "3x3", "--mu0-fixed", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("skipping"), std::string::npos);
  EXPECT_EQ(read_manifest(dir.path())["basis"]["dim"], 1);
}

TEST(Cli, SurrogateSolveAndComparison) {
  TempDir dir("cli-sur");
  const fs::path pkg = dir.path() / "pkg";
  ASSERT_EQ(cli({"offline", "--model", pkg.string(), "--surrogates", "pod-rbf,local-pod-rbf"}).code, 0);
  const CliRun r = cli({"solve", "--model", pkg.string(), "--method", "pod-rbf", "--mu", "8,-1",
                     "--compare-fom", "--output", (dir.path() / "f.csv").string(), "--report",
                     (dir.path() / "r.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir.path() / "r.csv");
  EXPECT_EQ(rows[1][0], "pod-rbf");
  EXPECT_LE(std::stod(rows[1][8]), 0.05);

  ASSERT_EQ(cli({"compare-surrogates", "--model", pkg.string(), "--grid", "3x3", "--output",
                 (dir.path() / "c.csv").string(), "--energy-output", (dir.path() / "e.csv").string()})
                .code,
            0);
  const auto cmp = read_csv(dir.path() / "c.csv");
  EXPECT_EQ(cmp[0], (std::vector<std::string>{"method", "mu0", "mu1", "rel_err", "online_ms"}));
  EXPECT_EQ(cmp.size(), 1u + 9 * 3);
  const auto energy = read_csv(dir.path() / "e.csv");
  EXPECT_EQ(energy.size(), 11u);
  for (std::size_t i = 1; i < energy.size(); ++i) EXPECT_LE(std::stoul(energy[i][1]), std::stoul(energy[i][2]));
}
