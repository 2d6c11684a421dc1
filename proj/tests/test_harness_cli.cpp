#include "pcp/cli.hpp"
#include "pcp/harness.hpp"
#include "pcp/io.hpp"
#include "pcp/report.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pcp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pcp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("pcp_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Bench, ScaledRowRecovers) {
  const BenchRow row = run_bench_instance(find_preset("table1a_small"), 100, 1);
  EXPECT_EQ(row.rank_l0, 5u);
  EXPECT_EQ(row.card_s0, 500u);
  EXPECT_EQ(row.rank_l_hat, 5u);
  EXPECT_EQ(row.card_s_hat, 500u);
  EXPECT_LE(row.rel_error, 1e-5);
  EXPECT_TRUE(row.converged);
}

TEST(Bench, CsvColumns) {
  std::ostringstream out;
  BenchRow row;
  row.preset = "p";
  row.n = 3;
  write_bench_csv(out, {row});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "preset,n,rank_l0,card_s0,rank_l_hat,card_s_hat,rel_error,svd_count,time_s");
  EXPECT_THROW(find_preset("nope"), InvalidArgument);
}

TEST(Phase, NoiselessCellAlwaysSucceeds) {
  for (const PhaseMode mode : {PhaseMode::kPcpRandom, PhaseMode::kPcpCoherent, PhaseMode::kMatrixCompletion}) {
    PhaseGridSpec spec;
    spec.n = 30;
    spec.r_values = {1};
    spec.rho_values = {0.0};
    spec.trials = 3;
    spec.mode = mode;
    const auto cells = run_phase_grid(spec);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_EQ(cells[0].successes, 3) << to_string(mode);
  }
}

TEST(Phase, ThreadCountDoesNotChangeResults) {
  PhaseGridSpec spec;
  spec.n = 30;
  spec.r_values = {1, 3};
  spec.rho_values = {0.05, 0.2};
  spec.trials = 2;
  spec.base_seed = 42;
  std::ostringstream a;
  std::ostringstream b;
  write_phase_csv(a, run_phase_grid(spec));
  spec.threads = 3;
  write_phase_csv(b, run_phase_grid(spec));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "mode,n,r,rho,trial,seed,rel_error,success,iters");
}

TEST(Phase, CellBookkeeping) {
  PhaseGridSpec spec;
  spec.n = 20;
  spec.r_values = {1, 2};
  spec.rho_values = {0.0, 0.1, 0.3};
  spec.trials = 2;
  const auto cells = run_phase_grid(spec);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[1].r, 1);
  EXPECT_EQ(cells[1].rho, 0.1);
  EXPECT_EQ(cells[3].r, 2);
  for (const auto& c : cells) {
    EXPECT_GE(c.successes, 0);
    EXPECT_LE(c.successes, c.trials);
    for (const auto& t : c.detail) EXPECT_EQ(t.seed, trial_seed(0, c.r, c.rho, t.trial));
  }
  spec.trials = 0;
  EXPECT_THROW(run_phase_grid(spec), InvalidArgument);
}

TEST(Phase, TrimmingPreservesSuccess) {
  PhaseGridSpec spec;
  spec.n = 50;
  for (int trial = 0; trial < 4; ++trial) {
    const TrialResult t = run_phase_trial(spec, 2, 0.05, trial);
    if (!t.success) continue;
    ProblemSpec ps;
    ps.n1 = ps.n2 = 50;
    ps.r = 2;
    ps.rho = 0.05;
    ps.seed = {t.seed, 0};
    const ProblemInstance trimmed = trim_support(gen_problem(ps), {t.seed, 1});
    EXPECT_LE(relative_error(solve_pcp(trimmed.m).l_hat, trimmed.l0), spec.success_tol) << "trial " << trial;
  }
}

TEST(Cli, SynthIsDeterministic) {
  TempDir dir("synth");
  for (const char* leaf : {"a", "b"}) {
    const CliRun r = run_cli({"synth", "--n1", "12", "--n2", "9", "--rank", "2", "--rho", "0.1", "--seed", "5",
                              "--out-dir", dir / leaf});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"l0.pcpmat", "s0.pcpmat", "m.pcpmat", "omega.pcpmask", "instance.json"}) {
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
  }
  const Json meta = Json::parse(slurp(dir.path() / "a" / "instance.json"));
  EXPECT_EQ(meta["spec"]["n1"].get<int>(), 12);
  EXPECT_EQ(meta["spec"]["sign_model"].get<std::string>(), "random");
}

TEST(Cli, DecomposeReportIsConsistentWithOutputs) {
  TempDir dir("decompose");
  ASSERT_EQ(run_cli({"synth", "--n1", "40", "--n2", "40", "--rank", "2", "--rho", "0.05", "--seed", "7", "--out-dir",
                     dir / "inst"})
                .code,
            0);
  const CliRun r = run_cli({"decompose", "--input", dir / "inst/m.pcpmat", "--out-l", dir / "l.pcpmat", "--out-s",
                            dir / "s.pcpmat", "--report", dir / "report.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = Json::parse(slurp(dir / "report.json"));
  for (const char* key : {"n1", "n2", "lambda", "beta", "iterations", "svd_count", "final_residual", "rank_l",
                          "card_s", "converged", "wall_time_ms"}) {
    ASSERT_TRUE(rep.contains(key)) << key;
  }
  EXPECT_TRUE(rep["n1"].is_number_integer());
  EXPECT_TRUE(rep["lambda"].is_number_float());
  EXPECT_TRUE(rep["converged"].is_boolean());
  EXPECT_EQ(rep.size(), 11u);

  const DenseMatrix m = read_matrix(dir / "inst/m.pcpmat");
  const DenseMatrix l = read_matrix(dir / "l.pcpmat");
  const DenseMatrix s = read_matrix(dir / "s.pcpmat");
  const double residual = (m - l - s).norm() / m.norm();
  EXPECT_NEAR(residual, rep["final_residual"].get<double>(), 1e-12);
  EXPECT_LE(relative_error(l, read_matrix(dir / "inst/l0.pcpmat")), 1e-6);
  EXPECT_EQ(rep["rank_l"].get<int>(), 2);
}

TEST(Cli, CompleteAndMc) {
  TempDir dir("complete");
  const CompletionInstance ci = gen_completion_problem(
      [] {
        ProblemSpec s;
        s.n1 = s.n2 = 40;
        s.r = 2;
        s.seed = {3, 0};
        return s;
      }(),
      0.7, 0.0);
  write_matrix(dir / "y.pcpmat", ci.y);
  write_mask(dir / "obs.pcpmask", ci.obs);
  const CliRun c = run_cli({"complete", "--input", dir / "y.pcpmat", "--mask", dir / "obs.pcpmask", "--out-l",
                            dir / "l.pcpmat", "--out-s", dir / "s.pcpmat", "--report", dir / "c.json"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_LE(relative_error(read_matrix(dir / "l.pcpmat"), ci.instance.l0), 1e-4);
  const CliRun m = run_cli({"mc", "--input", dir / "y.pcpmat", "--mask", dir / "obs.pcpmask", "--out-l",
                            dir / "mc.pcpmat", "--report", dir / "mc.json"});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_TRUE(Json::parse(slurp(dir / "mc.json"))["lambda"].is_null());
  EXPECT_LE(relative_error(read_matrix(dir / "mc.pcpmat"), ci.instance.l0), 1e-4);
}

TEST(Cli, PhaseSingleCellMatchesLibrary) {
  TempDir dir("phase");
  const CliRun r = run_cli({"phase", "--n", "30", "--r-list", "2", "--rho-list", "0.05", "--trials", "3", "--seed",
                            "9", "--out", dir / "grid.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  PhaseGridSpec spec;
  spec.n = 30;
  spec.r_values = {2};
  spec.rho_values = {0.05};
  spec.trials = 3;
  spec.base_seed = 9;
  std::ostringstream expected;
  write_phase_csv(expected, run_phase_grid(spec));
  EXPECT_EQ(slurp(dir / "grid.csv"), expected.str());
}

TEST(Cli, CertifyWritesReport) {
  TempDir dir("certify");
  const CliRun r = run_cli({"certify", "--n", "30", "--rank", "1", "--rho", "0.02", "--seed", "1", "--report",
                            dir / "cert.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(dir / "cert.json"));
  EXPECT_TRUE(j.contains("pass"));
  EXPECT_NE(r.out.find("certificate"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  TempDir dir("exit");
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"decompose", "--input", dir / "missing.pcpmat", "--out-l", dir / "l", "--out-s", dir / "s",
                     "--report", dir / "r"})
                .code,
            kExitUsage);
  {
    std::ofstream bad(dir / "bad.pcpmat");
    bad << "pcpmat 1\n2 2\n1 2 3\n";
  }
  const CliRun parse = run_cli({"decompose", "--input", dir / "bad.pcpmat", "--out-l", dir / "l", "--out-s",
                                dir / "s", "--report", dir / "r"});
  EXPECT_EQ(parse.code, kExitUsage);
  EXPECT_NE(parse.err.find("line"), std::string::npos);

  write_matrix(dir / "m.pcpmat", gen_problem([] {
                                   ProblemSpec s;
                                   s.n1 = s.n2 = 20;
                                   s.r = 2;
                                   s.rho = 0.1;
                                   s.seed = {1, 0};
                                   return s;
                                 }())
                                     .m);
  EXPECT_EQ(run_cli({"decompose", "--input", dir / "m.pcpmat", "--lambda", "-1", "--out-l", dir / "l", "--out-s",
                     dir / "s", "--report", dir / "r"})
                .code,
            kExitUsage);
  const CliRun capped = run_cli({"decompose", "--input", dir / "m.pcpmat", "--max-iters", "1", "--out-l", dir / "l",
                                 "--out-s", dir / "s", "--report", dir / "r"});
  EXPECT_EQ(capped.code, kExitNotConverged);
  EXPECT_FALSE(Json::parse(slurp(dir / "r"))["converged"].get<bool>());
}

TEST(Cli, BinaryExitStatus) {
  const std::string cmd = std::string(PCP_CLI_PATH) + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), kExitUsage);
  const int help = std::system((std::string(PCP_CLI_PATH) + " --help > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(help), kExitOk);
}
