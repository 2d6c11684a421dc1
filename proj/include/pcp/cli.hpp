#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or input error,
// 2 numerical failure, 3 solver did not converge (decompose/complete only).

#include "pcp/certify.hpp"
#include "pcp/harness.hpp"
#include "pcp/io.hpp"
#include "pcp/report.hpp"
#include "pcp/solver.hpp"
#include "pcp/synth.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace pcp {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitNotConverged = 3,
};

namespace detail {

inline std::optional<double> parse_lambda(const std::string& s) {
  if (s == "auto") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument("--lambda must be 'auto' or a positive number, got '" + s + "'");
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) {
      throw InvalidArgument(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(flag) + ": empty list");
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"Low-rank plus sparse matrix decomposition by Principal Component Pursuit", "pcp"};
  app.require_subcommand(1);

  // decompose
  std::string input, mask_path, out_l, out_s, report, lambda_arg = "auto";
  double tol = 1e-7;
  int max_iters = 1000;
  auto* decompose = app.add_subcommand("decompose", "Split a matrix into low-rank and sparse parts");
  decompose->add_option("--input", input, "Matrix file")->required();
  decompose->add_option("--lambda", lambda_arg, "Sparsity weight: auto or a positive number");
  decompose->add_option("--tol", tol, "Relative stopping tolerance");
  decompose->add_option("--max-iters", max_iters, "Iteration cap");
  decompose->add_option("--out-l", out_l, "Low-rank output file")->required();
  decompose->add_option("--out-s", out_s, "Sparse output file")->required();
  decompose->add_option("--report", report, "JSON report file")->required();

  auto* complete = app.add_subcommand("complete", "Robust completion from observed, corrupted entries");
  complete->add_option("--input", input, "Matrix file (entries off the mask are ignored)")->required();
  complete->add_option("--mask", mask_path, "Observed-entry mask file")->required();
  complete->add_option("--lambda", lambda_arg, "Sparsity weight: auto or a positive number");
  complete->add_option("--tol", tol, "Relative stopping tolerance");
  complete->add_option("--max-iters", max_iters, "Iteration cap");
  complete->add_option("--out-l", out_l, "Low-rank output file")->required();
  complete->add_option("--out-s", out_s, "Sparse output file")->required();
  complete->add_option("--report", report, "JSON report file")->required();

  auto* mc = app.add_subcommand("mc", "Nuclear-norm matrix completion");
  mc->add_option("--input", input, "Matrix file (entries off the mask are ignored)")->required();
  mc->add_option("--mask", mask_path, "Observed-entry mask file")->required();
  mc->add_option("--tol", tol, "Relative stopping tolerance");
  mc->add_option("--max-iters", max_iters, "Iteration cap");
  mc->add_option("--out-l", out_l, "Completed matrix output file")->required();
  mc->add_option("--report", report, "JSON report file")->required();

  Index n1 = 0, n2 = 0, n = 0, rank = 0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string sign_model = "random", out_dir;
  auto* synth = app.add_subcommand("synth", "Generate a random low-rank plus sparse instance");
  synth->add_option("--n1", n1, "Rows")->required()->check(CLI::PositiveNumber);
  synth->add_option("--n2", n2, "Columns")->required()->check(CLI::PositiveNumber);
  synth->add_option("--rank", rank, "Rank of L0")->required()->check(CLI::NonNegativeNumber);
  synth->add_option("--rho", rho, "Density of the sparse support")->required()->check(CLI::Range(0.0, 1.0));
  synth->add_option("--sign-model", sign_model, "random or coherent")->check(CLI::IsMember({"random", "coherent"}));
  synth->add_option("--seed", seed, "Random seed")->required();
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* certify = app.add_subcommand("certify", "Build and check a dual certificate for a random instance");
  certify->add_option("--n", n, "Dimension")->required()->check(CLI::Range(2, 100000));
  certify->add_option("--rank", rank, "Rank of L0")->required()->check(CLI::PositiveNumber);
  certify->add_option("--rho", rho, "Density of the sparse support")->required()->check(CLI::Range(0.0, 1.0));
  certify->add_option("--seed", seed, "Random seed")->required();
  certify->add_option("--report", report, "JSON report file")->required();

  std::string r_list, rho_list, mode = "pcp-random", out_csv;
  int trials = 10;
  unsigned threads = 1;
  auto* phase = app.add_subcommand("phase", "Phase-transition grid over (rank, density)");
  phase->add_option("--n", n, "Dimension")->required()->check(CLI::PositiveNumber);
  phase->add_option("--r-list", r_list, "Comma-separated ranks")->required();
  phase->add_option("--rho-list", rho_list, "Comma-separated densities")->required();
  phase->add_option("--trials", trials, "Trials per cell")->check(CLI::PositiveNumber);
  phase->add_option("--mode", mode, "pcp-random, pcp-coherent or mc")
      ->check(CLI::IsMember({"pcp-random", "pcp-coherent", "mc"}));
  phase->add_option("--seed", seed, "Base seed");
  phase->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  phase->add_option("--out", out_csv, "CSV output file")->required();

  std::string preset;
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "Exact-recovery benchmark table");
  bench->add_option("--preset", preset, "table1a_small, table1b_small, table1a_full or table1b_full")
      ->required()
      ->check(CLI::IsMember({"table1a_small", "table1b_small", "table1a_full", "table1b_full"}));
  bench->add_option("--seed", bench_seed, "Random seed");
  bench->add_option("--out", out_csv, "CSV output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  auto solver_config = [&] {
    SolverConfig cfg;
    cfg.lambda = detail::parse_lambda(lambda_arg);
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    return cfg;
  };

  try {
    if (*decompose || *complete) {
      const SolverConfig cfg = solver_config();
      const DenseMatrix m = read_matrix(input);
      const PcpSolution sol =
          *decompose ? solve_pcp(m, cfg) : solve_pcp_completion(m, read_mask(mask_path), cfg);
      write_matrix(out_l, sol.l_hat);
      write_matrix(out_s, sol.s_hat);
      write_json(report, solution_report(sol, m.rows(), m.cols()));
      if (!sol.converged) {
        err << "warning: no convergence after " << sol.iterations << " iterations (residual "
            << sol.final_residual << ")\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }
    if (*mc) {
      SolverConfig cfg;
      cfg.tol = tol;
      cfg.max_iters = max_iters;
      const DenseMatrix m = read_matrix(input);
      const PcpSolution sol = solve_nuclear_completion(m, read_mask(mask_path), cfg);
      write_matrix(out_l, sol.l_hat);
      write_json(report, solution_report(sol, m.rows(), m.cols()));
      if (!sol.converged) {
        err << "warning: no convergence after " << sol.iterations << " iterations\n";
      }
      return kExitOk;
    }
    if (*synth) {
      ProblemSpec spec;
      spec.n1 = n1;
      spec.n2 = n2;
      spec.r = rank;
      spec.rho = rho;
      spec.sign_model = parse_sign_model(sign_model);
      spec.seed = RngState{seed, 0};
      export_instance(gen_problem(spec), out_dir);
      return kExitOk;
    }
    if (*certify) {
      const CertificateReport rep = certify_instance(n, rank, rho, seed);
      write_json(report, certificate_report(rep));
      out << "certificate " << (rep.pass ? "valid" : "not valid") << "\n";
      return kExitOk;
    }
    if (*phase) {
      PhaseGridSpec spec;
      spec.n = n;
      spec.r_values = detail::parse_list<Index>(r_list, "--r-list");
      spec.rho_values = detail::parse_list<double>(rho_list, "--rho-list");
      spec.trials = trials;
      spec.mode = parse_phase_mode(mode);
      spec.base_seed = seed;
      spec.threads = threads;
      std::ostringstream csv;
      write_phase_csv(csv, run_phase_grid(spec));
      detail::write_text(out_csv, csv.str());
      return kExitOk;
    }
    if (*bench) {
      std::ostringstream csv;
      const auto rows = run_bench_table(preset, bench_seed);
      write_bench_csv(csv, rows);
      detail::write_text(out_csv, csv.str());
      for (const auto& row : rows) {
        if (!row.converged) err << "warning: n = " << row.n << " did not converge\n";
      }
      return kExitOk;
    }
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pcp
