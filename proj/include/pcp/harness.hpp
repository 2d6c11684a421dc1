#pragma once

// Experiment engine: benchmark tables of exact recovery and phase-transition
// grids over (rank, density).

#include "pcp/core.hpp"
#include "pcp/io.hpp"
#include "pcp/rng.hpp"
#include "pcp/solver.hpp"
#include "pcp/synth.hpp"

#include <atomic>
#include <bit>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace pcp {

// ---------------------------------------------------------------------------
// Benchmark tables

struct BenchPreset {
  std::string name;
  std::vector<Index> sizes;
  double rank_fraction = 0.05;     // rank(L0) = rank_fraction * n
  double support_fraction = 0.05;  // ||S0||_0 = support_fraction * n^2
};

inline const std::vector<BenchPreset>& bench_presets() {
  static const std::vector<BenchPreset> presets{
      {"table1a_small", {100, 200, 500}, 0.05, 0.05},
      {"table1b_small", {100, 200, 500}, 0.05, 0.10},
      {"table1a_full", {500, 1000, 2000, 3000}, 0.05, 0.05},
      {"table1b_full", {500, 1000, 2000, 3000}, 0.05, 0.10},
  };
  return presets;
}

inline const BenchPreset& find_preset(const std::string& name) {
  for (const auto& p : bench_presets()) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("unknown bench preset '" + name + "'");
}

struct BenchRow {
  std::string preset;
  Index n = 0;
  std::size_t rank_l0 = 0;
  std::size_t card_s0 = 0;
  std::size_t rank_l_hat = 0;
  std::size_t card_s_hat = 0;
  double rel_error = 0.0;
  std::size_t svd_count = 0;
  double time_s = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// The instance solved for one benchmark row: square n x n, rank
/// round(rank_fraction n), a uniformly drawn support of exactly
/// round(support_fraction n^2) entries with random signs.
inline ProblemSpec bench_spec(const BenchPreset& preset, Index n, std::uint64_t seed) {
  ProblemSpec spec;
  spec.n1 = spec.n2 = n;
  spec.r = static_cast<Index>(std::lround(preset.rank_fraction * static_cast<double>(n)));
  spec.support_size = static_cast<std::size_t>(std::llround(preset.support_fraction * static_cast<double>(n * n)));
  spec.rho = static_cast<double>(*spec.support_size) / static_cast<double>(n * n);
  spec.sign_model = SignModel::kRandom;
  spec.seed = RngState{seed, static_cast<std::uint64_t>(n)};
  return spec;
}

inline BenchRow run_bench_instance(const BenchPreset& preset, Index n, std::uint64_t seed,
                                   const SolverConfig& cfg = {}) {
  const ProblemInstance inst = gen_problem(bench_spec(preset, n, seed));
  SolverConfig solver_cfg = cfg;
  if (!solver_cfg.lambda) solver_cfg.lambda = 1.0 / std::sqrt(static_cast<double>(n));
  const PcpSolution sol = solve_pcp(inst.m, solver_cfg);
  BenchRow row;
  row.preset = preset.name;
  row.n = n;
  row.rank_l0 = svd_full(inst.l0).rank();
  row.card_s0 = inst.omega.size();
  row.rank_l_hat = sol.rank_l;
  row.card_s_hat = sol.card_s;
  row.rel_error = relative_error(sol.l_hat, inst.l0);
  row.svd_count = sol.svd_count;
  row.time_s = sol.wall_time.count();
  row.converged = sol.converged;
  row.iterations = sol.iterations;
  return row;
}

/// Runs every size of the preset. Non-convergence is recorded in the row.
inline std::vector<BenchRow> run_bench_table(const std::string& preset_name, std::uint64_t seed = 1,
                                             const SolverConfig& cfg = {}) {
  const BenchPreset& preset = find_preset(preset_name);
  std::vector<BenchRow> rows;
  for (const Index n : preset.sizes) rows.push_back(run_bench_instance(preset, n, seed, cfg));
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "preset,n,rank_l0,card_s0,rank_l_hat,card_s_hat,rel_error,svd_count,time_s\n";
  for (const auto& r : rows) {
    out << r.preset << ',' << r.n << ',' << r.rank_l0 << ',' << r.card_s0 << ',' << r.rank_l_hat << ','
        << r.card_s_hat << ',' << detail::format_double(r.rel_error) << ',' << r.svd_count << ','
        << detail::format_double(r.time_s) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Phase-transition grids

enum class PhaseMode { kPcpRandom, kPcpCoherent, kMatrixCompletion };

inline std::string to_string(PhaseMode m) {
  switch (m) {
    case PhaseMode::kPcpRandom:
      return "pcp-random";
    case PhaseMode::kPcpCoherent:
      return "pcp-coherent";
    case PhaseMode::kMatrixCompletion:
      return "mc";
  }
  return "?";
}

inline PhaseMode parse_phase_mode(const std::string& s) {
  if (s == "pcp-random" || s == "pcp_random") return PhaseMode::kPcpRandom;
  if (s == "pcp-coherent" || s == "pcp_coherent") return PhaseMode::kPcpCoherent;
  if (s == "mc") return PhaseMode::kMatrixCompletion;
  throw InvalidArgument("unknown phase mode '" + s + "'");
}

struct PhaseGridSpec {
  Index n = 100;
  std::vector<Index> r_values;
  std::vector<double> rho_values;
  int trials = 10;
  PhaseMode mode = PhaseMode::kPcpRandom;
  double success_tol = 1e-3;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
  SolverConfig solver{};

  void validate() const {
    require(n >= 1, "PhaseGridSpec: n must be positive");
    require(trials >= 1, "PhaseGridSpec: trials must be at least 1");
    require(success_tol > 0.0, "PhaseGridSpec: success_tol must be positive");
    for (const Index r : r_values) require(r >= 0 && r <= n, "PhaseGridSpec: rank out of range");
    for (const double rho : rho_values) require(rho >= 0.0 && rho <= 1.0, "PhaseGridSpec: rho must lie in [0, 1]");
  }
};

struct TrialResult {
  PhaseMode mode = PhaseMode::kPcpRandom;
  Index n = 0;
  Index r = 0;
  double rho = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double rel_error = 0.0;  // NaN when the trial threw
  bool success = false;
  int iters = 0;
};

struct CellResult {
  Index r = 0;
  double rho = 0.0;
  int successes = 0;
  int trials = 0;
  double mean_rel_error = 0.0;
  double mean_iters = 0.0;
  std::vector<TrialResult> detail;
};

/// Seed of one trial: hash of (base_seed, r, rho bits, trial index).
inline std::uint64_t trial_seed(std::uint64_t base_seed, Index r, double rho, int trial) {
  return hash_words(base_seed, static_cast<std::uint64_t>(r), std::bit_cast<std::uint64_t>(rho),
                    static_cast<std::uint64_t>(trial));
}

/// Runs one (r, rho, trial) instance. In mc mode rho is the probability that
/// an entry is omitted.
inline TrialResult run_phase_trial(const PhaseGridSpec& spec, Index r, double rho, int trial) {
  TrialResult t;
  t.mode = spec.mode;
  t.n = spec.n;
  t.r = r;
  t.rho = rho;
  t.trial = trial;
  t.seed = trial_seed(spec.base_seed, r, rho, trial);
  ProblemSpec ps;
  ps.n1 = ps.n2 = spec.n;
  ps.r = r;
  ps.rho = rho;
  ps.sign_model = spec.mode == PhaseMode::kPcpCoherent ? SignModel::kCoherent : SignModel::kRandom;
  ps.seed = RngState{t.seed, 0};
  try {
    if (spec.mode == PhaseMode::kMatrixCompletion) {
      const CompletionInstance ci = gen_completion_problem(ps, 1.0 - rho, 0.0);
      const PcpSolution sol = solve_nuclear_completion(ci.y, ci.obs, spec.solver);
      t.rel_error = relative_error(sol.l_hat, ci.instance.l0);
      t.iters = sol.iterations;
    } else {
      const ProblemInstance inst = gen_problem(ps);
      const PcpSolution sol = solve_pcp(inst.m, spec.solver);
      t.rel_error = relative_error(sol.l_hat, inst.l0);
      t.iters = sol.iterations;
    }
    t.success = t.rel_error <= spec.success_tol;
  } catch (const Error&) {
    t.rel_error = std::numeric_limits<double>::quiet_NaN();
    t.success = false;
  }
  return t;
}

/// Every (r, rho) cell of the grid, in r-major order. Trials may run on
/// several threads; each owns its RNG substream so results do not depend
/// on scheduling.
inline std::vector<CellResult> run_phase_grid(const PhaseGridSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t cell;
    Index r;
    double rho;
    int trial;
  };
  std::vector<Job> jobs;
  std::vector<CellResult> cells;
  for (const Index r : spec.r_values) {
    for (const double rho : spec.rho_values) {
      CellResult c;
      c.r = r;
      c.rho = rho;
      c.trials = spec.trials;
      c.detail.resize(static_cast<std::size_t>(spec.trials));
      for (int k = 0; k < spec.trials; ++k) jobs.push_back({cells.size(), r, rho, k});
      cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      cells[job.cell].detail[static_cast<std::size_t>(job.trial)] = run_phase_trial(spec, job.r, job.rho, job.trial);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(jobs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }

  for (auto& c : cells) {
    double err_sum = 0.0;
    double iter_sum = 0.0;
    for (const auto& t : c.detail) {
      c.successes += t.success ? 1 : 0;
      err_sum += t.rel_error;
      iter_sum += t.iters;
    }
    c.mean_rel_error = err_sum / c.trials;
    c.mean_iters = iter_sum / c.trials;
  }
  return cells;
}

inline void write_phase_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "mode,n,r,rho,trial,seed,rel_error,success,iters\n";
  for (const auto& c : cells) {
    for (const auto& t : c.detail) {
      out << to_string(t.mode) << ',' << t.n << ',' << t.r << ',' << detail::format_double(t.rho) << ',' << t.trial
          << ',' << t.seed << ',' << detail::format_double(t.rel_error) << ',' << (t.success ? 1 : 0) << ','
          << t.iters << '\n';
    }
  }
}

}  // namespace pcp
