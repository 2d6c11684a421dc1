#pragma once

// Random low-rank + sparse problem instances with ground truth.
//
// L0 = X Y^T with X (n1 x r), Y (n2 x r) i.i.d. N(0, 1/max(n1, n2)).
// The support Omega is Bernoulli(rho) (or, for benchmark tables, a uniform
// draw of fixed size). S0 carries random +-1 signs or the signs of L0 on
// Omega. Each ingredient has its own RNG substream, so the two sign models
// share L0 and Omega for the same seed.

#include "pcp/core.hpp"
#include "pcp/prox.hpp"
#include "pcp/rng.hpp"

#include <optional>
#include <string>

namespace pcp {

enum class SignModel { kRandom, kCoherent };

inline std::string to_string(SignModel s) { return s == SignModel::kRandom ? "random" : "coherent"; }

inline SignModel parse_sign_model(const std::string& s) {
  if (s == "random") return SignModel::kRandom;
  if (s == "coherent") return SignModel::kCoherent;
  throw InvalidArgument("unknown sign model '" + s + "'");
}

struct ProblemSpec {
  Index n1 = 0;
  Index n2 = 0;
  Index r = 0;
  double rho = 0.0;
  SignModel sign_model = SignModel::kRandom;
  RngState seed{};
  /// When set, Omega has exactly this many entries (uniform draw) instead of Bernoulli(rho).
  std::optional<std::size_t> support_size;

  void validate() const {
    require(n1 >= 1 && n2 >= 1, "ProblemSpec: dimensions must be positive");
    require(r >= 0 && r <= std::min(n1, n2), "ProblemSpec: rank out of range");
    require(rho >= 0.0 && rho <= 1.0, "ProblemSpec: rho must lie in [0, 1]");
    require(!support_size || *support_size <= static_cast<std::size_t>(n1 * n2),
            "ProblemSpec: support_size exceeds n1 * n2");
  }
};

struct ProblemInstance {
  DenseMatrix l0;
  DenseMatrix s0;
  DenseMatrix m;  // l0 + s0
  SupportMask omega;
  ProblemSpec spec;
};

struct CompletionInstance {
  ProblemInstance instance;  // omega = corrupted observed entries, m = l0 + s0
  SupportMask obs;
  DenseMatrix y;  // P_obs(m), zero off obs
  double p_obs = 1.0;
  double tau = 0.0;
};

namespace detail {

inline DenseMatrix gen_low_rank(const ProblemSpec& spec) {
  if (spec.r == 0) return DenseMatrix::Zero(spec.n1, spec.n2);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(std::max(spec.n1, spec.n2)));
  const DenseMatrix x = gen_gaussian(spec.seed.substream(purpose::kFactorX), spec.n1, spec.r, stddev);
  const DenseMatrix y = gen_gaussian(spec.seed.substream(purpose::kFactorY), spec.n2, spec.r, stddev);
  return x * y.transpose();
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline DenseMatrix signs_on(const SupportMask& omega, const DenseMatrix& l0, SignModel model, RngState stream) {
  DenseMatrix s0 = DenseMatrix::Zero(l0.rows(), l0.cols());
  Rng rng(stream);
  for (const auto& [i, j] : omega) s0(i, j) = model == SignModel::kRandom ? rng.sign() : sgn(l0(i, j));
  return s0;
}

}  // namespace detail

inline ProblemInstance gen_problem(const ProblemSpec& spec) {
  spec.validate();
  ProblemInstance inst;
  inst.spec = spec;
  inst.l0 = detail::gen_low_rank(spec);
  const RngState support_stream = spec.seed.substream(purpose::kSupport);
  inst.omega = spec.support_size ? gen_uniform_mask(support_stream, spec.n1, spec.n2, *spec.support_size)
                                 : gen_bernoulli_mask(support_stream, spec.n1, spec.n2, spec.rho);
  inst.s0 = detail::signs_on(inst.omega, inst.l0, spec.sign_model, spec.seed.substream(purpose::kSigns));
  inst.m = inst.l0 + inst.s0;
  return inst;
}

/// Observed set ~ Bernoulli(p_obs); each observed entry is independently
/// corrupted by an additive +-1 with probability tau. spec.rho is unused.
/// With p_obs = 1 the result coincides with gen_problem at rho = tau.
inline CompletionInstance gen_completion_problem(const ProblemSpec& spec, double p_obs, double tau) {
  spec.validate();
  require(p_obs > 0.0 && p_obs <= 1.0, "gen_completion_problem: p_obs must lie in (0, 1]");
  require(tau >= 0.0 && tau < 1.0, "gen_completion_problem: tau must lie in [0, 1)");
  CompletionInstance out;
  out.p_obs = p_obs;
  out.tau = tau;
  out.obs = gen_bernoulli_mask(spec.seed.substream(purpose::kObserved), spec.n1, spec.n2, p_obs);

  ProblemInstance& inst = out.instance;
  inst.spec = spec;
  inst.spec.rho = tau;
  inst.spec.support_size.reset();
  inst.l0 = detail::gen_low_rank(spec);
  Rng corrupt(spec.seed.substream(purpose::kSupport));
  std::vector<SupportMask::Entry> corrupted;
  for (const auto& e : out.obs) {
    if (corrupt.bernoulli(tau)) corrupted.push_back(e);
  }
  inst.omega = SupportMask::from_entries(spec.n1, spec.n2, std::move(corrupted));
  inst.s0 = detail::signs_on(inst.omega, inst.l0, spec.sign_model, spec.seed.substream(purpose::kSigns));
  inst.m = inst.l0 + inst.s0;
  out.y = proj_support(inst.m, out.obs);
  return out;
}

/// The instance with S0 restricted to a random half of its support.
inline ProblemInstance trim_support(const ProblemInstance& inst, RngState stream) {
  Rng rng(stream);
  std::vector<SupportMask::Entry> kept;
  for (const auto& e : inst.omega) {
    if (rng.bernoulli(0.5)) kept.push_back(e);
  }
  ProblemInstance out = inst;
  out.omega = SupportMask::from_entries(inst.omega.rows(), inst.omega.cols(), std::move(kept));
  out.s0 = proj_support(inst.s0, out.omega);
  out.m = out.l0 + out.s0;
  return out;
}

}  // namespace pcp
