#pragma once

// Numerical dual certificates for exact low-rank + sparse recovery.
//
// For L0 = U Sigma V^T with tangent space T and sparse support Omega, a pair
// W = W^L + W^S in T^perp certifies that (L0, S0) is the unique PCP optimum
// when
//
//   ||W^L + W^S||                            < 1/2
//   ||P_Omega(U V^T + W^L)||_F              <= lambda / 4
//   ||P_Omega^perp(U V^T + W^L + W^S)||_inf  < lambda / 2
//
// W^L comes from the golfing recursion over j0 Bernoulli(q) batches whose
// union is the complement of Omega; W^S is the minimum-norm element of T^perp
// with P_Omega W^S = lambda sgn(S0), summed as a Neumann series.

#include "pcp/core.hpp"
#include "pcp/norms.hpp"
#include "pcp/prox.hpp"
#include "pcp/rng.hpp"
#include "pcp/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcp {

struct IncoherenceReport {
  double mu1 = 0.0;  // (n1 / r) max_i ||U^T e_i||^2
  double mu2 = 0.0;  // (n2 / r) max_j ||V^T e_j||^2
  double mu3 = 0.0;  // (n1 n2 / r) ||U V^T||_inf^2
  double mu = 0.0;   // max of the three
  Index r = 0;
};

inline IncoherenceReport incoherence(const TangentSpace& t) {
  const Index r = t.rank();
  if (r == 0) throw InvalidArgument("incoherence: rank-zero subspace");
  const double n1 = static_cast<double>(t.rows());
  const double n2 = static_cast<double>(t.cols());
  IncoherenceReport rep;
  rep.r = r;
  rep.mu1 = n1 / static_cast<double>(r) * t.u().rowwise().squaredNorm().maxCoeff();
  rep.mu2 = n2 / static_cast<double>(r) * t.v().rowwise().squaredNorm().maxCoeff();
  const double spike = norm_linf(t.sign_matrix());
  rep.mu3 = n1 * n2 / static_cast<double>(r) * spike * spike;
  rep.mu = std::max({rep.mu1, rep.mu2, rep.mu3});
  return rep;
}

/// Incoherence of the singular spaces of `l` at its numerical rank.
inline IncoherenceReport incoherence(const DenseMatrix& l) {
  if (l.norm() == 0.0) throw InvalidArgument("incoherence: zero matrix");
  return incoherence(TangentSpace::of(l));
}

struct ConcentrationStats {
  std::vector<double> deviations;  // ||P_T - rho0^-1 P_T P_Omega0 P_T|| per trial (best estimate on failure)
  std::vector<bool> converged;
  double max_deviation = 0.0;
};

/// Samples Omega0 ~ Bernoulli(rho0) per trial and measures how far
/// rho0^-1 P_T P_Omega0 P_T is from P_T in operator norm.
inline ConcentrationStats measure_concentration(const TangentSpace& t, double rho0, RngState rng, int trials,
                                                const EigenIterationOptions& opts = {}) {
  require(rho0 > 0.0 && rho0 <= 1.0, "measure_concentration: rho0 must lie in (0, 1]");
  require(trials >= 1, "measure_concentration: trials must be positive");
  ConcentrationStats stats;
  for (int k = 0; k < trials; ++k) {
    const SupportMask omega0 = gen_bernoulli_mask(rng.substream(static_cast<std::uint64_t>(k)), t.rows(), t.cols(), rho0);
    double dev = 0.0;
    bool ok = true;
    if (omega0.size() != static_cast<std::size_t>(t.rows() * t.cols()) && t.rank() > 0) {
      auto map = [&](const DenseMatrix& x) {
        const DenseMatrix ptx = proj_tangent(x, t);
        return DenseMatrix(ptx - proj_tangent(proj_support(ptx, omega0), t) / rho0);
      };
      try {
        dev = spectral_radius(map, detail::tangent_start(t, opts.fallback), opts);
      } catch (const NumericalFailure& e) {
        dev = e.best_estimate();
        ok = false;
      }
    }
    stats.deviations.push_back(dev);
    stats.converged.push_back(ok);
    stats.max_deviation = std::max(stats.max_deviation, dev);
  }
  return stats;
}

struct GolfingResult {
  DenseMatrix w_l;  // P_T^perp Y_{j0}
  DenseMatrix y_final;
  SupportMask omega;  // complement of the union of the batches
  std::vector<SupportMask> batches;
  int j0 = 0;
  double q = 0.0;
  std::vector<double> z_fro;   // ||Z_j||_F for j = 0..j0, Z_j = U V^T - P_T Y_j
  std::vector<double> z_linf;  // ||Z_j||_inf
};

/// j0 = 2 ceil(ln n) with n = max(n1, n2).
inline int golfing_steps(Index n1, Index n2) {
  return 2 * static_cast<int>(std::ceil(std::log(static_cast<double>(std::max(n1, n2)))));
}

/// Golfing construction of W^L. Batches Omega_j ~ Bernoulli(q) with
/// q = 1 - rho^(1/j0), so Omega = (union of batches)^c is Bernoulli(rho).
inline GolfingResult build_wl_golfing(const TangentSpace& t, double rho, RngState rng) {
  require(rho > 0.0 && rho < 1.0, "build_wl_golfing: rho must lie in (0, 1)");
  require(t.rank() >= 1, "build_wl_golfing: rank must be at least 1");
  GolfingResult g;
  g.j0 = std::max(1, golfing_steps(t.rows(), t.cols()));
  g.q = 1.0 - std::pow(rho, 1.0 / g.j0);

  const DenseMatrix uv = t.sign_matrix();
  DenseMatrix y = DenseMatrix::Zero(t.rows(), t.cols());
  DenseMatrix z = uv;
  DenseMatrix covered = DenseMatrix::Zero(t.rows(), t.cols());
  g.z_fro.push_back(z.norm());
  g.z_linf.push_back(norm_linf(z));
  for (int j = 1; j <= g.j0; ++j) {
    SupportMask batch = gen_bernoulli_mask(rng.substream(static_cast<std::uint64_t>(j)), t.rows(), t.cols(), g.q);
    y += proj_support(z, batch) / g.q;
    z = uv - proj_tangent(y, t);
    for (const auto& [a, b] : batch) covered(a, b) = 1.0;
    g.batches.push_back(std::move(batch));
    g.z_fro.push_back(z.norm());
    g.z_linf.push_back(norm_linf(z));
  }
  g.omega = SupportMask::from_indicator(covered).complement();
  g.w_l = proj_tangent_complement(y, t);
  g.y_final = std::move(y);
  return g;
}

struct NeumannResult {
  DenseMatrix w_s;
  int terms = 0;                     // series terms summed
  double op_norm = 0.0;              // measured ||P_Omega P_T||
  double identity_residual = 0.0;    // ||P_Omega W^S - lambda sgn(S0)||_F
};

struct NeumannOptions {
  double term_tol = 1e-12;  // stop once ||term||_F < term_tol (relative to lambda)
  int max_terms = 10000;
  EigenIterationOptions eigen{};
};

/// W^S = lambda P_T^perp sum_k (P_Omega P_T P_Omega)^k sgn(S0).
/// Throws if ||P_Omega P_T|| >= 1 (the series does not converge) or the term
/// cap is reached.
inline NeumannResult build_ws_neumann(const TangentSpace& t, const DenseMatrix& s0, const SupportMask& omega,
                                      double lambda, const NeumannOptions& opts = {}) {
  require(lambda > 0.0, "build_ws_neumann: lambda must be positive");
  if (s0.rows() != t.rows() || s0.cols() != t.cols()) throw InvalidArgument("build_ws_neumann: shape mismatch");
  NeumannResult res;
  const DenseMatrix signs = proj_support(s0.unaryExpr([](double v) { return detail::sgn(v); }), omega);
  if (omega.empty()) {
    res.w_s = DenseMatrix::Zero(t.rows(), t.cols());
    return res;
  }
  res.op_norm = op_norm_composed(omega, t, opts.eigen);
  if (!(res.op_norm < 1.0)) {
    throw NumericalFailure("build_ws_neumann: ||P_Omega P_T|| = " + std::to_string(res.op_norm) +
                               " >= 1, Neumann series diverges",
                           res.op_norm);
  }
  DenseMatrix term = signs;
  DenseMatrix sum = term;
  res.terms = 1;
  for (;;) {
    term = proj_support(proj_tangent(term, t), omega);
    if (term.norm() < opts.term_tol) break;
    sum += term;
    if (++res.terms >= opts.max_terms) {
      throw NumericalFailure("build_ws_neumann: series did not converge within " + std::to_string(opts.max_terms) +
                             " terms");
    }
  }
  res.w_s = lambda * proj_tangent_complement(sum, t);
  res.identity_residual = (proj_support(res.w_s, omega) - lambda * signs).norm();
  return res;
}

/// One inequality of the certificate: value compared against bound.
struct Condition {
  double value = 0.0;
  double bound = 0.0;
  bool strict = true;

  double margin() const noexcept { return bound - value; }
  bool holds() const noexcept { return strict ? value < bound : value <= bound; }
};

struct CertificateReport {
  double lambda = 0.0;
  double rho = 0.0;
  int j0 = 0;
  double q = 0.0;
  Condition norm_w;          // ||W^L + W^S|| < 1/2
  Condition frob_on_omega;   // ||P_Omega(U V^T + W^L)||_F <= lambda/4
  Condition linf_off_omega;  // ||P_Omega^perp(U V^T + W^L + W^S)||_inf < lambda/2
  Condition wl_norm;         // ||W^L|| < 1/4
  Condition ws_norm;         // ||W^S|| < 1/4
  Condition ws_linf_off;     // ||P_Omega^perp W^S||_inf < lambda/4
  bool pass = false;

  struct Diagnostics {
    Index n = 0;
    Index r = 0;
    std::uint64_t seed = 0;
    std::size_t omega_size = 0;
    double op_norm_omega_t = 0.0;
    double ws_identity_residual = 0.0;
    int neumann_terms = 0;
    double wl_tangent_leak = 0.0;  // ||P_T W^L||_F / ||W^L||_F
    double ws_tangent_leak = 0.0;
    std::vector<double> z_fro;
    std::optional<std::string> failure;  // set when W^S could not be built
  } diagnostics;
};

/// Builds L0, the golfing W^L (which also draws Omega), random signs on
/// Omega and W^S, then evaluates every certificate condition with
/// lambda = 1/sqrt(n). A divergent W^S series yields pass = false with the
/// reason in diagnostics.failure.
inline CertificateReport certify_instance(Index n, Index r, double rho, std::uint64_t seed) {
  require(n >= 2, "certify_instance: n must be at least 2");
  require(r >= 1 && r <= n, "certify_instance: rank out of range");
  ProblemSpec spec;
  spec.n1 = spec.n2 = n;
  spec.r = r;
  spec.rho = 0.0;
  spec.seed = RngState{seed, 0};
  const ProblemInstance inst = gen_problem(spec);
  const TangentSpace t = TangentSpace::from_svd(svd_full(inst.l0), r);

  CertificateReport rep;
  rep.lambda = 1.0 / std::sqrt(static_cast<double>(n));
  rep.rho = rho;
  rep.diagnostics.n = n;
  rep.diagnostics.r = r;
  rep.diagnostics.seed = seed;

  const GolfingResult g = build_wl_golfing(t, rho, spec.seed.substream(purpose::kGolfing));
  rep.j0 = g.j0;
  rep.q = g.q;
  rep.diagnostics.z_fro = g.z_fro;
  rep.diagnostics.omega_size = g.omega.size();
  const double wl_fro = g.w_l.norm();
  rep.diagnostics.wl_tangent_leak = wl_fro > 0.0 ? proj_tangent(g.w_l, t).norm() / wl_fro : 0.0;

  DenseMatrix s0 = DenseMatrix::Zero(n, n);
  {
    Rng signs(spec.seed.substream(purpose::kSigns));
    for (const auto& [i, j] : g.omega) s0(i, j) = signs.sign();
  }

  const DenseMatrix uv = t.sign_matrix();
  const double lambda = rep.lambda;
  rep.wl_norm = {norm_operator(g.w_l), 0.25, true};
  rep.frob_on_omega = {proj_support(uv + g.w_l, g.omega).norm(), lambda / 4.0, false};

  std::optional<NeumannResult> ws;
  try {
    ws = build_ws_neumann(t, s0, g.omega, lambda);
  } catch (const NumericalFailure& e) {
    rep.diagnostics.failure = e.what();
    rep.diagnostics.op_norm_omega_t = std::isnan(e.best_estimate()) ? 1.0 : e.best_estimate();
  }
  if (ws) {
    rep.diagnostics.op_norm_omega_t = ws->op_norm;
    rep.diagnostics.ws_identity_residual = ws->identity_residual;
    rep.diagnostics.neumann_terms = ws->terms;
    const double ws_fro = ws->w_s.norm();
    rep.diagnostics.ws_tangent_leak = ws_fro > 0.0 ? proj_tangent(ws->w_s, t).norm() / ws_fro : 0.0;
    rep.ws_norm = {norm_operator(ws->w_s), 0.25, true};
    rep.ws_linf_off = {norm_linf(proj_support_complement(ws->w_s, g.omega)), lambda / 4.0, true};
    rep.norm_w = {norm_operator(g.w_l + ws->w_s), 0.5, true};
    rep.linf_off_omega = {norm_linf(proj_support_complement(uv + g.w_l + ws->w_s, g.omega)), lambda / 2.0, true};
    rep.pass = rep.norm_w.holds() && rep.frob_on_omega.holds() && rep.linf_off_omega.holds();
  } else {
    const double inf = std::numeric_limits<double>::infinity();
    rep.ws_norm = {inf, 0.25, true};
    rep.ws_linf_off = {inf, lambda / 4.0, true};
    rep.norm_w = {inf, 0.5, true};
    rep.linf_off_omega = {inf, lambda / 2.0, true};
    rep.pass = false;
  }
  return rep;
}

}  // namespace pcp
