#pragma once

// JSON views of solver results, certificate reports and problem instances.

#include "pcp/certify.hpp"
#include "pcp/io.hpp"
#include "pcp/solver.hpp"
#include "pcp/synth.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

namespace pcp {

using Json = nlohmann::json;

namespace detail {

/// JSON has no infinities; they are written as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json solution_report(const PcpSolution& sol, Index n1, Index n2) {
  return Json{
      {"n1", n1},
      {"n2", n2},
      {"lambda", detail::number_or_null(sol.lambda)},
      {"beta", sol.beta},
      {"iterations", sol.iterations},
      {"svd_count", sol.svd_count},
      {"final_residual", sol.final_residual},
      {"rank_l", sol.rank_l},
      {"card_s", sol.card_s},
      {"converged", sol.converged},
      {"wall_time_ms", std::chrono::duration<double, std::milli>(sol.wall_time).count()},
  };
}

inline Json condition_json(const Condition& c) {
  return Json{{"value", detail::number_or_null(c.value)},
              {"bound", c.bound},
              {"margin", detail::number_or_null(c.margin())},
              {"strict", c.strict},
              {"holds", c.holds()}};
}

inline Json certificate_report(const CertificateReport& rep) {
  const auto& d = rep.diagnostics;
  Json diag{{"n", d.n},
            {"r", d.r},
            {"seed", d.seed},
            {"omega_size", d.omega_size},
            {"op_norm_omega_t", d.op_norm_omega_t},
            {"ws_identity_residual", d.ws_identity_residual},
            {"neumann_terms", d.neumann_terms},
            {"wl_tangent_leak", d.wl_tangent_leak},
            {"ws_tangent_leak", d.ws_tangent_leak},
            {"z_fro", d.z_fro},
            {"failure", d.failure ? Json(*d.failure) : Json(nullptr)}};
  return Json{{"lambda", rep.lambda},
              {"rho", rep.rho},
              {"j0", rep.j0},
              {"q", rep.q},
              {"norm_w", condition_json(rep.norm_w)},
              {"frob_on_omega", condition_json(rep.frob_on_omega)},
              {"linf_off_omega", condition_json(rep.linf_off_omega)},
              {"wl_norm", condition_json(rep.wl_norm)},
              {"ws_norm", condition_json(rep.ws_norm)},
              {"ws_linf_off", condition_json(rep.ws_linf_off)},
              {"pass", rep.pass},
              {"diagnostics", std::move(diag)}};
}

inline Json spec_json(const ProblemSpec& spec) {
  Json j{{"n1", spec.n1},
         {"n2", spec.n2},
         {"r", spec.r},
         {"rho", spec.rho},
         {"sign_model", to_string(spec.sign_model)},
         {"seed", spec.seed.seed},
         {"stream", spec.seed.stream}};
  if (spec.support_size) j["support_size"] = *spec.support_size;
  return j;
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

/// Writes l0.pcpmat, s0.pcpmat, m.pcpmat, omega.pcpmask and instance.json into `dir`.
inline void export_instance(const ProblemInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix((dir / "l0.pcpmat").string(), inst.l0);
  write_matrix((dir / "s0.pcpmat").string(), inst.s0);
  write_matrix((dir / "m.pcpmat").string(), inst.m);
  write_mask((dir / "omega.pcpmask").string(), inst.omega);
  write_json((dir / "instance.json").string(),
             Json{{"spec", spec_json(inst.spec)},
                  {"files", {{"l0", "l0.pcpmat"}, {"s0", "s0.pcpmat"}, {"m", "m.pcpmat"}, {"omega", "omega.pcpmask"}}}});
}

}  // namespace pcp
