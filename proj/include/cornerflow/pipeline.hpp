#pragma once

// End-to-end run of a scenario: hypothesis check, boundary curves, net,
// audit, residual checks and exports.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cornerflow/config.hpp"
#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/export.hpp"
#include "cornerflow/goursat.hpp"
#include "cornerflow/monitor.hpp"
#include "cornerflow/validation.hpp"
#include "cornerflow/waves.hpp"

namespace cornerflow {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_hypothesis = 3, exit_solver = 4, exit_audit = 5 };

/// Everything derived from a configuration before any curve is built.
struct Scenario {
  ScenarioConfig cfg;
  EosModel eos;
  std::optional<CornerProblem> pb;
  double c0 = 0.0;
  double u0 = 0.0;
  double c_vac = 0.0;
  /// τ where the centered fan meets the wall, or where c falls to c_vac.
  double tau_fan_end = std::numeric_limits<double>::infinity();
  double tau_cvac = std::numeric_limits<double>::infinity();
  double tau_end = 0.0;
  DeltaBarProfile profile;
  double alpha0 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;

  const CornerProblem& problem() const { return *pb; }
  SolverOptions solver_options() const {
    SolverOptions o;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    o.eps2 = eps2;
    o.tau_trunc = tau_end;
    o.phi_path_factor = cfg.phi_path_factor;
    o.workers = cfg.workers;
    return o;
  }
};

/// Builds the EOS and problem, fixes τ_end = min(tau_max, fan end, τ(c_vac))
/// and the δ̄ profile over [τ₀, τ_end]. Bad parameters surface as config errors.
inline Scenario prepare(const ScenarioConfig& cfg) {
  validate(cfg);
  Scenario s;
  s.cfg = cfg;
  s.eos = make_eos(cfg.eos);
  try {
    s.c0 = sound_speed(s.eos, cfg.tau0);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string("inflow state: ") + e.what());
  }
  s.u0 = cfg.u0 > 0.0 ? cfg.u0 : cfg.mach0 * s.c0;
  s.c_vac = cfg.c_vac > 0.0 ? cfg.c_vac : 1e-4 * s.c0;
  try {
    s.pb.emplace(s.eos, s.u0, cfg.tau0, cfg.tau_max, cfg.theta);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
  const CornerProblem& pb = *s.pb;
  s.tau_fan_end = centered_vacuum_tau(pb);
  if (!(s.c_vac < s.c0)) throw Error(ErrorKind::config, "c_vac must be below c(tau0)");
  auto fc = [&](double t) { return pb.c(t) - s.c_vac; };
  if (fc(cfg.tau_max) < 0.0) {
    s.tau_cvac = numerics::solve_bracketed(fc, cfg.tau0, cfg.tau_max, 1e-13 * cfg.tau_max);
  }
  s.tau_end = std::min({cfg.tau_max, s.tau_fan_end, s.tau_cvac});
  s.profile = build_delta_bar_profile(s.eos, cfg.tau0, s.tau_end, cfg.profile_samples);
  s.alpha0 = alpha0_at_P(s.eos, s.u0, cfg.tau0);
  s.eps1 = cfg.eps1 > 0.0 ? cfg.eps1 : 0.05 * s.profile.delta_bar0();
  s.eps2 = cfg.eps2 > 0.0 ? cfg.eps2 : 0.1 * (s.alpha0 + 0.5 * numerics::pi);
  return s;
}

struct LevelSlope {
  double tau = 0.0;
  double slope = 0.0;
  double bound = 0.0;
};

struct RunResult {
  int exit_code = exit_ok;
  std::string message;
  std::optional<Scenario> scenario;
  HypothesisReport hypothesis;
  std::optional<BoundaryCurve> PQ;
  std::optional<BoundaryCurve> PR;
  std::optional<CharGrid> grid;
  std::optional<M1Bound> m1;
  AuditReport audit;
  VacuumBoundary vacuum;
  /// Max slope of level curves at interior τ levels against the same bound.
  std::vector<LevelSlope> level_slopes;
  std::vector<ResidualReport> residuals;
  SecondOrderReport second_order;
  std::vector<std::string> failures;
  std::vector<std::string> written;
};

/// Grid-dependent allowance on the level-curve slope bound.
inline double slope_allowance(const CharGrid& g) { return 10.0 * mean_edge_length(g); }

namespace detail {

inline bool wants(const ScenarioConfig& c, const std::string& t) {
  return std::find(c.outputs.begin(), c.outputs.end(), t) != c.outputs.end();
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace detail

/// Stops after the hypothesis check when `hypothesis_only` is set. Writes the
/// configured outputs when `write` is set.
inline RunResult run(const ScenarioConfig& cfg, bool write = true, bool hypothesis_only = false) {
  RunResult res;
  try {
    res.scenario = prepare(cfg);
  } catch (const Error& e) {
    res.exit_code = exit_config;
    res.message = e.what();
    return res;
  }
  const Scenario& sc = *res.scenario;
  const CornerProblem& pb = sc.problem();
  auto out = [&](const std::string& file) { return detail::join_path(cfg.output_dir, file); };
  auto emit = [&](const std::string& file, auto&& fn) {
    if (!write) return;
    fn(out(file));
    res.written.push_back(out(file));
  };

  res.hypothesis = hypothesis_check(sc.profile, sc.alpha0);
  if (detail::wants(cfg, "hypothesis") || hypothesis_only) {
    emit("hypothesis.json", [&](const std::string& p) { write_hypothesis_json(p, res.hypothesis); });
  }
  if (detail::wants(cfg, "profile")) {
    emit("profile.csv", [&](const std::string& p) { write_profile_csv(p, sc.eos, sc.profile); });
  }
  if (!res.hypothesis.all_pass) {
    res.exit_code = exit_hypothesis;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "hypothesis fails at tau = %.6g: need 2*db0 + chi < alpha0 + pi/2 < 4*db0 "
                  "(db0 = %.6f, alpha0 + pi/2 = %.6f)",
                  res.hypothesis.first_failure, res.hypothesis.delta_bar_0, res.hypothesis.target());
    res.message = buf;
    return res;
  }
  if (hypothesis_only) {
    res.message = "hypothesis holds on [tau0, tau_end]";
    return res;
  }

  try {
    res.PQ = curve_PQ(pb, sc.tau_end, cfg.grid_n, cfg.substeps);
    res.PR = curve_PR_with_states(pb, sc.tau_end, cfg.grid_n, cfg.substeps);
    res.grid = march_grid(*res.PQ, *res.PR, pb, sc.solver_options());
    res.m1 = m1_bound(*res.PQ, *res.PR,
                      cfg.m1_source == "closed-form" ? M1Source::closed_form : M1Source::discrete, &sc.eos);
  } catch (const Error& e) {
    res.exit_code = exit_solver;
    res.message = e.what();
    return res;
  }
  const CharGrid& g = *res.grid;
  if (detail::wants(cfg, "boundary")) {
    emit("boundary.csv", [&](const std::string& p) { write_boundary_csv(p, *res.PQ, *res.PR); });
  }
  if (detail::wants(cfg, "grid")) emit("grid.csv", [&](const std::string& p) { write_grid_csv(p, g); });

  const int n_exp = n_exp_scan(g, sc.eos);
  AuditInputs in{&sc.eos, &sc.profile, sc.alpha0, sc.eps1, sc.eps2, &*res.m1, n_exp};
  res.audit = audit_grid(g, in);
  if (res.audit.total_violations() > 0) {
    res.failures.push_back("audit: " + std::to_string(res.audit.total_violations()) + " violations");
  }

  const double allowance = slope_allowance(g);
  const double d0 = sc.profile.delta_bar0();
  {
    const double level = std::min(g.tau_trunc, g.max_tau());
    res.vacuum = extract_vacuum_boundary(g, level_slope_bound(d0, sc.profile.chi_at(level), sc.eps1) + allowance);
  }
  for (double t : numerics::geomspace(sc.profile.tau0(), res.vacuum.tau_level, 34)) {
    if (t <= sc.profile.tau0() || t >= res.vacuum.tau_level) continue;
    const auto lc = extract_level_curve(g, t);
    if (lc.size() < 2) continue;
    res.level_slopes.push_back({t, max_abs_slope(lc), level_slope_bound(d0, sc.profile.chi_at(t), sc.eps1) + allowance});
  }
  if (cfg.enforce_vacuum_bound) {
    bool ok = res.vacuum.within_bound;
    for (const auto& l : res.level_slopes) ok = ok && l.slope <= l.bound;
    if (!ok) res.failures.push_back("level-curve slope above bound");
  }

  try {
    res.residuals.push_back(pde_residual(g, sc.eos));
    if (res.residuals.back().max_abs > cfg.pde_ceiling) res.failures.push_back("self-similar residual above ceiling");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::hull_too_thin) throw;
    res.failures.push_back(e.what());
  }
  const auto dec = decomposition_residual(g, sc.eos);
  for (const auto* r : dec.all()) {
    res.residuals.push_back(*r);
    if (r->max_abs > cfg.decomposition_ceiling) res.failures.push_back(r->name + " residual above ceiling");
  }
  res.residuals.push_back(bernoulli_drift(g, pb));
  if (res.residuals.back().max_abs > cfg.bernoulli_ceiling) res.failures.push_back("bernoulli drift above ceiling");
  if (g.ni() >= 3 && g.nj() >= 3) {
    res.second_order = second_order_residual(g, sc.eos);
    res.residuals.push_back(res.second_order.plus_minus);
    res.residuals.push_back(res.second_order.minus_plus);
  }

  if (detail::wants(cfg, "vacuum")) {
    emit("vacuum.csv", [&](const std::string& p) { write_vacuum_csv(p, res.vacuum); });
    emit("vacuum.json", [&](const std::string& p) {
      auto j = to_json(res.vacuum);
      ojson lv = ojson::array();
      for (const auto& l : res.level_slopes) lv.push_back({{"tau", l.tau}, {"slope", l.slope}, {"bound", l.bound}});
      j["level_curves"] = lv;
      detail::write_json(p, j);
    });
  }
  if (detail::wants(cfg, "audit")) emit("audit.json", [&](const std::string& p) { write_audit_json(p, res.audit); });
  if (detail::wants(cfg, "residuals")) {
    emit("residuals.json", [&](const std::string& p) {
      ojson extra;
      extra["f_min"] = detail::finite_or_null(res.second_order.f_min);
      extra["f_nonpositive"] = res.second_order.f_nonpositive;
      write_residuals_json(p, res.residuals, extra);
    });
  }

  if (!res.failures.empty()) {
    res.exit_code = exit_audit;
    res.message = res.failures.front();
  } else {
    res.message = "ok";
  }
  return res;
}

}  // namespace cornerflow
