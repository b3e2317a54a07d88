// Command-line front end: analyze-eos, check-hypothesis, solve, validate,
// export and preset.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cornerflow.hpp"

using namespace cornerflow;

namespace {

constexpr double deg = 180.0 / numerics::pi;

/// Scenario flags shared by every subcommand that needs a configuration.
struct ScenarioFlags {
  std::string preset;
  std::string config;
  std::string eos;
  std::map<std::string, double> eos_params;
  std::vector<std::string> sets;
  double tau0 = 0, u0 = 0, mach0 = 0, theta = 0, theta_deg = 0, tau_max = 0, c_vac = 0;
  double eps1 = 0, eps2 = 0, tol = 0;
  std::size_t grid_n = 0, max_iter = 0, workers = 0;
  std::string out;
  std::string targets;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["preset"] = app->add_option("--preset", preset, "Builtin scenario")->check(CLI::IsMember(preset_names()));
    opts["config"] = app->add_option("--config", config, "Scenario file (key = value with [sections])");
    opts["eos"] = app->add_option("--eos", eos, "EOS family")
                      ->check(CLI::IsMember({"polytropic", "shallow-water", "magneto", "vdw", "two-constant"}));
    for (const char* k : {"A", "gamma", "g", "k", "A1", "B1", "g1", "g2", "mu", "kappa0", "S1"}) {
      opts[k] = app->add_option(std::string("--") + k, eos_params[k], std::string("EOS parameter ") + k);
    }
    opts["tau0"] = app->add_option("--tau0", tau0, "Inflow specific volume");
    opts["u0"] = app->add_option("--u0", u0, "Inflow speed");
    opts["mach0"] = app->add_option("--mach0", mach0, "Inflow speed over c(tau0)");
    opts["theta"] = app->add_option("--theta", theta, "Wall angle in radians");
    opts["theta_deg"] = app->add_option("--theta-deg", theta_deg, "Wall angle in degrees");
    opts["grid_n"] = app->add_option("--grid-n", grid_n, "Boundary intervals per curve");
    opts["tau_max"] = app->add_option("--tau-max", tau_max, "Largest specific volume solved");
    opts["c_vac"] = app->add_option("--c-vac", c_vac, "Vacuum threshold on the sound speed");
    opts["eps1"] = app->add_option("--eps1", eps1, "Invariant-box margin");
    opts["eps2"] = app->add_option("--eps2", eps2, "Separation margin");
    opts["tol"] = app->add_option("--tol", tol, "Node-solve tolerance");
    opts["max_iter"] = app->add_option("--max-iter", max_iter, "Node-solve iteration cap");
    opts["workers"] = app->add_option("--workers", workers, "Threads per anti-diagonal");
    opts["out"] = app->add_option("--out", out, "Output directory");
    opts["targets"] = app->add_option("--targets", targets, "Comma-separated export targets");
    opts["set"] = app->add_option("--set", sets, "Override as section.key=value")->take_all();
  }

  bool given(const char* k) const { return opts.at(k)->count() > 0; }

  ScenarioConfig build() const {
    ScenarioConfig c;
    if (given("preset")) {
      c = cornerflow::preset(preset);
    } else if (given("eos")) {
      // Start from the builtin scenario of the same family when there is one.
      static const std::map<std::string, std::string> by_family = {
          {"polytropic", "polytropic"}, {"shallow-water", "dam-break"}, {"magneto", "mhd"}, {"vdw", "vdw"}};
      auto it = by_family.find(eos);
      if (it != by_family.end()) c = cornerflow::preset(it->second);
    }
    if (given("config")) c = load_config(config, c);
    if (given("eos") && eos != c.eos.family) {
      c.eos.family = eos;
      c.eos.params.clear();
    }
    for (const auto& [k, v] : eos_params) {
      if (given(k.c_str())) c.eos.params[k] = v;
    }
    if (given("tau0")) c.tau0 = tau0;
    if (given("u0")) c.u0 = u0;
    if (given("mach0")) {
      c.mach0 = mach0;
      c.u0 = 0.0;
    }
    if (given("theta")) c.theta = theta;
    if (given("theta_deg")) c.theta = theta_deg / deg;
    if (given("grid_n")) c.grid_n = grid_n;
    if (given("tau_max")) c.tau_max = tau_max;
    if (given("c_vac")) c.c_vac = c_vac;
    if (given("eps1")) c.eps1 = eps1;
    if (given("eps2")) c.eps2 = eps2;
    if (given("tol")) c.tol = tol;
    if (given("max_iter")) c.max_iter = max_iter;
    if (given("workers")) c.workers = workers;
    if (given("out")) c.output_dir = out;
    if (given("targets")) set_option(c, "output", "targets", targets);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      const auto dot = s.find('.');
      if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw Error(ErrorKind::config, "--set expects section.key=value, got '" + s + "'");
      }
      set_option(c, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
    }
    validate(c);
    return c;
  }
};

void print_hypothesis(const HypothesisReport& h) {
  std::printf("delta_bar(tau0)      %.6f rad (%.4f deg)\n", h.delta_bar_0, h.delta_bar_0 * deg);
  std::printf("alpha0               %.6f rad (%.4f deg)\n", h.alpha0, h.alpha0 * deg);
  std::printf("alpha0 + pi/2        %.6f\n", h.target());
  std::printf("2*db0 + min chi      %.6f\n", 2.0 * h.delta_bar_0 + h.chi_min);
  std::printf("4*db0                %.6f\n", h.condition_right);
  std::printf("psi max / chi min    %.6f / %.6f\n", h.psi_max, h.chi_min);
  if (h.all_pass) {
    std::printf("hypothesis           pass\n");
  } else {
    std::printf("hypothesis           FAIL (first at tau = %.6g)\n", h.first_failure);
  }
}

void print_run(const RunResult& r) {
  if (!r.scenario) return;
  const auto& s = *r.scenario;
  std::printf("scenario %s: eos %s, u0 %.6g, c0 %.6g, theta %.4f deg\n", s.cfg.name.c_str(), s.eos.label.c_str(), s.u0,
              s.c0, s.cfg.theta * deg);
  std::printf("tau_end %.6g (tau_max %.6g, fan end %.6g, c_vac level %.6g)\n", s.tau_end, s.cfg.tau_max,
              s.tau_fan_end, s.tau_cvac);
  if (!r.grid) return;
  const auto& g = *r.grid;
  std::printf("nodes: %zu solved, %zu truncated, %zu failed\n", g.count(NodeStatus::solved),
              g.count(NodeStatus::truncated), g.count(NodeStatus::failed));
  std::printf("audit (n_exp = %d):\n", r.audit.n_exp);
  for (const auto* t : r.audit.tallies()) {
    std::printf("  %-32s %8zu / %-8zu worst margin %.4g\n", t->name.c_str(), t->violations, t->checked,
                t->worst_margin);
  }
  std::printf("vacuum level tau %.6g: Lipschitz %.4f, bound %.4f (%s)\n", r.vacuum.tau_level, r.vacuum.lipschitz,
              r.vacuum.bound, r.vacuum.within_bound ? "within" : "exceeded");
  std::printf("residuals:\n");
  for (const auto& x : r.residuals) {
    std::printf("  %-22s max %.3e  rms %.3e  (%zu)\n", x.name.c_str(), x.max_abs, x.rms(), x.count);
  }
}

int report_error(const std::exception& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  if (const auto* ce = dynamic_cast<const Error*>(&e)) {
    if (ce->kind() == ErrorKind::config) return exit_config;
    if (ce->kind() == ErrorKind::io) return 1;
  }
  return exit_solver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic solver for the corner expansion of a gas into vacuum"};
  app.require_subcommand(1);

  ScenarioFlags f_an, f_hy, f_so, f_va, f_ex;

  auto* analyze = app.add_subcommand("analyze-eos", "Tabulate delta_bar, psi, chi, m and m' over [tau0, tau_max]");
  f_an.attach(analyze);
  std::size_t samples = 400;
  analyze->add_option("--samples", samples, "Profile samples");

  auto* hyp = app.add_subcommand("check-hypothesis", "Report the wave-interaction hypothesis only");
  f_hy.attach(hyp);

  auto* solve = app.add_subcommand("solve", "Build the net, audit it and write the configured outputs");
  f_so.attach(solve);

  auto* val = app.add_subcommand("validate", "Refinement study and commutator identity");
  f_va.attach(val);
  std::vector<std::size_t> resolutions;
  val->add_option("--resolutions", resolutions, "Boundary intervals, each twice the last")->delimiter(',');

  auto* exp = app.add_subcommand("export", "Solve and write every artifact");
  f_ex.attach(exp);

  auto* pre = app.add_subcommand("preset", "List or dump builtin scenarios");
  std::string dump;
  bool list = false;
  pre->add_option("--dump", dump, "Preset to print as a config file")->check(CLI::IsMember(preset_names()));
  pre->add_flag("--list", list, "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  try {
    if (*pre) {
      if (!dump.empty()) {
        std::cout << dump_config(preset(dump));
      } else {
        for (const auto& n : preset_names()) std::cout << n << "\n";
      }
      return 0;
    }

    if (*analyze) {
      auto c = f_an.build();
      c.profile_samples = samples;
      const auto eos = make_eos(c.eos);
      const auto p = build_delta_bar_profile(eos, c.tau0, c.tau_max, samples);
      std::printf("eos %s on [%.6g, %.6g]\n", eos.label.c_str(), c.tau0, c.tau_max);
      std::printf("delta_bar(tau0) %.6f deg, delta_bar(tau_max) %.6f deg (tail bound %.3g)\n", p.delta_bar0() * deg,
                  p.delta_bar_star * deg, p.tail_bound);
      std::printf("extrema:");
      for (double t : p.extrema) std::printf(" %.6g", t);
      std::printf("\npsi max %.6f, chi min %.6f\n", p.psi_max(), p.chi_min());
      double mp_min = std::numeric_limits<double>::infinity(), mp_max = -mp_min;
      for (double t : p.tau_samples) {
        const double d = m_derivative(eos, t);
        mp_min = std::min(mp_min, d);
        mp_max = std::max(mp_max, d);
      }
      std::printf("m' range [%.4g, %.4g]\n", mp_min, mp_max);
      write_profile_csv((std::filesystem::path(c.output_dir) / "profile.csv").string(), eos, p);
      auto j = to_json(p);
      j["eos"] = eos.label;
      j["m_prime_min"] = mp_min;
      j["m_prime_max"] = mp_max;
      detail::write_json((std::filesystem::path(c.output_dir) / "profile.json").string(), j);
      return 0;
    }

    if (*hyp) {
      const auto r = run(f_hy.build(), false, true);
      if (r.exit_code == exit_config) {
        std::fprintf(stderr, "error: %s\n", r.message.c_str());
        return r.exit_code;
      }
      print_hypothesis(r.hypothesis);
      return r.exit_code;
    }

    if (*solve || *exp) {
      auto c = (*solve ? f_so : f_ex).build();
      if (*exp && !(*exp)["--targets"]->count()) {
        c.outputs = {"grid", "vacuum", "audit", "residuals", "profile", "boundary", "hypothesis"};
      }
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = run(c, true);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      print_run(r);
      for (const auto& w : r.written) std::printf("wrote %s\n", w.c_str());
      std::printf("%s (exit %d, %.2f s)\n", r.message.c_str(), r.exit_code, secs);
      return r.exit_code;
    }

    if (*val) {
      const auto c = f_va.build();
      const auto sc = prepare(c);
      if (resolutions.empty()) resolutions = {c.grid_n / 4, c.grid_n / 2, c.grid_n};
      ConvergenceSetup setup;
      setup.tau_end = sc.tau_end;
      setup.solver = sc.solver_options();
      setup.substeps = c.substeps;
      const auto tab = convergence_study(sc.problem(), setup, resolutions);
      std::printf("%-18s", "diagnostic");
      for (auto n : tab.resolutions) std::printf(" %11zu", n);
      std::printf("   orders\n");
      bool ok = true;
      for (const auto& row : tab.rows) {
        std::printf("%-18s", row.diagnostic.c_str());
        for (std::size_t k = row.values.size(); k < tab.resolutions.size(); ++k) std::printf(" %11s", "");
        for (double v : row.values) std::printf(" %11.3e", v);
        std::printf("  ");
        for (double o : row.orders) std::printf(" %5.2f", o);
        const bool informational = row.diagnostic.find("[max]") != std::string::npos;
        if (!informational && row.min_order() < 1.0) {
          ok = false;
          std::printf("  below first order");
        }
        std::printf("\n");
      }
      write_convergence_csv((std::filesystem::path(c.output_dir) / "convergence.csv").string(), tab);
      double worst = 0.0;
      for (const auto& t : synthetic_triples()) worst = std::max(worst, commutator_check(t).max_abs);
      std::printf("commutator identity: max residual %.3e over %zu fields\n", worst, synthetic_triples().size());
      if (!(worst < 1e-10)) ok = false;
      return ok ? 0 : exit_audit;
    }
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return 0;
}
