// One PASS/FAIL line per acceptance criterion. Usage: acceptance <path-to-cornerflow-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cornerflow.hpp"

using namespace cornerflow;

namespace {

constexpr double pi = numerics::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (ok) return;
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what;
}

void note(Outcome& o, const std::string& what) {
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what;
}

int failures = 0;

void report(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && s > budget_s) {
    o.pass = false;
    note(o, fmt("runtime %.2f s over %.0f s", s, budget_s));
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s (%.2f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", name, s,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "cornerflow";
  const auto scratch = std::filesystem::temp_directory_path() / "cornerflow_acceptance";
  std::filesystem::remove_all(scratch);

  report(1, "EOS derivative consistency", 1.0, [] {
    Outcome o;
    const struct {
      const char* name;
      EosModel eos;
      double lo, hi;
    } fams[] = {{"polytropic", eos::polytropic(1.0, 1.4), 0.2, 50.0},
                {"two-constant", eos::two_constant(1.0, 0.5, -1.4, -2.0), 0.2, 50.0},
                {"shallow-water", eos::shallow_water(2.0, 1.0), 0.2, 50.0},
                {"magneto", eos::magneto(1.0, 1.4, 1.0, 1.0), 0.2, 50.0},
                {"vdw", eos::van_der_waals(0.28, 0.05), 8.0, 400.0}};
    double worst = 0.0;
    for (const auto& f : fams) {
      for (double t : numerics::geomspace(f.lo, f.hi, 200)) {
        const double h = 1e-4 * t;
        const double e1 = std::fabs(numerics::derivative(f.eos.p, t, h) / f.eos.dp(t) - 1.0);
        const double e2 = std::fabs(numerics::derivative(f.eos.dp, t, h) / f.eos.d2p(t) - 1.0);
        worst = std::max({worst, e1, e2});
        if (e1 >= 1e-6 || e2 >= 1e-6) require(o, false, fmt("%s at tau %.4g", f.name, t));
      }
    }
    note(o, fmt("max relative error %.2e", worst));
    return o;
  });

  report(2, "polytropic algebra and sign displays", 1.0, [] {
    Outcome o;
    double worst = 0.0;
    for (double g : {1.2, 1.4, 5.0 / 3.0, 2.5}) {
      const auto e = eos::polytropic(1.0, g);
      for (double t : numerics::geomspace(0.2, 50.0, 40)) {
        worst = std::max({worst, std::fabs(m_value(e, t) - (3.0 - g) / (g + 1.0)),
                          std::fabs(kappa(e, t) - 2.0 / (g - 1.0))});
      }
    }
    require(o, worst < 1e-10, fmt("m, kappa error %.2e", worst));
    const auto sw = eos::shallow_water(2.0, 1.0);
    for (double t : numerics::geomspace(0.2, 100.0, 60)) require(o, m_derivative(sw, t) > 0.0, "shallow water m' <= 0");
    for (double g : {1.2, 1.4, 5.0 / 3.0}) {
      const auto e = eos::magneto(1.0, g, 1.0, 1.0);
      for (double t : numerics::geomspace(0.2, 100.0, 60)) require(o, m_derivative(e, t) > 0.0, "magneto m' <= 0");
    }
    const auto m2 = eos::magneto(1.0, 2.0, 1.0, 1.0);
    for (double t : numerics::geomspace(0.2, 100.0, 30)) {
      require(o, std::fabs(m_derivative(m2, t)) < 1e-9, "magneto gamma=2 m' not zero");
    }
    const auto vdw = eos::van_der_waals(0.28, 0.05);
    require(o, !first_inadmissible(vdw, 7.0, 1000.0).has_value(), "vdw inadmissible in window");
    for (double t : numerics::geomspace(7.0, 1000.0, 80)) require(o, m_derivative(vdw, t) < 0.0, "vdw m' >= 0");
    note(o, fmt("m, kappa error %.2e", worst));
    return o;
  });

  report(3, "geometry consistency", 0.0, [] {
    Outcome o;
    double d_p = 0.0, d_tail = 0.0, d_lemma = 0.0;
    const auto sw = eos::shallow_water(2.0, 1.0);
    const auto po = eos::polytropic(1.0, 2.0);
    const auto vd = eos::van_der_waals(0.28, 0.05);
    const std::vector<CornerProblem> pbs{CornerProblem(sw, 2 * sound_speed(sw, 1.0), 1.0, 10.0, -pi / 6),
                                         CornerProblem(po, 2 * sound_speed(po, 1.0), 1.0, 10.0, -pi / 4),
                                         CornerProblem(vd, 2 * sound_speed(vd, 20.0), 20.0, 200.0, -pi / 9)};
    for (const auto& pb : pbs) {
      const auto P = interaction_point(pb);
      const auto R0 = curve_PR(pb, pb.tau0());
      d_p = std::max(d_p, std::hypot(R0.first - P.first, R0.second - P.second));
      const auto s = centered_wave_state(pb, alpha0_at_P(pb.eos(), pb.u0(), pb.tau0()));
      d_tail = std::max({d_tail, std::fabs(s.u - pb.u0()), std::fabs(s.v), std::fabs(s.tau - pb.tau0())});
      const double t_end = std::min(pb.tau_hi(), centered_vacuum_tau(pb));
      for (double t : numerics::geomspace(pb.tau0() * 1.001, t_end, 40)) {
        const auto r = centered_wave_residuals(pb, t);
        d_lemma = std::max({d_lemma, r.compatibility, r.bernoulli, r.eigen});
      }
    }
    require(o, d_p < 1e-12, fmt("PR(tau0) off P by %.2e", d_p));
    require(o, d_tail < 1e-8, fmt("fan state at alpha0 off by %.2e", d_tail));
    require(o, d_lemma < 1e-8, fmt("fan relations residual %.2e", d_lemma));
    note(o, fmt("|PR(tau0)-P| %.1e, tail %.1e, fan relations %.1e", d_p, d_tail, d_lemma));
    return o;
  });

  report(4, "commutator identity", 1.0, [] {
    Outcome o;
    double worst = 0.0;
    for (const auto& t : synthetic_triples()) worst = std::max(worst, commutator_check(t).max_abs);
    require(o, worst < 1e-10, "residual too large");
    note(o, fmt("%zu fields, max residual %.2e", synthetic_triples().size(), worst));
    return o;
  });

  report(5, "Goursat convergence (polytropic gamma=2, 64/128/256)", 60.0, [] {
    Outcome o;
    const auto e = eos::polytropic(1.0, 2.0);
    const CornerProblem pb(e, 2.0 * sound_speed(e, 1.0), 1.0, 10.0, -pi / 4);
    ConvergenceSetup s;
    s.tau_end = 10.0;
    s.solver.tau_trunc = 10.0;
    s.solver.eps2 = 0.1 * (alpha0_at_P(e, pb.u0(), 1.0) + pi / 2);
    const auto tab = convergence_study(pb, s, {64, 128, 256});
    for (const char* name : {"bernoulli-drift", "c d+alpha", "c d+beta", "c d-alpha", "c d-beta"}) {
      const auto* r = tab.find(name);
      require(o, r && r->monotone && r->min_order() >= 1.0, fmt("%s order %.2f", name, r ? r->min_order() : 0.0));
    }
    std::string orders;
    for (const auto& r : tab.rows) {
      orders += fmt("%s%s %.2f", orders.empty() ? "" : ", ", r.diagnostic.c_str(), r.min_order());
    }
    note(o, "min orders: " + orders);
    return o;
  });

  // Criteria 6 to 8 share one dam-break run at the preset resolution.
  RunResult dam;
  bool dam_ok = false;
  double dam_seconds = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto c = preset("dam-break");
      dam = run(c, false);
      dam_ok = dam.grid.has_value();
    } catch (const std::exception& e) {
      dam.message = e.what();
    }
    dam_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  report(6, "invariant-region audit (dam-break 256)", 0.0, [&] {
    Outcome o;
    require(o, dam_ok, "run failed: " + dam.message);
    if (!dam_ok) return o;
    require(o, dam_seconds < 120.0, fmt("run took %.1f s", dam_seconds));
    for (const auto* t : {&dam.audit.box, &dam.audit.separation, &dam.audit.mach, &dam.audit.delta_range,
                          &dam.audit.dtau}) {
      require(o, t->checked > 0 && t->violations == 0, fmt("%s: %zu violations", t->name.c_str(), t->violations));
    }
    note(o, fmt("%zu nodes audited, grid %zux%zu, run %.1f s", dam.audit.nodes_audited, dam.grid->ni(),
                dam.grid->nj(), dam_seconds));
    return o;
  });

  report(7, "gradient bounds (dam-break 256)", 0.0, [&] {
    Outcome o;
    require(o, dam_ok, "run failed: " + dam.message);
    if (!dam_ok) return o;
    for (const auto* t : {&dam.audit.grad, &dam.audit.scaled, &dam.audit.f_positive}) {
      require(o, t->checked > 0 && t->violations == 0, fmt("%s: %zu violations", t->name.c_str(), t->violations));
    }
    note(o, fmt("n = %d, worst margins %.2e / %.2e, f_min %.3f", dam.audit.n_exp, dam.audit.grad.worst_margin,
                dam.audit.scaled.worst_margin, dam.audit.f_positive.worst_margin));
    return o;
  });

  report(8, "vacuum boundary Lipschitz bound (dam-break 256)", 0.0, [&] {
    Outcome o;
    require(o, dam_ok, "run failed: " + dam.message);
    if (!dam_ok) return o;
    require(o, dam.vacuum.curve.size() > 2, "no vacuum curve");
    require(o, dam.vacuum.within_bound,
            fmt("Lipschitz %.3f above bound %.3f at tau %.4g", dam.vacuum.lipschitz, dam.vacuum.bound,
                dam.vacuum.tau_level));
    std::size_t above = 0;
    double worst = 0.0;
    for (const auto& l : dam.level_slopes) {
      worst = std::max(worst, l.slope / l.bound);
      if (l.slope > l.bound) ++above;
    }
    require(o, !dam.level_slopes.empty(), "no level curves");
    require(o, above == 0, fmt("%zu of %zu level curves above bound (worst ratio %.2f)", above,
                               dam.level_slopes.size(), worst));
    return o;
  });

  report(9, "hypothesis checker", 0.0, [&] {
    Outcome o;
    std::size_t cases = 0;
    for (double g : {1.2, 1.4, 5.0 / 3.0, 2.0, 2.5}) {
      const auto e = eos::polytropic(1.0, g);
      const double d0 = std::atan(std::sqrt((3.0 - g) / (g + 1.0)));
      for (double mach : {1.1, 1.5, 2.5, 4.0}) {
        const double a0 = alpha0_at_P(e, mach * sound_speed(e, 1.0), 1.0);
        const auto h = hypothesis_check(e, mach * sound_speed(e, 1.0), 1.0, 10.0, 100);
        const double t = a0 + pi / 2;
        const bool reduced = 2 * d0 < t && t < 4 * d0;
        require(o, std::fabs(h.delta_bar_0 - d0) < 1e-12, fmt("delta_bar0 gamma %.3g", g));
        require(o, std::fabs(h.chi_min) < 1e-12, "polytropic chi not zero");
        require(o, h.all_pass == reduced, fmt("gamma %.3g mach %.2g disagrees", g, mach));
        ++cases;
      }
    }
    const std::string out = (scratch / "hyp").string();
    const int rc_in = shell(cli + " check-hypothesis --preset polytropic --gamma 1.4 --out " + out);
    const int rc_out = shell(cli + " solve --preset polytropic --mach0 1.5 --grid-n 16 --out " + out);
    require(o, rc_in == 0, fmt("in-window run exit %d", rc_in));
    require(o, rc_out == 3, fmt("out-of-window run exit %d", rc_out));
    note(o, fmt("%zu polytropic cases match the reduced window; exits %d / %d", cases, rc_in, rc_out));
    return o;
  });

  report(10, "determinism of solve on dam-break", 0.0, [&] {
    Outcome o;
    const auto a = scratch / "det_a";
    const auto b = scratch / "det_b";
    const auto w = scratch / "det_w";
    const int ra = shell(cli + " solve --preset dam-break --out " + a.string());
    const int rb = shell(cli + " solve --preset dam-break --out " + b.string());
    const int rw = shell(cli + " solve --preset dam-break --workers 4 --out " + w.string());
    require(o, ra == rb && ra == rw, fmt("exit codes %d, %d, %d", ra, rb, rw));
    const std::string ga = slurp(a / "grid.csv");
    require(o, !ga.empty(), "no grid.csv written");
    require(o, ga == slurp(b / "grid.csv"), "repeated grid.csv differs");
    require(o, ga == slurp(w / "grid.csv"), "grid.csv differs with 4 workers");
    note(o, fmt("grid.csv %zu bytes, exit %d", ga.size(), ra));
    return o;
  });

  std::filesystem::remove_all(scratch);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
