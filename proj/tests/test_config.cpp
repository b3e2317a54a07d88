#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cornerflow/pipeline.hpp"

using namespace cornerflow;

namespace {

constexpr double pi = numerics::pi;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::precondition;
}

std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cornerflow_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto c = parse_config(R"(
# dam break on a steeper wall
[scenario]
name = test
[eos]
family = shallow-water
g = 2
k = 1   # trailing comment
[flow]
tau0 = 1
mach0 = 2.5
theta_deg = -30
[grid]
grid_n = 32
[output]
targets = grid, audit
)");
  EXPECT_EQ(c.name, "test");
  EXPECT_EQ(c.eos.family, "shallow-water");
  EXPECT_EQ(c.eos.params.size(), 2u);
  EXPECT_DOUBLE_EQ(c.mach0, 2.5);
  EXPECT_NEAR(c.theta, -pi / 6, 1e-15);
  EXPECT_EQ(c.grid_n, 32u);
  EXPECT_EQ(c.outputs, (std::vector<std::string>{"grid", "audit"}));
}

TEST(Config, DumpRoundTripsEveryPreset) {
  for (const auto& name : preset_names()) {
    const auto a = preset(name);
    const auto b = parse_config(dump_config(a));
    EXPECT_EQ(dump_config(b), dump_config(a)) << name;
    EXPECT_EQ(b.theta, a.theta) << name;
    EXPECT_EQ(b.eos.params, a.eos.params) << name;
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { parse_config("[flow]\nspeed = 3\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[nowhere]\nx = 1\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[flow\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[flow]\ntau0\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[flow]\ntau0 = abc\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[flow]\ntheta = 0.2\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[grid]\ngrid_n = 4\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[output]\ntargets = grid,pictures\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config("[monitor]\nenforce_vacuum_bound = maybe\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { preset("nope"); }), ErrorKind::config);
}

TEST(Config, EosSpecIsChecked) {
  EXPECT_EQ(kind_of([] { make_eos({"polytropic", {{"A", 1.0}}}); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { make_eos({"polytropic", {{"A", 1.0}, {"gamma", 2.0}, {"k", 1.0}}}); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { make_eos({"vdw", {{"S1", 0.2}, {"gamma", 0.05}}}); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { make_eos({"ideal", {}}); }), ErrorKind::config);
  const auto e = make_eos({"two-constant", {{"A1", 1.0}, {"B1", 0.5}, {"g1", -2.0}, {"g2", -3.0}}});
  EXPECT_NEAR(e.p(2.0), 0.25 + 0.5 / 8.0, 1e-15);
}

TEST(Config, ChangingFamilyDropsOldParameters) {
  const auto c = parse_config("[eos]\nfamily = vdw\nS1 = 0.28\ngamma = 0.05\n[flow]\ntau0 = 20\n[grid]\ntau_max = 200\n",
                              preset("dam-break"));
  EXPECT_EQ(c.eos.params.count("g"), 0u);
  EXPECT_NO_THROW(make_eos(c.eos));
}

TEST(Pipeline, PrepareFixesDerivedQuantities) {
  const auto s = prepare(preset("dam-break"));
  EXPECT_NEAR(s.c0, sound_speed(s.eos, 1.0), 1e-15);
  EXPECT_NEAR(s.u0, 2.0 * s.c0, 1e-15);
  EXPECT_NEAR(s.c_vac, 1e-4 * s.c0, 1e-18);
  EXPECT_NEAR(s.tau_end, 4.7768816978369815, 1e-7);
  EXPECT_DOUBLE_EQ(s.tau_end, s.tau_fan_end);
  EXPECT_NEAR(s.eps1, 0.05 * s.profile.delta_bar0(), 1e-15);
  EXPECT_NEAR(s.eps2, 0.1 * (s.alpha0 + pi / 2), 1e-15);
}

TEST(Pipeline, VacuumSoundSpeedCanCutTheRun) {
  auto c = preset("polytropic");
  c.eos.params["gamma"] = 1.4;
  c.c_vac = 0.9;
  const auto s = prepare(c);
  EXPECT_NEAR(s.problem().c(s.tau_cvac), 0.9, 1e-10);
  EXPECT_DOUBLE_EQ(s.tau_end, s.tau_cvac);
  c.c_vac = 10.0;
  EXPECT_EQ(kind_of([&] { prepare(c); }), ErrorKind::config);
}

TEST(Pipeline, ExitCodes) {
  auto c = preset("dam-break");
  c.grid_n = 32;
  EXPECT_EQ(run(c, false).exit_code, exit_ok);

  auto sub = c;
  sub.u0 = 0.5;
  EXPECT_EQ(run(sub, false).exit_code, exit_config);

  auto out = preset("polytropic");
  out.eos.params["gamma"] = 2.5;
  const auto h = run(out, false);
  EXPECT_EQ(h.exit_code, exit_hypothesis);
  EXPECT_FALSE(h.hypothesis.all_pass);
  EXPECT_FALSE(h.grid.has_value());

  auto strict = c;
  strict.bernoulli_ceiling = 1e-14;
  EXPECT_EQ(run(strict, false).exit_code, exit_audit);

  auto stuck = c;
  stuck.eps2 = 13.0;
  EXPECT_EQ(run(stuck, false).exit_code, exit_solver);
}

TEST(Pipeline, ClosedFormM1RunsClean) {
  auto c = preset("dam-break");
  c.grid_n = 32;
  c.m1_source = "closed-form";
  const auto r = run(c, false);
  EXPECT_EQ(r.exit_code, exit_ok) << r.message;
  EXPECT_EQ(r.audit.grad.violations, 0u);
  EXPECT_EQ(kind_of([] { parse_config("[monitor]\nm1_source = analytic\n"); }), ErrorKind::config);
}

TEST(Pipeline, HypothesisOnlyStopsEarly) {
  const auto r = run(preset("vdw"), false, true);
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_TRUE(r.hypothesis.all_pass);
  EXPECT_FALSE(r.PQ.has_value());
}

TEST(Pipeline, WritesRequestedTargetsDeterministically) {
  auto c = preset("mhd");
  c.grid_n = 24;
  c.outputs = {"grid", "vacuum", "audit", "residuals", "profile", "boundary", "hypothesis"};
  c.output_dir = scratch_dir("a");
  const auto a = run(c);
  ASSERT_EQ(a.exit_code, exit_ok) << a.message;
  EXPECT_EQ(a.written.size(), 8u);
  for (const auto& p : a.written) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  const std::string grid = slurp(c.output_dir + "/grid.csv");
  EXPECT_EQ(grid.substr(0, grid.find('\n')), "xi,eta,u,v,tau,phi,alpha,beta,status");
  const std::string audit = slurp(c.output_dir + "/audit.json");
  EXPECT_NE(audit.find("\"schema_version\": 1"), std::string::npos);

  c.output_dir = scratch_dir("b");
  c.workers = 3;
  run(c);
  EXPECT_EQ(slurp(c.output_dir + "/grid.csv"), grid);
}

TEST(Pipeline, LevelSlopesAreReported) {
  auto c = preset("dam-break");
  c.grid_n = 32;
  const auto r = run(c, false);
  ASSERT_EQ(r.exit_code, exit_ok);
  EXPECT_GT(r.level_slopes.size(), 10u);
  for (const auto& l : r.level_slopes) {
    EXPECT_GT(l.slope, 0.0);
    EXPECT_GT(l.bound, 2.0);
  }
  EXPECT_GT(r.vacuum.curve.size(), 2u);
  EXPECT_NEAR(r.vacuum.tau_level, r.scenario->tau_end, 1e-12);
}
