#include <array>
#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "cornerflow/validation.hpp"

using namespace cornerflow;

namespace {

constexpr double pi = numerics::pi;

CornerProblem dam_break() {
  const auto e = eos::shallow_water(2.0, 1.0);
  return CornerProblem(e, 2.0 * sound_speed(e, 1.0), 1.0, 10.0, -pi / 6);
}

CharGrid net(const CornerProblem& pb, double tau_end, std::size_t n) {
  SolverOptions opt;
  opt.tau_trunc = tau_end;
  return march_grid(curve_PQ(pb, tau_end, n), curve_PR_with_states(pb, tau_end, n), pb, opt);
}

}  // namespace

TEST(Validation, ConstantStateHasZeroResidual) {
  const auto e = eos::polytropic(1.0, 1.4);
  const FlowField f = [](double, double) { return std::optional<GasState>(GasState{1.3, -0.4, 2.0}); };
  const auto r = pde_residual(f, e, {0.0, 0.0}, {1.0, 1.0}, 8, 8, 0.01);
  EXPECT_EQ(r.count, 64u);
  EXPECT_LT(r.max_abs, 1e-12);
}

TEST(Validation, PlanarFanResidualIsSecondOrderInTheStep) {
  const auto e = eos::polytropic(1.0, 2.0);
  const CornerProblem pb(e, 2.0 * sound_speed(e, 1.0), 1.0, 10.0);
  const double x0 = pb.planar_xi(1.2), x1 = pb.planar_xi(4.0);
  const FlowField f = [&](double x, double) -> std::optional<GasState> {
    if (x < pb.planar_xi(1.0) || x > pb.planar_xi(10.0)) return std::nullopt;
    const auto s = planar_wave_state(pb, x);
    return GasState{s.u, s.v, s.tau};
  };
  const auto a = pde_residual(f, e, {x0, 0.0}, {x1, 1.0}, 10, 4, 0.02);
  const auto b = pde_residual(f, e, {x0, 0.0}, {x1, 1.0}, 10, 4, 0.01);
  EXPECT_LT(b.max_abs, 1e-3);
  EXPECT_NEAR(std::log2(a.max_abs / b.max_abs), 2.0, 0.1);
}

TEST(Validation, CenteredFanResidualIsSecondOrderInTheStep) {
  const auto e = eos::shallow_water(2.0, 1.0);
  const CornerProblem pb(e, 2.0 * sound_speed(e, 1.0), 1.0, 10.0, -pi / 6);
  const double a_lo = pb.hat_alpha(3.0), a_hi = pb.hat_alpha(1.0);
  // The centered wave is constant along rays from the origin.
  const FlowField f = [&](double x, double y) -> std::optional<GasState> {
    const double a = std::atan2(y, x);
    if (a < a_lo || a > a_hi) return std::nullopt;
    const auto s = centered_wave_state(pb, a);
    return GasState{s.u, s.v, s.tau};
  };
  const auto [xP, eP] = interaction_point(pb);
  const double r = std::hypot(xP, eP);
  auto box = [&](double h) {
    return pde_residual(f, e, {0.9 * r * std::cos(a_hi), 0.9 * r * std::sin(a_lo)},
                        {1.2 * r * std::cos(a_lo), 0.9 * r * std::sin(a_hi)}, 12, 12, h);
  };
  const auto a = box(0.02);
  const auto b = box(0.01);
  EXPECT_GT(b.count, 16u);
  EXPECT_LT(b.max_abs, 1e-3);
  EXPECT_GT(std::log2(a.max_abs / b.max_abs), 1.8);
}

TEST(Validation, EmptyFieldIsTooThin) {
  const auto e = eos::polytropic(1.0, 1.4);
  const FlowField f = [](double, double) { return std::optional<GasState>(); };
  try {
    pde_residual(f, e, {0.0, 0.0}, {1.0, 1.0}, 8, 8, 0.01);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::hull_too_thin);
  }
}

TEST(Validation, InterpolatorReproducesNodes) {
  const auto pb = dam_break();
  const auto g = net(pb, 4.0, 16);
  const NetInterpolator in(g);
  ASSERT_FALSE(in.empty());
  for (std::size_t i = 1; i + 1 < g.ni(); i += 3) {
    for (std::size_t j = 1; j + 1 < g.nj(); j += 3) {
      if (g.status(i, j) != NodeStatus::solved) continue;
      const CharNode& n = g.at(i, j);
      const auto s = in(n.xi, n.eta);
      ASSERT_TRUE(s.has_value());
      EXPECT_NEAR(s->tau, n.tau, 1e-9);
      EXPECT_NEAR(s->u, n.u, 1e-9);
    }
  }
  EXPECT_FALSE(in(-10.0, -10.0).has_value());
}

TEST(Validation, NetResidualsShrinkUnderRefinement) {
  const auto pb = dam_break();
  const auto g32 = net(pb, 4.0, 32);
  const auto g64 = net(pb, 4.0, 64);
  EXPECT_NEAR(mean_edge_length(g32) / mean_edge_length(g64), 2.0, 0.05);
  const auto p32 = pde_residual(g32, pb.eos());
  const auto p64 = pde_residual(g64, pb.eos());
  EXPECT_LT(p64.max_abs, p32.max_abs);
  EXPECT_LT(p64.max_abs, 1e-2);
  const auto d32 = decomposition_residual(g32, pb.eos());
  const auto d64 = decomposition_residual(g64, pb.eos(), true);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LT(d64.all()[k]->rms(), d32.all()[k]->rms()) << d64.all()[k]->name;
    EXPECT_LT(d64.all()[k]->max_abs, 1e-3) << d64.all()[k]->name;
    EXPECT_EQ(d64.all()[k]->per_node.size(), d64.all()[k]->count);
  }
  const auto b32 = bernoulli_drift(g32, pb);
  const auto b64 = bernoulli_drift(g64, pb);
  EXPECT_GT(std::log2(b32.max_abs / b64.max_abs), 1.5);
}

TEST(Validation, BoundaryCurvesSatisfyTheirDecompositions) {
  const auto pb = dam_break();
  auto both = [&](std::size_t n) {
    return std::array{boundary_decomposition_residual(curve_PQ(pb, 4.0, n), pb.eos()),
                      boundary_decomposition_residual(curve_PR_with_states(pb, 4.0, n), pb.eos())};
  };
  const auto coarse = both(32);
  const auto fine = both(64);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_LT(fine[c][k].max_abs, 1e-3) << fine[c][k].name;
      if (coarse[c][k].max_abs > 1e-12) {
        EXPECT_GT(std::log2(coarse[c][k].max_abs / fine[c][k].max_abs), 1.5) << fine[c][k].name;
      }
    }
  }
}

TEST(Validation, SecondOrderRelationsAndFPositivity) {
  const auto pb = dam_break();
  const auto g32 = net(pb, 4.0, 32);
  const auto g64 = net(pb, 4.0, 64);
  const auto s32 = second_order_residual(g32, pb.eos());
  const auto s64 = second_order_residual(g64, pb.eos());
  EXPECT_EQ(s64.f_nonpositive, 0u);
  EXPECT_GT(s64.f_min, 0.0);
  EXPECT_GT(s64.f_checked, 0u);
  EXPECT_LT(s64.plus_minus.rms(), s32.plus_minus.rms());
  EXPECT_LT(s64.minus_plus.rms(), s32.minus_plus.rms());
  EXPECT_THROW(second_order_residual(net(pb, 4.0, 1), pb.eos()), Error);
}

TEST(Validation, CommutatorIdentityHoldsOnShippedFields) {
  const auto triples = synthetic_triples();
  EXPECT_GE(triples.size(), 5u);
  for (const auto& t : triples) {
    const auto r = commutator_check(t);
    EXPECT_EQ(r.count, 121u);
    EXPECT_LT(r.max_abs, 1e-12) << t.name;
  }
}

TEST(Validation, CommutatorRejectsDegenerateAngles) {
  auto k = [](double v) { return [v](double, double) { return Jet2{v, 0, 0, 0, 0, 0}; }; };
  const SyntheticTriple t{"parallel", k(1.0), k(0.5), k(0.5)};
  EXPECT_THROW(commutator_check(t), Error);
}

TEST(Validation, PolylineDistance) {
  Polyline a;
  a.xi = {0.0, 1.0, 2.0};
  a.eta = {0.0, 0.0, 0.0};
  Polyline b = a;
  for (double& y : b.eta) y += 0.25;
  EXPECT_DOUBLE_EQ(polyline_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(polyline_distance(b, a), 0.25);
  EXPECT_TRUE(std::isnan(polyline_distance(a, Polyline{})));
}

TEST(Validation, ConvergenceStudyOnDamBreak) {
  const auto pb = dam_break();
  ConvergenceSetup s;
  s.tau_end = 4.0;
  s.solver.tau_trunc = 4.0;
  const auto t = convergence_study(pb, s, {16, 32, 64});
  for (const char* name : {"bernoulli-drift", "c d+alpha", "c d+beta", "c d-alpha", "c d-beta", "node-position",
                           "level-curve"}) {
    const auto* r = t.find(name);
    ASSERT_NE(r, nullptr) << name;
    EXPECT_GT(r->min_order(), 1.0) << name;
  }
  EXPECT_NE(t.find("c d-beta [max]"), nullptr);
  EXPECT_EQ(t.find("nothing"), nullptr);
  EXPECT_EQ(t.find("node-position")->values.size(), 2u);
  EXPECT_EQ(t.find("bernoulli-drift")->values.size(), 3u);
}

TEST(Validation, ConvergenceStudyPreconditions) {
  const auto pb = dam_break();
  ConvergenceSetup s;
  s.tau_end = 4.0;
  EXPECT_THROW(convergence_study(pb, s, {16, 32}), Error);
  EXPECT_THROW(convergence_study(pb, s, {16, 32, 48}), Error);
}
