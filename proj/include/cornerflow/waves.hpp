#pragma once

// The two simple waves that meet in the corner expansion: the planar fan R_p
// emanating from the upstream wall and the centered fan R_c at the corner O.
// Their bounding characteristics PQ (a C+ curve through R_p) and PR (a C-
// curve through R_c) carry the Goursat data for the interaction region.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/node.hpp"
#include "cornerflow/numerics.hpp"

namespace cornerflow {

enum class Family { plus, minus };

inline const char* to_string(Family f) { return f == Family::plus ? "C+" : "C-"; }

/// A sampled characteristic curve with full states, ordered away from P.
struct BoundaryCurve {
  std::vector<CharNode> points;
  Family family = Family::plus;
  double tau_begin = 0.0;
  double tau_end = 0.0;

  std::size_t size() const { return points.size(); }
  const CharNode& operator[](std::size_t k) const { return points[k]; }
};

inline std::array<double, 2> unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// λ+ and λ- for pseudo-velocity (U, V) and sound speed c, in whichever of the
/// primary or rationalized forms is better conditioned. Requires q > c.
inline std::pair<double, double> eigenvalues(double U, double V, double c) {
  const double q2 = U * U + V * V;
  if (!(q2 > c * c)) throw Error(ErrorKind::hyperbolicity, "pseudo-Mach number <= 1");
  const double root = c * std::sqrt(q2 - c * c);
  const double den = U * U - c * c;
  const double plus_num = U * V + root;
  const double minus_num = U * V - root;
  // λ+ = (UV + root)/den = (V²−c²)/(UV − root); pick the form without cancellation.
  const double lp = std::fabs(minus_num) > std::fabs(plus_num) || den == 0.0
                        ? (V * V - c * c) / minus_num
                        : plus_num / den;
  const double lm = std::fabs(plus_num) > std::fabs(minus_num) || den == 0.0
                        ? (V * V - c * c) / plus_num
                        : minus_num / den;
  return {lp, lm};
}

/// Characteristic angles (α, β) from pseudo-velocity and sound speed:
/// α = σ + δ, β = σ − δ with σ = atan2(V, U), sin δ = c/q.
inline std::pair<double, double> characteristic_angles(double U, double V, double c) {
  const double q = std::hypot(U, V);
  if (!(q > c)) throw Error(ErrorKind::hyperbolicity, "pseudo-Mach number <= 1");
  const double sigma = std::atan2(V, U);
  const double delta = std::asin(c / q);
  return {sigma + delta, sigma - delta};
}

/// Shared context of one corner-expansion problem: the EOS, the inflow state
/// and precomputed running integrals
///   I(τ) = ∫_{τ0}^{τ} s p′(s) ds   (pseudo-Bernoulli),
///   J(τ) = ∫_{τ0}^{τ} c(s)/s ds    (planar fan velocity),
///   σ̂(τ)                          (flow angle of the centered fan).
/// Copies share the tables.
class CornerProblem {
 public:
  CornerProblem(EosModel eos, double u0, double tau0, double tau_hi,
                double theta = -0.25 * numerics::pi)
      : eos_(std::move(eos)), u0_(u0), tau0_(tau0), theta_(theta) {
    if (!(tau0 > eos_.tau_min)) throw Error(ErrorKind::domain, "tau0 must exceed tau_min", tau0);
    c0_ = sound_speed(eos_, tau0);
    if (!(u0 > c0_)) throw Error(ErrorKind::subsonic_inflow, "u0 must exceed c(tau0)", tau0);
    if (!(theta > -0.5 * numerics::pi) || !(theta < 0.0)) {
      throw Error(ErrorKind::precondition, "wall angle must lie in (-pi/2, 0)");
    }
    tau_hi_ = std::max(tau_hi, tau0 * 1.5);
    auto e = std::make_shared<EosModel>(eos_);
    bern_ = std::make_shared<numerics::CumulativeIntegral>(
        [e](double s) { return s * e->dp(s); }, tau0, tau_hi_);
    fan_ = std::make_shared<numerics::CumulativeIntegral>(
        [e](double s) { return std::sqrt(-s * s * e->dp(s)) / s; }, tau0, tau_hi_);
    auto bern = bern_;
    const double u02 = u0 * u0;
    sigma_ = std::make_shared<numerics::CumulativeIntegral>(
        [e, bern, u02](double s) {
          const double q2 = u02 - 2.0 * (*bern)(s);
          const double c = std::sqrt(-s * s * e->dp(s));
          const double a = std::sqrt(std::max(q2 - c * c, 0.0));
          return -a * c / (s * q2);
        },
        tau0, tau_hi_);
  }

  const EosModel& eos() const { return eos_; }
  double u0() const { return u0_; }
  double tau0() const { return tau0_; }
  double c0() const { return c0_; }
  double theta() const { return theta_; }
  double tau_hi() const { return tau_hi_; }

  double c(double tau) const { return sound_speed(eos_, tau); }
  /// I(τ).
  double bernoulli_integral(double tau) const { return (*bern_)(tau); }
  /// J(τ).
  double fan_integral(double tau) const { return (*fan_)(tau); }

  // Planar fan: u_r(τ) = u0 + J(τ), head at ξ̂ = u0 − c0.
  double planar_u(double tau) const { return u0_ + fan_integral(tau); }
  double planar_xi(double tau) const { return planar_u(tau) - c(tau); }
  /// d(u_r − c)/dτ = τ² p″ / (2c) > 0 for convex p.
  double planar_xi_slope(double tau) const {
    return tau * tau * eos_.d2p(tau) / (2.0 * c(tau));
  }

  // Centered fan principal part as a function of τ.
  double hat_q(double tau) const { return std::sqrt(u0_ * u0_ - 2.0 * bernoulli_integral(tau)); }
  double hat_a(double tau) const {
    const double q = hat_q(tau);
    const double cc = c(tau);
    return std::sqrt(std::max(q * q - cc * cc, 0.0));
  }
  double hat_delta(double tau) const { return std::asin(c(tau) / hat_q(tau)); }
  double hat_sigma(double tau) const { return (*sigma_)(tau); }
  double hat_alpha(double tau) const { return hat_sigma(tau) + hat_delta(tau); }
  GasState hat_state(double tau) const {
    const double q = hat_q(tau);
    const double s = hat_sigma(tau);
    return {q * std::cos(s), q * std::sin(s), tau};
  }
  /// dα̂/dτ, strictly negative.
  double hat_alpha_slope(double tau) const {
    const double q = hat_q(tau);
    const double cc = c(tau);
    const double a = std::sqrt(std::max(q * q - cc * cc, 0.0));
    const double dp = eos_.dp(tau);
    const double dc = -tau * (2.0 * dp + tau * eos_.d2p(tau)) / (2.0 * cc);
    const double dq = -tau * dp / q;
    const double dsigma = -a * cc / (tau * q * q);
    const double ddelta = (dc * q - cc * dq) / (q * a);
    return dsigma + ddelta;
  }

 private:
  EosModel eos_;
  double u0_;
  double tau0_;
  double theta_;
  double c0_ = 0.0;
  double tau_hi_ = 0.0;
  std::shared_ptr<numerics::CumulativeIntegral> bern_;
  std::shared_ptr<numerics::CumulativeIntegral> fan_;
  std::shared_ptr<numerics::CumulativeIntegral> sigma_;
};

// ---------------------------------------------------------------------------
// Interaction point
// ---------------------------------------------------------------------------

/// P = (u0 − c0, c0 √((u0 − c0)/(u0 + c0))).
inline std::pair<double, double> interaction_point(const EosModel& eos, double u0, double tau0) {
  const double c0 = sound_speed(eos, tau0);
  if (!(u0 > c0)) throw Error(ErrorKind::subsonic_inflow, "u0 must exceed c(tau0)", tau0);
  return {u0 - c0, c0 * std::sqrt((u0 - c0) / (u0 + c0))};
}

inline std::pair<double, double> interaction_point(const CornerProblem& pb) {
  return interaction_point(pb.eos(), pb.u0(), pb.tau0());
}

/// C+ angle at P: atan of the rationalized λ+ at U = c0, V = −η_P.
inline double alpha_at_P(const CornerProblem& pb) {
  const auto [xi, eta] = interaction_point(pb);
  const double U = pb.u0() - xi;
  const double V = -eta;
  const double c = pb.c0();
  const double lp = (V * V - c * c) / (U * V - c * std::sqrt(U * U + V * V - c * c));
  return std::atan(lp);
}

// ---------------------------------------------------------------------------
// Planar fan
// ---------------------------------------------------------------------------

/// Specific volume τ_r at which the fan coordinate u_r − c equals `xi_hat`.
inline double planar_wave_tau(const CornerProblem& pb, double xi_hat) {
  const double head = pb.u0() - pb.c0();
  const double scale = std::max(1.0, std::fabs(pb.u0()));
  if (xi_hat < head - 1e-14 * scale) {
    throw Error(ErrorKind::range, "fan coordinate ahead of the planar wave head");
  }
  if (xi_hat <= head) return pb.tau0();

  auto f = [&](double t) { return pb.planar_xi(t) - xi_hat; };
  double lo = pb.tau0();
  double hi = 2.0 * pb.tau0();
  const double cap = 1e12 * pb.tau0();
  if (!numerics::bracket_upward(f, lo, hi, 2.0, cap)) {
    throw Error(ErrorKind::range, "fan coordinate at or beyond the vacuum edge of the planar wave");
  }
  // Monotonicity of τ ↦ u_r − c over the bracket.
  double prev = pb.planar_xi(lo);
  for (double t : numerics::geomspace(lo, hi, 64)) {
    const double x = pb.planar_xi(t);
    if (t > lo && !(x > prev)) {
      throw Error(ErrorKind::monotonicity, "u_r - c is not strictly increasing", t);
    }
    prev = x;
  }
  const double lo_b = std::max(lo, 0.5 * hi);
  double t = numerics::solve_bracketed(f, f(lo_b) <= 0.0 ? lo_b : lo, hi, 1e-15 * hi);
  for (int k = 0; k < 3; ++k) {
    const double slope = pb.planar_xi_slope(t);
    if (!(slope > 0.0)) break;
    t -= f(t) / slope;
  }
  return t;
}

/// State (u_r, 0, τ_r) of the planar fan at fan coordinate ξ̂ = u_r − c(τ_r).
inline GasState planar_wave_state(const CornerProblem& pb, double xi_hat) {
  const double t = planar_wave_tau(pb, xi_hat);
  return {pb.planar_u(t), 0.0, t};
}

// ---------------------------------------------------------------------------
// PQ: C+ characteristic through the planar fan
// ---------------------------------------------------------------------------

/// Log-spaced τ samples τ0..τ_end with `intervals` intervals.
inline std::vector<double> boundary_taus(double tau0, double tau_end, std::size_t intervals) {
  return numerics::geomspace(tau0, tau_end, intervals + 1);
}

/// η on PQ in closed form, obtained by an integrating factor:
/// η² = (c/τ)[τ0 η_P²/c0 + τ0 c0 − τ c + 2 ∫_{τ0}^{τ} c ds].
inline double pq_eta_closed_form(const CornerProblem& pb, double tau) {
  const auto [xiP, etaP] = interaction_point(pb);
  (void)xiP;
  const double c = pb.c(tau);
  const auto& eos = pb.eos();
  const double ic = numerics::integrate([&](double s) { return std::sqrt(-s * s * eos.dp(s)); },
                                        pb.tau0(), tau);
  const double t0 = pb.tau0();
  const double inner = t0 * etaP * etaP / pb.c0() + t0 * pb.c0() - tau * c + 2.0 * ic;
  return std::sqrt((c / tau) * inner);
}

/// φ on PQ in closed form: U = c, V = −η in the fan, so φ = −(c² + η²)/2 − I(τ).
inline double pq_phi_closed_form(const CornerProblem& pb, double tau, double eta) {
  const double c = pb.c(tau);
  return -0.5 * (c * c + eta * eta) - pb.bernoulli_integral(tau);
}

namespace detail {

inline CharNode pq_node(const CornerProblem& pb, double tau, double eta, double phi) {
  CharNode n;
  n.tau = tau;
  n.u = pb.planar_u(tau);
  n.v = 0.0;
  n.xi = n.u - pb.c(tau);
  n.eta = eta;
  n.phi = phi;
  const double c = pb.c(tau);
  n.alpha = std::atan((c * c - eta * eta) / (2.0 * c * eta));
  n.beta = -0.5 * numerics::pi;
  return n;
}

}  // namespace detail

/// Integrates dη/dξ = λ+ through the planar fan from P (RK4 in ln τ with
/// `substeps` steps per sample interval), carrying φ by dφ = U dξ + V dη.
inline BoundaryCurve curve_PQ(const CornerProblem& pb, double tau_end, std::size_t intervals,
                              std::size_t substeps = 8) {
  if (!(tau_end > pb.tau0())) throw Error(ErrorKind::precondition, "tau_end must exceed tau0");
  if (intervals < 1 || substeps < 1) throw Error(ErrorKind::precondition, "empty sampling");
  const auto [xiP, etaP] = interaction_point(pb);
  (void)xiP;

  // y = (η, φ) as functions of s = ln τ.
  auto rhs = [&](double s, const std::array<double, 2>& y) {
    const double tau = std::exp(s);
    const double c = pb.c(tau);
    const double eta = y[0];
    if (!(eta > 0.0)) throw Error(ErrorKind::integration, "C+ slope became vertical on PQ", tau);
    const double dxi = tau * pb.planar_xi_slope(tau);
    const double lam = (c * c - eta * eta) / (2.0 * c * eta);
    const double deta = lam * dxi;
    return std::array<double, 2>{deta, c * dxi - eta * deta};
  };

  BoundaryCurve out;
  out.family = Family::plus;
  out.tau_begin = pb.tau0();
  out.tau_end = tau_end;
  const auto taus = boundary_taus(pb.tau0(), tau_end, intervals);
  std::array<double, 2> y{etaP, -0.5 * (pb.c0() * pb.c0() + etaP * etaP)};
  out.points.push_back(detail::pq_node(pb, taus[0], y[0], y[1]));
  for (std::size_t k = 0; k + 1 < taus.size(); ++k) {
    const double s0 = std::log(taus[k]);
    const double h = (std::log(taus[k + 1]) - s0) / static_cast<double>(substeps);
    for (std::size_t m = 0; m < substeps; ++m) {
      y = numerics::rk4_step<2>(rhs, s0 + static_cast<double>(m) * h, y, h);
    }
    out.points.push_back(detail::pq_node(pb, taus[k + 1], y[0], y[1]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Centered fan
// ---------------------------------------------------------------------------

/// τ at which the centered fan ends: the sound speed falls below 10⁻⁶·c0 or
/// the flow angle σ̂ reaches the wall angle θ, whichever is first. Infinite if
/// neither happens below 10¹²·τ0.
inline double centered_vacuum_tau(const CornerProblem& pb) {
  const double cap = 1e12 * pb.tau0();
  const double c_thr = 1e-6 * pb.c0();
  double best = std::numeric_limits<double>::infinity();
  auto fc = [&](double t) { return pb.c(t) - c_thr; };
  double hi = 2.0 * pb.tau0();
  if (numerics::bracket_upward(fc, pb.tau0(), hi, 2.0, cap)) {
    best = numerics::solve_bracketed(fc, 0.5 * hi, hi, 1e-13 * hi);
  }
  auto fs = [&](double t) { return pb.hat_sigma(t) - pb.theta(); };
  hi = 2.0 * pb.tau0();
  const double cap_s = std::isfinite(best) ? best : cap;
  if (numerics::bracket_upward(fs, pb.tau0(), hi, 2.0, cap_s)) {
    const double ts = numerics::solve_bracketed(fs, std::max(pb.tau0(), 0.5 * hi), hi, 1e-13 * hi);
    best = std::min(best, ts);
  }
  return best;
}

/// Vacuum angle α_v = α̂(τ_v); −∞ when the fan never terminates.
inline double centered_vacuum_alpha(const CornerProblem& pb) {
  const double tv = centered_vacuum_tau(pb);
  return std::isfinite(tv) ? pb.hat_alpha(tv) : -std::numeric_limits<double>::infinity();
}

/// τ̂ on the C+ ray of angle `alpha` in the centered fan.
inline double centered_wave_tau(const CornerProblem& pb, double alpha) {
  const double a0 = pb.hat_alpha(pb.tau0());
  if (alpha > a0 + 1e-14) throw Error(ErrorKind::range, "ray angle above alpha0");
  if (alpha >= a0) return pb.tau0();
  const double tv = centered_vacuum_tau(pb);
  auto f = [&](double t) { return pb.hat_alpha(t) - alpha; };
  double hi = 2.0 * pb.tau0();
  const double cap = std::isfinite(tv) ? tv : 1e12 * pb.tau0();
  while (hi < cap && f(hi) > 0.0) hi *= 2.0;
  hi = std::min(hi, cap);
  if (f(hi) > 0.0) {
    throw Error(ErrorKind::range, "ray angle below the vacuum angle", hi);
  }
  const double lo = std::max(pb.tau0(), 0.5 * hi);
  double t = numerics::solve_bracketed(f, f(lo) >= 0.0 ? lo : pb.tau0(), hi, 1e-15 * hi);
  for (int k = 0; k < 3; ++k) {
    const double slope = pb.hat_alpha_slope(t);
    if (!(slope < 0.0)) break;
    t -= f(t) / slope;
  }
  return t;
}

/// (û, v̂, τ̂) on the C+ ray of angle `alpha` through the corner.
inline GasState centered_wave_state(const CornerProblem& pb, double alpha) {
  return pb.hat_state(centered_wave_tau(pb, alpha));
}

/// Residuals of the three principal-part relations at τ:
///   compatibility  cos α̂ dû + sin α̂ dv̂ = 0 (relative to |(dû, dv̂)|),
///   Bernoulli      (û² + v̂²)/2 + ∫τp′ − u0²/2 (∫ by direct quadrature),
///   eigen          sin(α̂ − atan λ+(û, v̂, ĉ)).
struct CenteredWaveResiduals {
  double compatibility = 0.0;
  double bernoulli = 0.0;
  double eigen = 0.0;
};

inline CenteredWaveResiduals centered_wave_residuals(const CornerProblem& pb, double tau) {
  CenteredWaveResiduals r;
  double h = 1e-3 * (tau - pb.tau0());
  h = std::clamp(h, 1e-6 * tau, 1e-3 * tau);
  const double tc = std::max(tau, pb.tau0() + 2.0 * h);
  const double du = numerics::derivative([&](double t) { return pb.hat_state(t).u; }, tc, h);
  const double dv = numerics::derivative([&](double t) { return pb.hat_state(t).v; }, tc, h);
  const double al = pb.hat_alpha(tc);
  r.compatibility = std::fabs(std::cos(al) * du + std::sin(al) * dv) / std::hypot(du, dv);

  const GasState s = pb.hat_state(tau);
  r.bernoulli = std::fabs(0.5 * (s.u * s.u + s.v * s.v) + bernoulli_integral(pb.eos(), pb.tau0(), tau) -
                          0.5 * pb.u0() * pb.u0());

  const double c = pb.c(tau);
  const auto [lp, lm] = eigenvalues(s.u, s.v, c);
  (void)lm;
  r.eigen = std::fabs(std::sin(pb.hat_alpha(tau) - std::atan(lp)));
  return r;
}

// ---------------------------------------------------------------------------
// PR: C- characteristic through the centered fan
// ---------------------------------------------------------------------------

namespace detail {

// State y = (r, φ) in s = ln τ: the point sits at distance r from O on the C+
// ray of angle α̂(τ), where the pseudo-velocity has components (a − r) along
// the ray and −ĉ across it.
struct PrRhs {
  const CornerProblem* pb;
  std::array<double, 2> operator()(double s, const std::array<double, 2>& y) const {
    const double tau = std::exp(s);
    const double a = pb->hat_a(tau);
    const double c = pb->c(tau);
    const double r = y[0];
    const double w = a - r;
    if (!(w > 0.0)) {
      throw Error(ErrorKind::sonic_radicand, "PR reached the sonic line of the centered fan", tau);
    }
    const double cot2d = (w * w - c * c) / (2.0 * c * w);
    const double dal = pb->hat_alpha_slope(tau);
    const double dr = -r * cot2d * dal;
    const double dphi = w * dr - c * r * dal;
    return {tau * dr, tau * dphi};
  }
};

inline CharNode pr_node(const CornerProblem& pb, double tau, double r, double phi) {
  const GasState s = pb.hat_state(tau);
  const double al = pb.hat_alpha(tau);
  const double w = pb.hat_a(tau) - r;
  const double c = pb.c(tau);
  if (!(w > 0.0)) throw Error(ErrorKind::sonic_radicand, "PR reached the sonic line", tau);
  CharNode n;
  n.xi = r * std::cos(al);
  n.eta = r * std::sin(al);
  n.u = s.u;
  n.v = s.v;
  n.tau = tau;
  n.phi = phi;
  n.alpha = al;
  n.beta = al - 2.0 * std::atan(c / w);
  return n;
}

inline double pr_r_at_P(const CornerProblem& pb) {
  return pb.u0() * std::sqrt((pb.u0() - pb.c0()) / (pb.u0() + pb.c0()));
}

}  // namespace detail

/// Position on PR at specific volume τ.
inline std::pair<double, double> curve_PR(const CornerProblem& pb, double tau) {
  if (tau < pb.tau0()) throw Error(ErrorKind::range, "tau below tau0", tau);
  const double r0 = detail::pr_r_at_P(pb);
  const double a0 = pb.hat_alpha(pb.tau0());
  if (tau == pb.tau0()) {
    const auto P = interaction_point(pb);
    (void)a0;
    return P;
  }
  const auto steps = static_cast<std::size_t>(std::max(64.0, std::ceil(256.0 * std::log(tau / pb.tau0()))));
  const double s0 = std::log(pb.tau0());
  const double h = (std::log(tau) - s0) / static_cast<double>(steps);
  detail::PrRhs rhs{&pb};
  std::array<double, 2> y{r0, 0.0};
  for (std::size_t m = 0; m < steps; ++m) y = numerics::rk4_step<2>(rhs, s0 + static_cast<double>(m) * h, y, h);
  const double al = pb.hat_alpha(tau);
  if (!(pb.hat_a(tau) - y[0] > 0.0)) {
    throw Error(ErrorKind::sonic_radicand, "PR reached the sonic line", tau);
  }
  return {y[0] * std::cos(al), y[0] * std::sin(al)};
}

/// τ at which PR would reach the sonic line a(τ) = r, searched up to `tau_cap`.
inline std::optional<double> pr_sonic_tau(const CornerProblem& pb, double tau_cap,
                                          std::size_t steps_per_decade = 400) {
  detail::PrRhs rhs{&pb};
  const double s0 = std::log(pb.tau0());
  const double s1 = std::log(tau_cap);
  const auto steps = static_cast<std::size_t>(std::ceil((s1 - s0) / std::log(10.0) * steps_per_decade));
  const double h = (s1 - s0) / static_cast<double>(steps);
  std::array<double, 2> y{detail::pr_r_at_P(pb), 0.0};
  for (std::size_t m = 0; m < steps; ++m) {
    const double s = s0 + static_cast<double>(m) * h;
    try {
      y = numerics::rk4_step<2>(rhs, s, y, h);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::sonic_radicand) return std::exp(s);
      throw;
    }
    const double t = std::exp(s + h);
    if (!(pb.hat_a(t) - y[0] > 0.0)) return t;
  }
  return std::nullopt;
}

/// Analytic φ on PR: along a C+ ray of the centered fan the state is constant,
/// so φ = −u0²/2 + a r − r²/2 at distance r from O.
inline double pr_phi_closed_form(const CornerProblem& pb, double tau, double r) {
  return -0.5 * pb.u0() * pb.u0() + pb.hat_a(tau) * r - 0.5 * r * r;
}

/// PR sampled at the same τ levels as curve_PQ, carrying centered-fan states
/// matched by τ and φ integrated along the curve. Throws sign_condition if the
/// discrete ∂-ρ < 0 or ∂-α < 0 fails between consecutive samples.
inline BoundaryCurve curve_PR_with_states(const CornerProblem& pb, double tau_end,
                                          std::size_t intervals, std::size_t substeps = 8) {
  if (!(tau_end > pb.tau0())) throw Error(ErrorKind::precondition, "tau_end must exceed tau0");
  if (intervals < 1 || substeps < 1) throw Error(ErrorKind::precondition, "empty sampling");
  const auto taus = boundary_taus(pb.tau0(), tau_end, intervals);
  detail::PrRhs rhs{&pb};

  BoundaryCurve out;
  out.family = Family::minus;
  out.tau_begin = pb.tau0();
  out.tau_end = tau_end;
  const auto [xiP, etaP] = interaction_point(pb);
  std::array<double, 2> y{detail::pr_r_at_P(pb), -0.5 * (pb.c0() * pb.c0() + etaP * etaP)};
  CharNode first = detail::pr_node(pb, taus[0], y[0], y[1]);
  first.xi = xiP;
  first.eta = etaP;
  first.beta = -0.5 * numerics::pi;
  out.points.push_back(first);
  for (std::size_t k = 0; k + 1 < taus.size(); ++k) {
    const double s0 = std::log(taus[k]);
    const double h = (std::log(taus[k + 1]) - s0) / static_cast<double>(substeps);
    for (std::size_t m = 0; m < substeps; ++m) {
      y = numerics::rk4_step<2>(rhs, s0 + static_cast<double>(m) * h, y, h);
    }
    out.points.push_back(detail::pr_node(pb, taus[k + 1], y[0], y[1]));
  }

  for (std::size_t k = 0; k + 1 < out.points.size(); ++k) {
    const CharNode& a = out.points[k];
    const CharNode& b = out.points[k + 1];
    const auto e = unit(0.5 * (a.beta + b.beta));
    const double ds = (b.xi - a.xi) * e[0] + (b.eta - a.eta) * e[1];
    if (!(ds != 0.0) || !((b.rho() - a.rho()) / ds < 0.0) || !((b.alpha - a.alpha) / ds < 0.0)) {
      throw Error(ErrorKind::sign_condition, "d-rho < 0 and d-alpha < 0 fail on PR", b.tau);
    }
  }
  return out;
}

/// Signed discrete directional derivative of ρ between consecutive samples of a
/// boundary curve, along e(α) on C+ curves and e(β) on C- curves. Entry k
/// belongs to the interval [k, k+1].
inline std::vector<double> boundary_rho_derivative(const BoundaryCurve& curve) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const CharNode& a = curve[k];
    const CharNode& b = curve[k + 1];
    const double ang = curve.family == Family::plus ? 0.5 * (a.alpha + b.alpha) : 0.5 * (a.beta + b.beta);
    const auto e = unit(ang);
    const double ds = (b.xi - a.xi) * e[0] + (b.eta - a.eta) * e[1];
    out.push_back((b.rho() - a.rho()) / ds);
  }
  return out;
}

/// ∂+ρ on PQ from c∂+β = 0: −2 sin2ω c ρ⁴ / p″ with ω read as the node's δ.
inline double pq_rho_derivative_closed_form(const EosModel& eos, const CharNode& n) {
  const double c = sound_speed(eos, n.tau);
  const double r = n.rho();
  return -2.0 * std::sin(2.0 * n.delta()) * c * r * r * r * r / eos.d2p(n.tau);
}

}  // namespace cornerflow
