#pragma once

// Admissibility hypothesis, invariant regions for (α, β), gradient bounds and
// the audit of a solved net against all of them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/goursat.hpp"
#include "cornerflow/waves.hpp"

namespace cornerflow {

/// C+ angle at P from the rationalized eigenvalue
/// λ+ = (V² − c²)/(UV − c√(q² − c²)), with U = c0 and V = −η_P there.
inline double alpha0_at_P(const EosModel& eos, double u0, double tau0) {
  const auto [xi, eta] = interaction_point(eos, u0, tau0);
  const double c = sound_speed(eos, tau0);
  const double U = u0 - xi;
  const double V = -eta;
  const double lp = (V * V - c * c) / (U * V - c * std::sqrt(U * U + V * V - c * c));
  return std::atan(lp);
}

// ---------------------------------------------------------------------------
// Hypothesis
// ---------------------------------------------------------------------------

struct HypothesisReport {
  double delta_bar_0 = 0.0;
  double alpha0 = 0.0;
  double psi_max = 0.0;
  double chi_min = 0.0;
  std::vector<double> tau;
  std::vector<double> condition_left;
  double condition_right = 0.0;
  std::vector<bool> pass;
  bool all_pass = false;
  /// First τ sample where the condition fails (NaN when none does).
  double first_failure = std::numeric_limits<double>::quiet_NaN();

  double target() const { return alpha0 + 0.5 * numerics::pi; }
};

/// 2δ̄(τ0) + χ(τ) < α0 + π/2 < 4δ̄(τ0) at every profile sample.
inline HypothesisReport hypothesis_check(const DeltaBarProfile& profile, double alpha0) {
  HypothesisReport r;
  r.delta_bar_0 = profile.delta_bar0();
  r.alpha0 = alpha0;
  r.psi_max = profile.psi_max();
  r.chi_min = *std::min_element(profile.chi.begin(), profile.chi.end());
  r.condition_right = 4.0 * r.delta_bar_0;
  r.tau = profile.tau_samples;
  const double target = r.target();
  r.all_pass = true;
  for (std::size_t k = 0; k < profile.tau_samples.size(); ++k) {
    const double left = 2.0 * r.delta_bar_0 + profile.chi[k];
    const bool ok = left < target && target < r.condition_right;
    r.condition_left.push_back(left);
    r.pass.push_back(ok);
    if (!ok && r.all_pass) {
      r.all_pass = false;
      r.first_failure = profile.tau_samples[k];
    }
  }
  return r;
}

inline HypothesisReport hypothesis_check(const EosModel& eos, double u0, double tau0, double tau_max,
                                         std::size_t n_samples = 400) {
  const auto profile = build_delta_bar_profile(eos, tau0, tau_max, n_samples);
  return hypothesis_check(profile, alpha0_at_P(eos, u0, tau0));
}

// ---------------------------------------------------------------------------
// Invariant regions
// ---------------------------------------------------------------------------

enum class BoxKind { square_case_1, square_case_2, pentagon };

inline const char* to_string(BoxKind k) {
  switch (k) {
    case BoxKind::square_case_1: return "square-case-1";
    case BoxKind::square_case_2: return "square-case-2";
    case BoxKind::pentagon: return "pentagon";
  }
  return "unknown";
}

struct InvariantBox {
  double tau = 0.0;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  BoxKind kind = BoxKind::square_case_1;

  /// Signed distance to the nearest side, positive inside. The pentagon also
  /// carries the cut α − β > ε2.
  double margin(double alpha, double beta) const {
    double m = std::min({alpha - alpha_lo, alpha_hi - alpha, beta - beta_lo, beta_hi - beta});
    if (kind == BoxKind::pentagon) m = std::min(m, (alpha - beta) - eps2);
    return m;
  }
  bool contains(double alpha, double beta, bool strict = true) const {
    const double m = margin(alpha, beta);
    return strict ? m > 0.0 : m >= 0.0;
  }
};

/// Γ(τ). While δ̄ has not yet turned (only τ0 in the extrema list up to τ) the
/// squares apply: case 1 when δ̄ is nondecreasing,
///   α ∈ (−π/2 − ε1 + 2δ̄0, α0 + ε1 + 2(δ̄ − δ̄0)), β ∈ (−π/2 − ε1 − 2(δ̄ − δ̄0), α0 + ε1 − 2δ̄0),
/// case 2 when δ̄ decreases after its first extremum τ1 (τ1 = τ0 if it decreases at once),
///   α ∈ (−π/2 − ε1 + 2δ̄0 + 2(δ̄ − δ̄(τ1)), α0 + ε1), β ∈ (−π/2 − ε1, α0 + ε1 − 2δ̄0 − 2(δ̄ − δ̄(τ1))).
/// Otherwise the pentagon built from ψ(τ) and χ(τ).
inline InvariantBox invariant_box(const EosModel& eos, const DeltaBarProfile& profile, double alpha0,
                                  double tau, double eps1, double eps2) {
  InvariantBox b;
  b.tau = tau;
  b.eps1 = eps1;
  b.eps2 = eps2;
  const double half_pi = 0.5 * numerics::pi;
  const double d0 = profile.delta_bar0();
  const double dt = numerics::interp_linear(profile.tau_samples, profile.delta_bar, tau);

  std::size_t turns = 0;
  for (std::size_t k = 1; k < profile.extrema.size(); ++k) {
    if (profile.extrema[k] < tau) ++turns;
  }
  // Direction of δ̄ right after τ0.
  const double first_end = profile.extrema.size() > 1 ? profile.extrema[1] : profile.tau_samples.back();
  const double probe = profile.tau0() + 0.5 * (std::min(first_end, tau) - profile.tau0());
  const bool rising_first =
      tau <= profile.tau0() || delta_bar(eos, std::max(probe, profile.tau0())) >= d0 - 1e-15;

  if (turns == 0 && rising_first) {
    b.kind = BoxKind::square_case_1;
    b.alpha_lo = -half_pi - eps1 + 2.0 * d0;
    b.alpha_hi = alpha0 + eps1 + 2.0 * (dt - d0);
    b.beta_lo = -half_pi - eps1 - 2.0 * (dt - d0);
    b.beta_hi = alpha0 + eps1 - 2.0 * d0;
    return b;
  }
  if ((turns == 0 && !rising_first) || (turns == 1 && rising_first)) {
    const double tau1 = turns == 0 ? profile.tau0() : profile.extrema[1];
    const double d1 = delta_bar(eos, tau1);
    b.kind = BoxKind::square_case_2;
    b.alpha_lo = -half_pi - eps1 + 2.0 * d0 + 2.0 * (dt - d1);
    b.alpha_hi = alpha0 + eps1;
    b.beta_lo = -half_pi - eps1;
    b.beta_hi = alpha0 + eps1 - 2.0 * d0 - 2.0 * (dt - d1);
    return b;
  }
  const double psi = profile.psi_at(tau);
  const double chi = profile.chi_at(tau);
  b.kind = BoxKind::pentagon;
  b.alpha_lo = -half_pi - eps1 + 2.0 * d0 + chi;
  b.alpha_hi = alpha0 + eps1 + psi;
  b.beta_lo = -half_pi - eps1 - psi;
  b.beta_hi = alpha0 + eps1 - 2.0 * d0 - chi;
  return b;
}

/// The pentagon Γ* at τ from ψ(τ), χ(τ) regardless of the extrema structure.
inline InvariantBox pentagon_box(const DeltaBarProfile& profile, double alpha0, double tau, double eps1,
                                 double eps2) {
  const double half_pi = 0.5 * numerics::pi;
  const double d0 = profile.delta_bar0();
  const double psi = profile.psi_at(tau);
  const double chi = profile.chi_at(tau);
  InvariantBox b;
  b.tau = tau;
  b.eps1 = eps1;
  b.eps2 = eps2;
  b.kind = BoxKind::pentagon;
  b.alpha_lo = -half_pi - eps1 + 2.0 * d0 + chi;
  b.alpha_hi = alpha0 + eps1 + psi;
  b.beta_lo = -half_pi - eps1 - psi;
  b.beta_hi = alpha0 + eps1 - 2.0 * d0 - chi;
  return b;
}

// ---------------------------------------------------------------------------
// Gradient bounds
// ---------------------------------------------------------------------------

/// M1 as a function of τ: the least boundary derivative (∂+ρ on PQ, ∂-ρ on PR)
/// among boundary intervals lying at or below τ, i.e. over the boundary of the
/// domain cut off at level τ.
class M1Bound {
 public:
  M1Bound() = default;
  M1Bound(std::vector<double> taus, std::vector<double> pq, std::vector<double> pr)
      : taus_(std::move(taus)), pq_(std::move(pq)), pr_(std::move(pr)) {
    running_.resize(taus_.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < taus_.size(); ++k) {
      m = std::min({m, pq_[k], pr_[k]});
      running_[k] = m;
    }
  }

  /// M1(τ); constant below the first interval and above the last.
  double operator()(double tau) const {
    if (taus_.empty()) return -std::numeric_limits<double>::infinity();
    const auto it = std::upper_bound(taus_.begin(), taus_.end(), tau);
    if (it == taus_.begin()) return running_.front();
    return running_[static_cast<std::size_t>(std::distance(taus_.begin(), it)) - 1];
  }
  /// Pointwise min of the two boundary profiles at level τ (interpolated).
  double pointwise(double tau) const {
    return std::min(numerics::interp_linear(taus_, pq_, tau), numerics::interp_linear(taus_, pr_, tau));
  }

  const std::vector<double>& taus() const { return taus_; }
  const std::vector<double>& pq() const { return pq_; }
  const std::vector<double>& pr() const { return pr_; }

 private:
  std::vector<double> taus_;
  std::vector<double> pq_;
  std::vector<double> pr_;
  std::vector<double> running_;
};

enum class M1Source { discrete, closed_form };

/// Builds M1 from two boundary curves sampled on the same τ levels. Interval k
/// is attributed to its upper end τ_{k+1} (its lower end is already inside the
/// smaller domain). Throws sign_condition if any boundary derivative is ≥ 0.
///
/// With M1Source::closed_form the PQ profile is the closed-form ∂+ρ (the
/// smaller of its values at the interval ends) instead of the secant; PR is
/// always differenced.
inline M1Bound m1_bound(const BoundaryCurve& PQ, const BoundaryCurve& PR, M1Source src = M1Source::discrete,
                        const EosModel* eos = nullptr) {
  if (PQ.size() != PR.size() || PQ.size() < 2) {
    throw Error(ErrorKind::precondition, "m1_bound needs PQ and PR on the same tau samples");
  }
  if (src == M1Source::closed_form && !eos) throw Error(ErrorKind::precondition, "closed-form M1 needs the EOS");
  auto dq = boundary_rho_derivative(PQ);
  if (src == M1Source::closed_form) {
    for (std::size_t k = 0; k < dq.size(); ++k) {
      dq[k] = std::min(pq_rho_derivative_closed_form(*eos, PQ[k]), pq_rho_derivative_closed_form(*eos, PQ[k + 1]));
    }
  }
  const auto dr = boundary_rho_derivative(PR);
  std::vector<double> taus;
  for (std::size_t k = 0; k < dq.size(); ++k) {
    if (!(dq[k] < 0.0)) throw Error(ErrorKind::sign_condition, "d+rho >= 0 on PQ", PQ[k + 1].tau);
    if (!(dr[k] < 0.0)) throw Error(ErrorKind::sign_condition, "d-rho >= 0 on PR", PR[k + 1].tau);
    taus.push_back(PQ[k + 1].tau);
  }
  return M1Bound(std::move(taus), dq, dr);
}

/// f = 2 sin²δ − 8 p′ cos⁴δ / (τ p″).
inline double f_factor(const EosModel& eos, double tau, double delta) {
  const double s = std::sin(delta);
  const double c = std::cos(delta);
  return 2.0 * s * s - 8.0 * eos.dp(tau) * c * c * c * c / (tau * eos.d2p(tau));
}

/// 𝒢 for F(ρ) = ρⁿ split as G0 + n·G1; G1 = 4c² cos²δ / (τ³ p″) > 0.
inline std::pair<double, double> g_factor(const EosModel& eos, double tau, double delta) {
  const double s = std::sin(delta);
  const double co = std::cos(delta);
  const double c2 = -tau * tau * eos.dp(tau);
  const double om = omega(eos, tau, delta);
  const double g0 = 2.0 * s * s - 8.0 * eos.dp(tau) * co * co * co * co / (tau * eos.d2p(tau)) -
                    2.0 * co * co + 2.0 * om * co * co * co * co - 1.0;
  const double g1 = 4.0 * c2 * co * co / (tau * tau * tau * eos.d2p(tau));
  return {g0, g1};
}

/// Smallest integer n ≥ 0 with 𝒢 > 0 at every solved or boundary node.
inline int n_exp_scan(const CharGrid& g, const EosModel& eos) {
  double need = 0.0;
  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      if (!g.is_active(i, j)) continue;
      const CharNode& x = g.at(i, j);
      const auto [g0, g1] = g_factor(eos, x.tau, x.delta());
      if (g0 > 0.0) continue;
      need = std::max(need, std::floor(-g0 / g1) + 1.0);
    }
  }
  return static_cast<int>(need);
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

struct Violation {
  std::size_t i = 0;
  std::size_t j = 0;
  double tau = 0.0;
  double margin = 0.0;
};

struct CheckTally {
  explicit CheckTally(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Smallest margin seen (negative when violated).
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<Violation> samples;

  void record(std::size_t i, std::size_t j, double tau, double margin, bool ok) {
    ++checked;
    if (margin < worst_margin) worst_margin = margin;
    if (!ok) {
      ++violations;
      if (samples.size() < 16) samples.push_back({i, j, tau, margin});
    }
  }
};

struct AuditReport {
  int n_exp = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::size_t nodes_audited = 0;
  CheckTally box{"invariant-box"};
  CheckTally separation{"alpha-minus-beta-above-eps2"};
  CheckTally mach{"mach-above-one"};
  CheckTally delta_range{"delta-in-(eps2/2,pi/2)"};
  CheckTally dtau{"d-tau-positive"};
  CheckTally grad{"d-rho-in-(M1,0)"};
  CheckTally scaled{"scaled-d-rho-in-(M2,0)"};
  CheckTally f_positive{"f-positive"};
  /// Informational: the scaled check with δ taken at the boundary sample that set M1.
  CheckTally scaled_boundary_delta{"scaled-d-rho-boundary-delta"};

  std::vector<const CheckTally*> tallies() const {
    return {&box, &separation, &mach, &delta_range, &dtau, &grad, &scaled, &f_positive};
  }
  std::size_t total_violations() const {
    std::size_t n = 0;
    for (const auto* t : tallies()) n += t->violations;
    return n;
  }
};

struct AuditInputs {
  const EosModel* eos = nullptr;
  const DeltaBarProfile* profile = nullptr;
  double alpha0 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  const M1Bound* m1 = nullptr;
  int n_exp = 0;
  /// Use the pentagon for every τ instead of the case-selected squares.
  bool pentagon_only = false;
};

/// Checks every boundary and solved node. Interval membership is strict at
/// interior nodes and non-strict on the boundary curves, where the bounds are
/// attained by construction (M1 is the boundary minimum; (α, β)(P) sits on the
/// box edge when ε1 → 0). Directional differences are taken on the incoming
/// grid edges: ∂+ from (i, j−1), ∂- from (i−1, j).
inline AuditReport audit_grid(const CharGrid& g, const AuditInputs& in) {
  if (!in.eos || !in.profile || !in.m1) throw Error(ErrorKind::precondition, "audit inputs incomplete");
  AuditReport rep;
  rep.n_exp = in.n_exp;
  rep.eps1 = in.eps1;
  rep.eps2 = in.eps2;
  const double half_pi = 0.5 * numerics::pi;
  const double n = static_cast<double>(in.n_exp);

  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      if (!g.is_active(i, j)) continue;
      ++rep.nodes_audited;
      const CharNode& x = g.at(i, j);
      const bool interior = g.status(i, j) == NodeStatus::solved;
      auto pass = [interior](double margin) { return interior ? margin > 0.0 : margin >= -1e-12; };

      const InvariantBox box = in.pentagon_only
                                   ? pentagon_box(*in.profile, in.alpha0, x.tau, in.eps1, in.eps2)
                                   : invariant_box(*in.eos, *in.profile, in.alpha0, x.tau, in.eps1, in.eps2);
      const double mb = box.margin(x.alpha, x.beta);
      rep.box.record(i, j, x.tau, mb, pass(mb));

      const double sep = (x.alpha - x.beta) - in.eps2;
      rep.separation.record(i, j, x.tau, sep, sep > 0.0);

      const double mm = x.q() / sound_speed(*in.eos, x.tau) - 1.0;
      rep.mach.record(i, j, x.tau, mm, mm > 0.0);

      const double d = x.delta();
      const double dm = std::min(d - 0.5 * in.eps2, half_pi - d);
      rep.delta_range.record(i, j, x.tau, dm, dm > 0.0);

      const double f = f_factor(*in.eos, x.tau, d);
      rep.f_positive.record(i, j, x.tau, f, f > 0.0);

      if (!interior) continue;
      const CharNode& L = g.at(i, j - 1);
      const CharNode& R = g.at(i - 1, j);
      rep.dtau.record(i, j, x.tau, std::min(x.tau - L.tau, x.tau - R.tau),
                      x.tau > L.tau && x.tau > R.tau);

      const auto ep = unit(0.5 * (L.alpha + x.alpha));
      const auto em = unit(0.5 * (R.beta + x.beta));
      const double sp = (x.xi - L.xi) * ep[0] + (x.eta - L.eta) * ep[1];
      const double sm = (x.xi - R.xi) * em[0] + (x.eta - R.eta) * em[1];
      const double dpr = (x.rho() - L.rho()) / sp;
      const double dmr = (x.rho() - R.rho()) / sm;
      const double M1 = (*in.m1)(x.tau);
      const double gm = std::min({dpr - M1, dmr - M1, -dpr, -dmr});
      rep.grad.record(i, j, x.tau, gm, gm > 0.0);

      const double s2 = std::sin(d) * std::sin(d);
      const double rn = std::pow(x.rho(), n);
      const double M2 = rn * M1 / s2;
      const double a = rn * dpr / s2;
      const double b = rn * dmr / s2;
      const double sm2 = std::min({a - M2, b - M2, -a, -b});
      rep.scaled.record(i, j, x.tau, sm2, sm2 > 0.0);

      // δ at P as the boundary reference for M2.
      const double dP = g.at(0, 0).delta();
      const double M2b = rn * M1 / (std::sin(dP) * std::sin(dP));
      const double sb = std::min({a - M2b, b - M2b, -a, -b});
      rep.scaled_boundary_delta.record(i, j, x.tau, sb, sb > 0.0);
    }
  }
  return rep;
}

}  // namespace cornerflow
