#pragma once

// Barotropic equation of state p(τ) and the thermodynamic functionals the
// corner-expansion construction is built on: sound speed, κ, μ², m, Ω and
// the critical angle δ̄(τ) = atan √m(τ) with its variation profile.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/error.hpp"
#include "cornerflow/numerics.hpp"

namespace cornerflow {

/// A pressure law p(τ) in specific volume with hand-derived p′ and p″.
///
/// Evaluation is pure; an EosModel may be shared read-only across threads.
struct EosModel {
  std::function<double(double)> p;
  std::function<double(double)> dp;
  std::function<double(double)> d2p;
  double tau_min = 0.0;
  std::string label;
};

/// c(τ) = √(−τ² p′(τ)).
inline double sound_speed(const EosModel& eos, double tau) {
  if (!(tau > eos.tau_min)) {
    throw Error(ErrorKind::domain, "specific volume at or below tau_min of " + eos.label, tau);
  }
  const double dp = eos.dp(tau);
  if (!(dp < 0.0)) {
    throw Error(ErrorKind::convexity, "p'(tau) >= 0 for " + eos.label, tau);
  }
  return tau * std::sqrt(-dp);
}

/// κ(τ) = −2p′ / (2p′ + τp″).
inline double kappa(const EosModel& eos, double tau) {
  if (!(tau > eos.tau_min)) {
    throw Error(ErrorKind::domain, "specific volume at or below tau_min of " + eos.label, tau);
  }
  const double dp = eos.dp(tau);
  const double den = 2.0 * dp + tau * eos.d2p(tau);
  if (den == 0.0 || std::fabs(den) <= 1e-14 * std::fabs(dp)) {
    throw Error(ErrorKind::singularity, "2p' + tau p'' vanishes for " + eos.label, tau);
  }
  return -2.0 * dp / den;
}

/// μ²(τ) = 1 / (1 + κ(τ)).
inline double mu_squared(const EosModel& eos, double tau) {
  const double k = kappa(eos, tau);
  if (k + 1.0 == 0.0) throw Error(ErrorKind::singularity, "kappa = -1", tau);
  return 1.0 / (1.0 + k);
}

/// m(τ) = (κ − 1) / (κ + 1).
inline double m_value(const EosModel& eos, double tau) {
  const double k = kappa(eos, tau);
  if (k + 1.0 == 0.0) throw Error(ErrorKind::singularity, "kappa = -1", tau);
  return (k - 1.0) / (k + 1.0);
}

/// Ω(τ, δ) = m(τ) − tan²δ.
inline double omega(const EosModel& eos, double tau, double delta) {
  const double t = std::tan(delta);
  return m_value(eos, tau) - t * t;
}

/// δ̄(τ) = atan √m(τ) ∈ (0, π/2).
inline double delta_bar(const EosModel& eos, double tau) {
  const double m = m_value(eos, tau);
  if (!(m > 0.0)) {
    throw Error(ErrorKind::hypothesis, "m(tau) <= 0, critical angle undefined for " + eos.label, tau);
  }
  return std::atan(std::sqrt(m));
}

/// dm/dτ by a fourth-order central difference (the models carry no p‴).
inline double m_derivative(const EosModel& eos, double tau) {
  double h = 1e-3 * tau;
  if (tau - 2.0 * h <= eos.tau_min) h = 0.25 * (tau - eos.tau_min);
  return numerics::derivative([&](double t) { return m_value(eos, t); }, tau, h);
}

/// dδ̄/dτ = m′ / (2√m (1 + m)).
inline double delta_bar_derivative(const EosModel& eos, double tau) {
  const double m = m_value(eos, tau);
  if (!(m > 0.0)) throw Error(ErrorKind::hypothesis, "m(tau) <= 0", tau);
  return m_derivative(eos, tau) / (2.0 * std::sqrt(m) * (1.0 + m));
}

/// ∫_{τ0}^{τ} s p′(s) ds, the enthalpy-like term of pseudo-Bernoulli's law.
inline double bernoulli_integral(const EosModel& eos, double tau0, double tau) {
  return numerics::integrate([&](double s) { return s * eos.dp(s); }, tau0, tau);
}

/// First τ sample in [lo, hi] violating p′<0, p″>0 or m>0, if any.
inline std::optional<double> first_inadmissible(const EosModel& eos, double lo, double hi,
                                                std::size_t n = 200) {
  for (double tau : numerics::geomspace(lo, hi, n)) {
    if (!(tau > eos.tau_min)) return tau;
    if (!(eos.dp(tau) < 0.0) || !(eos.d2p(tau) > 0.0)) return tau;
    const double den = 2.0 * eos.dp(tau) + tau * eos.d2p(tau);
    if (den == 0.0) return tau;
    const double k = -2.0 * eos.dp(tau) / den;
    if (!((k - 1.0) / (k + 1.0) > 0.0)) return tau;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Builtin families
// ---------------------------------------------------------------------------

namespace eos {

/// p = A τ^{−γ}.
inline EosModel polytropic(double A, double gamma) {
  if (!(A > 0.0) || !(gamma > 0.0)) {
    throw Error(ErrorKind::precondition, "polytropic needs A > 0 and gamma > 0");
  }
  EosModel m;
  m.p = [A, gamma](double t) { return A * std::pow(t, -gamma); };
  m.dp = [A, gamma](double t) { return -A * gamma * std::pow(t, -gamma - 1.0); };
  m.d2p = [A, gamma](double t) { return A * gamma * (gamma + 1.0) * std::pow(t, -gamma - 2.0); };
  m.tau_min = 0.0;
  m.label = "polytropic";
  return m;
}

/// p = A₁ τ^{γ₁} + B₁ τ^{γ₂}; exponents are signed (negative for physical laws).
inline EosModel two_constant(double A1, double B1, double g1, double g2) {
  EosModel m;
  m.p = [=](double t) { return A1 * std::pow(t, g1) + B1 * std::pow(t, g2); };
  m.dp = [=](double t) {
    return A1 * g1 * std::pow(t, g1 - 1.0) + B1 * g2 * std::pow(t, g2 - 1.0);
  };
  m.d2p = [=](double t) {
    return A1 * g1 * (g1 - 1.0) * std::pow(t, g1 - 2.0) + B1 * g2 * (g2 - 1.0) * std::pow(t, g2 - 2.0);
  };
  m.tau_min = 0.0;
  m.label = "two-constant";
  return m;
}

/// Modified shallow water: depth h = 1/τ, p = kτ^{−1} + (g/2)τ^{−2}.
inline EosModel shallow_water(double g, double k) {
  if (!(g > 0.0) || !(k >= 0.0)) {
    throw Error(ErrorKind::precondition, "shallow water needs g > 0 and k >= 0");
  }
  EosModel m = two_constant(k, 0.5 * g, -1.0, -2.0);
  m.label = "shallow-water";
  return m;
}

/// Transverse-field magnetogasdynamics under the frozen law H = κ₀ρ:
/// p = A₁τ^{−γ} + B₁τ^{−2} with B₁ = μκ₀²/2.
inline EosModel magneto(double A1, double gamma, double mu, double kappa0) {
  const double B1 = 0.5 * mu * kappa0 * kappa0;
  if (!(A1 > 0.0) || !(gamma > 0.0) || !(B1 > 0.0)) {
    throw Error(ErrorKind::precondition, "magneto needs A1 > 0, gamma > 0 and mu*kappa0^2/2 > 0");
  }
  EosModel m = two_constant(A1, B1, -gamma, -2.0);
  m.label = "magneto";
  return m;
}

/// Van der Waals type law p = S₁/(τ−1)^{γ+1} − 1/τ², valid for τ > 4.
inline EosModel van_der_waals(double S1, double gamma) {
  if (!(S1 > 0.25) || !(S1 < 81.0 / 256.0)) {
    throw Error(ErrorKind::precondition, "van der Waals needs S1 in (1/4, 81/256)");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw Error(ErrorKind::precondition, "van der Waals needs gamma in (0, 1)");
  }
  EosModel m;
  m.p = [=](double t) { return S1 / std::pow(t - 1.0, gamma + 1.0) - 1.0 / (t * t); };
  m.dp = [=](double t) {
    return -(gamma + 1.0) * S1 / std::pow(t - 1.0, gamma + 2.0) + 2.0 / (t * t * t);
  };
  m.d2p = [=](double t) {
    return (gamma + 1.0) * (gamma + 2.0) * S1 / std::pow(t - 1.0, gamma + 3.0) - 6.0 / (t * t * t * t);
  };
  m.tau_min = 4.0;
  m.label = "van-der-waals";
  return m;
}

}  // namespace eos

// ---------------------------------------------------------------------------
// δ̄ profile: extrema, ψ, χ
// ---------------------------------------------------------------------------

struct DeltaBarProfile {
  std::vector<double> tau_samples;
  std::vector<double> delta_bar;
  /// δ̄′ at each sample (finite-difference based).
  std::vector<double> slope;
  /// τ₀ followed by every interior local extremum of δ̄, increasing.
  std::vector<double> extrema;
  std::vector<double> psi;
  std::vector<double> chi;
  double delta_bar_star = 0.0;
  double tail_bound = 0.0;

  double tau0() const { return tau_samples.front(); }
  double delta_bar0() const { return delta_bar.front(); }
  double psi_at(double tau) const { return numerics::interp_linear(tau_samples, psi, tau); }
  double chi_at(double tau) const { return numerics::interp_linear(tau_samples, chi, tau); }
  double psi_max() const { return psi.back(); }
  double chi_min() const { return chi.back(); }
};

namespace detail {

// |τ δ̄′| below this is treated as flat: a constant m (polytropic gas) must not
// produce extrema out of differencing noise.
inline constexpr double flat_slope = 1e-9;

inline int slope_sign(double tau, double slope) {
  if (std::fabs(tau * slope) < flat_slope) return 0;
  return slope > 0.0 ? 1 : -1;
}

}  // namespace detail

/// Samples δ̄ on a log grid over [tau0, tau_max], locates its interior
/// extrema and accumulates ψ(τ) = δ̄ − δ̄₀ + ∫|δ̄′| and χ(τ) = δ̄ − δ̄₀ − ∫|δ̄′|.
///
/// Between consecutive extrema δ̄ is monotone, so ∫|δ̄′| over each piece is the
/// absolute change of δ̄ across it. Extrema are located by bisection on the
/// sign of δ̄′ down to a bracket of 10⁻⁸·τ₀.
inline DeltaBarProfile build_delta_bar_profile(const EosModel& eos, double tau0, double tau_max,
                                               std::size_t n_samples) {
  if (!(tau0 > eos.tau_min)) throw Error(ErrorKind::domain, "tau0 must exceed tau_min", tau0);
  if (!(tau_max > tau0)) throw Error(ErrorKind::precondition, "tau_max must exceed tau0");
  if (n_samples < 16) throw Error(ErrorKind::precondition, "profile needs at least 16 samples");

  DeltaBarProfile out;
  out.tau_samples = numerics::geomspace(tau0, tau_max, n_samples);
  const auto& ts = out.tau_samples;
  out.delta_bar.reserve(n_samples);
  out.slope.reserve(n_samples);
  for (double t : ts) {
    out.delta_bar.push_back(delta_bar(eos, t));
    out.slope.push_back(delta_bar_derivative(eos, t));
  }

  auto sign_at = [&](double t) { return detail::slope_sign(t, delta_bar_derivative(eos, t)); };
  const double bracket_tol = 1e-8 * tau0;

  out.extrema.push_back(tau0);
  std::vector<double> abs_variation(n_samples, 0.0);
  int last_sign = detail::slope_sign(ts[0], out.slope[0]);
  for (std::size_t k = 0; k + 1 < n_samples; ++k) {
    const double a = ts[k];
    const double b = ts[k + 1];
    const int sa = detail::slope_sign(a, out.slope[k]);
    const int sm = sign_at(0.5 * (a + b));
    const int sb = detail::slope_sign(b, out.slope[k + 1]);
    const int changes = (sa * sm < 0 ? 1 : 0) + (sm * sb < 0 ? 1 : 0);
    if (changes > 1) {
      throw Error(ErrorKind::resolution, "two sign changes of delta_bar' between samples", a);
    }
    if (sb != 0 && last_sign != 0 && sb != last_sign) {
      // The sign flipped somewhere after the last nonzero sample; bisect inside [a, b].
      double lo = a;
      double hi = b;
      const int s_hi = sb;
      while (hi - lo > bracket_tol) {
        const double mid = 0.5 * (lo + hi);
        const int sm2 = sign_at(mid);
        if (sm2 == s_hi) hi = mid; else lo = mid;
      }
      const double e = 0.5 * (lo + hi);
      out.extrema.push_back(e);
      const double de = delta_bar(eos, e);
      abs_variation[k + 1] = abs_variation[k] + std::fabs(de - out.delta_bar[k]) +
                             std::fabs(out.delta_bar[k + 1] - de);
    } else {
      abs_variation[k + 1] = abs_variation[k] + std::fabs(out.delta_bar[k + 1] - out.delta_bar[k]);
    }
    if (sb != 0) last_sign = sb;
  }

  const double d0 = out.delta_bar.front();
  out.psi.resize(n_samples);
  out.chi.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    out.psi[k] = out.delta_bar[k] - d0 + abs_variation[k];
    out.chi[k] = out.delta_bar[k] - d0 - abs_variation[k];
  }
  out.psi.front() = 0.0;
  out.chi.front() = 0.0;

  // δ̄* ≈ δ̄(τ_max); the tail bound is the Aitken extrapolation distance over
  // (τ_max/4, τ_max/2, τ_max), or the last halving increment when that is ill-posed.
  const double d1 = delta_bar(eos, std::max(tau0, 0.25 * tau_max));
  const double d2 = delta_bar(eos, std::max(tau0, 0.5 * tau_max));
  const double d3 = out.delta_bar.back();
  out.delta_bar_star = d3;
  const double den = (d3 - d2) - (d2 - d1);
  if (std::fabs(den) > 1e-15 && std::fabs(d3 - d2) < std::fabs(d2 - d1)) {
    out.tail_bound = std::fabs((d3 - d2) * (d3 - d2) / den);
  } else {
    out.tail_bound = std::fabs(d3 - d2);
  }
  return out;
}

}  // namespace cornerflow
