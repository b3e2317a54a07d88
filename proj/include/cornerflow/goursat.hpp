#pragma once

// Characteristic-net solver for the Goursat problem posed on PQ and PR.
//
// Node (i, j) lies on the C+ line that starts at PR sample i and on the C-
// line that starts at PQ sample j, so row i = 0 is PQ and column j = 0 is PR.
// Each interior node is closed from its C+ predecessor (i, j-1) and its C-
// predecessor (i-1, j) by the characteristic directions, the compatibility
// relations, pseudo-Bernoulli's law and the angle relations.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cornerflow/error.hpp"
#include "cornerflow/node.hpp"
#include "cornerflow/numerics.hpp"
#include "cornerflow/waves.hpp"

namespace cornerflow {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 50;
  /// Nodes whose averaged characteristic directions are closer than eps2/4 are rejected.
  double eps2 = 0.1;
  /// Interior nodes with τ above this are vacuum-truncated.
  double tau_trunc = std::numeric_limits<double>::infinity();
  /// Allowed disagreement between φ integrated along C+ and along C-, as a
  /// fraction of Σ ℓ·|ΔW| over the two segments (ℓ segment length, ΔW change of
  /// pseudo-velocity across it).
  double phi_path_factor = 0.5;
  unsigned workers = 1;
};

enum class NodeStatus : std::uint8_t { boundary, solved, truncated, failed };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::boundary: return "boundary";
    case NodeStatus::solved: return "solved";
    case NodeStatus::truncated: return "truncated";
    case NodeStatus::failed: return "failed";
  }
  return "unknown";
}

struct NodeSolveInfo {
  int iterations = 0;
  double phi_mismatch = 0.0;
  double phi_threshold = 0.0;
};

namespace detail {

inline double wrap_near(double angle, double ref) {
  const double two_pi = 2.0 * numerics::pi;
  return angle + two_pi * std::round((ref - angle) / two_pi);
}

/// Root of q²/2 + I(τ) + φ = 0 near `guess`. The left side decreases strictly
/// in τ. Throws range when no root exists above τ0 (the point lies past vacuum).
inline double bernoulli_tau(const CornerProblem& pb, double q2, double phi, double guess) {
  auto F = [&](double t) { return 0.5 * q2 + pb.bernoulli_integral(t) + phi; };
  const double tau_floor = std::max(pb.eos().tau_min, 0.0);
  double lo = guess;
  double hi = guess;
  double flo = F(lo);
  double fhi = flo;
  if (flo == 0.0) return guess;
  if (flo < 0.0) {
    for (int k = 0; k < 200 && flo < 0.0; ++k) {
      hi = lo;
      fhi = flo;
      lo = tau_floor + 0.5 * (lo - tau_floor);
      flo = F(lo);
    }
    if (flo < 0.0) throw Error(ErrorKind::range, "no specific volume satisfies pseudo-Bernoulli", guess);
  } else {
    const double cap = 1e12 * pb.tau0();
    while (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 1.25;
      if (hi > cap) throw Error(ErrorKind::range, "pseudo-Bernoulli root lies beyond vacuum", lo);
      fhi = F(hi);
    }
  }
  double t = numerics::solve_bracketed(F, lo, hi, 4e-16 * hi, 100);
  for (int k = 0; k < 2; ++k) {
    const double d = t * pb.eos().dp(t);
    if (!(d < 0.0)) break;
    const double step = F(t) / d;
    if (!std::isfinite(step)) break;
    t -= step;
  }
  return t;
}

struct Segment {
  double phi;
  double ell_dw;
};

inline Segment phi_along(const CharNode& A, const CharNode& X) {
  const double dxi = X.xi - A.xi;
  const double deta = X.eta - A.eta;
  const double phi = A.phi + 0.5 * ((A.U() + X.U()) * dxi + (A.V() + X.V()) * deta);
  const double ell = std::hypot(dxi, deta);
  const double dw = std::hypot(X.U() - A.U(), X.V() - A.V());
  return {phi, ell * dw};
}

}  // namespace detail

/// Solves the interior node X from its C+ predecessor L and C- predecessor R by
/// fixed-point iteration on trapezoidal averages:
///   X = L + s e(ᾱ) = R + t e(β̄),
///   cos β̃ (u − u_L) + sin β̃ (v − v_L) = 0,  cos α̃ (u − u_R) + sin α̃ (v − v_R) = 0,
///   φ from the trapezoid rule of U dξ + V dη along both segments (averaged),
///   τ from pseudo-Bernoulli, (α, β) from σ ± δ.
inline CharNode solve_node(const CharNode& L, const CharNode& R, const CornerProblem& pb,
                           const SolverOptions& opt, NodeSolveInfo* info = nullptr) {
  CharNode X;
  X.alpha = L.alpha;
  X.beta = R.beta;
  X.u = 0.5 * (L.u + R.u);
  X.v = 0.5 * (L.v + R.v);
  X.tau = 0.5 * (L.tau + R.tau);
  X.phi = 0.5 * (L.phi + R.phi);
  X.xi = 0.5 * (L.xi + R.xi);
  X.eta = 0.5 * (L.eta + R.eta);

  const double min_sep = 0.25 * opt.eps2;
  double mismatch = 0.0;
  double threshold = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const CharNode prev = X;

    // (a) position
    const double a_bar = 0.5 * (L.alpha + X.alpha);
    const double b_bar = 0.5 * (R.beta + X.beta);
    const double det = std::sin(a_bar - b_bar);
    if (std::fabs(a_bar - b_bar) < min_sep || det == 0.0) {
      throw Error(ErrorKind::degenerate_geometry, "characteristic directions nearly parallel", X.tau);
    }
    const double dx = R.xi - L.xi;
    const double dy = R.eta - L.eta;
    // s e(ᾱ) − t e(β̄) = R − L
    const double s = (dy * std::cos(b_bar) - dx * std::sin(b_bar)) / det;
    X.xi = L.xi + s * std::cos(a_bar);
    X.eta = L.eta + s * std::sin(a_bar);

    // (b) velocity
    const double bt = 0.5 * (L.beta + X.beta);
    const double at = 0.5 * (R.alpha + X.alpha);
    const double r1 = std::cos(bt) * L.u + std::sin(bt) * L.v;
    const double r2 = std::cos(at) * R.u + std::sin(at) * R.v;
    const double dv = std::sin(at - bt);
    if (dv == 0.0) throw Error(ErrorKind::degenerate_geometry, "compatibility system singular", X.tau);
    X.u = (r1 * std::sin(at) - r2 * std::sin(bt)) / dv;
    X.v = (r2 * std::cos(bt) - r1 * std::cos(at)) / dv;

    // (c) potential
    const auto sp = detail::phi_along(L, X);
    const auto sm = detail::phi_along(R, X);
    X.phi = 0.5 * (sp.phi + sm.phi);
    mismatch = std::fabs(sp.phi - sm.phi);
    threshold = 10.0 * opt.tol * (1.0 + std::fabs(X.phi)) + opt.phi_path_factor * (sp.ell_dw + sm.ell_dw);

    // (d) specific volume
    const double U = X.U();
    const double V = X.V();
    const double q2 = U * U + V * V;
    X.tau = detail::bernoulli_tau(pb, q2, X.phi, prev.tau);

    // (e) angles
    const double c = pb.c(X.tau);
    const double q = std::sqrt(q2);
    if (!(q > c)) throw Error(ErrorKind::hyperbolicity, "pseudo-Mach number <= 1 at node", X.tau);
    const double sigma = detail::wrap_near(std::atan2(V, U), prev.sigma());
    const double delta = std::asin(c / q);
    X.alpha = sigma + delta;
    X.beta = sigma - delta;

    const double scale = 1.0 + q;
    const double change =
        std::max({std::fabs(X.xi - prev.xi), std::fabs(X.eta - prev.eta), std::fabs(X.u - prev.u),
                  std::fabs(X.v - prev.v), std::fabs(X.phi - prev.phi) / scale}) / scale +
        std::fabs(X.tau - prev.tau) / X.tau + std::fabs(X.alpha - prev.alpha) +
        std::fabs(X.beta - prev.beta);
    if (change < opt.tol) {
      if (mismatch > threshold) {
        throw Error(ErrorKind::phi_path, "phi along C+ and C- disagree beyond the grid allowance", X.tau);
      }
      const double bres = std::fabs(0.5 * q2 + pb.bernoulli_integral(X.tau) + X.phi);
      if (bres > opt.tol * (1.0 + q2)) {
        throw Error(ErrorKind::no_convergence, "pseudo-Bernoulli residual above tolerance", X.tau);
      }
      if (info) *info = {it, mismatch, threshold};
      return X;
    }
  }
  throw Error(ErrorKind::no_convergence, "node iteration did not converge", X.tau);
}

/// The characteristic net. Node storage is row-major in (i, j).
class CharGrid {
 public:
  CharGrid() = default;
  CharGrid(std::size_t ni, std::size_t nj)
      : ni_(ni), nj_(nj), nodes_(ni * nj), status_(ni * nj, NodeStatus::failed),
        valued_(ni * nj, 0), errors_(ni * nj, "") {}

  std::size_t ni() const { return ni_; }
  std::size_t nj() const { return nj_; }
  CharNode& at(std::size_t i, std::size_t j) { return nodes_[i * nj_ + j]; }
  const CharNode& at(std::size_t i, std::size_t j) const { return nodes_[i * nj_ + j]; }
  NodeStatus status(std::size_t i, std::size_t j) const { return status_[i * nj_ + j]; }
  /// True when the node carries a state (boundary, solved, or truncated past τ_trunc).
  bool has_value(std::size_t i, std::size_t j) const { return valued_[i * nj_ + j] != 0; }
  /// Solved or boundary.
  bool is_active(std::size_t i, std::size_t j) const {
    const auto s = status(i, j);
    return s == NodeStatus::solved || s == NodeStatus::boundary;
  }
  const std::string& error(std::size_t i, std::size_t j) const { return errors_[i * nj_ + j]; }

  void set(std::size_t i, std::size_t j, const CharNode& n, NodeStatus s) {
    nodes_[i * nj_ + j] = n;
    status_[i * nj_ + j] = s;
    valued_[i * nj_ + j] = 1;
  }
  void mark(std::size_t i, std::size_t j, NodeStatus s, std::string why = {}) {
    status_[i * nj_ + j] = s;
    valued_[i * nj_ + j] = 0;
    errors_[i * nj_ + j] = std::move(why);
  }

  std::size_t count(NodeStatus s) const {
    return static_cast<std::size_t>(std::count(status_.begin(), status_.end(), s));
  }
  double max_tau() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      if (valued_[k]) m = std::max(m, nodes_[k].tau);
    }
    return m;
  }

  double tau_trunc = std::numeric_limits<double>::infinity();
  std::size_t failed_solves = 0;

 private:
  std::size_t ni_ = 0;
  std::size_t nj_ = 0;
  std::vector<CharNode> nodes_;
  std::vector<NodeStatus> status_;
  std::vector<std::uint8_t> valued_;
  std::vector<std::string> errors_;
};

/// Fills the net anti-diagonal by anti-diagonal; nodes of one diagonal are
/// independent and are split over `opt.workers` threads in fixed contiguous
/// chunks, so the result does not depend on the worker count.
///
/// A node depending on a failed or value-less node inherits that status. A
/// solved node with τ above `opt.tau_trunc` is kept as truncated so level
/// curves up to τ_trunc can still be interpolated; its dependents are not
/// solved. Only a failure of the corner node (1, 1) aborts the run.
inline CharGrid march_grid(const BoundaryCurve& PQ, const BoundaryCurve& PR, const CornerProblem& pb,
                           const SolverOptions& opt) {
  if (PQ.size() < 2 || PR.size() < 2) throw Error(ErrorKind::precondition, "boundary curves need two samples");
  const CharNode& p1 = PQ[0];
  const CharNode& p2 = PR[0];
  if (std::hypot(p1.xi - p2.xi, p1.eta - p2.eta) > 1e-9 * (1.0 + std::hypot(p1.xi, p1.eta))) {
    throw Error(ErrorKind::precondition, "boundary curves do not share the corner node P");
  }
  const std::size_t ni = PR.size();
  const std::size_t nj = PQ.size();
  CharGrid g(ni, nj);
  g.tau_trunc = opt.tau_trunc;
  for (std::size_t j = 0; j < nj; ++j) g.set(0, j, PQ[j], NodeStatus::boundary);
  for (std::size_t i = 1; i < ni; ++i) g.set(i, 0, PR[i], NodeStatus::boundary);

  std::atomic<std::size_t> failures{0};
  auto solve_one = [&](std::size_t i, std::size_t j) {
    const std::size_t li = i, lj = j - 1, ri = i - 1, rj = j;
    const NodeStatus sl = g.status(li, lj);
    const NodeStatus sr = g.status(ri, rj);
    if (sl == NodeStatus::failed || sr == NodeStatus::failed) {
      g.mark(i, j, NodeStatus::failed, "predecessor failed");
      return;
    }
    if (sl == NodeStatus::truncated || sr == NodeStatus::truncated) {
      g.mark(i, j, NodeStatus::truncated, "predecessor truncated");
      return;
    }
    try {
      const CharNode X = solve_node(g.at(li, lj), g.at(ri, rj), pb, opt);
      g.set(i, j, X, X.tau > opt.tau_trunc ? NodeStatus::truncated : NodeStatus::solved);
    } catch (const Error& e) {
      const bool past_vacuum = e.kind() == ErrorKind::range &&
                               std::max(g.at(li, lj).tau, g.at(ri, rj).tau) >= 0.5 * opt.tau_trunc;
      if (past_vacuum) {
        g.mark(i, j, NodeStatus::truncated, e.what());
      } else {
        g.mark(i, j, NodeStatus::failed, e.what());
        failures.fetch_add(1);
      }
    }
  };

  const unsigned workers = std::max(1u, opt.workers);
  for (std::size_t d = 2; d <= (ni - 1) + (nj - 1); ++d) {
    const std::size_t i_lo = d > nj - 1 ? d - (nj - 1) : 1;
    const std::size_t i_hi = std::min(ni - 1, d - 1);
    if (i_lo > i_hi) continue;
    const std::size_t count = i_hi - i_lo + 1;
    if (workers == 1 || count < 8) {
      for (std::size_t i = i_lo; i <= i_hi; ++i) solve_one(i, d - i);
    } else {
      const std::size_t nw = std::min<std::size_t>(workers, count);
      std::vector<std::thread> pool;
      pool.reserve(nw);
      for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t a = i_lo + count * w / nw;
        const std::size_t b = i_lo + count * (w + 1) / nw;
        pool.emplace_back([&, a, b] {
          for (std::size_t i = a; i < b; ++i) solve_one(i, d - i);
        });
      }
      for (auto& t : pool) t.join();
    }
    if (d == 2 && g.status(1, 1) == NodeStatus::failed) {
      throw Error(ErrorKind::no_convergence, "corner cell failed: " + g.error(1, 1), p1.tau);
    }
  }
  g.failed_solves = failures.load();
  return g;
}

/// Largest admissible η-extent of one boundary step at level τ̃:
/// −sin(2δ̄(τ0) + χ(τ̃) − ε1) / (2 τ̃ M1(τ̃)).
inline double step_bound(double delta_bar0, double chi_tilde, double eps1, double tau_tilde, double M1) {
  if (!(M1 < 0.0)) throw Error(ErrorKind::sign_condition, "M1 must be negative", tau_tilde);
  const double arg = 2.0 * delta_bar0 + chi_tilde - eps1;
  if (!(eps1 > 0.0) || !(arg > 0.0)) {
    throw Error(ErrorKind::precondition, "eps1 must lie in (0, 2 delta_bar0 + chi)");
  }
  return -std::sin(arg) / (2.0 * tau_tilde * M1);
}

/// Slope bound on level curves of τ: 2 / sin(2δ̄(τ0) + χ(τ̃) − ε1).
inline double level_slope_bound(double delta_bar0, double chi_tilde, double eps1) {
  return 2.0 / std::sin(2.0 * delta_bar0 + chi_tilde - eps1);
}

struct Polyline {
  std::vector<double> xi;
  std::vector<double> eta;
  std::size_t size() const { return xi.size(); }
  bool empty() const { return xi.empty(); }
};

/// Max |Δξ/Δη| between consecutive polyline points (∞ for a horizontal step).
inline double max_abs_slope(const Polyline& pl) {
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
    const double dxi = pl.xi[k + 1] - pl.xi[k];
    const double deta = pl.eta[k + 1] - pl.eta[k];
    if (dxi == 0.0 && deta == 0.0) continue;
    m = std::max(m, deta == 0.0 ? std::numeric_limits<double>::infinity() : std::fabs(dxi / deta));
  }
  return m;
}

/// Level curve τ = τ* by linear interpolation on grid edges with τa < τ* ≤ τb.
/// Crossings are ordered along the staircase the curve cuts through the index
/// square (key i − j) and then oriented so η increases.
inline Polyline extract_level_curve(const CharGrid& g, double tau_star) {
  Polyline out;
  if (g.ni() == 0 || g.nj() == 0) return out;
  const CharNode& P = g.at(0, 0);
  if (tau_star < P.tau) return out;
  if (tau_star == P.tau) {
    out.xi.push_back(P.xi);
    out.eta.push_back(P.eta);
    return out;
  }
  if (tau_star > g.max_tau()) return out;

  struct Hit {
    double key;
    double xi;
    double eta;
  };
  std::vector<Hit> hits;
  auto edge = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1, double key) {
    if (!g.has_value(i0, j0) || !g.has_value(i1, j1)) return;
    const CharNode* a = &g.at(i0, j0);
    const CharNode* b = &g.at(i1, j1);
    if (a->tau > b->tau) std::swap(a, b);
    if (!(a->tau < tau_star && tau_star <= b->tau)) return;
    const double t = (tau_star - a->tau) / (b->tau - a->tau);
    hits.push_back({key, a->xi + t * (b->xi - a->xi), a->eta + t * (b->eta - a->eta)});
  };
  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      const double k = static_cast<double>(i) - static_cast<double>(j);
      if (j + 1 < g.nj()) edge(i, j, i, j + 1, k - 0.5);
      if (i + 1 < g.ni()) edge(i, j, i + 1, j, k + 0.5);
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.eta < b.eta;
  });
  for (const auto& h : hits) {
    out.xi.push_back(h.xi);
    out.eta.push_back(h.eta);
  }
  if (out.size() > 1 && out.eta.front() > out.eta.back()) {
    std::reverse(out.xi.begin(), out.xi.end());
    std::reverse(out.eta.begin(), out.eta.end());
  }
  return out;
}

struct VacuumBoundary {
  Polyline curve;
  double tau_level = 0.0;
  double lipschitz = 0.0;
  double bound = 0.0;
  bool within_bound = true;
};

/// Frontier of the solved region: the level curve at the truncation level, or
/// at the largest τ reached when nothing was truncated. `slope_bound` is the
/// comparison value (already including any grid allowance).
inline VacuumBoundary extract_vacuum_boundary(const CharGrid& g, double slope_bound) {
  VacuumBoundary vb;
  vb.bound = slope_bound;
  if (g.ni() < 2 || g.nj() < 2) return vb;
  double level = g.tau_trunc;
  const double reach = g.max_tau();
  if (!std::isfinite(level) || level > reach) level = reach;
  vb.tau_level = level;
  if (!(level > g.at(0, 0).tau)) return vb;
  vb.curve = extract_level_curve(g, level);
  vb.lipschitz = max_abs_slope(vb.curve);
  vb.within_bound = vb.lipschitz <= slope_bound;
  return vb;
}

}  // namespace cornerflow
