#pragma once

// Independent residual checks of a solved net: the self-similar Euler system on
// a Cartesian probe lattice, the first- and second-order characteristic
// decompositions along grid edges, the normalized commutator identity on
// analytic fields, and refinement studies.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/goursat.hpp"
#include "cornerflow/monitor.hpp"
#include "cornerflow/waves.hpp"

namespace cornerflow {

struct ResidualReport {
  explicit ResidualReport(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  double max_abs = 0.0;
  double l2 = 0.0;
  double grid_spacing = 0.0;
  std::size_t count = 0;
  std::vector<double> per_node;

  void add(double r, bool keep) {
    const double a = std::fabs(r);
    max_abs = std::max(max_abs, a);
    l2 += a * a;
    ++count;
    if (keep) per_node.push_back(a);
  }
  void finish() { l2 = std::sqrt(l2); }
  double rms() const { return count ? l2 / std::sqrt(static_cast<double>(count)) : 0.0; }
};

/// Mean length of the edges joining active nodes.
inline double mean_edge_length(const CharGrid& g) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      if (!g.is_active(i, j)) continue;
      const CharNode& a = g.at(i, j);
      if (j + 1 < g.nj() && g.is_active(i, j + 1)) {
        sum += std::hypot(g.at(i, j + 1).xi - a.xi, g.at(i, j + 1).eta - a.eta);
        ++n;
      }
      if (i + 1 < g.ni() && g.is_active(i + 1, j)) {
        sum += std::hypot(g.at(i + 1, j).xi - a.xi, g.at(i + 1, j).eta - a.eta);
        ++n;
      }
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

// ---------------------------------------------------------------------------
// Self-similar system on a probe lattice
// ---------------------------------------------------------------------------

/// (u, v, τ) at a point, or nothing outside the sampled region.
using FlowField = std::function<std::optional<GasState>(double xi, double eta)>;

/// Bilinear interpolation of (u, v, τ) over the quadrilateral cells of a net
/// whose four corners are all active.
class NetInterpolator {
 public:
  explicit NetInterpolator(const CharGrid& g, std::size_t buckets = 64) : g_(&g), nb_(buckets) {
    lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    hi_ = {-lo_[0], -lo_[1]};
    for (std::size_t i = 0; i + 1 < g.ni(); ++i) {
      for (std::size_t j = 0; j + 1 < g.nj(); ++j) {
        if (!cell_ok(i, j)) continue;
        cells_.push_back({i, j});
        for (const auto* n : corners(i, j)) {
          lo_[0] = std::min(lo_[0], n->xi);
          lo_[1] = std::min(lo_[1], n->eta);
          hi_[0] = std::max(hi_[0], n->xi);
          hi_[1] = std::max(hi_[1], n->eta);
        }
      }
    }
    bucket_.assign(nb_ * nb_, {});
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
      for (const auto* n : corners(cells_[c][0], cells_[c][1])) {
        x0 = std::min(x0, n->xi);
        x1 = std::max(x1, n->xi);
        y0 = std::min(y0, n->eta);
        y1 = std::max(y1, n->eta);
      }
      const auto [bx0, by0] = bucket_of(x0, y0);
      const auto [bx1, by1] = bucket_of(x1, y1);
      for (std::size_t bx = bx0; bx <= bx1; ++bx) {
        for (std::size_t by = by0; by <= by1; ++by) bucket_[bx * nb_ + by].push_back(c);
      }
    }
  }

  std::array<double, 2> lo() const { return lo_; }
  std::array<double, 2> hi() const { return hi_; }
  bool empty() const { return cells_.empty(); }

  std::optional<GasState> operator()(double xi, double eta) const {
    if (cells_.empty() || xi < lo_[0] || xi > hi_[0] || eta < lo_[1] || eta > hi_[1]) return std::nullopt;
    const auto [bx, by] = bucket_of(xi, eta);
    for (std::size_t c : bucket_[bx * nb_ + by]) {
      const auto cs = corners(cells_[c][0], cells_[c][1]);
      double s = 0.5, t = 0.5;
      bool ok = false;
      for (int it = 0; it < 30; ++it) {
        const double x = bil(cs, s, t, &CharNode::xi) - xi;
        const double y = bil(cs, s, t, &CharNode::eta) - eta;
        const double xs = (1 - t) * (cs[1]->xi - cs[0]->xi) + t * (cs[2]->xi - cs[3]->xi);
        const double xt = (1 - s) * (cs[3]->xi - cs[0]->xi) + s * (cs[2]->xi - cs[1]->xi);
        const double ys = (1 - t) * (cs[1]->eta - cs[0]->eta) + t * (cs[2]->eta - cs[3]->eta);
        const double yt = (1 - s) * (cs[3]->eta - cs[0]->eta) + s * (cs[2]->eta - cs[1]->eta);
        const double det = xs * yt - xt * ys;
        if (det == 0.0) break;
        const double ds = (x * yt - y * xt) / det;
        const double dt = (y * xs - x * ys) / det;
        s -= ds;
        t -= dt;
        if (std::fabs(ds) + std::fabs(dt) < 1e-11) {
          ok = true;
          break;
        }
        if (std::fabs(s) > 4.0 || std::fabs(t) > 4.0) break;
      }
      const double e = 1e-10;
      if (!ok || s < -e || s > 1 + e || t < -e || t > 1 + e) continue;
      return GasState{bil(cs, s, t, &CharNode::u), bil(cs, s, t, &CharNode::v), bil(cs, s, t, &CharNode::tau)};
    }
    return std::nullopt;
  }

 private:
  // Corner order (i,j), (i+1,j), (i+1,j+1), (i,j+1): s runs along i, t along j.
  std::array<const CharNode*, 4> corners(std::size_t i, std::size_t j) const {
    return {&g_->at(i, j), &g_->at(i + 1, j), &g_->at(i + 1, j + 1), &g_->at(i, j + 1)};
  }
  bool cell_ok(std::size_t i, std::size_t j) const {
    return g_->is_active(i, j) && g_->is_active(i + 1, j) && g_->is_active(i + 1, j + 1) &&
           g_->is_active(i, j + 1);
  }
  static double bil(const std::array<const CharNode*, 4>& c, double s, double t, double CharNode::*f) {
    return (1 - s) * (1 - t) * (c[0]->*f) + s * (1 - t) * (c[1]->*f) + s * t * (c[2]->*f) +
           (1 - s) * t * (c[3]->*f);
  }
  std::pair<std::size_t, std::size_t> bucket_of(double x, double y) const {
    auto idx = [this](double v, double lo, double hi) {
      if (!(hi > lo)) return std::size_t{0};
      const double r = (v - lo) / (hi - lo) * static_cast<double>(nb_);
      return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(nb_ - 1)));
    };
    return {idx(x, lo_[0], hi_[0]), idx(y, lo_[1], hi_[1])};
  }

  const CharGrid* g_;
  std::size_t nb_;
  std::vector<std::array<std::size_t, 2>> cells_;
  std::vector<std::vector<std::size_t>> bucket_;
  std::array<double, 2> lo_{};
  std::array<double, 2> hi_{};
};

/// Residuals of
///   (ρU)_ξ + (ρV)_η + 2ρ = 0,
///   U U_ξ + V U_η + τ p_ξ + U = 0,
///   U V_ξ + V V_η + τ p_η + V = 0
/// by central differences of step `h` on an nx × ny lattice over the box. Probes
/// whose stencil leaves the field are skipped. The report's value is the max
/// over the three equations at each probe.
inline ResidualReport pde_residual(const FlowField& field, const EosModel& eos, std::array<double, 2> lo,
                                   std::array<double, 2> hi, std::size_t nx, std::size_t ny, double h) {
  ResidualReport rep;
  rep.name = "self-similar-euler";
  rep.grid_spacing = h;
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < ny; ++b) {
      const double x = lo[0] + (hi[0] - lo[0]) * (static_cast<double>(a) + 0.5) / static_cast<double>(nx);
      const double y = lo[1] + (hi[1] - lo[1]) * (static_cast<double>(b) + 0.5) / static_cast<double>(ny);
      const auto c = field(x, y);
      const auto e = field(x + h, y);
      const auto w = field(x - h, y);
      const auto n = field(x, y + h);
      const auto s = field(x, y - h);
      if (!c || !e || !w || !n || !s) continue;
      auto rho = [](const GasState& g) { return 1.0 / g.tau; };
      const double U = c->u - x;
      const double V = c->v - y;
      const double r = rho(*c);
      const double rU_x = (rho(*e) * (e->u - x - h) - rho(*w) * (w->u - x + h)) / (2 * h);
      const double rV_y = (rho(*n) * (n->v - y - h) - rho(*s) * (s->v - y + h)) / (2 * h);
      const double u_x = (e->u - w->u) / (2 * h);
      const double u_y = (n->u - s->u) / (2 * h);
      const double v_x = (e->v - w->v) / (2 * h);
      const double v_y = (n->v - s->v) / (2 * h);
      const double t_x = (e->tau - w->tau) / (2 * h);
      const double t_y = (n->tau - s->tau) / (2 * h);
      const double tp = c->tau * eos.dp(c->tau);
      const double r1 = rU_x + rV_y + 2.0 * r;
      const double r2 = U * (u_x - 1.0) + V * u_y + tp * t_x + U;
      const double r3 = U * v_x + V * (v_y - 1.0) + tp * t_y + V;
      rep.add(std::max({std::fabs(r1), std::fabs(r2), std::fabs(r3)}), false);
    }
  }
  rep.finish();
  if (rep.count < 16) {
    throw Error(ErrorKind::hull_too_thin, "fewer than 4x4 probes fit inside the solved region");
  }
  return rep;
}

/// The lattice covers the bounding box of the solved cells; the difference
/// step is twice the mean edge length of the net.
inline ResidualReport pde_residual(const CharGrid& g, const EosModel& eos, std::size_t probes = 40) {
  NetInterpolator interp(g);
  if (interp.empty()) throw Error(ErrorKind::hull_too_thin, "no solved cells");
  const double h = 2.0 * mean_edge_length(g);
  FlowField f = [&interp](double x, double y) { return interp(x, y); };
  auto rep = pde_residual(f, eos, interp.lo(), interp.hi(), probes, probes, h);
  return rep;
}

// ---------------------------------------------------------------------------
// First-order decompositions
// ---------------------------------------------------------------------------

struct DecompositionResiduals {
  ResidualReport plus_alpha{"c d+alpha"};
  ResidualReport plus_beta{"c d+beta"};
  ResidualReport minus_alpha{"c d-alpha"};
  ResidualReport minus_beta{"c d-beta"};

  std::array<const ResidualReport*, 4> all() const { return {&plus_alpha, &plus_beta, &minus_alpha, &minus_beta}; }
};

namespace detail {

struct EdgeDiff {
  double tau;   // midpoint τ
  double delta; // midpoint δ
  double ds;    // signed length along the characteristic direction
  double d_alpha;
  double d_beta;
  double d_tau;
};

inline EdgeDiff edge_diff(const CharNode& a, const CharNode& b, bool plus) {
  const double ang = plus ? 0.5 * (a.alpha + b.alpha) : 0.5 * (a.beta + b.beta);
  const auto e = unit(ang);
  EdgeDiff d;
  d.ds = (b.xi - a.xi) * e[0] + (b.eta - a.eta) * e[1];
  d.tau = 0.5 * (a.tau + b.tau);
  d.delta = 0.5 * (a.delta() + b.delta());
  d.d_alpha = (b.alpha - a.alpha) / d.ds;
  d.d_beta = (b.beta - a.beta) / d.ds;
  d.d_tau = (b.tau - a.tau) / d.ds;
  return d;
}

}  // namespace detail

/// The four relations
///   c∂+α =  τ²p″/(4c) Ω sin2δ ∂+τ,      c∂+β =  τ²p″/(2c) tanδ ∂+τ − 2sin²δ,
///   c∂-α = −τ²p″/(2c) tanδ ∂-τ + 2sin²δ, c∂-β = −τ²p″/(4c) Ω sin2δ ∂-τ,
/// checked on every incoming grid edge of every solved node with edge-midpoint
/// coefficients.
inline DecompositionResiduals decomposition_residual(const CharGrid& g, const EosModel& eos,
                                                     bool keep_per_node = false) {
  DecompositionResiduals out;
  const double h = mean_edge_length(g);
  for (auto* r : {&out.plus_alpha, &out.plus_beta, &out.minus_alpha, &out.minus_beta}) r->grid_spacing = h;
  for (std::size_t i = 1; i < g.ni(); ++i) {
    for (std::size_t j = 1; j < g.nj(); ++j) {
      if (g.status(i, j) != NodeStatus::solved) continue;
      const CharNode& x = g.at(i, j);
      {
        const auto d = detail::edge_diff(g.at(i, j - 1), x, true);
        const double c = sound_speed(eos, d.tau);
        const double k = d.tau * d.tau * eos.d2p(d.tau) / c;
        const double om = omega(eos, d.tau, d.delta);
        const double s = std::sin(d.delta);
        out.plus_alpha.add(c * d.d_alpha - 0.25 * k * om * std::sin(2 * d.delta) * d.d_tau, keep_per_node);
        out.plus_beta.add(c * d.d_beta - (0.5 * k * std::tan(d.delta) * d.d_tau - 2 * s * s), keep_per_node);
      }
      {
        const auto d = detail::edge_diff(g.at(i - 1, j), x, false);
        const double c = sound_speed(eos, d.tau);
        const double k = d.tau * d.tau * eos.d2p(d.tau) / c;
        const double om = omega(eos, d.tau, d.delta);
        const double s = std::sin(d.delta);
        out.minus_alpha.add(c * d.d_alpha - (-0.5 * k * std::tan(d.delta) * d.d_tau + 2 * s * s), keep_per_node);
        out.minus_beta.add(c * d.d_beta + 0.25 * k * om * std::sin(2 * d.delta) * d.d_tau, keep_per_node);
      }
    }
  }
  for (auto* r : {&out.plus_alpha, &out.plus_beta, &out.minus_alpha, &out.minus_beta}) r->finish();
  return out;
}

/// The same four relations along a single boundary curve (C+ curves give the
/// two ∂+ relations, C- curves the two ∂- ones).
inline std::array<ResidualReport, 2> boundary_decomposition_residual(const BoundaryCurve& curve,
                                                                     const EosModel& eos) {
  const bool plus = curve.family == Family::plus;
  std::array<ResidualReport, 2> out{ResidualReport{plus ? "c d+alpha" : "c d-alpha"},
                                    ResidualReport{plus ? "c d+beta" : "c d-beta"}};
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const auto d = detail::edge_diff(curve[k], curve[k + 1], plus);
    const double c = sound_speed(eos, d.tau);
    const double kk = d.tau * d.tau * eos.d2p(d.tau) / c;
    const double om = omega(eos, d.tau, d.delta);
    const double s = std::sin(d.delta);
    if (plus) {
      out[0].add(c * d.d_alpha - 0.25 * kk * om * std::sin(2 * d.delta) * d.d_tau, false);
      out[1].add(c * d.d_beta - (0.5 * kk * std::tan(d.delta) * d.d_tau - 2 * s * s), false);
    } else {
      out[0].add(c * d.d_alpha - (-0.5 * kk * std::tan(d.delta) * d.d_tau + 2 * s * s), false);
      out[1].add(c * d.d_beta + 0.25 * kk * om * std::sin(2 * d.delta) * d.d_tau, false);
    }
  }
  out[0].finish();
  out[1].finish();
  return out;
}

// ---------------------------------------------------------------------------
// Second-order decompositions of ρ
// ---------------------------------------------------------------------------

struct SecondOrderReport {
  ResidualReport plus_minus{"c d+d-rho"};
  ResidualReport minus_plus{"c d-d+rho"};
  std::size_t f_checked = 0;
  std::size_t f_nonpositive = 0;
  double f_min = std::numeric_limits<double>::infinity();
};

/// Cell-centred check of
///   c∂+∂-ρ = ∂-ρ [sin2δ + τ⁴p″/(4c cos²δ) (∂-ρ + (f − 1)∂+ρ)],
///   c∂-∂+ρ = ∂+ρ [sin2δ + τ⁴p″/(4c cos²δ) (∂+ρ + (f − 1)∂-ρ)],
/// with ∂±ρ taken on cell edges and differenced across the cell; also counts
/// nodes where f ≤ 0.
inline SecondOrderReport second_order_residual(const CharGrid& g, const EosModel& eos) {
  if (g.ni() < 3 || g.nj() < 3) throw Error(ErrorKind::precondition, "second-order check needs 3 nodes per direction");
  SecondOrderReport out;
  const double h = mean_edge_length(g);
  out.plus_minus.grid_spacing = h;
  out.minus_plus.grid_spacing = h;

  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      if (!g.is_active(i, j)) continue;
      const CharNode& x = g.at(i, j);
      const double f = f_factor(eos, x.tau, x.delta());
      ++out.f_checked;
      out.f_min = std::min(out.f_min, f);
      if (!(f > 0.0)) ++out.f_nonpositive;
    }
  }

  auto mid = [](const CharNode& a, const CharNode& b) {
    return std::array<double, 2>{0.5 * (a.xi + b.xi), 0.5 * (a.eta + b.eta)};
  };
  auto drho = [](const CharNode& a, const CharNode& b, bool plus) {
    const auto d = detail::edge_diff(a, b, plus);
    return (b.rho() - a.rho()) / d.ds;
  };
  for (std::size_t i = 1; i < g.ni(); ++i) {
    for (std::size_t j = 1; j < g.nj(); ++j) {
      const CharNode& n00 = g.at(i - 1, j - 1);
      const CharNode& n01 = g.at(i - 1, j);
      const CharNode& n10 = g.at(i, j - 1);
      const CharNode& n11 = g.at(i, j);
      if (!g.is_active(i - 1, j - 1) || !g.is_active(i - 1, j) || !g.is_active(i, j - 1) ||
          g.status(i, j) != NodeStatus::solved) {
        continue;
      }
      // ∂-ρ on the two C- edges, ∂+ρ on the two C+ edges.
      const double dm_a = drho(n00, n10, false);
      const double dm_b = drho(n01, n11, false);
      const double dp_a = drho(n00, n01, true);
      const double dp_b = drho(n10, n11, true);
      const double alpha = 0.25 * (n00.alpha + n01.alpha + n10.alpha + n11.alpha);
      const double beta = 0.25 * (n00.beta + n01.beta + n10.beta + n11.beta);
      const double tau = 0.25 * (n00.tau + n01.tau + n10.tau + n11.tau);
      const double delta = 0.5 * (alpha - beta);
      const double c = sound_speed(eos, tau);
      const double co = std::cos(delta);
      const double coef = tau * tau * tau * tau * eos.d2p(tau) / (4.0 * c * co * co);
      const double f = f_factor(eos, tau, delta);

      const auto ma = mid(n00, n10);
      const auto mb = mid(n01, n11);
      const auto ep = unit(alpha);
      const double sp = (mb[0] - ma[0]) * ep[0] + (mb[1] - ma[1]) * ep[1];
      const auto pa = mid(n00, n01);
      const auto pb = mid(n10, n11);
      const auto em = unit(beta);
      const double sm = (pb[0] - pa[0]) * em[0] + (pb[1] - pa[1]) * em[1];

      const double dm = 0.5 * (dm_a + dm_b);
      const double dp = 0.5 * (dp_a + dp_b);
      const double lhs1 = c * (dm_b - dm_a) / sp;
      const double rhs1 = dm * (std::sin(2 * delta) + coef * (dm + (f - 1.0) * dp));
      const double lhs2 = c * (dp_b - dp_a) / sm;
      const double rhs2 = dp * (std::sin(2 * delta) + coef * (dp + (f - 1.0) * dm));
      out.plus_minus.add(lhs1 - rhs1, false);
      out.minus_plus.add(lhs2 - rhs2, false);
    }
  }
  out.plus_minus.finish();
  out.minus_plus.finish();
  return out;
}

// ---------------------------------------------------------------------------
// Normalized commutator identity
// ---------------------------------------------------------------------------

/// A scalar field with exact first and second derivatives at a point.
struct Jet2 {
  double f = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double fxx = 0.0;
  double fxy = 0.0;
  double fyy = 0.0;
};

using ScalarField = std::function<Jet2(double, double)>;

struct SyntheticTriple {
  std::string name;
  ScalarField I;
  ScalarField alpha;
  ScalarField beta;
};

/// Shipped analytic test vectors (fixed; the identity must hold to roundoff).
inline std::vector<SyntheticTriple> synthetic_triples() {
  std::vector<SyntheticTriple> v;
  auto cst = [](double k) { return [k](double, double) { return Jet2{k, 0, 0, 0, 0, 0}; }; };
  v.push_back({"I=const", cst(2.5), cst(0.8), cst(-0.7)});
  v.push_back({"I=xi, constant angles",
               [](double x, double) { return Jet2{x, 1, 0, 0, 0, 0}; }, cst(0.6), cst(-0.9)});
  v.push_back({"I=xi*eta, alpha=0.9+0.05xi, beta=-0.9+0.05eta",
               [](double x, double y) { return Jet2{x * y, y, x, 0, 1, 0}; },
               [](double x, double) { return Jet2{0.9 + 0.05 * x, 0.05, 0, 0, 0, 0}; },
               [](double, double y) { return Jet2{-0.9 + 0.05 * y, 0, 0.05, 0, 0, 0}; }});
  v.push_back({"I=sin(xi)cos(2eta), alpha=0.7+0.1sin(eta), beta=-0.8+0.1cos(xi)",
               [](double x, double y) {
                 const double s = std::sin(x), c = std::cos(x), s2 = std::sin(2 * y), c2 = std::cos(2 * y);
                 return Jet2{s * c2, c * c2, -2 * s * s2, -s * c2, -2 * c * s2, -4 * s * c2};
               },
               [](double, double y) { return Jet2{0.7 + 0.1 * std::sin(y), 0, 0.1 * std::cos(y), 0, 0, 0}; },
               [](double x, double) { return Jet2{-0.8 + 0.1 * std::cos(x), -0.1 * std::sin(x), 0, 0, 0, 0}; }});
  v.push_back({"I=exp(0.3xi)eta^2, alpha=1+0.1xi*eta, beta=-0.6-0.05xi^2",
               [](double x, double y) {
                 const double e = std::exp(0.3 * x);
                 return Jet2{e * y * y, 0.3 * e * y * y, 2 * e * y, 0.09 * e * y * y, 0.6 * e * y, 2 * e};
               },
               [](double x, double y) { return Jet2{1.0 + 0.1 * x * y, 0.1 * y, 0.1 * x, 0, 0.1, 0}; },
               [](double x, double) { return Jet2{-0.6 - 0.05 * x * x, -0.1 * x, 0, -0.1, 0, 0}; }});
  v.push_back({"I=xi^3-2xi*eta^2+eta, alpha=0.4+0.2eta^2, beta=-1.1+0.1xi*eta",
               [](double x, double y) {
                 return Jet2{x * x * x - 2 * x * y * y + y, 3 * x * x - 2 * y * y, -4 * x * y + 1, 6 * x, -4 * y, -4 * x};
               },
               [](double, double y) { return Jet2{0.4 + 0.2 * y * y, 0, 0.4 * y, 0, 0, 0}; },
               [](double x, double y) { return Jet2{-1.1 + 0.1 * x * y, 0.1 * y, 0.1 * x, 0, 0.1, 0}; }});
  return v;
}

/// Both sides of
///   ∂-∂+I − ∂+∂-I = [(cos2δ ∂+β − ∂-α) ∂-I − (∂+β − cos2δ ∂-α) ∂+I] / sin2δ
/// from exact derivatives, on an n × n lattice over [0,1]².
inline ResidualReport commutator_check(const SyntheticTriple& t, std::size_t n = 11) {
  ResidualReport rep;
  rep.name = "commutator: " + t.name;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double x = n > 1 ? static_cast<double>(a) / static_cast<double>(n - 1) : 0.0;
      const double y = n > 1 ? static_cast<double>(b) / static_cast<double>(n - 1) : 0.0;
      const Jet2 I = t.I(x, y);
      const Jet2 al = t.alpha(x, y);
      const Jet2 be = t.beta(x, y);
      const double delta = 0.5 * (al.f - be.f);
      const double s2d = std::sin(2 * delta);
      if (std::fabs(s2d) < 1e-8) throw Error(ErrorKind::field_degeneracy, "sin 2delta vanishes on the probe set");
      const double ca = std::cos(al.f), sa = std::sin(al.f), cb = std::cos(be.f), sb = std::sin(be.f);
      const double dpI = ca * I.fx + sa * I.fy;
      const double dmI = cb * I.fx + sb * I.fy;
      // Gradients of ∂+I and ∂-I.
      const double dpI_x = -sa * al.fx * I.fx + ca * I.fxx + ca * al.fx * I.fy + sa * I.fxy;
      const double dpI_y = -sa * al.fy * I.fx + ca * I.fxy + ca * al.fy * I.fy + sa * I.fyy;
      const double dmI_x = -sb * be.fx * I.fx + cb * I.fxx + cb * be.fx * I.fy + sb * I.fxy;
      const double dmI_y = -sb * be.fy * I.fx + cb * I.fxy + cb * be.fy * I.fy + sb * I.fyy;
      const double lhs = (cb * dpI_x + sb * dpI_y) - (ca * dmI_x + sa * dmI_y);
      const double dp_beta = ca * be.fx + sa * be.fy;
      const double dm_alpha = cb * al.fx + sb * al.fy;
      const double c2d = std::cos(2 * delta);
      const double rhs = ((c2d * dp_beta - dm_alpha) * dmI - (dp_beta - c2d * dm_alpha) * dpI) / s2d;
      rep.add(lhs - rhs, false);
    }
  }
  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// Refinement studies
// ---------------------------------------------------------------------------

/// Max pseudo-Bernoulli residual at solved nodes when φ is carried along C+
/// lines only (trapezoid rule from the PR node of each line). The node solver
/// averages the C+ and C- paths, so this measures the discretization error of φ.
inline ResidualReport bernoulli_drift(const CharGrid& g, const CornerProblem& pb) {
  ResidualReport rep;
  rep.name = "bernoulli-drift";
  rep.grid_spacing = mean_edge_length(g);
  for (std::size_t i = 1; i < g.ni(); ++i) {
    double phi = g.at(i, 0).phi;
    for (std::size_t j = 1; j < g.nj(); ++j) {
      if (g.status(i, j) != NodeStatus::solved) break;
      const CharNode& a = g.at(i, j - 1);
      const CharNode& b = g.at(i, j);
      phi += 0.5 * ((a.U() + b.U()) * (b.xi - a.xi) + (a.V() + b.V()) * (b.eta - a.eta));
      const double q = b.q();
      rep.add(0.5 * q * q + pb.bernoulli_integral(b.tau) + phi, false);
    }
  }
  rep.finish();
  return rep;
}

/// Distance from each point of `fine` to the polyline `coarse`, maximized.
inline double polyline_distance(const Polyline& fine, const Polyline& coarse) {
  if (fine.empty() || coarse.empty()) return std::numeric_limits<double>::quiet_NaN();
  double worst = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < coarse.size(); ++m) {
      const double ax = coarse.xi[m], ay = coarse.eta[m];
      if (m + 1 < coarse.size()) {
        const double bx = coarse.xi[m + 1], by = coarse.eta[m + 1];
        const double dx = bx - ax, dy = by - ay;
        const double l2 = dx * dx + dy * dy;
        double t = l2 > 0 ? ((fine.xi[k] - ax) * dx + (fine.eta[k] - ay) * dy) / l2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(fine.xi[k] - ax - t * dx, fine.eta[k] - ay - t * dy));
      } else {
        best = std::min(best, std::hypot(fine.xi[k] - ax, fine.eta[k] - ay));
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

struct ConvergenceRow {
  explicit ConvergenceRow(std::string d = {}) : diagnostic(std::move(d)) {}

  std::string diagnostic;
  std::vector<double> values;
  std::vector<double> orders;
  bool monotone = true;
  double min_order() const {
    double m = std::numeric_limits<double>::infinity();
    for (double o : orders) m = std::min(m, o);
    return m;
  }
};

struct ConvergenceTable {
  std::vector<std::size_t> resolutions;
  std::vector<ConvergenceRow> rows;
  const ConvergenceRow* find(const std::string& name) const {
    for (const auto& r : rows) {
      if (r.diagnostic == name) return &r;
    }
    return nullptr;
  }
};

struct ConvergenceSetup {
  double tau_end = 0.0;
  SolverOptions solver;
  std::size_t substeps = 8;
  /// τ level at which level-curve positions are compared (default: √(τ0 τ_end)).
  double level_tau = 0.0;
};

/// Runs the net at each resolution (boundary intervals, geometric ratio 2) and
/// reports, per diagnostic, the values and observed orders log2(e_k / e_{k+1}).
/// The decomposition residuals are measured in RMS over edges; their max-norm
/// rows are kept under a "[max]" suffix. The max norm is dominated by the few
/// cells next to P, where the transverse derivatives of the data are not
/// smooth. Node positions and level curves are compared between consecutive
/// resolutions on shared nodes, so they yield one fewer value.
inline ConvergenceTable convergence_study(const CornerProblem& pb, const ConvergenceSetup& setup,
                                          const std::vector<std::size_t>& resolutions) {
  if (resolutions.size() < 3) throw Error(ErrorKind::precondition, "convergence study needs at least 3 resolutions");
  for (std::size_t k = 0; k + 1 < resolutions.size(); ++k) {
    if (resolutions[k + 1] != 2 * resolutions[k]) {
      throw Error(ErrorKind::precondition, "resolutions must double");
    }
  }
  const double level = setup.level_tau > 0.0 ? setup.level_tau : std::sqrt(pb.tau0() * setup.tau_end);
  std::vector<CharGrid> grids;
  ConvergenceTable tab;
  tab.resolutions = resolutions;
  ConvergenceRow drift{"bernoulli-drift"}, pa{"c d+alpha"}, pbr{"c d+beta"}, ma{"c d-alpha"}, mb{"c d-beta"};
  ConvergenceRow pax{"c d+alpha [max]"}, pbx{"c d+beta [max]"}, mxa{"c d-alpha [max]"}, mbx{"c d-beta [max]"};
  ConvergenceRow pos{"node-position"}, lvl{"level-curve"};
  std::vector<Polyline> levels;
  for (std::size_t n : resolutions) {
    const auto PQ = curve_PQ(pb, setup.tau_end, n, setup.substeps);
    const auto PR = curve_PR_with_states(pb, setup.tau_end, n, setup.substeps);
    grids.push_back(march_grid(PQ, PR, pb, setup.solver));
    const CharGrid& g = grids.back();
    drift.values.push_back(bernoulli_drift(g, pb).max_abs);
    const auto d = decomposition_residual(g, pb.eos());
    pa.values.push_back(d.plus_alpha.rms());
    pbr.values.push_back(d.plus_beta.rms());
    ma.values.push_back(d.minus_alpha.rms());
    mb.values.push_back(d.minus_beta.rms());
    pax.values.push_back(d.plus_alpha.max_abs);
    pbx.values.push_back(d.plus_beta.max_abs);
    mxa.values.push_back(d.minus_alpha.max_abs);
    mbx.values.push_back(d.minus_beta.max_abs);
    levels.push_back(extract_level_curve(g, level));
  }
  for (std::size_t k = 0; k + 1 < grids.size(); ++k) {
    const CharGrid& a = grids[k];
    const CharGrid& b = grids[k + 1];
    double m = 0.0;
    for (std::size_t i = 0; i < a.ni(); ++i) {
      for (std::size_t j = 0; j < a.nj(); ++j) {
        if (a.status(i, j) != NodeStatus::solved || b.status(2 * i, 2 * j) != NodeStatus::solved) continue;
        const CharNode& x = a.at(i, j);
        const CharNode& y = b.at(2 * i, 2 * j);
        m = std::max(m, std::hypot(x.xi - y.xi, x.eta - y.eta));
      }
    }
    pos.values.push_back(m);
    lvl.values.push_back(polyline_distance(levels[k + 1], levels[k]));
  }
  for (ConvergenceRow* r : {&drift, &pa, &pbr, &ma, &mb, &pos, &lvl, &pax, &pbx, &mxa, &mbx}) {
    for (std::size_t k = 0; k + 1 < r->values.size(); ++k) {
      r->orders.push_back(std::log2(r->values[k] / r->values[k + 1]));
      if (!(r->values[k + 1] < r->values[k])) r->monotone = false;
    }
    tab.rows.push_back(*r);
  }
  return tab;
}

}  // namespace cornerflow
