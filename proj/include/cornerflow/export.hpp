#pragma once

// CSV and JSON writers. CSVs carry one header row and print doubles with
// %.17g so that identical runs give identical bytes; JSON documents carry a
// schema version and keep insertion order.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/goursat.hpp"
#include "cornerflow/monitor.hpp"
#include "cornerflow/validation.hpp"
#include "cornerflow/waves.hpp"

namespace cornerflow {

inline constexpr int schema_version = 1;

using ojson = nlohmann::ordered_json;

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create '" + parent.string() + "': " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  return f;
}

inline void close_out(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

inline void write_json(const std::string& path, const ojson& j) {
  auto f = open_out(path);
  f << j.dump(2) << "\n";
  close_out(f, path);
}

inline ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace detail

/// Columns xi,eta,u,v,tau,phi,alpha,beta,status; one row per node carrying a
/// state, i-major.
inline void write_grid_csv(const std::string& path, const CharGrid& g) {
  using detail::num;
  auto f = detail::open_out(path);
  f << "xi,eta,u,v,tau,phi,alpha,beta,status\n";
  for (std::size_t i = 0; i < g.ni(); ++i) {
    for (std::size_t j = 0; j < g.nj(); ++j) {
      if (!g.has_value(i, j)) continue;
      const CharNode& n = g.at(i, j);
      f << num(n.xi) << ',' << num(n.eta) << ',' << num(n.u) << ',' << num(n.v) << ',' << num(n.tau) << ','
        << num(n.phi) << ',' << num(n.alpha) << ',' << num(n.beta) << ',' << to_string(g.status(i, j)) << '\n';
    }
  }
  detail::close_out(f, path);
}

/// Columns curve,k,xi,eta,u,v,tau,phi,alpha,beta for both boundary curves.
inline void write_boundary_csv(const std::string& path, const BoundaryCurve& PQ, const BoundaryCurve& PR) {
  using detail::num;
  auto f = detail::open_out(path);
  f << "curve,k,xi,eta,u,v,tau,phi,alpha,beta\n";
  for (const auto* c : {&PQ, &PR}) {
    const char* name = c == &PQ ? "PQ" : "PR";
    for (std::size_t k = 0; k < c->size(); ++k) {
      const CharNode& n = (*c)[k];
      f << name << ',' << k << ',' << num(n.xi) << ',' << num(n.eta) << ',' << num(n.u) << ',' << num(n.v)
        << ',' << num(n.tau) << ',' << num(n.phi) << ',' << num(n.alpha) << ',' << num(n.beta) << '\n';
    }
  }
  detail::close_out(f, path);
}

/// Columns xi,eta.
inline void write_vacuum_csv(const std::string& path, const VacuumBoundary& vb) {
  auto f = detail::open_out(path);
  f << "xi,eta\n";
  for (std::size_t k = 0; k < vb.curve.size(); ++k) {
    f << detail::num(vb.curve.xi[k]) << ',' << detail::num(vb.curve.eta[k]) << '\n';
  }
  detail::close_out(f, path);
}

inline ojson to_json(const VacuumBoundary& vb) {
  ojson j;
  j["schema_version"] = schema_version;
  j["tau_level"] = detail::finite_or_null(vb.tau_level);
  j["points"] = vb.curve.size();
  j["lipschitz"] = detail::finite_or_null(vb.lipschitz);
  j["bound"] = detail::finite_or_null(vb.bound);
  j["within_bound"] = vb.within_bound;
  return j;
}

inline void write_vacuum_json(const std::string& path, const VacuumBoundary& vb) {
  detail::write_json(path, to_json(vb));
}

inline ojson to_json(const CheckTally& t) {
  ojson j;
  j["name"] = t.name;
  j["checked"] = t.checked;
  j["violations"] = t.violations;
  j["worst_margin"] = detail::finite_or_null(t.worst_margin);
  ojson s = ojson::array();
  for (const auto& v : t.samples) {
    s.push_back({{"i", v.i}, {"j", v.j}, {"tau", detail::finite_or_null(v.tau)},
                 {"margin", detail::finite_or_null(v.margin)}});
  }
  j["samples"] = s;
  return j;
}

inline ojson to_json(const AuditReport& r) {
  ojson j;
  j["schema_version"] = schema_version;
  j["n_exp"] = r.n_exp;
  j["eps1"] = r.eps1;
  j["eps2"] = r.eps2;
  j["nodes_audited"] = r.nodes_audited;
  j["total_violations"] = r.total_violations();
  ojson checks = ojson::array();
  for (const auto* t : r.tallies()) checks.push_back(to_json(*t));
  j["checks"] = checks;
  j["informational"] = ojson::array({to_json(r.scaled_boundary_delta)});
  return j;
}

inline void write_audit_json(const std::string& path, const AuditReport& r) { detail::write_json(path, to_json(r)); }

inline ojson to_json(const ResidualReport& r) {
  ojson j;
  j["name"] = r.name;
  j["max_abs"] = detail::finite_or_null(r.max_abs);
  j["l2"] = detail::finite_or_null(r.l2);
  j["rms"] = detail::finite_or_null(r.rms());
  j["grid_spacing"] = detail::finite_or_null(r.grid_spacing);
  j["count"] = r.count;
  return j;
}

inline void write_residuals_json(const std::string& path, const std::vector<ResidualReport>& reps,
                                 const ojson& extra = ojson::object()) {
  ojson j;
  j["schema_version"] = schema_version;
  ojson a = ojson::array();
  for (const auto& r : reps) a.push_back(to_json(r));
  j["residuals"] = a;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  detail::write_json(path, j);
}

/// Columns diagnostic,resolution,value,order; the order column is empty for
/// the coarsest entry of each diagnostic.
inline void write_convergence_csv(const std::string& path, const ConvergenceTable& t) {
  auto f = detail::open_out(path);
  f << "diagnostic,resolution,value,order\n";
  for (const auto& row : t.rows) {
    // Pairwise diagnostics start one resolution later.
    const std::size_t offset = t.resolutions.size() - row.values.size();
    for (std::size_t k = 0; k < row.values.size(); ++k) {
      f << row.diagnostic << ',' << t.resolutions[k + offset] << ',' << detail::num(row.values[k]) << ',';
      if (k > 0) f << detail::num(row.orders[k - 1]);
      f << '\n';
    }
  }
  detail::close_out(f, path);
}

/// Columns tau,delta_bar,delta_bar_slope,m,m_prime,psi,chi.
inline void write_profile_csv(const std::string& path, const EosModel& eos, const DeltaBarProfile& p) {
  using detail::num;
  auto f = detail::open_out(path);
  f << "tau,delta_bar,delta_bar_slope,m,m_prime,psi,chi\n";
  for (std::size_t k = 0; k < p.tau_samples.size(); ++k) {
    const double t = p.tau_samples[k];
    f << num(t) << ',' << num(p.delta_bar[k]) << ',' << num(p.slope[k]) << ',' << num(m_value(eos, t)) << ','
      << num(m_derivative(eos, t)) << ',' << num(p.psi[k]) << ',' << num(p.chi[k]) << '\n';
  }
  detail::close_out(f, path);
}

inline ojson to_json(const DeltaBarProfile& p) {
  ojson j;
  j["schema_version"] = schema_version;
  j["tau0"] = p.tau0();
  j["tau_max"] = p.tau_samples.back();
  j["delta_bar_0"] = p.delta_bar0();
  j["extrema"] = p.extrema;
  j["psi_max"] = p.psi_max();
  j["chi_min"] = p.chi_min();
  j["delta_bar_star"] = p.delta_bar_star;
  j["tail_bound"] = detail::finite_or_null(p.tail_bound);
  return j;
}

inline ojson to_json(const HypothesisReport& h) {
  ojson j;
  j["schema_version"] = schema_version;
  j["delta_bar_0"] = h.delta_bar_0;
  j["alpha0"] = h.alpha0;
  j["target"] = h.target();
  j["psi_max"] = h.psi_max;
  j["chi_min"] = h.chi_min;
  j["condition_right"] = h.condition_right;
  j["pass"] = h.pass;
  j["all_pass"] = h.all_pass;
  j["first_failure"] = detail::finite_or_null(h.first_failure);
  ojson lev = ojson::array();
  for (std::size_t k = 0; k < h.tau.size(); ++k) {
    lev.push_back({{"tau", h.tau[k]}, {"condition_left", h.condition_left[k]}});
  }
  j["levels"] = lev;
  return j;
}

inline void write_hypothesis_json(const std::string& path, const HypothesisReport& h) {
  detail::write_json(path, to_json(h));
}

}  // namespace cornerflow
