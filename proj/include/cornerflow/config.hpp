#pragma once

// Scenario configuration: a flat key = value text format with [section]
// headers, builtin presets and a dumper that round-trips through the parser.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cornerflow/eos.hpp"
#include "cornerflow/error.hpp"
#include "cornerflow/numerics.hpp"

namespace cornerflow {

struct EosSpec {
  std::string family = "polytropic";
  /// Family parameters by name (see make_eos for the accepted keys).
  std::map<std::string, double> params;
};

struct ScenarioConfig {
  std::string name = "custom";
  EosSpec eos;
  double tau0 = 1.0;
  /// Inflow speed; when zero, u0 = mach0 · c(τ₀).
  double u0 = 0.0;
  double mach0 = 2.0;
  double theta = -0.25 * numerics::pi;

  std::size_t grid_n = 64;
  /// Largest τ solved; the net is also cut at the fan's own end and at c_vac.
  double tau_max = 10.0;
  /// Vacuum threshold on the sound speed; zero means 10⁻⁴·c₀.
  double c_vac = 0.0;
  std::size_t substeps = 8;

  double tol = 1e-10;
  std::size_t max_iter = 50;
  double phi_path_factor = 0.5;
  std::size_t workers = 1;

  /// Margins; zero means 0.05·δ̄(τ₀) and 0.1·(α₀ + π/2).
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::size_t profile_samples = 400;
  /// "discrete" differences both boundary curves for M1; "closed-form" takes
  /// ∂+ρ on PQ from the planar-fan formula with ω read as δ.
  std::string m1_source = "discrete";

  /// Ceilings on residual norms for a successful run.
  double pde_ceiling = 0.1;
  double decomposition_ceiling = 0.05;
  double bernoulli_ceiling = 1e-3;
  /// When set, a Lipschitz constant above the level-curve slope bound fails the run.
  bool enforce_vacuum_bound = false;

  std::string output_dir = ".";
  std::vector<std::string> outputs = {"grid", "vacuum", "audit", "residuals"};
};

inline EosModel make_eos(const EosSpec& s) {
  auto get = [&](const char* key) {
    auto it = s.params.find(key);
    if (it == s.params.end()) {
      throw Error(ErrorKind::config, "eos '" + s.family + "' needs parameter '" + key + "'");
    }
    return it->second;
  };
  auto known = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : s.params) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) throw Error(ErrorKind::config, "eos '" + s.family + "' has no parameter '" + k + "'");
    }
  };
  try {
    if (s.family == "polytropic") {
      known({"A", "gamma"});
      return eos::polytropic(get("A"), get("gamma"));
    }
    if (s.family == "shallow-water") {
      known({"g", "k"});
      return eos::shallow_water(get("g"), get("k"));
    }
    if (s.family == "magneto") {
      known({"A1", "gamma", "mu", "kappa0"});
      return eos::magneto(get("A1"), get("gamma"), get("mu"), get("kappa0"));
    }
    if (s.family == "vdw") {
      known({"S1", "gamma"});
      return eos::van_der_waals(get("S1"), get("gamma"));
    }
    if (s.family == "two-constant") {
      known({"A1", "B1", "g1", "g2"});
      return eos::two_constant(get("A1"), get("B1"), get("g1"), get("g2"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw Error(ErrorKind::config, e.what());
  }
  throw Error(ErrorKind::config, "unknown eos family '" + s.family + "'");
}

/// Checks the invariants that do not need the EOS evaluated.
inline void validate(const ScenarioConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::config, m); };
  if (!(c.theta > -0.5 * numerics::pi && c.theta < 0.0)) bad("theta must lie in (-pi/2, 0)");
  if (c.grid_n < 8) bad("grid_n must be at least 8");
  if (!(c.tau0 > 0.0)) bad("tau0 must be positive");
  if (!(c.tau_max > c.tau0)) bad("tau_max must exceed tau0");
  if (c.u0 < 0.0) bad("u0 must be positive");
  if (c.u0 == 0.0 && !(c.mach0 > 1.0)) bad("mach0 must exceed 1");
  if (!(c.tol > 0.0)) bad("tol must be positive");
  if (c.max_iter < 1) bad("max_iter must be at least 1");
  if (c.workers < 1) bad("workers must be at least 1");
  if (c.substeps < 1) bad("substeps must be at least 1");
  if (c.eps1 < 0.0 || c.eps2 < 0.0) bad("margins must be nonnegative");
  if (c.c_vac < 0.0) bad("c_vac must be nonnegative");
  if (c.profile_samples < 16) bad("profile_samples must be at least 16");
  if (c.m1_source != "discrete" && c.m1_source != "closed-form") bad("m1_source must be discrete or closed-form");
  for (const auto& o : c.outputs) {
    if (o != "grid" && o != "vacuum" && o != "audit" && o != "residuals" && o != "profile" &&
        o != "boundary" && o != "hypothesis") {
      bad("unknown output target '" + o + "'");
    }
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "'" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::size_t to_size(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw Error(ErrorKind::config, "'" + key + "' expects a nonnegative integer");
  return static_cast<std::size_t>(d);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::config, "'" + key + "' expects true or false");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Applies one `section.key = value` assignment.
inline void set_option(ScenarioConfig& c, const std::string& section, const std::string& key,
                       const std::string& value) {
  using namespace detail;
  const std::string full = section.empty() ? key : section + "." + key;
  if (section == "scenario" && key == "name") {
    c.name = value;
  } else if (section == "eos") {
    if (key == "family") {
      c.eos.family = value;
    } else {
      c.eos.params[key] = to_double(full, value);
    }
  } else if (section == "flow") {
    if (key == "tau0") c.tau0 = to_double(full, value);
    else if (key == "u0") c.u0 = to_double(full, value);
    else if (key == "mach0") c.mach0 = to_double(full, value);
    else if (key == "theta") c.theta = to_double(full, value);
    else if (key == "theta_deg") c.theta = to_double(full, value) * numerics::pi / 180.0;
    else throw Error(ErrorKind::config, "unknown key '" + full + "'");
  } else if (section == "grid") {
    if (key == "grid_n") c.grid_n = to_size(full, value);
    else if (key == "tau_max") c.tau_max = to_double(full, value);
    else if (key == "c_vac") c.c_vac = to_double(full, value);
    else if (key == "substeps") c.substeps = to_size(full, value);
    else throw Error(ErrorKind::config, "unknown key '" + full + "'");
  } else if (section == "solver") {
    if (key == "tol") c.tol = to_double(full, value);
    else if (key == "max_iter") c.max_iter = to_size(full, value);
    else if (key == "phi_path_factor") c.phi_path_factor = to_double(full, value);
    else if (key == "workers") c.workers = to_size(full, value);
    else throw Error(ErrorKind::config, "unknown key '" + full + "'");
  } else if (section == "monitor") {
    if (key == "eps1") c.eps1 = to_double(full, value);
    else if (key == "eps2") c.eps2 = to_double(full, value);
    else if (key == "profile_samples") c.profile_samples = to_size(full, value);
    else if (key == "m1_source") c.m1_source = value;
    else if (key == "enforce_vacuum_bound") c.enforce_vacuum_bound = to_bool(full, value);
    else throw Error(ErrorKind::config, "unknown key '" + full + "'");
  } else if (section == "validation") {
    if (key == "pde_ceiling") c.pde_ceiling = to_double(full, value);
    else if (key == "decomposition_ceiling") c.decomposition_ceiling = to_double(full, value);
    else if (key == "bernoulli_ceiling") c.bernoulli_ceiling = to_double(full, value);
    else throw Error(ErrorKind::config, "unknown key '" + full + "'");
  } else if (section == "output") {
    if (key == "dir") {
      c.output_dir = value;
    } else if (key == "targets") {
      c.outputs.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) c.outputs.push_back(item);
      }
    } else {
      throw Error(ErrorKind::config, "unknown key '" + full + "'");
    }
  } else {
    throw Error(ErrorKind::config, "unknown key '" + full + "'");
  }
}

/// Parses the text format on top of `base`. Lines are `key = value`, `[section]`
/// or comments starting with '#'.
inline ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {}) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": bad section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": empty key");
    // A new family drops the parameters of the old one; give `family` first.
    if (section == "eos" && key == "family" && value != base.eos.family) base.eos.params.clear();
    set_option(base, section, key, value);
  }
  validate(base);
  return base;
}

inline ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {}) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

inline std::string dump_config(const ScenarioConfig& c) {
  using detail::fmt;
  std::ostringstream o;
  o << "[scenario]\nname = " << c.name << "\n\n";
  o << "[eos]\nfamily = " << c.eos.family << "\n";
  for (const auto& [k, v] : c.eos.params) o << k << " = " << fmt(v) << "\n";
  o << "\n[flow]\ntau0 = " << fmt(c.tau0) << "\n";
  if (c.u0 > 0.0) o << "u0 = " << fmt(c.u0) << "\n";
  else o << "mach0 = " << fmt(c.mach0) << "\n";
  o << "theta = " << fmt(c.theta) << "\n";
  o << "\n[grid]\ngrid_n = " << c.grid_n << "\ntau_max = " << fmt(c.tau_max) << "\nc_vac = " << fmt(c.c_vac)
    << "\nsubsteps = " << c.substeps << "\n";
  o << "\n[solver]\ntol = " << fmt(c.tol) << "\nmax_iter = " << c.max_iter
    << "\nphi_path_factor = " << fmt(c.phi_path_factor) << "\nworkers = " << c.workers << "\n";
  o << "\n[monitor]\neps1 = " << fmt(c.eps1) << "\neps2 = " << fmt(c.eps2)
    << "\nprofile_samples = " << c.profile_samples << "\nm1_source = " << c.m1_source
    << "\nenforce_vacuum_bound = " << (c.enforce_vacuum_bound ? "true" : "false") << "\n";
  o << "\n[validation]\npde_ceiling = " << fmt(c.pde_ceiling)
    << "\ndecomposition_ceiling = " << fmt(c.decomposition_ceiling)
    << "\nbernoulli_ceiling = " << fmt(c.bernoulli_ceiling) << "\n";
  o << "\n[output]\ndir = " << c.output_dir << "\ntargets = ";
  for (std::size_t k = 0; k < c.outputs.size(); ++k) o << (k ? "," : "") << c.outputs[k];
  o << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() { return {"dam-break", "mhd", "vdw", "polytropic"}; }

inline ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "dam-break") {
    c.eos = {"shallow-water", {{"g", 2.0}, {"k", 1.0}}};
    c.tau0 = 1.0;
    c.mach0 = 2.0;
    // At θ = −π/4 the boundary C- curve leaves the invariant box near τ ≈ 7;
    // a steeper wall ends the fan at τ ≈ 5 with α_v inside the box.
    c.theta = -numerics::pi / 6.0;
    c.grid_n = 256;
    c.tau_max = 10.0;
  } else if (name == "mhd") {
    c.eos = {"magneto", {{"A1", 1.0}, {"gamma", 1.4}, {"mu", 1.0}, {"kappa0", 1.0}}};
    c.tau0 = 1.0;
    c.mach0 = 2.0;
    c.theta = -numerics::pi / 6.0;
    c.grid_n = 128;
    c.tau_max = 10.0;
  } else if (name == "vdw") {
    c.eos = {"vdw", {{"S1", 0.28}, {"gamma", 0.05}}};
    c.tau0 = 20.0;
    c.mach0 = 2.0;
    // With δ̄ falling the lower α edge rises; at θ = −30° the C- boundary
    // crosses it near τ ≈ 61.
    c.theta = -numerics::pi / 9.0;
    c.grid_n = 128;
    c.tau_max = 200.0;
  } else if (name == "polytropic") {
    c.eos = {"polytropic", {{"A", 1.0}, {"gamma", 2.0}}};
    c.tau0 = 1.0;
    c.mach0 = 2.0;
    c.theta = -0.25 * numerics::pi;
    c.grid_n = 64;
    c.tau_max = 10.0;
  } else {
    throw Error(ErrorKind::config, "unknown preset '" + name + "'");
  }
  validate(c);
  return c;
}

}  // namespace cornerflow
