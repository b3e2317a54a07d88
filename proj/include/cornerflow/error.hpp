#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cornerflow {

enum class ErrorKind {
  domain,
  convexity,
  singularity,
  hypothesis,
  resolution,
  range,
  monotonicity,
  subsonic_inflow,
  sonic_radicand,
  integration,
  hyperbolicity,
  no_convergence,
  phi_path,
  degenerate_geometry,
  sign_condition,
  hull_too_thin,
  field_degeneracy,
  precondition,
  config,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::convexity: return "convexity";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::hypothesis: return "hypothesis";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::range: return "range";
    case ErrorKind::monotonicity: return "monotonicity";
    case ErrorKind::subsonic_inflow: return "subsonic-inflow";
    case ErrorKind::sonic_radicand: return "sonic-radicand";
    case ErrorKind::integration: return "integration";
    case ErrorKind::hyperbolicity: return "hyperbolicity";
    case ErrorKind::no_convergence: return "no-convergence";
    case ErrorKind::phi_path: return "phi-path";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::sign_condition: return "sign-condition";
    case ErrorKind::hull_too_thin: return "hull-too-thin";
    case ErrorKind::field_degeneracy: return "field-degeneracy";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure in the library is reported through this type. `tau()` carries
/// the specific volume at which the failure was detected when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        double tau = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(compose(kind, what, tau)), kind_(kind), tau_(tau) {}

  ErrorKind kind() const noexcept { return kind_; }
  double tau() const noexcept { return tau_; }
  bool has_tau() const noexcept { return !std::isnan(tau_); }

 private:
  static std::string compose(ErrorKind kind, const std::string& what, double tau) {
    std::ostringstream os;
    os << to_string(kind) << " error: " << what;
    if (!std::isnan(tau)) os << " (tau = " << tau << ")";
    return os.str();
  }

  ErrorKind kind_;
  double tau_;
};

}  // namespace cornerflow
