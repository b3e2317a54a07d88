#pragma once

#include <cmath>

namespace cornerflow {

/// Velocity and specific volume at a point of the flow.
struct GasState {
  double u = 0.0;
  double v = 0.0;
  double tau = 0.0;
};

/// One point of a characteristic net or of a boundary curve.
struct CharNode {
  double xi = 0.0;
  double eta = 0.0;
  double u = 0.0;
  double v = 0.0;
  double tau = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  double U() const { return u - xi; }
  double V() const { return v - eta; }
  double q() const { return std::hypot(U(), V()); }
  double sigma() const { return 0.5 * (alpha + beta); }
  double delta() const { return 0.5 * (alpha - beta); }
  double mach() const { return 1.0 / std::sin(delta()); }
  double rho() const { return 1.0 / tau; }
  GasState state() const { return {u, v, tau}; }
};

}  // namespace cornerflow
