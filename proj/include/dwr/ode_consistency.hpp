#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dwr {

/// Scalar initial value problem u' = f(t, u), u(0) = u0 on (0, T], solved by
/// backward Euler on N uniform steps and analyzed as an inconsistent dG(0)
/// method for the terminal goal J(u) = u(T).
struct OdeProblem {
  std::function<double(double, double)> f;    // f(t, u)
  std::function<double(double, double)> f_u;  // df/du
  double u0 = 1.0;
  double T = 1.0;
  int N = 1;
};

/// Nodal values u(t_n), n = 0..N; piecewise constant on (t_{n-1}, t_n] as a
/// dG(0) function, embedded piecewise linearly where a conforming
/// reconstruction is needed.
struct DgZeroFunction {
  double T = 1.0;
  std::vector<double> values;  // size N+1, values[0] = u0

  int steps() const { return static_cast<int>(values.size()) - 1; }
  double dt() const { return T / steps(); }
  /// Piecewise-linear (conforming) evaluation.
  double linear(double t) const;
};

/// Implicit Euler with a per-step scalar Newton iteration (residual 1e-13).
DgZeroFunction backward_euler(const OdeProblem& p);

struct OdeEstimate {
  double estimate = 0.0;
  double weighted_residual = 0.0;
  double consistency = 0.0;      // S_h(u_h)(z_h), signed
  double consistency_abs = 0.0;  // sum of per-interval |S_h| contributions
};

/// DWR-style estimate of J(u) - J(u_h) = u(T) - u_h(T): the discrete adjoint
/// z_h is computed backward in time (z(T) = 1), the weight z - z_h is
/// approximated on once-halved steps, and the backward-Euler consistency
/// error S_h(u_h)(z_h) = -A(u_hat)(z_h) is evaluated on the piecewise-linear
/// embedding u_hat with 4-point Gauss quadrature per interval.
OdeEstimate estimate_ode_error(const OdeProblem& p, const DgZeroFunction& u_h);

/// Adjoint nodal values z(t_n) for J(u) = u(T) on the grid of u_h (z(T) = 1).
std::vector<double> ode_adjoint(const OdeProblem& p, const DgZeroFunction& u_h);

}  // namespace dwr
