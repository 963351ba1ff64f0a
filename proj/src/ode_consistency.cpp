#include "dwr/ode_consistency.hpp"

#include <cmath>
#include <stdexcept>

#include "dwr/quadrature.hpp"

namespace dwr {

double DgZeroFunction::linear(double t) const {
  const int N = steps();
  const double h = dt();
  if (t <= 0.0) return values[0];
  if (t >= T) return values[N];
  const int n = std::min(static_cast<int>(t / h), N - 1);
  const double local = (t - n * h) / h;
  return values[n] + local * (values[n + 1] - values[n]);
}

DgZeroFunction backward_euler(const OdeProblem& p) {
  if (p.N < 1) throw std::invalid_argument("backward_euler: N must be >= 1");
  DgZeroFunction u;
  u.T = p.T;
  u.values.assign(p.N + 1, 0.0);
  u.values[0] = p.u0;
  const double dt = p.T / p.N;
  for (int n = 1; n <= p.N; ++n) {
    const double tn = n * dt;
    double x = u.values[n - 1];
    bool done = false;
    for (int it = 0; it < 100; ++it) {
      const double r = x - dt * p.f(tn, x) - u.values[n - 1];
      if (std::abs(r) < 1e-13) {
        done = true;
        break;
      }
      const double dr = 1.0 - dt * p.f_u(tn, x);
      x -= r / dr;
    }
    if (!done) throw std::runtime_error("backward_euler: step Newton did not converge");
    u.values[n] = x;
  }
  return u;
}

std::vector<double> ode_adjoint(const OdeProblem& p, const DgZeroFunction& u_h) {
  const int N = u_h.steps();
  const double dt = u_h.dt();
  std::vector<double> z(N + 1, 0.0);
  z[N] = 1.0;  // dJ/du(T)
  for (int n = N - 1; n >= 0; --n)
    z[n] = z[n + 1] / (1.0 - dt * p.f_u(n * dt, u_h.values[n]));
  return z;
}

namespace {

// Piecewise-constant dG(0) value on (t_{n-1}, t_n].
double pw_const(const std::vector<double>& v, double T, double t) {
  const int N = static_cast<int>(v.size()) - 1;
  const double h = T / N;
  int n = static_cast<int>(std::ceil(t / h - 1e-14));
  n = std::min(std::max(n, 0), N);
  return v[n];
}

}  // namespace

OdeEstimate estimate_ode_error(const OdeProblem& p, const DgZeroFunction& u_h) {
  const int N = u_h.steps();
  const double dt = u_h.dt();
  const std::vector<double> z = ode_adjoint(p, u_h);

  // Half-step adjoint as the higher-accuracy weight, with u interpolated
  // linearly onto the half grid.
  OdeProblem p2 = p;
  const int N2 = 2 * N;
  const double dt2 = u_h.T / N2;
  std::vector<double> z2(N2 + 1, 0.0);
  z2[N2] = 1.0;
  for (int n = N2 - 1; n >= 0; --n) {
    const double t = n * dt2;
    z2[n] = z2[n + 1] / (1.0 - dt2 * p.f_u(t, u_h.linear(t)));
  }

  const auto& g = gauss_rule_1d(4);
  OdeEstimate est;
  for (int n = 1; n <= N; ++n) {
    const double a = (n - 1) * dt;
    const double du = (u_h.values[n] - u_h.values[n - 1]) / dt;
    double wr = 0.0, cons = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double t = a + g.points[q] * dt;
      const double uhat = u_h.values[n - 1] + (t - a) * du;
      const double res = du - p.f(t, uhat);  // residual of the embedding
      const double zc = pw_const(z, u_h.T, t);
      const double zf = pw_const(z2, u_h.T, t);
      wr -= g.weights[q] * dt * res * (zf - zc);
      cons -= g.weights[q] * dt * res * zc;
    }
    est.weighted_residual += wr;
    est.consistency += cons;
    est.consistency_abs += std::abs(cons);
  }
  est.estimate = est.weighted_residual + est.consistency;
  return est;
}

}  // namespace dwr
