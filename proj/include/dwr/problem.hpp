#pragma once

#include <cmath>
#include <functional>

#include "dwr/geometry.hpp"

namespace dwr {

/// The two PDE problems: -div(nu(|grad u|) grad u) = f with homogeneous
/// Dirichlet data; Poisson has nu = 1, the quasilinear problem uses
/// nu(s) = 2 + arctan(s^2).
struct ProblemDef {
  enum class Kind { poisson, nonlinear_arctan };

  Kind kind = Kind::poisson;
  std::function<double(Point2)> source = [](Point2) { return -1.0; };

  bool linear() const { return kind == Kind::poisson; }

  double nu(double s) const {
    return kind == Kind::poisson ? 1.0 : 2.0 + std::atan(s * s);
  }
  /// nu'(s)/s, finite at s=0 (equals 2/(1+s^4) for the arctan law).
  double nu_prime_over_s(double s) const {
    if (kind == Kind::poisson) return 0.0;
    const double s2 = s * s;
    return 2.0 / (1.0 + s2 * s2);
  }

  static ProblemDef poisson(double f = -1.0) {
    ProblemDef p;
    p.kind = Kind::poisson;
    p.source = [f](Point2) { return f; };
    return p;
  }
  static ProblemDef nonlinear(double f = 10.0) {
    ProblemDef p;
    p.kind = Kind::nonlinear_arctan;
    p.source = [f](Point2) { return f; };
    return p;
  }
};

}  // namespace dwr
