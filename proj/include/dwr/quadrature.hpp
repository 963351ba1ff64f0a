#pragma once

#include <vector>

namespace dwr {

/// Gauss-Legendre rule on [0,1]; exact for polynomials of degree 2n-1.
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

const QuadratureRule1D& gauss_rule_1d(int n_points);

/// Tensor product of two 1D Gauss rules on the unit square.
struct QuadratureRule2D {
  std::vector<double> xi;
  std::vector<double> eta;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

const QuadratureRule2D& gauss_rule_2d(int n_points_per_dir);

}  // namespace dwr
