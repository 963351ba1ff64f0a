#include "dwr/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dwr {

namespace {

// Legendre polynomial P_n and derivative at x via the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

QuadratureRule1D make_gauss(int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("gauss_rule_1d: order out of range");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, x);
    (void)p;
    // Map from [-1,1] to [0,1].
    rule.points[i] = 0.5 * (1.0 - x);  // cos ordering gives descending x
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const QuadratureRule1D& gauss_rule_1d(int n_points) {
  static std::map<int, QuadratureRule1D> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n_points);
  if (it == cache.end()) it = cache.emplace(n_points, make_gauss(n_points)).first;
  return it->second;
}

const QuadratureRule2D& gauss_rule_2d(int n_points_per_dir) {
  static std::map<int, QuadratureRule2D> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n_points_per_dir);
  if (it == cache.end()) {
    const auto& g = gauss_rule_1d(n_points_per_dir);
    QuadratureRule2D rule;
    for (int j = 0; j < n_points_per_dir; ++j)
      for (int i = 0; i < n_points_per_dir; ++i) {
        rule.xi.push_back(g.points[i]);
        rule.eta.push_back(g.points[j]);
        rule.weights.push_back(g.weights[i] * g.weights[j]);
      }
    it = cache.emplace(n_points_per_dir, std::move(rule)).first;
  }
  return it->second;
}

}  // namespace dwr
