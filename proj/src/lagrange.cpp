#include "dwr/lagrange.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "dwr/quadrature.hpp"

namespace dwr {

double lagrange_value(int degree, int i, double x) {
  if (degree == 0) return 1.0;
  double v = 1.0;
  const double xi = static_cast<double>(i) / degree;
  for (int j = 0; j <= degree; ++j) {
    if (j == i) continue;
    const double xj = static_cast<double>(j) / degree;
    v *= (x - xj) / (xi - xj);
  }
  return v;
}

double lagrange_derivative(int degree, int i, double x) {
  if (degree == 0) return 0.0;
  const double xi = static_cast<double>(i) / degree;
  double sum = 0.0;
  for (int m = 0; m <= degree; ++m) {
    if (m == i) continue;
    const double xm = static_cast<double>(m) / degree;
    double prod = 1.0 / (xi - xm);
    for (int j = 0; j <= degree; ++j) {
      if (j == i || j == m) continue;
      const double xj = static_cast<double>(j) / degree;
      prod *= (x - xj) / (xi - xj);
    }
    sum += prod;
  }
  return sum;
}

void lagrange_all(int degree, double x, std::vector<double>& values,
                  std::vector<double>& derivatives) {
  values.resize(degree + 1);
  derivatives.resize(degree + 1);
  for (int i = 0; i <= degree; ++i) {
    values[i] = lagrange_value(degree, i, x);
    derivatives[i] = lagrange_derivative(degree, i, x);
  }
}

namespace {

ShapeTable make_table(int degree, int n_q) {
  if (degree < 1 || degree > 8) throw std::invalid_argument("shape_table: degree out of range");
  const auto& rule = gauss_rule_2d(n_q);
  ShapeTable t;
  t.degree = degree;
  t.n_shapes = (degree + 1) * (degree + 1);
  t.n_points = rule.size();
  t.value.resize(t.n_points * t.n_shapes);
  t.grad_xi.resize(t.n_points * t.n_shapes);
  t.grad_eta.resize(t.n_points * t.n_shapes);
  std::vector<double> lx(degree + 1), ly(degree + 1), dlx(degree + 1), dly(degree + 1);
  for (int q = 0; q < t.n_points; ++q) {
    lagrange_all(degree, rule.xi[q], lx, dlx);
    lagrange_all(degree, rule.eta[q], ly, dly);
    for (int j = 0; j <= degree; ++j)
      for (int i = 0; i <= degree; ++i) {
        const int s = j * (degree + 1) + i;
        t.value[q * t.n_shapes + s] = lx[i] * ly[j];
        t.grad_xi[q * t.n_shapes + s] = dlx[i] * ly[j];
        t.grad_eta[q * t.n_shapes + s] = lx[i] * dly[j];
      }
  }
  return t;
}

}  // namespace

const ShapeTable& shape_table(int degree, int n_q) {
  static std::map<std::pair<int, int>, ShapeTable> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(degree, n_q);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_table(degree, n_q)).first;
  return it->second;
}

namespace {

ShapeTable make_child_table(int degree, int n_q, int qx, int qy) {
  const auto& rule = gauss_rule_2d(n_q);
  ShapeTable t;
  t.degree = degree;
  t.n_shapes = (degree + 1) * (degree + 1);
  t.n_points = rule.size();
  t.value.resize(t.n_points * t.n_shapes);
  t.grad_xi.resize(t.n_points * t.n_shapes);
  t.grad_eta.resize(t.n_points * t.n_shapes);
  std::vector<double> lx(degree + 1), ly(degree + 1), dlx(degree + 1), dly(degree + 1);
  for (int q = 0; q < t.n_points; ++q) {
    lagrange_all(degree, 0.5 * (qx + rule.xi[q]), lx, dlx);
    lagrange_all(degree, 0.5 * (qy + rule.eta[q]), ly, dly);
    for (int j = 0; j <= degree; ++j)
      for (int i = 0; i <= degree; ++i) {
        const int s = j * (degree + 1) + i;
        t.value[q * t.n_shapes + s] = lx[i] * ly[j];
        t.grad_xi[q * t.n_shapes + s] = dlx[i] * ly[j];
        t.grad_eta[q * t.n_shapes + s] = lx[i] * dly[j];
      }
  }
  return t;
}

}  // namespace

const ShapeTable& shape_table_child(int degree, int n_q, int qx, int qy) {
  static std::map<std::array<int, 4>, ShapeTable> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  std::array<int, 4> key{degree, n_q, qx, qy};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_child_table(degree, n_q, qx, qy)).first;
  return it->second;
}

void shapes_at_point(int degree, double xi, double eta, std::vector<double>& values,
                     std::vector<double>* grad_xi, std::vector<double>* grad_eta) {
  std::vector<double> lx(degree + 1), ly(degree + 1), dlx(degree + 1), dly(degree + 1);
  lagrange_all(degree, xi, lx, dlx);
  lagrange_all(degree, eta, ly, dly);
  const int n = (degree + 1) * (degree + 1);
  values.resize(n);
  if (grad_xi) grad_xi->resize(n);
  if (grad_eta) grad_eta->resize(n);
  for (int j = 0; j <= degree; ++j)
    for (int i = 0; i <= degree; ++i) {
      const int s = j * (degree + 1) + i;
      values[s] = lx[i] * ly[j];
      if (grad_xi) (*grad_xi)[s] = dlx[i] * ly[j];
      if (grad_eta) (*grad_eta)[s] = lx[i] * dly[j];
    }
}

}  // namespace dwr
