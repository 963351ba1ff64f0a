#pragma once

#include <vector>

namespace dwr {

/// 1D Lagrange basis of degree k on the equispaced nodes j/k, j=0..k of [0,1].
/// Equispaced nodes are chosen so that nodes of Q_k on child cells coincide
/// with nodes of Q_2k on the parent cell (needed by the patch interpolation).
double lagrange_value(int degree, int i, double x);
double lagrange_derivative(int degree, int i, double x);

/// Values and derivatives of all k+1 basis functions at x.
void lagrange_all(int degree, double x, std::vector<double>& values,
                  std::vector<double>& derivatives);

/// Tensor-product shape functions of Q_k on the unit square.
/// Local numbering is lexicographic: node (i,j) -> j*(k+1)+i at (i/k, j/k).
struct ShapeTable {
  int degree = 0;
  int n_shapes = 0;                        // (k+1)^2
  int n_points = 0;                        // quadrature points
  std::vector<double> value;               // [q * n_shapes + s]
  std::vector<double> grad_xi;             // reference-space gradients
  std::vector<double> grad_eta;

  double val(int q, int s) const { return value[q * n_shapes + s]; }
  double dxi(int q, int s) const { return grad_xi[q * n_shapes + s]; }
  double deta(int q, int s) const { return grad_eta[q * n_shapes + s]; }
};

/// Shape values/gradients tabulated at the points of the 2D Gauss rule with
/// n_q points per direction. Cached; reference stays valid.
const ShapeTable& shape_table(int degree, int n_q);

/// Shape table at the same Gauss points mapped into the child quadrant
/// (qx,qy) of a parent cell: used to evaluate a parent-cell polynomial at the
/// quadrature points of one of its four children. Gradients are with respect
/// to parent reference coordinates.
const ShapeTable& shape_table_child(int degree, int n_q, int qx, int qy);

/// Shape values/gradients of Q_k at one arbitrary reference point.
void shapes_at_point(int degree, double xi, double eta, std::vector<double>& values,
                     std::vector<double>* grad_xi = nullptr,
                     std::vector<double>* grad_eta = nullptr);

}  // namespace dwr
