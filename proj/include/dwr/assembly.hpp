#pragma once

#include <Eigen/Sparse>

#include "dwr/fe_function.hpp"
#include "dwr/problem.hpp"

namespace dwr {

/// Constraint-condensed sparse system. Rows/columns of Dirichlet and
/// constrained DoFs are identity with zero right-hand side.
struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Quadrature points per direction used for degree-k assembly.
inline int quad_points_for(int degree) { return degree + 2; }

/// Residual vector r_j = A(u)(phi_j) of the semilinear form
/// A(u)(v) = (nu(|grad u|) grad u, grad v) - (f, v), condensed.
Eigen::VectorXd assemble_residual(const ProblemDef& p, const FeSpace& space, const FeFunction& u);

/// Jacobian matrix M_ij = A'(u)(phi_j, phi_i) (symmetric for both problems),
/// condensed, with identity rows for dependent DoFs. If rhs is given it is
/// filled with the condensed negative residual.
SparseSystem assemble_jacobian(const ProblemDef& p, const FeSpace& space, const FeFunction& u,
                               bool with_negative_residual_rhs = false);

/// Distribute a cell-local vector into a condensed global vector.
void distribute_local_vector(const FeSpace& space, const std::vector<int>& dofs,
                             const Eigen::VectorXd& local, Eigen::VectorXd& global);

}  // namespace dwr
