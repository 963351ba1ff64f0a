#include "dwr/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace dwr {

Eigen::VectorXd solve_sparse(const SparseSystem& system) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(system.matrix);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve_sparse: factorization failed");
  Eigen::VectorXd x = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve_sparse: solve failed");
  return x;
}

Eigen::VectorXd solve_sparse_cg(const SparseSystem& system, double rtol) {
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(rtol);
  cg.setMaxIterations(10 * system.matrix.rows());
  cg.compute(system.matrix);
  Eigen::VectorXd x = cg.solve(system.rhs);
  if (cg.info() != Eigen::Success) throw std::runtime_error("solve_sparse_cg: no convergence");
  return x;
}

double eta_k_via_update(const Eigen::VectorXd& goal_deriv, const Eigen::VectorXd& delta_u) {
  return goal_deriv.dot(delta_u);
}

std::pair<FeFunction, NewtonReport> newton_solve(
    const ProblemDef& p, std::shared_ptr<const FeSpace> space, FeFunction u0,
    const StoppingRule& stopping,
    const std::function<Eigen::VectorXd(const FeFunction&)>& goal_derivative_at,
    bool check_identity,
    const std::function<void(const FeFunction&, const LinearSolveFn&)>& final_solve) {
  FeFunction u = std::move(u0);
  u.distribute();
  NewtonReport report;

  using LU = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

  for (int iter = 0; iter <= stopping.max_iters; ++iter) {
    SparseSystem sys = assemble_jacobian(p, *space, u, /*with_negative_residual_rhs=*/true);
    const double rnorm = sys.rhs.norm();

    LU lu;
    lu.compute(sys.matrix);
    if (lu.info() != Eigen::Success) throw std::runtime_error("newton_solve: factorization failed");
    const Eigen::VectorXd du = lu.solve(sys.rhs);

    NewtonStep step;
    step.residual_norm = rnorm;
    Eigen::VectorXd jprime;
    if (goal_derivative_at) {
      jprime = goal_derivative_at(u);
      step.eta_k = eta_k_via_update(jprime, du);
    }
    if (check_identity) {
      // Theorem identity: J'(u)(du) = -A(u)(z) with z the discrete adjoint at u.
      // The Jacobian is symmetric for both problems, so the factorization is reused.
      if (jprime.size() == 0 && goal_derivative_at) jprime = goal_derivative_at(u);
      if (jprime.size() > 0) {
        const Eigen::VectorXd z = lu.solve(jprime);
        const double a_of_z = -sys.rhs.dot(z);  // A(u)(z) = r . z
        step.identity_mismatch = std::abs(step.eta_k + a_of_z);
        if (goal_derivative_at == nullptr) step.eta_k = 0.0;
      }
    }
    report.steps.push_back(step);
    report.final_residual = rnorm;

    const bool balanced = stopping.balance_fraction > 0.0 && goal_derivative_at &&
                          std::abs(step.eta_k) <= stopping.balance_fraction *
                                                      std::abs(stopping.eta_h_reference);
    if (rnorm <= stopping.atol || balanced) {
      report.converged = true;
      report.stopped_by_balancing = balanced && rnorm > stopping.atol;
      report.final_eta_k = step.eta_k;
      report.last_update = du;
      report.iterations = iter;
      if (final_solve)
        final_solve(u, [&lu](const Eigen::VectorXd& rhs) { return Eigen::VectorXd(lu.solve(rhs)); });
      return {std::move(u), std::move(report)};
    }
    if (iter == stopping.max_iters) break;

    // Accept the update; halve on residual increase (rarely engaged).
    FeFunction trial = u;
    double lambda = 1.0;
    for (int halving = 0; halving < 12; ++halving) {
      trial.coeffs() = u.coeffs() + lambda * du;
      trial.distribute();
      const Eigen::VectorXd r_new = assemble_residual(p, *space, trial);
      if (r_new.norm() < rnorm || lambda < 1e-3) break;
      lambda *= 0.5;
    }
    u = std::move(trial);
    report.iterations = iter + 1;
  }
  report.converged = false;
  throw NewtonFailure(std::move(report));
}

}  // namespace dwr
