#pragma once

#include <functional>
#include <optional>

#include "dwr/assembly.hpp"

namespace dwr {

/// Direct sparse LU solve (COLAMD ordering). Throws on singular matrices.
Eigen::VectorXd solve_sparse(const SparseSystem& system);

/// Optional CG path for symmetric positive definite systems.
Eigen::VectorXd solve_sparse_cg(const SparseSystem& system, double rtol = 1e-13);

struct StoppingRule {
  double atol = 1e-10;
  int max_iters = 30;
  // Balancing rule: stop once |eta_k| <= balance_fraction * |eta_h_reference|.
  // Requires a goal-derivative provider so eta_k = J'(u)(du) is available.
  double balance_fraction = 0.0;
  double eta_h_reference = 0.0;
};

struct NewtonStep {
  double residual_norm = 0.0;
  double eta_k = 0.0;                // J'(u)(du) at this iterate, if available
  double identity_mismatch = 0.0;    // |J'(u)(du) + A(u)(z)| with z the discrete adjoint
};

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  bool stopped_by_balancing = false;
  std::vector<NewtonStep> steps;
  double final_eta_k = 0.0;          // J'(u)(du_next) at the accepted solution
  Eigen::VectorXd last_update;       // du of the final accepted step
};

struct NewtonFailure : std::runtime_error {
  NewtonReport report;
  explicit NewtonFailure(NewtonReport r)
      : std::runtime_error("Newton iteration did not converge"), report(std::move(r)) {}
};

/// Solves with the factorization of the final Jacobian; valid only inside the
/// final_solve hook of newton_solve.
using LinearSolveFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Newton iteration for A(u)(v) = 0 with damping on residual increase.
/// goal_derivative_at (optional) supplies J'(u) vectors for the eta_k update
/// identity; check_identity additionally solves the discrete adjoint at every
/// step and records |J'(u)(du) + A(u)(z)|. final_solve, if given, runs at the
/// accepted solution with access to the factored Jacobian (the adjoint solve
/// reuses it since both problems have symmetric derivatives).
std::pair<FeFunction, NewtonReport> newton_solve(
    const ProblemDef& p, std::shared_ptr<const FeSpace> space, FeFunction u0,
    const StoppingRule& stopping,
    const std::function<Eigen::VectorXd(const FeFunction&)>& goal_derivative_at = nullptr,
    bool check_identity = false,
    const std::function<void(const FeFunction&, const LinearSolveFn&)>& final_solve = nullptr);

/// J'(u)(du) for a Newton update du: the iteration-error representation.
double eta_k_via_update(const Eigen::VectorXd& goal_deriv, const Eigen::VectorXd& delta_u);

}  // namespace dwr
