#pragma once

#include <Eigen/Dense>

#include "dwr/goal.hpp"
#include "dwr/problem.hpp"

namespace dwr {

/// Decomposition of the dual-weighted residual estimator.
/// eta_total = eta_h + eta_k (+ eta_Iu + eta_Iz for the interpolation
/// variant); the third-order remainder slot is kept for transparency and is
/// always zero.
struct ErrorBreakdown {
  double eta_p = 0.0;   // 1/2 rho(u)(z_hi - z)
  double eta_a = 0.0;   // 1/2 rho*(u,z)(u_hi - u)
  double eta_h = 0.0;   // eta_p + eta_a
  double eta_k = 0.0;   // A(u)(z), the iteration error part
  double eta_Iu = 0.0;  // interpolation variant only
  double eta_Iz = 0.0;
  double eta_rem = 0.0;  // neglected remainder, reported as zero
  double eta_total = 0.0;

  /// Signed nodal contributions eta_i^PU per PU DoF. Contributions of
  /// constrained PU DoFs are merged into their masters (the constrained PU
  /// basis), so constrained entries are zero.
  Eigen::VectorXd nodal;
  /// Nonnegative per-active-cell indicators (|nodal| redistributed), aligned
  /// with mesh.active_cells().
  std::vector<double> element;

  double indicator_sum = 0.0;  // sum_i |nodal_i|
  bool interpolation_fallback = false;
};

struct EstimatorInput {
  const ProblemDef* problem = nullptr;
  const GoalFunctional* goal = nullptr;
  const FeFunction* u_low = nullptr;  // on the primal space
  const FeFunction* z_low = nullptr;
  const FeFunction* u_high = nullptr;  // enriched solutions or interpolants
  const FeFunction* z_high = nullptr;
  bool high_on_parent_mesh = false;  // interpolants live on the parent mesh
  const FeSpace* pu = nullptr;
  double eta_k = 0.0;  // A(u_low)(z_low), supplied by the solver layer
};

/// Enriched-space estimator eta^(2) with PU localization.
ErrorBreakdown estimate_enriched(const EstimatorInput& in);

/// Interpolation estimator eta_I: same discretization part plus the
/// interpolation error parts eta_Iu, eta_Iz.
ErrorBreakdown estimate_interpolation(const EstimatorInput& in);

/// Split |eta_i| of every unconstrained PU node equally among the active
/// cells supporting the node; contributions sitting on constrained (hanging)
/// PU DoFs are first distributed to their masters by the constraint weights.
/// The shares of one node sum to its |eta_i| bit-exactly.
std::vector<double> localize_to_elements(const Eigen::VectorXd& nodal, const FeSpace& pu);

/// A(u)(w) with both functions evaluated over the active cells of u's mesh;
/// w may live on the same mesh or on its parent mesh.
double semilinear_form_value(const ProblemDef& p, const FeFunction& u, const FeFunction& w,
                             bool w_on_parent_mesh);

/// Neumaier-compensated sum, used where conservation is checked tightly.
double compensated_sum(const std::vector<double>& values);

}  // namespace dwr
