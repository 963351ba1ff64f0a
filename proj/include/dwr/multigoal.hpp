#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dwr/goal.hpp"

namespace dwr {

/// Error-weighting function E(x, m): strictly monotone in each x_i >= 0 with
/// E(0, m) = 0. User weights omega multiply the individual terms.
struct WeightingSpec {
  enum class Kind { relative_sum, absolute_sum, relative_power, sqrt_sum };

  Kind kind = Kind::relative_sum;
  double power = 2.0;               // for relative_power, p in (1, inf)
  Eigen::VectorXd user_weights;     // omega; empty = all ones
  bool frozen_m = false;            // keep m from the first adaptive step

  double omega(int i) const {
    return user_weights.size() > i ? user_weights[i] : 1.0;
  }
};

double eval_weighting(const WeightingSpec& w, const Eigen::VectorXd& x, const Eigen::VectorXd& m);
Eigen::VectorXd weighting_partials(const WeightingSpec& w, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& m);

/// sign(J_i(u_enriched) - J_i(u_low)), ties map to +1.
Eigen::VectorXd compute_signs(const Eigen::VectorXd& goals_enriched,
                              const Eigen::VectorXd& goals_low);

/// The combined functional J_E for one adaptive step: goals, frozen scalar
/// weights w_i = sign_i * dE/dx_i, and bookkeeping of the values that formed
/// them.
struct CombinedGoal {
  std::vector<GoalSpec> goals;
  WeightingSpec weighting;
  Eigen::VectorXd signs;
  Eigen::VectorXd m;
  Eigen::VectorXd values_low;       // J_i(u~)
  Eigen::VectorXd values_enriched;  // J_i(u^(2))
  Eigen::VectorXd weights;          // sign_i * dE/dx_i(|J(u2)-J(u~)|, m)

  /// Linear functional with the frozen weights, used for both adjoint
  /// right-hand sides and the estimator.
  GoalFunctional functional() const {
    GoalFunctional g;
    g.goals = goals;
    g.weights.assign(weights.data(), weights.data() + weights.size());
    return g;
  }
};

/// Build the step's combined functional. Order matters: the enriched primal
/// values must come from a solve performed before the low-order ones are used
/// for the signs. m defaults to |J_i(u~)| (floored at 1e-14 with a warning);
/// pass previous_m to keep frozen weights across steps.
CombinedGoal make_combined_goal(const std::vector<GoalSpec>& goals, const WeightingSpec& w,
                                const Eigen::VectorXd& values_enriched,
                                const Eigen::VectorXd& values_low,
                                const Eigen::VectorXd* previous_m = nullptr);

/// Adjoint right-hand side of the combined functional at u:
/// sum_i w_i J_i'(u)(phi_j).
Eigen::VectorXd combined_derivative(const CombinedGoal& cg, const FeFunction& u,
                                    const FeSpace& space);

}  // namespace dwr
