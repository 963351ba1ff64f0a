#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dwr/fe_function.hpp"

namespace dwr {

/// A scalar quantity of interest: point value u(x0), boundary flux
/// int_Gamma grad u . n ds, or the squared L2 norm int u^2 dx.
struct GoalSpec {
  enum class Kind { point_value, flux_on_segment, l2_norm_squared };

  Kind kind = Kind::point_value;
  Point2 point{0.5, 0.5};
  std::string segment;  // named boundary segment for the flux goal
  std::string label;    // for reports

  static GoalSpec point_value(Point2 p, std::string label = "point") {
    return {Kind::point_value, p, "", std::move(label)};
  }
  static GoalSpec flux(std::string segment, std::string label = "flux") {
    return {Kind::flux_on_segment, {}, std::move(segment), std::move(label)};
  }
  static GoalSpec l2_norm_squared(std::string label = "l2") {
    return {Kind::l2_norm_squared, {}, "", std::move(label)};
  }
};

double goal_eval(const GoalSpec& g, const FeFunction& u);

/// J'(u)(phi_j) as a condensed vector on the given space (the adjoint
/// right-hand side). u is the linearization point (only the l2 goal is
/// nonlinear).
Eigen::VectorXd goal_derivative(const GoalSpec& g, const FeFunction& u, const FeSpace& space);

/// Weighted combination of goals: J(v) = sum_i w_i J_i(v). A single goal is
/// the one-term case with weight 1.
struct GoalFunctional {
  std::vector<GoalSpec> goals;
  std::vector<double> weights;

  static GoalFunctional single(GoalSpec g) { return {{std::move(g)}, {1.0}}; }
  std::size_t size() const { return goals.size(); }
};

double goal_eval(const GoalFunctional& g, const FeFunction& u);
Eigen::VectorXd goal_derivative(const GoalFunctional& g, const FeFunction& u,
                                const FeSpace& space);

}  // namespace dwr
