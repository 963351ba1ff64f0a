#include "dwr/multigoal.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace dwr {

namespace {
constexpr double kMinWeight = 1e-14;

double floored_abs_m(double m, int i) {
  const double a = std::abs(m);
  if (a < kMinWeight) {
    std::cerr << "warning: weighting denominator m[" << i << "] below 1e-14, flooring\n";
    return kMinWeight;
  }
  return a;
}

void check_m(const WeightingSpec& w, const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
  if (x.size() != m.size()) throw std::invalid_argument("weighting: size mismatch");
  if ((w.kind == WeightingSpec::Kind::relative_sum ||
       w.kind == WeightingSpec::Kind::relative_power)) {
    for (int i = 0; i < m.size(); ++i)
      if (m[i] == 0.0) throw std::invalid_argument("weighting: zero m_i for a relative kind");
  }
}

}  // namespace

double eval_weighting(const WeightingSpec& w, const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
  check_m(w, x, m);
  double v = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::invalid_argument("weighting: negative component");
    switch (w.kind) {
      case WeightingSpec::Kind::relative_sum:
        v += w.omega(i) * x[i] / floored_abs_m(m[i], i);
        break;
      case WeightingSpec::Kind::absolute_sum:
        v += w.omega(i) * x[i];
        break;
      case WeightingSpec::Kind::relative_power:
        v += w.omega(i) * std::pow(x[i] / floored_abs_m(m[i], i), w.power);
        break;
      case WeightingSpec::Kind::sqrt_sum:
        v += w.omega(i) * std::sqrt(x[i]);
        break;
    }
  }
  return v;
}

Eigen::VectorXd weighting_partials(const WeightingSpec& w, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& m) {
  check_m(w, x, m);
  Eigen::VectorXd d(x.size());
  for (int i = 0; i < x.size(); ++i) {
    switch (w.kind) {
      case WeightingSpec::Kind::relative_sum:
        d[i] = w.omega(i) / floored_abs_m(m[i], i);
        break;
      case WeightingSpec::Kind::absolute_sum:
        d[i] = w.omega(i);
        break;
      case WeightingSpec::Kind::relative_power: {
        const double mi = floored_abs_m(m[i], i);
        d[i] = w.omega(i) * w.power * std::pow(x[i] / mi, w.power - 1.0) / mi;
        break;
      }
      case WeightingSpec::Kind::sqrt_sum: {
        // Guard the root's infinite slope at zero error.
        const double xi = std::max(x[i], kMinWeight);
        d[i] = w.omega(i) * 0.5 / std::sqrt(xi);
        break;
      }
    }
  }
  return d;
}

Eigen::VectorXd compute_signs(const Eigen::VectorXd& goals_enriched,
                              const Eigen::VectorXd& goals_low) {
  Eigen::VectorXd s(goals_enriched.size());
  for (int i = 0; i < s.size(); ++i)
    s[i] = (goals_enriched[i] - goals_low[i]) < 0.0 ? -1.0 : 1.0;
  return s;
}

CombinedGoal make_combined_goal(const std::vector<GoalSpec>& goals, const WeightingSpec& w,
                                const Eigen::VectorXd& values_enriched,
                                const Eigen::VectorXd& values_low,
                                const Eigen::VectorXd* previous_m) {
  const int n = static_cast<int>(goals.size());
  if (values_enriched.size() != n || values_low.size() != n)
    throw std::invalid_argument("make_combined_goal: size mismatch");
  CombinedGoal cg;
  cg.goals = goals;
  cg.weighting = w;
  cg.values_low = values_low;
  cg.values_enriched = values_enriched;
  cg.signs = compute_signs(values_enriched, values_low);
  if (w.frozen_m && previous_m && previous_m->size() == n)
    cg.m = *previous_m;
  else
    cg.m = values_low.cwiseAbs();
  const Eigen::VectorXd x = (values_enriched - values_low).cwiseAbs();
  const Eigen::VectorXd partials = weighting_partials(w, x, cg.m);
  cg.weights = cg.signs.cwiseProduct(partials);
  return cg;
}

Eigen::VectorXd combined_derivative(const CombinedGoal& cg, const FeFunction& u,
                                    const FeSpace& space) {
  return goal_derivative(cg.functional(), u, space);
}

}  // namespace dwr
