#pragma once

#include <functional>
#include <optional>

#include "dwr/estimator.hpp"
#include "dwr/multigoal.hpp"
#include "dwr/solvers.hpp"

namespace dwr {

/// Configuration of the adaptive loop (Algorithms: enriched, interpolation,
/// multigoal).
struct LoopConfig {
  int primal_degree = 1;
  int enriched_degree = 2;
  int pu_degree = 1;
  double theta = 0.5;  // Dörfler fraction
  double tol = 0.0;    // loop stops once |eta_h| <= 1e-2 * tol
  int max_dofs = 20000;
  int max_steps = 100;
  bool uniform = false;
  bool estimate = true;  // uniform studies may skip the estimator

  enum class Estimator { enriched, interpolation };
  Estimator estimator = Estimator::enriched;
  bool sibling_groups = false;  // patch-preserving refinement

  double newton_atol = 1e-10;
  int newton_max_iters = 30;
  double balance_fraction = 0.0;        // eta_k balancing stopping rule
  bool check_iteration_identity = false;
};

struct MetricsRecord {
  int step = 0;
  int dofs = 0;   // primal space DoFs
  int cells = 0;  // active cells
  double J_low = std::numeric_limits<double>::quiet_NaN();
  double J_high = std::numeric_limits<double>::quiet_NaN();
  double exact_error = std::numeric_limits<double>::quiet_NaN();
  double eta_p = 0.0, eta_a = 0.0, eta_h = 0.0, eta_k = 0.0;
  double eta_Iu = 0.0, eta_Iz = 0.0, eta_total = 0.0;
  double indicator_sum = 0.0;
  double I_eff = std::numeric_limits<double>::quiet_NaN();
  double I_eff_p = std::numeric_limits<double>::quiet_NaN();
  double I_eff_a = std::numeric_limits<double>::quiet_NaN();
  double I_ind = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> goal_values;  // J_i(u~)
  std::vector<double> goal_errors;  // J_i(ref) - J_i(u~)
  int newton_iterations = 0;
  double newton_identity_max = 0.0;   // max |J'(du) + A(u)(z)| / (1 + |J'(du)|)
  double eta_k_cross_check = 0.0;     // update identity vs direct -A(u)(z)
  bool interpolation_fallback = false;
  bool stopped_by_balancing = false;
};

/// Greedy Dörfler marking: the minimal set (by descending indicator, ties by
/// index) whose sum reaches theta * total. Returns indices into `indicators`;
/// empty when all indicators vanish.
std::vector<int> doerfler_mark(const std::vector<double>& indicators, double theta);

/// Derived quality indices; exact_error == 0 leaves the indices NaN.
void fill_indices(MetricsRecord& r);

using StepCallback = std::function<void(const MetricsRecord&, const Mesh&, const FeFunction& u,
                                        const FeFunction* z, const ErrorBreakdown*)>;

std::vector<MetricsRecord> run_single_goal(const ProblemDef& p, const GoalSpec& goal, Mesh mesh0,
                                           const LoopConfig& cfg,
                                           std::optional<double> reference = {},
                                           const StepCallback& callback = nullptr);

/// Multigoal loop (enriched estimator only): the enriched primal is solved
/// before the low-order primal, the combined functional is built from the
/// step values with the sign approximation, and adaptivity is driven by the
/// combined indicators.
std::vector<MetricsRecord> run_multigoal(const ProblemDef& p, const std::vector<GoalSpec>& goals,
                                         const WeightingSpec& weighting, Mesh mesh0,
                                         const LoopConfig& cfg,
                                         const std::optional<Eigen::VectorXd>& reference = {},
                                         const StepCallback& callback = nullptr);

/// Least-squares slope of log|y| vs log(x), skipping non-finite or zero
/// entries. Used for convergence-order checks.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_csv(const std::vector<MetricsRecord>& records, const std::string& path);
void write_table(const std::vector<MetricsRecord>& records, const std::string& path);

}  // namespace dwr
