#include "dwr/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace dwr {

std::vector<int> doerfler_mark(const std::vector<double>& indicators, double theta) {
  if (theta <= 0.0 || theta > 1.0) throw std::invalid_argument("doerfler_mark: theta in (0,1]");
  double total = 0.0;
  for (double v : indicators) {
    if (v < 0.0) throw std::invalid_argument("doerfler_mark: negative indicator");
    total += v;
  }
  if (total == 0.0) return {};

  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
    return a < b;
  });

  std::vector<int> marked;
  double acc = 0.0;
  const double target = theta * total;
  for (int idx : order) {
    if (indicators[idx] == 0.0) break;
    marked.push_back(idx);
    acc += indicators[idx];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

void fill_indices(MetricsRecord& r) {
  if (std::isfinite(r.exact_error) && r.exact_error != 0.0) {
    r.I_eff = r.eta_h / r.exact_error;
    r.I_eff_p = r.eta_p / r.exact_error;
    r.I_eff_a = r.eta_a / r.exact_error;
    r.I_ind = r.indicator_sum / std::abs(r.exact_error);
  }
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(y[i]) || y[i] == 0.0) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// Shared engine behind run_single_goal and run_multigoal.
struct LoopDriver {
  const ProblemDef& problem;
  std::vector<GoalSpec> goals;
  std::optional<WeightingSpec> weighting;  // multigoal if set
  LoopConfig cfg;
  std::optional<Eigen::VectorXd> reference;  // per-goal reference values
  const StepCallback& callback;

  std::vector<MetricsRecord> run(Mesh mesh0);

 private:
  Eigen::VectorXd eval_goals(const FeFunction& u) const {
    Eigen::VectorXd v(goals.size());
    for (std::size_t i = 0; i < goals.size(); ++i) v[i] = goal_eval(goals[i], u);
    return v;
  }
};

std::vector<MetricsRecord> LoopDriver::run(Mesh mesh_in) {
  std::vector<MetricsRecord> records;
  auto mesh = std::make_shared<Mesh>(std::move(mesh_in));
  const bool multigoal = weighting.has_value();
  const std::vector<std::string> dirichlet{"all"};

  FeFunction prev_u_high;  // previous-step solutions for warm starts
  FeFunction prev_u_low;
  Eigen::VectorXd frozen_m;

  for (int step = 0; step < cfg.max_steps; ++step) {
    auto primal_space = std::make_shared<const FeSpace>(mesh, cfg.primal_degree, dirichlet);
    if (primal_space->n_dofs() > cfg.max_dofs) break;

    MetricsRecord rec;
    rec.step = step;
    rec.dofs = primal_space->n_dofs();
    rec.cells = mesh->n_active_cells();

    const bool patch_ok = mesh->has_patch_structure();
    const bool want_interpolation = cfg.estimator == LoopConfig::Estimator::interpolation;
    const bool use_interpolation = want_interpolation && patch_ok;
    rec.interpolation_fallback = want_interpolation && !patch_ok;
    const bool need_enriched = cfg.estimate && !use_interpolation;

    StoppingRule plain{cfg.newton_atol, cfg.newton_max_iters, 0.0, 0.0};

    // --- enriched primal (Algorithm 3 solves it first) -----------------
    std::shared_ptr<const FeSpace> enriched_space;
    FeFunction u_high, z_high;
    if (need_enriched || multigoal) {
      enriched_space = std::make_shared<const FeSpace>(mesh, cfg.enriched_degree, dirichlet);
      FeFunction u0(enriched_space);
      if (prev_u_high.coeffs().size() > 0) {
        for (int d = 0; d < enriched_space->n_dofs(); ++d)
          if (!enriched_space->is_dirichlet(d))
            u0.coeffs()[d] = prev_u_high.value(enriched_space->dof_point(d));
        u0.distribute();
      }
      auto [ue, rep] = newton_solve(problem, enriched_space, std::move(u0), plain);
      u_high = std::move(ue);
    }

    // --- low-order primal ----------------------------------------------
    Eigen::VectorXd values_high;
    if (u_high.coeffs().size() > 0) values_high = eval_goals(u_high);

    // The functional of this step: fixed weight 1 for a single goal, the
    // sign-approximated combined functional for multigoal.
    auto functional_at = [&](const FeFunction& u) -> GoalFunctional {
      if (!multigoal) return GoalFunctional{goals, {1.0}};
      CombinedGoal cg = make_combined_goal(goals, *weighting, values_high, eval_goals(u),
                                           frozen_m.size() ? &frozen_m : nullptr);
      return cg.functional();
    };

    StoppingRule low_rule = plain;
    low_rule.balance_fraction = cfg.balance_fraction;
    if (!records.empty()) low_rule.eta_h_reference = records.back().eta_h;

    std::function<Eigen::VectorXd(const FeFunction&)> deriv_provider;
    if (cfg.estimate || cfg.balance_fraction > 0.0 || cfg.check_iteration_identity)
      deriv_provider = [&](const FeFunction& u) {
        return goal_derivative(functional_at(u), u, *primal_space);
      };

    FeFunction u_low0(primal_space);
    if (!cfg.check_iteration_identity) {
      if (u_high.coeffs().size() > 0)
        u_low0 = inject(u_high, primal_space);
      else if (prev_u_low.coeffs().size() > 0) {
        for (int d = 0; d < primal_space->n_dofs(); ++d)
          if (!primal_space->is_dirichlet(d))
            u_low0.coeffs()[d] = prev_u_low.value(primal_space->dof_point(d));
        u_low0.distribute();
      }
    }

    FeFunction z_low;
    GoalFunctional step_functional;
    auto low_final = [&](const FeFunction& u, const LinearSolveFn& solve) {
      step_functional = functional_at(u);
      Eigen::VectorXd rhs = goal_derivative(step_functional, u, *primal_space);
      z_low = FeFunction(primal_space, solve(rhs));
    };

    FeFunction u_low;
    NewtonReport rep_low;
    try {
      auto [ul, rep] = newton_solve(problem, primal_space, std::move(u_low0), low_rule,
                                    deriv_provider, cfg.check_iteration_identity, low_final);
      u_low = std::move(ul);
      rep_low = std::move(rep);
    } catch (const NewtonFailure&) {
      records.push_back(rec);  // partial record, then propagate
      throw;
    }
    rec.newton_iterations = rep_low.iterations;
    rec.stopped_by_balancing = rep_low.stopped_by_balancing;
    for (const auto& s : rep_low.steps)
      rec.newton_identity_max =
          std::max(rec.newton_identity_max, s.identity_mismatch / (1.0 + std::abs(s.eta_k)));

    const Eigen::VectorXd values_low = eval_goals(u_low);
    rec.goal_values.assign(values_low.data(), values_low.data() + values_low.size());
    rec.J_low = multigoal ? 0.0 : values_low[0];
    if (values_high.size() > 0) rec.J_high = multigoal ? 0.0 : values_high[0];
    if (multigoal && weighting->frozen_m && frozen_m.size() == 0)
      frozen_m = values_low.cwiseAbs();

    // Exact errors against the reference values.
    if (reference) {
      rec.goal_errors.resize(goals.size());
      for (std::size_t i = 0; i < goals.size(); ++i)
        rec.goal_errors[i] = (*reference)[i] - values_low[i];
      if (!multigoal) {
        rec.exact_error = rec.goal_errors[0];
      } else {
        double e = 0.0;
        for (std::size_t i = 0; i < goals.size(); ++i)
          e += step_functional.weights[i] * rec.goal_errors[i];
        rec.exact_error = e;
      }
    }

    // --- adjoints and the error estimator -------------------------------
    ErrorBreakdown breakdown;
    FeFunction z_for_output;
    if (cfg.estimate) {
      // eta_k via the update identity (sign: eta_total = eta_h + eta_k).
      const double eta_k_update = -rep_low.final_eta_k;
      const Eigen::VectorXd residual_low = assemble_residual(problem, *primal_space, u_low);
      const double eta_k_direct = residual_low.dot(z_low.coeffs());
      rec.eta_k_cross_check = std::abs(-rep_low.final_eta_k - eta_k_direct) /
                              (1.0 + std::abs(eta_k_direct));

      auto pu_space = std::make_shared<const FeSpace>(mesh, cfg.pu_degree,
                                                      std::vector<std::string>{});
      EstimatorInput in;
      in.problem = &problem;
      in.goal = &step_functional;
      in.u_low = &u_low;
      in.z_low = &z_low;
      in.pu = pu_space.get();
      in.eta_k = eta_k_update;

      std::shared_ptr<const FeSpace> parent_space;  // keep interpolants alive
      std::shared_ptr<const Mesh> parent_mesh;
      FeFunction iu, iz;
      if (use_interpolation) {
        parent_mesh = std::make_shared<const Mesh>(mesh->parent_mesh());
        parent_space = std::make_shared<const FeSpace>(parent_mesh, 2 * cfg.primal_degree,
                                                       std::vector<std::string>{});
        iu = interpolate_patch_onto(u_low, parent_space);
        iz = interpolate_patch_onto(z_low, parent_space);
        in.u_high = &iu;
        in.z_high = &iz;
        in.high_on_parent_mesh = true;
        breakdown = estimate_interpolation(in);
      } else {
        // Enriched adjoint, linearized around the enriched primal.
        SparseSystem sys = assemble_jacobian(problem, *enriched_space, u_high);
        Eigen::VectorXd rhs = goal_derivative(step_functional, u_high, *enriched_space);
        SparseSystem adj{std::move(sys.matrix), std::move(rhs)};
        z_high = FeFunction(enriched_space, solve_sparse(adj));
        in.u_high = &u_high;
        in.z_high = &z_high;
        breakdown = estimate_enriched(in);
      }
      breakdown.interpolation_fallback = rec.interpolation_fallback;

      rec.eta_p = breakdown.eta_p;
      rec.eta_a = breakdown.eta_a;
      rec.eta_h = breakdown.eta_h;
      rec.eta_k = breakdown.eta_k;
      rec.eta_Iu = breakdown.eta_Iu;
      rec.eta_Iz = breakdown.eta_Iz;
      rec.eta_total = breakdown.eta_total;
      rec.indicator_sum = breakdown.indicator_sum;
      z_for_output = z_low;
    }

    fill_indices(rec);
    records.push_back(rec);
    if (callback)
      callback(rec, *mesh, u_low, z_for_output.coeffs().size() ? &z_for_output : nullptr,
               cfg.estimate ? &breakdown : nullptr);

    // --- termination and refinement --------------------------------------
    if (cfg.estimate) {
      const double zero_scale = 1e-11 * (1.0 + std::abs(goal_eval(step_functional, u_low)));
      if (std::abs(rec.eta_h) <= zero_scale && rec.indicator_sum <= zero_scale) break;
      if (cfg.tol > 0.0 && std::abs(rec.eta_h) <= 1e-2 * cfg.tol) break;
    }
    if (step + 1 >= cfg.max_steps) break;

    Mesh::RefineOptions ropt;
    ropt.sibling_groups = cfg.sibling_groups;
    if (cfg.uniform) {
      mesh = std::make_shared<Mesh>(mesh->refine_uniform(ropt));
    } else {
      const auto marked_pos = doerfler_mark(breakdown.element, cfg.theta);
      if (marked_pos.empty()) break;
      std::vector<int> marked;
      marked.reserve(marked_pos.size());
      for (int pos : marked_pos) marked.push_back(mesh->active_cells()[pos]);
      mesh = std::make_shared<Mesh>(mesh->refine(marked, ropt));
    }
    prev_u_high = u_high;
    prev_u_low = u_low;
  }
  return records;
}

}  // namespace

std::vector<MetricsRecord> run_single_goal(const ProblemDef& p, const GoalSpec& goal, Mesh mesh0,
                                           const LoopConfig& cfg, std::optional<double> reference,
                                           const StepCallback& callback) {
  std::optional<Eigen::VectorXd> ref;
  if (reference) {
    ref = Eigen::VectorXd(1);
    (*ref)[0] = *reference;
  }
  LoopDriver driver{p, {goal}, std::nullopt, cfg, ref, callback};
  return driver.run(std::move(mesh0));
}

std::vector<MetricsRecord> run_multigoal(const ProblemDef& p, const std::vector<GoalSpec>& goals,
                                         const WeightingSpec& weighting, Mesh mesh0,
                                         const LoopConfig& cfg,
                                         const std::optional<Eigen::VectorXd>& reference,
                                         const StepCallback& callback) {
  if (cfg.estimator == LoopConfig::Estimator::interpolation)
    throw std::invalid_argument("multigoal adaptivity requires the enriched estimator");
  LoopDriver driver{p, goals, weighting, cfg, reference, callback};
  return driver.run(std::move(mesh0));
}

namespace {

std::string fmt(double v) {
  char buf[32];
  if (std::isnan(v)) return "nan";
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

}  // namespace

void write_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  std::size_t n_goals = 0;
  for (const auto& r : records) n_goals = std::max(n_goals, r.goal_values.size());
  out << "step,dofs,cells,exact_err,eta_p,eta_a,eta_h,eta_k,eta_Iu,eta_Iz,eta_total,"
         "indicator_sum,I_eff,I_eff_p,I_eff_a,I_ind,newton_iters";
  for (std::size_t g = 0; g < n_goals; ++g)
    out << ",goal" << g + 1 << "_value,goal" << g + 1 << "_error";
  out << "\n";
  for (const auto& r : records) {
    out << r.step << "," << r.dofs << "," << r.cells << "," << fmt(r.exact_error) << ","
        << fmt(r.eta_p) << "," << fmt(r.eta_a) << "," << fmt(r.eta_h) << "," << fmt(r.eta_k)
        << "," << fmt(r.eta_Iu) << "," << fmt(r.eta_Iz) << "," << fmt(r.eta_total) << ","
        << fmt(r.indicator_sum) << "," << fmt(r.I_eff) << "," << fmt(r.I_eff_p) << ","
        << fmt(r.I_eff_a) << "," << fmt(r.I_ind) << "," << r.newton_iterations;
    for (std::size_t g = 0; g < n_goals; ++g) {
      out << "," << (g < r.goal_values.size() ? fmt(r.goal_values[g]) : "");
      out << "," << (g < r.goal_errors.size() ? fmt(r.goal_errors[g]) : "");
    }
    out << "\n";
  }
}

void write_table(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[256];
  out << "================================================================================\n";
  out << "Dofs    Exact err       Est err         Est ind         Eff             Ind\n";
  out << "--------------------------------------------------------------------------------\n";
  for (const auto& r : records) {
    const double eff = std::isnan(r.I_eff) ? 0.0 : std::abs(r.I_eff);
    const double ind = std::isnan(r.I_ind) ? 0.0 : r.I_ind;
    std::snprintf(buf, sizeof(buf), "%-7d %-15.2e %-15.2e %-15.2e %-15.2e %-15.2e\n", r.dofs,
                  std::abs(r.exact_error), std::abs(r.eta_h), r.indicator_sum, eff, ind);
    out << buf;
  }
  out << "================================================================================\n";
}

}  // namespace dwr
