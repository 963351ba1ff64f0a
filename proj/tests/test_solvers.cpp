#include <doctest.h>

#include <random>

#include "dwr/goal.hpp"
#include "dwr/solvers.hpp"

using namespace dwr;

namespace {

std::shared_ptr<Mesh> unit_square_mesh(int n) {
  DomainSpec spec;
  spec.box = {0, 0, 1, 1};
  spec.nx = spec.ny = n;
  return std::make_shared<Mesh>(Mesh::build_grid(spec));
}

// The coarse 13-cell grid has no interior Q1 DoFs (every vertex touches the
// outer boundary or a hole); refine twice so the solves have unknowns.
std::shared_ptr<Mesh> example2_mesh() {
  DomainSpec spec;
  spec.box = {0, 0, 5, 3};
  spec.nx = 5;
  spec.ny = 3;
  spec.removed_boxes.push_back({1, 1, 2, 2});
  spec.removed_boxes.push_back({3, 1, 4, 2});
  return std::make_shared<Mesh>(Mesh::build_grid(spec).refine_uniform().refine_uniform());
}

}  // namespace

TEST_CASE("solve_sparse: identity and random SPD round trips") {
  SparseSystem sys;
  sys.matrix.resize(5, 5);
  sys.matrix.setIdentity();
  sys.rhs.resize(5);
  sys.rhs << 1, 2, 3, 4, 5;
  CHECK((solve_sparse(sys) - sys.rhs).norm() == 0.0);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 30;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return unif(rng); });
    Eigen::MatrixXd spd = a.transpose() * a + n * Eigen::MatrixXd::Identity(n, n);
    SparseSystem s;
    s.matrix = spd.sparseView();
    s.rhs = Eigen::VectorXd::NullaryExpr(n, [&]() { return unif(rng); });
    const Eigen::VectorXd x = solve_sparse(s);
    CHECK((s.matrix * x - s.rhs).norm() <= 1e-12 * s.rhs.norm());
    const Eigen::VectorXd xcg = solve_sparse_cg(s);
    CHECK((s.matrix * xcg - s.rhs).norm() <= 1e-10 * s.rhs.norm());
  }
}

TEST_CASE("poisson on the 2x2 grid: hand-eliminated single unknown") {
  const ProblemDef p = ProblemDef::poisson(-1.0);
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(2), 1, std::vector<std::string>{"all"});
  const SparseSystem sys = assemble_jacobian(p, *sp, FeFunction(sp), true);

  int center = -1;
  for (int d = 0; d < sp->n_dofs(); ++d)
    if (!sp->is_dependent(d)) center = d;
  REQUIRE(center >= 0);
  CHECK(sys.matrix.coeff(center, center) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  // load of f = -1: rhs = -residual(0) = int f phi = -1/4
  CHECK(sys.rhs[center] == doctest::Approx(-0.25).epsilon(1e-14));
  const Eigen::VectorXd x = solve_sparse(sys);
  CHECK(x[center] == doctest::Approx(-3.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("newton: poisson converges in exactly one iteration") {
  const ProblemDef p = ProblemDef::poisson();
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(4), 1, std::vector<std::string>{"all"});
  auto [u, rep] = newton_solve(p, sp, FeFunction(sp), StoppingRule{});
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.final_residual <= 1e-10);
}

TEST_CASE("newton: nonlinear arctan problem on the initial mesh") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(example2_mesh(), 1, std::vector<std::string>{"all"});
  auto [u, rep] = newton_solve(p, sp, FeFunction(sp), StoppingRule{1e-10, 15});
  CHECK(rep.converged);
  CHECK(rep.final_residual <= 1e-10);
  CHECK(rep.iterations <= 15);
  // regression: observed iteration count from a cold start
  CHECK(rep.iterations >= 3);

  SUBCASE("residual history decreases after damping engages") {
    for (std::size_t i = 1; i < rep.steps.size(); ++i)
      CHECK(rep.steps[i].residual_norm < rep.steps[i - 1].residual_norm);
  }

  SUBCASE("quadratic contraction near convergence") {
    const auto& s = rep.steps;
    REQUIRE(s.size() >= 3);
    const double r_prev = s[s.size() - 2].residual_norm;
    const double r_last = s[s.size() - 1].residual_norm;
    CHECK(r_last / (r_prev * r_prev) < 1e3);
  }
}

TEST_CASE("eta_k: update identity and convergence behavior") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(example2_mesh(), 1, std::vector<std::string>{"all"});
  const GoalFunctional g = GoalFunctional::single(GoalSpec::point_value({0.2, 0.2}));
  auto deriv = [&](const FeFunction& u) { return goal_derivative(g, u, *sp); };

  auto [u, rep] = newton_solve(p, sp, FeFunction(sp), StoppingRule{1e-10, 20}, deriv, true);
  CHECK(rep.converged);

  SUBCASE("converged iterate has negligible eta_k") {
    const double J = goal_eval(g, u);
    CHECK(std::abs(rep.final_eta_k) <= 1e-10 * std::abs(J) + 1e-14);
  }

  SUBCASE("identity J'(u)(du) = -A(u)(z) holds on every step") {
    for (const auto& s : rep.steps)
      CHECK(s.identity_mismatch <= 1e-8 * (1.0 + std::abs(s.eta_k)));
  }
}

TEST_CASE("newton balancing rule stops earlier than the residual rule") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(example2_mesh(), 1, std::vector<std::string>{"all"});
  const GoalFunctional g = GoalFunctional::single(GoalSpec::point_value({0.2, 0.2}));
  auto deriv = [&](const FeFunction& u) { return goal_derivative(g, u, *sp); };

  StoppingRule strict{1e-12, 30, 0.0, 0.0};
  auto [u_ref, rep_ref] = newton_solve(p, sp, FeFunction(sp), strict, deriv);

  StoppingRule balanced{1e-12, 30, 0.1, 0.05};  // |eta_k| <= 0.1 * 0.05
  auto [u_bal, rep_bal] = newton_solve(p, sp, FeFunction(sp), balanced, deriv);
  CHECK(rep_bal.stopped_by_balancing);
  CHECK(rep_bal.iterations < rep_ref.iterations);
  CHECK(std::abs(rep_bal.final_eta_k) <= 0.1 * 0.05);
}

TEST_CASE("newton failure carries the report") {
  // f grows too fast for the iteration budget of 1
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(example2_mesh(), 1, std::vector<std::string>{"all"});
  try {
    newton_solve(p, sp, FeFunction(sp), StoppingRule{1e-14, 1});
    FAIL("expected NewtonFailure");
  } catch (const NewtonFailure& e) {
    CHECK(e.report.steps.size() >= 1);
    CHECK_FALSE(e.report.converged);
  }
}
