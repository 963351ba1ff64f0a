#include <doctest.h>

#include <random>

#include "dwr/assembly.hpp"
#include "dwr/goal.hpp"
#include "dwr/lagrange.hpp"
#include "dwr/quadrature.hpp"
#include "dwr/solvers.hpp"

using namespace dwr;

namespace {

std::shared_ptr<Mesh> unit_square_mesh(int n) {
  DomainSpec spec;
  spec.box = {0, 0, 1, 1};
  spec.nx = spec.ny = n;
  return std::make_shared<Mesh>(Mesh::build_grid(spec));
}

std::shared_ptr<Mesh> example2_mesh() {
  DomainSpec spec;
  spec.box = {0, 0, 5, 3};
  spec.nx = 5;
  spec.ny = 3;
  spec.removed_boxes.push_back({1, 1, 2, 2});
  spec.removed_boxes.push_back({3, 1, 4, 2});
  spec.segments.push_back({"flux", 0, 0.0, 0.0, 3.0});
  return std::make_shared<Mesh>(Mesh::build_grid(spec));
}

FeFunction solve_problem(const ProblemDef& p, std::shared_ptr<const FeSpace> sp) {
  auto [u, rep] = newton_solve(p, sp, FeFunction(sp), StoppingRule{});
  return u;
}

}  // namespace

TEST_CASE("residual of the discrete solution vanishes") {
  const ProblemDef p = ProblemDef::poisson();
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(4), 1, std::vector<std::string>{"all"});
  const FeFunction u = solve_problem(p, sp);
  CHECK(assemble_residual(p, *sp, u).norm() <= 1e-10);
}

TEST_CASE("nonlinear residual at u = 0 is the negative load") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(2), 1, std::vector<std::string>{});
  const FeFunction zero(sp);
  const Eigen::VectorXd r = assemble_residual(p, *sp, zero);
  // nu(0) grad(0) = 0, so entry j = -int 10 phi_j; the interior vertex of the
  // 2x2 grid carries int phi_j = h^2 = 1/4.
  int checked = 0;
  for (int d = 0; d < sp->n_dofs(); ++d) {
    if (sp->dof_cells(d).size() != 4) continue;
    CHECK(r[d] == doctest::Approx(-2.5).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked == 1);
}

TEST_CASE("single-cell residual agrees with a dense quadrature oracle") {
  const ProblemDef p = ProblemDef::nonlinear(3.0);
  auto mesh = unit_square_mesh(1);
  auto sp = std::make_shared<FeSpace>(mesh, 2, std::vector<std::string>{});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  FeFunction u(sp);
  for (int d = 0; d < sp->n_dofs(); ++d) u.coeffs()[d] = unif(rng);

  const Eigen::VectorXd r = assemble_residual(p, *sp, u);

  // independent oracle: direct evaluation over the same quadrature rule (the
  // oracle checks the assembly path, not the quadrature order)
  const auto& rule = gauss_rule_2d(quad_points_for(2));
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(sp->n_dofs());
  std::vector<double> phi, dxi, deta;
  for (int q = 0; q < rule.size(); ++q) {
    const double xi = rule.xi[q], eta = rule.eta[q];
    shapes_at_point(2, xi, eta, phi, &dxi, &deta);
    const Eigen::Vector2d g = u.gradient_at_ref(0, xi, eta);
    const double nu = p.nu(g.norm());
    for (int s = 0; s < sp->dofs_per_cell(); ++s)
      oracle[sp->cell_dofs(0)[s]] +=
          rule.weights[q] * (nu * (g[0] * dxi[s] + g[1] * deta[s]) - 3.0 * phi[s]);
  }
  CHECK((r - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
}

TEST_CASE("poisson jacobian is independent of the state") {
  const ProblemDef p = ProblemDef::poisson();
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(2), 1, std::vector<std::string>{"all"});
  FeFunction a(sp), b(sp);
  b.coeffs().setConstant(0.7);
  b.distribute();
  const SparseSystem sa = assemble_jacobian(p, *sp, a);
  const SparseSystem sb = assemble_jacobian(p, *sp, b);
  CHECK((Eigen::MatrixXd(sa.matrix) - Eigen::MatrixXd(sb.matrix)).norm() == 0.0);
}

TEST_CASE("nonlinear jacobian matches finite differences of the residual") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(example2_mesh(), 1, std::vector<std::string>{"all"});
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  FeFunction u(sp);
  for (int d = 0; d < sp->n_dofs(); ++d)
    if (!sp->is_dependent(d)) u.coeffs()[d] = unif(rng);
  u.distribute();

  const SparseSystem sys = assemble_jacobian(p, *sp, u);
  const double eps = 1e-7;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sp->n_dofs());
    for (int d = 0; d < sp->n_dofs(); ++d)
      if (!sp->is_dependent(d)) v[d] = unif(rng);
    FeFunction up(sp);
    up.coeffs() = u.coeffs() + eps * v;
    up.distribute();
    const Eigen::VectorXd fd =
        (assemble_residual(p, *sp, up) - assemble_residual(p, *sp, u)) / eps;
    const Eigen::VectorXd jv = sys.matrix * v;
    CHECK((fd - jv).norm() <= 1e-6 * jv.norm());
  }
}

TEST_CASE("at grad u = 0 the nonlinear jacobian is twice the poisson stiffness") {
  const ProblemDef nl = ProblemDef::nonlinear(10.0);
  const ProblemDef po = ProblemDef::poisson();
  auto sp = std::make_shared<FeSpace>(unit_square_mesh(3), 2, std::vector<std::string>{"all"});
  const FeFunction zero(sp);
  const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_jacobian(nl, *sp, zero).matrix);
  const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_jacobian(po, *sp, zero).matrix);
  // identity rows for dependent DoFs stay 1 in both, so compare off those
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      if (sp->is_dependent(i) || sp->is_dependent(j)) continue;
      CHECK(a(i, j) == doctest::Approx(2.0 * k(i, j)).epsilon(1e-15));
    }
}

TEST_CASE("jacobians are symmetric") {
  const ProblemDef p = ProblemDef::nonlinear(10.0);
  auto sp = std::make_shared<FeSpace>(
      std::make_shared<Mesh>(example2_mesh()->refine(std::vector<int>{0, 3})), 1,
      std::vector<std::string>{"all"});
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  FeFunction u(sp);
  for (int d = 0; d < sp->n_dofs(); ++d)
    if (!sp->is_dependent(d)) u.coeffs()[d] = unif(rng);
  u.distribute();
  const Eigen::SparseMatrix<double> m = assemble_jacobian(p, *sp, u).matrix;
  const Eigen::SparseMatrix<double> mt = m.transpose();
  CHECK((Eigen::MatrixXd(m) - Eigen::MatrixXd(mt)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("residual entries of dependent dofs vanish after condensation") {
  const ProblemDef p = ProblemDef::poisson();
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(2)->refine(std::vector<int>{0}));
  auto sp = std::make_shared<FeSpace>(mesh, 2, std::vector<std::string>{"all"});
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  FeFunction u(sp);
  for (int d = 0; d < sp->n_dofs(); ++d)
    if (!sp->is_dependent(d)) u.coeffs()[d] = unif(rng);
  u.distribute();
  const Eigen::VectorXd r = assemble_residual(p, *sp, u);
  for (int d = 0; d < sp->n_dofs(); ++d)
    if (sp->is_dependent(d)) CHECK(r[d] == 0.0);
}

TEST_CASE("goal evaluation") {
  auto mesh = example2_mesh();
  auto sp = std::make_shared<FeSpace>(mesh, 1, std::vector<std::string>{});

  SUBCASE("point value of an interpolated linear") {
    const FeFunction f = interpolate(sp, [](Point2 p) { return p.x + p.y; });
    CHECK(goal_eval(GoalSpec::point_value({0.5, 0.5}), f) == doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("flux of g = x through the left boundary of length 3") {
    const FeFunction f = interpolate(sp, [](Point2 p) { return p.x; });
    CHECK(goal_eval(GoalSpec::flux("flux"), f) == doctest::Approx(-3.0).epsilon(1e-13));
  }

  SUBCASE("squared L2 norm of a constant on the unit square") {
    auto usp = std::make_shared<FeSpace>(unit_square_mesh(2), 1, std::vector<std::string>{});
    FeFunction f(usp);
    f.coeffs().setConstant(0.75);
    CHECK(goal_eval(GoalSpec::l2_norm_squared(), f) == doctest::Approx(0.5625).epsilon(1e-13));
  }
}

TEST_CASE("goal derivatives") {
  auto mesh = unit_square_mesh(4);
  auto sp = std::make_shared<FeSpace>(mesh, 1, std::vector<std::string>{"all"});

  SUBCASE("point goal: shape function values, partition of unity at the point") {
    const GoalSpec g = GoalSpec::point_value({0.31, 0.42});
    FeFunction u(sp);
    const Eigen::VectorXd rhs = goal_derivative(g, u, *sp);
    double sum = 0.0;
    for (int d = 0; d < sp->n_dofs(); ++d) sum += rhs[d];
    // interior point: its cell's Q1 shapes sum to 1 (no Dirichlet dof involved)
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("l2 goal derivative at zero is zero") {
    const FeFunction zero(sp);
    CHECK(goal_derivative(GoalSpec::l2_norm_squared(), zero, *sp).norm() == 0.0);
  }

  SUBCASE("l2 goal directional derivative matches finite differences") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    FeFunction u(sp);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sp->n_dofs());
    for (int d = 0; d < sp->n_dofs(); ++d)
      if (!sp->is_dependent(d)) {
        u.coeffs()[d] = unif(rng);
        v[d] = unif(rng);
      }
    u.distribute();
    const GoalSpec g = GoalSpec::l2_norm_squared();
    const double eps = 1e-6;
    FeFunction up(sp), um(sp);
    up.coeffs() = u.coeffs() + eps * v;
    um.coeffs() = u.coeffs() - eps * v;
    up.distribute();
    um.distribute();
    const double fd = (goal_eval(g, up) - goal_eval(g, um)) / (2 * eps);
    const double dd = goal_derivative(g, u, *sp).dot(v);
    CHECK(fd == doctest::Approx(dd).epsilon(1e-6));
  }
}
