#include <doctest.h>

#include <random>

#include "dwr/fe_function.hpp"
#include "dwr/lagrange.hpp"
#include "dwr/quadrature.hpp"

using namespace dwr;

namespace {

std::shared_ptr<Mesh> unit_square_mesh(int n) {
  DomainSpec spec;
  spec.box = {0, 0, 1, 1};
  spec.nx = spec.ny = n;
  return std::make_shared<Mesh>(Mesh::build_grid(spec));
}

int count_interior(const FeSpace& sp) {
  int n = 0;
  for (int d = 0; d < sp.n_dofs(); ++d)
    if (!sp.is_dependent(d)) ++n;
  return n;
}

}  // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    const auto& r = gauss_rule_1d(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double integral = 0.0;
      for (int q = 0; q < n; ++q) integral += r.weights[q] * std::pow(r.points[q], p);
      CHECK(integral == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("lagrange basis: partition of unity and nodal property") {
  for (int k = 1; k <= 6; ++k) {
    for (double x : {0.0, 0.17, 0.5, 0.93, 1.0}) {
      double sum = 0.0, dsum = 0.0;
      for (int i = 0; i <= k; ++i) {
        sum += lagrange_value(k, i, x);
        dsum += lagrange_derivative(k, i, x);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dsum == doctest::Approx(0.0).epsilon(1e-10));
    }
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j)
        CHECK(lagrange_value(k, i, static_cast<double>(j) / k) ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
  }
}

TEST_CASE("dof counts on the 2x2 unit square") {
  auto mesh = unit_square_mesh(2);
  const FeSpace q1(mesh, 1, {"all"});
  CHECK(q1.n_dofs() == 9);
  CHECK(count_interior(q1) == 1);

  const FeSpace q2(mesh, 2, {"all"});
  CHECK(q2.n_dofs() == 25);
  CHECK(count_interior(q2) == 9);

  CHECK_THROWS(FeSpace(mesh, 0, {"all"}));
  CHECK_THROWS(FeSpace(mesh, 5, {"all"}));
}

TEST_CASE("hanging-node constraints for Q1 are midpoint averages") {
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(2)->refine(std::vector<int>{0}));
  REQUIRE(mesh->n_active_cells() == 7);
  const FeSpace sp(mesh, 1, {"all"});
  CHECK(sp.n_constraints() == 2);
  int checked = 0;
  for (int d = 0; d < sp.n_dofs(); ++d) {
    const auto& entry = sp.constraints(d);
    if (entry.empty()) continue;
    CHECK(entry.size() == 2);
    double wsum = 0.0;
    for (const auto& [m, w] : entry) {
      CHECK(w == doctest::Approx(0.5));
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    ++checked;
  }
  CHECK(checked == 2);
}

TEST_CASE("constraint weights sum to one for higher degrees") {
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(2)->refine(std::vector<int>{0}));
  for (int k : {2, 3, 4}) {
    const FeSpace sp(mesh, k, {"all"});
    CHECK(sp.n_constraints() == 2 * k);  // k constrained fine nodes per hanging edge
    for (int d = 0; d < sp.n_dofs(); ++d) {
      const auto& entry = sp.constraints(d);
      if (entry.empty()) continue;
      double wsum = 0.0;
      for (const auto& [m, w] : entry) {
        wsum += w;
        CHECK(sp.constraints(m).empty());  // masters resolved
      }
      CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("global continuity across hanging edges") {
  // Deeper, staircase-like refinement with constraint chains.
  Mesh m = Mesh::build_grid({{0, 0, 1, 1}, 2, 2, {}, {}});
  m = m.refine(std::vector<int>{0});
  m = m.refine(std::vector<int>{m.locate({0.01, 0.01})});
  m = m.refine(std::vector<int>{m.locate({0.01, 0.01})});
  auto mesh = std::make_shared<Mesh>(std::move(m));

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k : {1, 2, 3}) {
    auto sp = std::make_shared<FeSpace>(mesh, k, std::vector<std::string>{});
    FeFunction f(sp);
    for (int d = 0; d < sp->n_dofs(); ++d) f.coeffs()[d] = unif(rng);
    f.distribute();
    // continuity at many random points along interior edges of the fine region
    for (int t = 0; t < 50; ++t) {
      const double y = unif(rng);
      const Point2 p{0.5, y};  // vertical line with refinement on the left
      const int cl = mesh->locate({0.5 - 1e-9, y});
      const int cr = mesh->locate({0.5 + 1e-9, y});
      const BBox bl = mesh->cell_box(cl), br = mesh->cell_box(cr);
      const double vl = f.value_at_ref(cl, (p.x - bl.x0) / bl.width(), (p.y - bl.y0) / bl.height());
      const double vr = f.value_at_ref(cr, (p.x - br.x0) / br.width(), (p.y - br.y0) / br.height());
      CHECK(vl == doctest::Approx(vr).epsilon(1e-11));
    }
  }
}

TEST_CASE("polynomial reproduction of Q_k interpolation") {
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(3)->refine(std::vector<int>{1}));
  for (int k = 1; k <= 4; ++k) {
    auto sp = std::make_shared<FeSpace>(mesh, k, std::vector<std::string>{});
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k; ++b) {
        const auto mono = [a, b](Point2 p) { return std::pow(p.x, a) * std::pow(p.y, b); };
        const FeFunction f = interpolate(sp, mono);
        for (const Point2 p : {Point2{0.31, 0.77}, Point2{0.5, 0.5}, Point2{0.99, 0.01}})
          CHECK(f.value(p) == doctest::Approx(mono(p)).epsilon(1e-12));
      }
  }
}

TEST_CASE("evaluation: linear reproduction, gradients, vertex continuity") {
  auto mesh = unit_square_mesh(2);
  auto q1 = std::make_shared<FeSpace>(mesh, 1, std::vector<std::string>{});
  const FeFunction f = interpolate(q1, [](Point2 p) { return p.x + p.y; });
  CHECK(f.value({0.37, 0.21}) == doctest::Approx(0.58).epsilon(1e-14));

  auto q2 = std::make_shared<FeSpace>(mesh, 2, std::vector<std::string>{});
  const FeFunction g = interpolate(q2, [](Point2 p) { return p.x * p.x; });
  const auto grad = g.gradient({0.5, 0.5});
  CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grad[1] == doctest::Approx(0.0).epsilon(1e-12));

  // same value from all four adjacent cells at the shared vertex
  std::vector<double> vals;
  for (int c : mesh->active_cells()) {
    const BBox b = mesh->cell_box(c);
    if (b.contains({0.5, 0.5}, 1e-12))
      vals.push_back(f.value_at_ref(c, (0.5 - b.x0) / b.width(), (0.5 - b.y0) / b.height()));
  }
  REQUIRE(vals.size() == 4);
  for (double v : vals) CHECK(v == doctest::Approx(vals[0]).epsilon(1e-14));
}

TEST_CASE("constraint application is idempotent") {
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(2)->refine(std::vector<int>{0}));
  auto sp = std::make_shared<FeSpace>(mesh, 2, std::vector<std::string>{});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  FeFunction f(sp);
  for (int d = 0; d < sp->n_dofs(); ++d) f.coeffs()[d] = unif(rng);
  f.distribute();
  const Eigen::VectorXd once = f.coeffs();
  f.distribute();
  CHECK((f.coeffs() - once).norm() == 0.0);
}

TEST_CASE("partition of unity space") {
  auto mesh0 = unit_square_mesh(2);
  auto pu0 = std::make_shared<FeSpace>(make_pu_space(mesh0, 1));
  CHECK(pu0->n_dofs() == 9);
  CHECK(pu0->n_dirichlet() == 0);

  // on a hanging mesh the constrained basis still sums to one
  auto mesh = std::make_shared<Mesh>(mesh0->refine(std::vector<int>{0}));
  for (int deg : {1, 2, 3}) {
    auto pu = std::make_shared<FeSpace>(make_pu_space(mesh, deg));
    FeFunction ones(pu);
    ones.coeffs().setOnes();  // unconstrained coefficients all 1
    ones.distribute();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      const Point2 p{unif(rng), unif(rng)};
      CHECK(ones.value(p) == doctest::Approx(1.0).epsilon(1e-13));
    }
    // in particular at the hanging node itself
    for (const auto& h : mesh->hanging_nodes()) {
      const auto& v = mesh->vertex(h.vertex);
      CHECK(ones.value({v.x, v.y}) == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("interior dof count of Q_k on uniform full-Dirichlet grids") {
  for (int n : {2, 3, 4})
    for (int k = 1; k <= 3; ++k) {
      auto mesh = unit_square_mesh(n);
      const FeSpace sp(mesh, k, {"all"});
      CHECK(count_interior(sp) == (n * k - 1) * (n * k - 1));
    }
}

TEST_CASE("patch interpolation") {
  auto coarse = unit_square_mesh(2);
  auto mesh = std::make_shared<Mesh>(coarse->refine_uniform());
  auto sp = std::make_shared<FeSpace>(mesh, 1, std::vector<std::string>{});

  SUBCASE("reproduces Q2 polynomials from Q1 nodal data") {
    const auto q = [](Point2 p) { return p.x * p.x + p.x * p.y; };
    const FeFunction f = interpolate(sp, q);
    const PatchInterpolant ih = interpolate_patch(f);
    for (const Point2 p : {Point2{0.1, 0.9}, Point2{0.66, 0.33}, Point2{0.5, 0.25}})
      CHECK(ih.function.value(p) == doctest::Approx(q(p)).epsilon(1e-12));
  }

  SUBCASE("linear functions are reproduced pointwise") {
    const FeFunction f = interpolate(sp, [](Point2 p) { return 2.0 * p.x - p.y + 0.25; });
    const PatchInterpolant ih = interpolate_patch(f);
    for (const Point2 p : {Point2{0.2, 0.8}, Point2{0.77, 0.13}})
      CHECK(ih.function.value(p) == doctest::Approx(f.value(p)).epsilon(1e-12));
  }

  SUBCASE("requires patch structure") {
    auto broken = std::make_shared<Mesh>(mesh->refine(std::vector<int>{mesh->active_cells()[0]}));
    auto sp2 = std::make_shared<FeSpace>(broken, 1, std::vector<std::string>{});
    FeFunction f(sp2);
    CHECK_THROWS(interpolate_patch(f));
  }
}
