#include "dwr/goal.hpp"

#include <stdexcept>

#include "dwr/assembly.hpp"
#include "dwr/lagrange.hpp"
#include "dwr/quadrature.hpp"

namespace dwr {

namespace {

// Reference-space point and outward normal of a boundary edge at parameter t.
void edge_point_normal(int edge, double t, double& xi, double& eta, double& nx, double& ny) {
  switch (edge) {
    case 0: xi = t; eta = 0.0; nx = 0.0; ny = -1.0; break;
    case 1: xi = 1.0; eta = t; nx = 1.0; ny = 0.0; break;
    case 2: xi = t; eta = 1.0; nx = 0.0; ny = 1.0; break;
    default: xi = 0.0; eta = t; nx = -1.0; ny = 0.0; break;
  }
}

}  // namespace

double goal_eval(const GoalSpec& g, const FeFunction& u) {
  const FeSpace& sp = u.space();
  const Mesh& mesh = sp.mesh();
  switch (g.kind) {
    case GoalSpec::Kind::point_value:
      return u.value(g.point);
    case GoalSpec::Kind::flux_on_segment: {
      const int nq = quad_points_for(sp.degree());
      const auto& rule = gauss_rule_1d(nq);
      double flux = 0.0;
      for (auto [c, e] : mesh.boundary_edges(g.segment)) {
        const BBox box = mesh.cell_box(c);
        const double len = (e == 0 || e == 2) ? box.width() : box.height();
        for (int q = 0; q < nq; ++q) {
          double xi, eta, nx, ny;
          edge_point_normal(e, rule.points[q], xi, eta, nx, ny);
          const Eigen::Vector2d grad = u.gradient_at_ref(c, xi, eta);
          flux += rule.weights[q] * len * (grad[0] * nx + grad[1] * ny);
        }
      }
      return flux;
    }
    case GoalSpec::Kind::l2_norm_squared: {
      const int nq = quad_points_for(sp.degree()) + 1;
      const auto& rule = gauss_rule_2d(nq);
      const auto& table = shape_table(sp.degree(), nq);
      double val = 0.0;
      for (int c : mesh.active_cells()) {
        const BBox box = mesh.cell_box(c);
        const auto& dofs = sp.cell_dofs(c);
        for (int q = 0; q < table.n_points; ++q) {
          double uq = 0.0;
          for (int s = 0; s < table.n_shapes; ++s) uq += u.coeffs()[dofs[s]] * table.val(q, s);
          val += rule.weights[q] * box.area() * uq * uq;
        }
      }
      return val;
    }
  }
  throw std::logic_error("goal_eval: unknown kind");
}

Eigen::VectorXd goal_derivative(const GoalSpec& g, const FeFunction& u, const FeSpace& space) {
  const Mesh& mesh = space.mesh();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.n_dofs());
  switch (g.kind) {
    case GoalSpec::Kind::point_value: {
      const int c = mesh.locate(g.point);
      const BBox box = mesh.cell_box(c);
      std::vector<double> phi;
      shapes_at_point(space.degree(), (g.point.x - box.x0) / box.width(),
                      (g.point.y - box.y0) / box.height(), phi);
      Eigen::VectorXd local = Eigen::Map<Eigen::VectorXd>(phi.data(), phi.size());
      distribute_local_vector(space, space.cell_dofs(c), local, rhs);
      break;
    }
    case GoalSpec::Kind::flux_on_segment: {
      const int nq = quad_points_for(space.degree());
      const auto& rule = gauss_rule_1d(nq);
      const int nloc = space.dofs_per_cell();
      std::vector<double> phi, dxi, deta;
      Eigen::VectorXd local(nloc);
      for (auto [c, e] : mesh.boundary_edges(g.segment)) {
        const BBox box = mesh.cell_box(c);
        const double len = (e == 0 || e == 2) ? box.width() : box.height();
        local.setZero();
        for (int q = 0; q < nq; ++q) {
          double xi, eta, nx, ny;
          edge_point_normal(e, rule.points[q], xi, eta, nx, ny);
          shapes_at_point(space.degree(), xi, eta, phi, &dxi, &deta);
          for (int s = 0; s < nloc; ++s) {
            const double gx = dxi[s] / box.width();
            const double gy = deta[s] / box.height();
            local[s] += rule.weights[q] * len * (gx * nx + gy * ny);
          }
        }
        distribute_local_vector(space, space.cell_dofs(c), local, rhs);
      }
      break;
    }
    case GoalSpec::Kind::l2_norm_squared: {
      if (&u.space() != &space)
        throw std::invalid_argument("goal_derivative: l2 goal needs u on the target space");
      const int nq = quad_points_for(space.degree()) + 1;
      const auto& rule = gauss_rule_2d(nq);
      const auto& table = shape_table(space.degree(), nq);
      const int nloc = space.dofs_per_cell();
      Eigen::VectorXd local(nloc);
      for (int c : mesh.active_cells()) {
        const BBox box = mesh.cell_box(c);
        const auto& dofs = space.cell_dofs(c);
        local.setZero();
        for (int q = 0; q < table.n_points; ++q) {
          double uq = 0.0;
          for (int s = 0; s < nloc; ++s) uq += u.coeffs()[dofs[s]] * table.val(q, s);
          for (int s = 0; s < nloc; ++s)
            local[s] += rule.weights[q] * box.area() * 2.0 * uq * table.val(q, s);
        }
        distribute_local_vector(space, dofs, local, rhs);
      }
      break;
    }
  }
  return rhs;
}

double goal_eval(const GoalFunctional& g, const FeFunction& u) {
  double v = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) v += g.weights[i] * goal_eval(g.goals[i], u);
  return v;
}

Eigen::VectorXd goal_derivative(const GoalFunctional& g, const FeFunction& u,
                                const FeSpace& space) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.n_dofs());
  for (std::size_t i = 0; i < g.size(); ++i)
    rhs += g.weights[i] * goal_derivative(g.goals[i], u, space);
  return rhs;
}

}  // namespace dwr
