#include "dwr/assembly.hpp"

#include <vector>

#include "dwr/lagrange.hpp"
#include "dwr/quadrature.hpp"

namespace dwr {

void distribute_local_vector(const FeSpace& space, const std::vector<int>& dofs,
                             const Eigen::VectorXd& local, Eigen::VectorXd& global) {
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const int gi = dofs[i];
    if (space.is_dirichlet(gi)) continue;
    const auto& ci = space.constraints(gi);
    if (ci.empty()) {
      global[gi] += local[i];
    } else {
      for (const auto& [m, w] : ci)
        if (!space.is_dirichlet(m)) global[m] += w * local[i];
    }
  }
}

namespace {

// Row/column expansion of a local matrix contribution into triplets.
void distribute_local_matrix(const FeSpace& space, const std::vector<int>& dofs,
                             const Eigen::MatrixXd& local,
                             std::vector<Eigen::Triplet<double>>& triplets) {
  const auto expand = [&space](int g) {
    static thread_local std::vector<std::pair<int, double>> plain;
    const auto& c = space.constraints(g);
    if (c.empty() && !space.is_dirichlet(g)) {
      plain.assign(1, {g, 1.0});
      return std::span<const std::pair<int, double>>(plain);
    }
    if (space.is_dirichlet(g)) {
      plain.clear();
      return std::span<const std::pair<int, double>>(plain);
    }
    return std::span<const std::pair<int, double>>(c);
  };

  const int n = static_cast<int>(dofs.size());
  for (int i = 0; i < n; ++i) {
    const auto rows = expand(dofs[i]);
    if (rows.empty()) continue;
    // expand() uses a shared scratch buffer, so copy the row expansion.
    const std::vector<std::pair<int, double>> row_entries(rows.begin(), rows.end());
    for (int j = 0; j < n; ++j) {
      const double v = local(i, j);
      if (v == 0.0) continue;
      const auto cols = expand(dofs[j]);
      for (const auto& [ri, rw] : row_entries)
        for (const auto& [cj, cw] : cols) {
          if (space.is_dirichlet(ri) || space.is_dirichlet(cj)) continue;
          triplets.emplace_back(ri, cj, rw * cw * v);
        }
    }
  }
}

struct CellGeometry {
  BBox box;
  double jxw_scale;  // hx*hy
};

}  // namespace

Eigen::VectorXd assemble_residual(const ProblemDef& p, const FeSpace& space, const FeFunction& u) {
  const Mesh& mesh = space.mesh();
  const int nq = quad_points_for(space.degree());
  const auto& table = shape_table(space.degree(), nq);
  const auto& rule = gauss_rule_2d(nq);
  const int nloc = space.dofs_per_cell();

  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs());
  Eigen::VectorXd local(nloc);
  for (int c : mesh.active_cells()) {
    const BBox box = mesh.cell_box(c);
    const double hx = box.width(), hy = box.height();
    const auto& dofs = space.cell_dofs(c);
    local.setZero();
    for (int q = 0; q < table.n_points; ++q) {
      double uval = 0.0, ugx = 0.0, ugy = 0.0;
      for (int s = 0; s < nloc; ++s) {
        const double cs = u.coeffs()[dofs[s]];
        uval += cs * table.val(q, s);
        ugx += cs * table.dxi(q, s);
        ugy += cs * table.deta(q, s);
      }
      ugx /= hx;
      ugy /= hy;
      const double gnorm = std::sqrt(ugx * ugx + ugy * ugy);
      const double nu = p.nu(gnorm);
      const Point2 x{box.x0 + rule.xi[q] * hx, box.y0 + rule.eta[q] * hy};
      const double f = p.source(x);
      const double jxw = rule.weights[q] * hx * hy;
      for (int s = 0; s < nloc; ++s) {
        const double gx = table.dxi(q, s) / hx;
        const double gy = table.deta(q, s) / hy;
        local[s] += (nu * (ugx * gx + ugy * gy) - f * table.val(q, s)) * jxw;
      }
    }
    distribute_local_vector(space, dofs, local, r);
  }
  return r;
}

SparseSystem assemble_jacobian(const ProblemDef& p, const FeSpace& space, const FeFunction& u,
                               bool with_negative_residual_rhs) {
  const Mesh& mesh = space.mesh();
  const int nq = quad_points_for(space.degree());
  const auto& table = shape_table(space.degree(), nq);
  const auto& rule = gauss_rule_2d(nq);
  const int nloc = space.dofs_per_cell();

  SparseSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(space.n_dofs());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_active_cells()) * nloc * nloc);

  Eigen::MatrixXd local(nloc, nloc);
  Eigen::VectorXd local_r(nloc);
  std::vector<double> gx(nloc), gy(nloc);
  for (int c : mesh.active_cells()) {
    const BBox box = mesh.cell_box(c);
    const double hx = box.width(), hy = box.height();
    const auto& dofs = space.cell_dofs(c);
    local.setZero();
    local_r.setZero();
    for (int q = 0; q < table.n_points; ++q) {
      double uval = 0.0, ugx = 0.0, ugy = 0.0;
      for (int s = 0; s < nloc; ++s) {
        const double cs = u.coeffs()[dofs[s]];
        uval += cs * table.val(q, s);
        ugx += cs * table.dxi(q, s);
        ugy += cs * table.deta(q, s);
      }
      ugx /= hx;
      ugy /= hy;
      const double gnorm = std::sqrt(ugx * ugx + ugy * ugy);
      const double nu = p.nu(gnorm);
      const double nps = p.nu_prime_over_s(gnorm);  // nu'(s)/s
      const double jxw = rule.weights[q] * hx * hy;
      for (int s = 0; s < nloc; ++s) {
        gx[s] = table.dxi(q, s) / hx;
        gy[s] = table.deta(q, s) / hy;
      }
      // A'(u)(phi_j, phi_i) with D = nu I + (nu'/s) grad u (grad u)^T.
      for (int i = 0; i < nloc; ++i) {
        for (int j = 0; j < nloc; ++j) {
          const double gij = gx[i] * gx[j] + gy[i] * gy[j];
          const double proj = (ugx * gx[j] + ugy * gy[j]) * (ugx * gx[i] + ugy * gy[i]);
          local(i, j) += (nu * gij + nps * proj) * jxw;
        }
      }
      if (with_negative_residual_rhs) {
        const Point2 x{box.x0 + rule.xi[q] * hx, box.y0 + rule.eta[q] * hy};
        const double f = p.source(x);
        for (int s = 0; s < nloc; ++s)
          local_r[s] += (nu * (ugx * gx[s] + ugy * gy[s]) - f * table.val(q, s)) * jxw;
      }
    }
    distribute_local_matrix(space, dofs, local, triplets);
    if (with_negative_residual_rhs) {
      local_r = -local_r;
      distribute_local_vector(space, dofs, local_r, sys.rhs);
    }
  }

  // Identity rows for Dirichlet and constrained DoFs.
  for (int d = 0; d < space.n_dofs(); ++d)
    if (space.is_dependent(d)) triplets.emplace_back(d, d, 1.0);

  sys.matrix.resize(space.n_dofs(), space.n_dofs());
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

}  // namespace dwr
