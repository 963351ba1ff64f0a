#include "dwr/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "dwr/assembly.hpp"
#include "dwr/lagrange.hpp"
#include "dwr/quadrature.hpp"

namespace dwr {

namespace {

// Evaluates a function at the tabulated quadrature points of fine cells. The
// function may live on the sweep mesh itself or on its parent mesh (then the
// parent polynomial is evaluated through the child-quadrant shape tables).
class CellView {
 public:
  CellView(const FeFunction& f, bool on_parent, int nq)
      : f_(&f), on_parent_(on_parent), nq_(nq) {}

  void bind(const Mesh& fine_mesh, int fine_cell) {
    int owner = fine_cell;
    if (on_parent_) {
      const Mesh::Cell& fc = fine_mesh.cell(fine_cell);
      owner = fc.parent;
      const Mesh::Cell& pc = fine_mesh.cell(owner);
      const int qx = fc.ix0 == pc.ix0 ? 0 : 1;
      const int qy = fc.iy0 == pc.iy0 ? 0 : 1;
      table_ = &shape_table_child(f_->space().degree(), nq_, qx, qy);
    } else {
      table_ = &shape_table(f_->space().degree(), nq_);
    }
    const BBox box = f_->space().mesh().cell_box(owner);
    hx_ = box.width();
    hy_ = box.height();
    const auto& dofs = f_->space().cell_dofs(owner);
    coeffs_.resize(dofs.size());
    for (std::size_t s = 0; s < dofs.size(); ++s) coeffs_[s] = f_->coeffs()[dofs[s]];
  }

  double value(int q) const {
    double v = 0.0;
    for (int s = 0; s < table_->n_shapes; ++s) v += coeffs_[s] * table_->val(q, s);
    return v;
  }
  void gradient(int q, double& gx, double& gy) const {
    gx = gy = 0.0;
    for (int s = 0; s < table_->n_shapes; ++s) {
      gx += coeffs_[s] * table_->dxi(q, s);
      gy += coeffs_[s] * table_->deta(q, s);
    }
    gx /= hx_;
    gy /= hy_;
  }

 private:
  const FeFunction* f_;
  bool on_parent_;
  int nq_;
  const ShapeTable* table_ = nullptr;
  std::vector<double> coeffs_;
  double hx_ = 1.0, hy_ = 1.0;
};

// Point evaluation at reference coordinates of a fine cell, parent-aware.
double eval_ref(const FeFunction& f, bool on_parent, const Mesh& fine, int fine_cell, double xi,
                double eta, Eigen::Vector2d* grad = nullptr) {
  int owner = fine_cell;
  double pxi = xi, peta = eta;
  if (on_parent) {
    const Mesh::Cell& fc = fine.cell(fine_cell);
    owner = fc.parent;
    const Mesh::Cell& pc = fine.cell(owner);
    pxi = 0.5 * ((fc.ix0 == pc.ix0 ? 0 : 1) + xi);
    peta = 0.5 * ((fc.iy0 == pc.iy0 ? 0 : 1) + eta);
  }
  if (grad) {
    *grad = f.gradient_at_ref(owner, pxi, peta);
    return f.value_at_ref(owner, pxi, peta);
  }
  return f.value_at_ref(owner, pxi, peta);
}

int estimator_quad_points(const EstimatorInput& in) {
  const int d = std::max({in.u_low->space().degree(), in.u_high->space().degree(),
                          in.pu->degree()});
  return d + 2;
}

// Discretization part eta_h with PU localization; fills nodal, eta_p, eta_a.
void assemble_eta_h(const EstimatorInput& in, ErrorBreakdown& out) {
  const ProblemDef& p = *in.problem;
  const GoalFunctional& goal = *in.goal;
  const FeSpace& sp = in.u_low->space();
  const FeSpace& pu = *in.pu;
  const Mesh& mesh = sp.mesh();
  const int nq = estimator_quad_points(in);
  const auto& rule = gauss_rule_2d(nq);
  const auto& t_low = shape_table(sp.degree(), nq);
  const auto& t_pu = shape_table(pu.degree(), nq);

  CellView u_hi(*in.u_high, in.high_on_parent_mesh, nq);
  CellView z_hi(*in.z_high, in.high_on_parent_mesh, nq);

  Eigen::VectorXd nodal_p = Eigen::VectorXd::Zero(pu.n_dofs());
  Eigen::VectorXd nodal_a = Eigen::VectorXd::Zero(pu.n_dofs());
  double direct_p = 0.0, direct_a = 0.0;

  const int nloc = sp.dofs_per_cell();
  const int nloc_pu = pu.dofs_per_cell();
  Eigen::VectorXd local_p(nloc_pu), local_a(nloc_pu);

  for (int c : mesh.active_cells()) {
    const BBox box = mesh.cell_box(c);
    const double hx = box.width(), hy = box.height();
    const auto& dofs = sp.cell_dofs(c);
    const auto& dofs_pu = pu.cell_dofs(c);
    u_hi.bind(mesh, c);
    z_hi.bind(mesh, c);
    local_p.setZero();
    local_a.setZero();

    for (int q = 0; q < rule.size(); ++q) {
      double uv = 0.0, ugx = 0.0, ugy = 0.0, zv = 0.0, zgx = 0.0, zgy = 0.0;
      for (int s = 0; s < nloc; ++s) {
        const double cu = in.u_low->coeffs()[dofs[s]];
        const double cz = in.z_low->coeffs()[dofs[s]];
        uv += cu * t_low.val(q, s);
        ugx += cu * t_low.dxi(q, s);
        ugy += cu * t_low.deta(q, s);
        zv += cz * t_low.val(q, s);
        zgx += cz * t_low.dxi(q, s);
        zgy += cz * t_low.deta(q, s);
      }
      ugx /= hx; ugy /= hy; zgx /= hx; zgy /= hy;

      double uhv = u_hi.value(q), uhgx, uhgy;
      u_hi.gradient(q, uhgx, uhgy);
      double zhv = z_hi.value(q), zhgx, zhgy;
      z_hi.gradient(q, zhgx, zhgy);

      // weights
      const double wz = zhv - zv, wzgx = zhgx - zgx, wzgy = zhgy - zgy;
      const double wu = uhv - uv, wugx = uhgx - ugx, wugy = uhgy - ugy;

      const double gnorm = std::sqrt(ugx * ugx + ugy * ugy);
      const double nu = p.nu(gnorm);
      const double nps = p.nu_prime_over_s(gnorm);
      const Point2 x{box.x0 + rule.xi[q] * hx, box.y0 + rule.eta[q] * hy};
      const double f = p.source(x);
      const double jxw = rule.weights[q] * hx * hy;

      // rho(u)(wz chi) = chi [f wz - nu grad(u).grad(wz)] - wz nu grad(u).grad(chi)
      const double s_q = f * wz - nu * (ugx * wzgx + ugy * wzgy);
      const double tx = nu * ugx, ty = nu * ugy;

      // A'(u)(v, z) with D = nu I + nps grad(u) grad(u)^T:
      //   (D grad(wu)).grad(z) and D grad(z) for the grad(chi) part.
      const double dwu_x = nu * wugx + nps * (ugx * wugx + ugy * wugy) * ugx;
      const double dwu_y = nu * wugy + nps * (ugx * wugx + ugy * wugy) * ugy;
      const double a_q = dwu_x * zgx + dwu_y * zgy;
      const double ex = nu * zgx + nps * (ugx * zgx + ugy * zgy) * ugx;
      const double ey = nu * zgy + nps * (ugx * zgx + ugy * zgy) * ugy;

      // l2 goals contribute 2 w_g int u (wu chi): part of J'(u)(.).
      double l2w = 0.0;
      for (std::size_t g = 0; g < goal.size(); ++g)
        if (goal.goals[g].kind == GoalSpec::Kind::l2_norm_squared)
          l2w += goal.weights[g] * 2.0 * uv;

      for (int i = 0; i < nloc_pu; ++i) {
        const double chi = t_pu.val(q, i);
        const double cgx = t_pu.dxi(q, i) / hx;
        const double cgy = t_pu.deta(q, i) / hy;
        local_p[i] += (chi * s_q - wz * (cgx * tx + cgy * ty)) * jxw;
        local_a[i] +=
            (-(chi * a_q + wu * (cgx * ex + cgy * ey)) + l2w * wu * chi) * jxw;
      }
      direct_p += s_q * jxw;
      direct_a += (-a_q + l2w * wu) * jxw;
    }
    distribute_local_vector(pu, dofs_pu, local_p, nodal_p);
    distribute_local_vector(pu, dofs_pu, local_a, nodal_a);
  }

  // Point-value goals: J'(u)((wu) chi_i) = w_g wu(p) chi_i(p).
  for (std::size_t g = 0; g < goal.size(); ++g) {
    const GoalSpec& gs = goal.goals[g];
    if (gs.kind != GoalSpec::Kind::point_value) continue;
    const int c = mesh.locate(gs.point);
    const BBox box = mesh.cell_box(c);
    const double xi = (gs.point.x - box.x0) / box.width();
    const double eta = (gs.point.y - box.y0) / box.height();
    const double wu = eval_ref(*in.u_high, in.high_on_parent_mesh, mesh, c, xi, eta) -
                      in.u_low->value_at_ref(c, xi, eta);
    std::vector<double> chi;
    shapes_at_point(pu.degree(), xi, eta, chi);
    Eigen::VectorXd local = Eigen::VectorXd::Zero(pu.dofs_per_cell());
    for (int i = 0; i < pu.dofs_per_cell(); ++i) local[i] = goal.weights[g] * wu * chi[i];
    distribute_local_vector(pu, pu.cell_dofs(c), local, nodal_a);
    direct_a += goal.weights[g] * wu;
  }

  // Flux goals: J'(u)((wu) chi_i) = w_g int grad(wu chi_i) . n ds.
  for (std::size_t g = 0; g < goal.size(); ++g) {
    const GoalSpec& gs = goal.goals[g];
    if (gs.kind != GoalSpec::Kind::flux_on_segment) continue;
    const auto& rule1 = gauss_rule_1d(nq);
    std::vector<double> chi, cxi, ceta;
    for (auto [c, e] : mesh.boundary_edges(gs.segment)) {
      const BBox box = mesh.cell_box(c);
      const double len = (e == 0 || e == 2) ? box.width() : box.height();
      Eigen::VectorXd local = Eigen::VectorXd::Zero(pu.dofs_per_cell());
      for (int q = 0; q < nq; ++q) {
        double xi, eta, nx, ny;
        switch (e) {
          case 0: xi = rule1.points[q]; eta = 0.0; nx = 0.0; ny = -1.0; break;
          case 1: xi = 1.0; eta = rule1.points[q]; nx = 1.0; ny = 0.0; break;
          case 2: xi = rule1.points[q]; eta = 1.0; nx = 0.0; ny = 1.0; break;
          default: xi = 0.0; eta = rule1.points[q]; nx = -1.0; ny = 0.0; break;
        }
        Eigen::Vector2d ghi, glo;
        const double vhi = eval_ref(*in.u_high, in.high_on_parent_mesh, mesh, c, xi, eta, &ghi);
        const double vlo = in.u_low->value_at_ref(c, xi, eta);
        glo = in.u_low->gradient_at_ref(c, xi, eta);
        const double wu = vhi - vlo;
        const double wugn = (ghi[0] - glo[0]) * nx + (ghi[1] - glo[1]) * ny;
        shapes_at_point(pu.degree(), xi, eta, chi, &cxi, &ceta);
        const double jxw = rule1.weights[q] * len;
        for (int i = 0; i < pu.dofs_per_cell(); ++i) {
          const double cgn = (cxi[i] / box.width()) * nx + (ceta[i] / box.height()) * ny;
          local[i] += goal.weights[g] * (chi[i] * wugn + wu * cgn) * jxw;
        }
        direct_a += goal.weights[g] * wugn * jxw;
      }
      distribute_local_vector(pu, pu.cell_dofs(c), local, nodal_a);
    }
  }

  out.nodal = 0.5 * (nodal_p + nodal_a);
  out.eta_p = 0.5 * direct_p;
  out.eta_a = 0.5 * direct_a;
  out.eta_h = out.eta_p + out.eta_a;

  std::vector<double> absvals(out.nodal.size());
  for (int i = 0; i < out.nodal.size(); ++i) absvals[i] = std::abs(out.nodal[i]);
  out.indicator_sum = compensated_sum(absvals);
}

}  // namespace

double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double semilinear_form_value(const ProblemDef& p, const FeFunction& u, const FeFunction& w,
                             bool w_on_parent_mesh) {
  const FeSpace& sp = u.space();
  const Mesh& mesh = sp.mesh();
  const int nq = std::max(sp.degree(), w.space().degree()) + 2;
  const auto& rule = gauss_rule_2d(nq);
  const auto& t_u = shape_table(sp.degree(), nq);
  CellView wv(w, w_on_parent_mesh, nq);

  double total = 0.0;
  const int nloc = sp.dofs_per_cell();
  for (int c : mesh.active_cells()) {
    const BBox box = mesh.cell_box(c);
    const double hx = box.width(), hy = box.height();
    const auto& dofs = sp.cell_dofs(c);
    wv.bind(mesh, c);
    for (int q = 0; q < rule.size(); ++q) {
      double ugx = 0.0, ugy = 0.0;
      for (int s = 0; s < nloc; ++s) {
        const double cu = u.coeffs()[dofs[s]];
        ugx += cu * t_u.dxi(q, s);
        ugy += cu * t_u.deta(q, s);
      }
      ugx /= hx;
      ugy /= hy;
      const double nu = p.nu(std::sqrt(ugx * ugx + ugy * ugy));
      const Point2 x{box.x0 + rule.xi[q] * hx, box.y0 + rule.eta[q] * hy};
      double wgx, wgy;
      wv.gradient(q, wgx, wgy);
      total += (nu * (ugx * wgx + ugy * wgy) - p.source(x) * wv.value(q)) * rule.weights[q] * hx * hy;
    }
  }
  return total;
}

std::vector<double> localize_to_elements(const Eigen::VectorXd& nodal, const FeSpace& pu) {
  const Mesh& mesh = pu.mesh();

  // Contributions on constrained (hanging) PU DoFs go to their masters with
  // the constraint weights (the 1/2-1/2 rule for a Q1 PU).
  Eigen::VectorXd merged = nodal;
  for (int d = 0; d < pu.n_dofs(); ++d) {
    const auto& entry = pu.constraints(d);
    if (entry.empty() || merged[d] == 0.0) continue;
    for (const auto& [m, w] : entry) merged[m] += w * merged[d];
    merged[d] = 0.0;
  }

  std::map<int, int> cell_pos;
  const auto& actives = mesh.active_cells();
  for (std::size_t i = 0; i < actives.size(); ++i) cell_pos[actives[i]] = static_cast<int>(i);

  std::vector<double> element(actives.size(), 0.0);
  for (int d = 0; d < pu.n_dofs(); ++d) {
    if (!pu.constraints(d).empty()) continue;
    const double v = std::abs(merged[d]);
    if (v == 0.0) continue;
    const auto& cells = pu.dof_cells(d);
    const int n = static_cast<int>(cells.size());
    const double share = v / n;
    double given = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = (i + 1 == n) ? v - given : share;
      element[cell_pos.at(cells[i])] += s;
      given += share;
    }
  }
  return element;
}

ErrorBreakdown estimate_enriched(const EstimatorInput& in) {
  ErrorBreakdown out;
  assemble_eta_h(in, out);
  out.eta_k = in.eta_k;
  out.eta_total = out.eta_h + out.eta_k;
  out.element = localize_to_elements(out.nodal, *in.pu);
  return out;
}

ErrorBreakdown estimate_interpolation(const EstimatorInput& in) {
  ErrorBreakdown out;
  assemble_eta_h(in, out);
  out.eta_k = in.eta_k;

  const ProblemDef& p = *in.problem;
  const GoalFunctional& goal = *in.goal;
  const FeSpace& sp = in.u_low->space();
  const Mesh& mesh = sp.mesh();
  const int nq = estimator_quad_points(in) + 1;
  const auto& rule = gauss_rule_2d(nq);
  const auto& t_low = shape_table(sp.degree(), nq);

  CellView u_hi(*in.u_high, in.high_on_parent_mesh, nq);
  CellView z_hi(*in.z_high, in.high_on_parent_mesh, nq);
  const int nloc = sp.dofs_per_cell();

  // eta_Iu = A(u_I)((z_I + z)/2),
  // eta_Iz = 1/2 [ J'(u_I)(u_I - u) - A'(u_I)(u_I - u, z_I) ].
  double eta_Iu = 0.0, eta_Iz = 0.0;
  for (int c : mesh.active_cells()) {
    const BBox box = mesh.cell_box(c);
    const double hx = box.width(), hy = box.height();
    const auto& dofs = sp.cell_dofs(c);
    u_hi.bind(mesh, c);
    z_hi.bind(mesh, c);
    for (int q = 0; q < rule.size(); ++q) {
      double uv = 0.0, ugx = 0.0, ugy = 0.0, zv = 0.0, zgx = 0.0, zgy = 0.0;
      for (int s = 0; s < nloc; ++s) {
        const double cu = in.u_low->coeffs()[dofs[s]];
        const double cz = in.z_low->coeffs()[dofs[s]];
        uv += cu * t_low.val(q, s);
        ugx += cu * t_low.dxi(q, s);
        ugy += cu * t_low.deta(q, s);
        zv += cz * t_low.val(q, s);
        zgx += cz * t_low.dxi(q, s);
        zgy += cz * t_low.deta(q, s);
      }
      ugx /= hx; ugy /= hy; zgx /= hx; zgy /= hy;

      double uhv = u_hi.value(q), uhgx, uhgy, zhv = z_hi.value(q), zhgx, zhgy;
      u_hi.gradient(q, uhgx, uhgy);
      z_hi.gradient(q, zhgx, zhgy);

      const Point2 x{box.x0 + rule.xi[q] * hx, box.y0 + rule.eta[q] * hy};
      const double f = p.source(x);
      const double jxw = rule.weights[q] * hx * hy;

      const double ghn = std::sqrt(uhgx * uhgx + uhgy * uhgy);
      const double nu_h = p.nu(ghn);
      const double nps_h = p.nu_prime_over_s(ghn);

      // A(u_I)(w), w = (z_I + z)/2
      const double wv = 0.5 * (zhv + zv);
      const double wgx = 0.5 * (zhgx + zgx), wgy = 0.5 * (zhgy + zgy);
      eta_Iu += (nu_h * (uhgx * wgx + uhgy * wgy) - f * wv) * jxw;

      // A'(u_I)(v, z_I), v = u_I - u
      const double vgx = uhgx - ugx, vgy = uhgy - ugy;
      const double dvx = nu_h * vgx + nps_h * (uhgx * vgx + uhgy * vgy) * uhgx;
      const double dvy = nu_h * vgy + nps_h * (uhgx * vgx + uhgy * vgy) * uhgy;
      eta_Iz -= 0.5 * (dvx * zhgx + dvy * zhgy) * jxw;

      // l2 goals: J'(u_I)(v) = 2 int u_I v
      for (std::size_t g = 0; g < goal.size(); ++g)
        if (goal.goals[g].kind == GoalSpec::Kind::l2_norm_squared)
          eta_Iz += 0.5 * goal.weights[g] * 2.0 * uhv * (uhv - uv) * jxw;
    }
  }

  for (std::size_t g = 0; g < goal.size(); ++g) {
    const GoalSpec& gs = goal.goals[g];
    if (gs.kind == GoalSpec::Kind::point_value) {
      const int c = mesh.locate(gs.point);
      const BBox box = mesh.cell_box(c);
      const double xi = (gs.point.x - box.x0) / box.width();
      const double eta = (gs.point.y - box.y0) / box.height();
      const double v = eval_ref(*in.u_high, in.high_on_parent_mesh, mesh, c, xi, eta) -
                       in.u_low->value_at_ref(c, xi, eta);
      eta_Iz += 0.5 * goal.weights[g] * v;
    } else if (gs.kind == GoalSpec::Kind::flux_on_segment) {
      const auto& rule1 = gauss_rule_1d(nq);
      for (auto [c, e] : mesh.boundary_edges(gs.segment)) {
        const BBox box = mesh.cell_box(c);
        const double len = (e == 0 || e == 2) ? box.width() : box.height();
        for (int q = 0; q < nq; ++q) {
          double xi, eta, nx, ny;
          switch (e) {
            case 0: xi = rule1.points[q]; eta = 0.0; nx = 0.0; ny = -1.0; break;
            case 1: xi = 1.0; eta = rule1.points[q]; nx = 1.0; ny = 0.0; break;
            case 2: xi = rule1.points[q]; eta = 1.0; nx = 0.0; ny = 1.0; break;
            default: xi = 0.0; eta = rule1.points[q]; nx = -1.0; ny = 0.0; break;
          }
          Eigen::Vector2d ghi;
          eval_ref(*in.u_high, in.high_on_parent_mesh, mesh, c, xi, eta, &ghi);
          const Eigen::Vector2d glo = in.u_low->gradient_at_ref(c, xi, eta);
          eta_Iz += 0.5 * goal.weights[g] *
                    ((ghi[0] - glo[0]) * nx + (ghi[1] - glo[1]) * ny) * rule1.weights[q] * len;
        }
      }
    }
  }

  out.eta_Iu = eta_Iu;
  out.eta_Iz = eta_Iz;
  out.eta_total = out.eta_h + out.eta_k + out.eta_Iu + out.eta_Iz;
  out.element = localize_to_elements(out.nodal, *in.pu);
  return out;
}

}  // namespace dwr
