#include "dwr/fe_function.hpp"

#include <stdexcept>

#include "dwr/lagrange.hpp"

namespace dwr {

void FeFunction::distribute() {
  const FeSpace& sp = *space_;
  for (int d = 0; d < sp.n_dofs(); ++d) {
    const auto& entry = sp.constraints(d);
    if (entry.empty()) continue;
    double v = 0.0;
    for (const auto& [m, w] : entry) v += w * coeffs_[m];
    coeffs_[d] = v;
  }
}

double FeFunction::value_at_ref(int cell, double xi, double eta) const {
  const FeSpace& sp = *space_;
  std::vector<double> phi;
  shapes_at_point(sp.degree(), xi, eta, phi);
  const auto& dofs = sp.cell_dofs(cell);
  double v = 0.0;
  for (std::size_t s = 0; s < dofs.size(); ++s) v += coeffs_[dofs[s]] * phi[s];
  return v;
}

Eigen::Vector2d FeFunction::gradient_at_ref(int cell, double xi, double eta) const {
  const FeSpace& sp = *space_;
  std::vector<double> phi, dxi, deta;
  shapes_at_point(sp.degree(), xi, eta, phi, &dxi, &deta);
  const auto& dofs = sp.cell_dofs(cell);
  const BBox box = sp.mesh().cell_box(cell);
  Eigen::Vector2d g(0.0, 0.0);
  for (std::size_t s = 0; s < dofs.size(); ++s) {
    g[0] += coeffs_[dofs[s]] * dxi[s];
    g[1] += coeffs_[dofs[s]] * deta[s];
  }
  g[0] /= box.width();
  g[1] /= box.height();
  return g;
}

double FeFunction::value(Point2 p) const {
  const int cell = space_->mesh().locate(p);
  const BBox box = space_->mesh().cell_box(cell);
  return value_at_ref(cell, (p.x - box.x0) / box.width(), (p.y - box.y0) / box.height());
}

Eigen::Vector2d FeFunction::gradient(Point2 p) const {
  const int cell = space_->mesh().locate(p);
  const BBox box = space_->mesh().cell_box(cell);
  return gradient_at_ref(cell, (p.x - box.x0) / box.width(), (p.y - box.y0) / box.height());
}

FeFunction interpolate(std::shared_ptr<const FeSpace> space,
                       const std::function<double(Point2)>& f) {
  FeFunction out(space);
  for (int d = 0; d < space->n_dofs(); ++d) out.coeffs()[d] = f(space->dof_point(d));
  out.distribute();
  return out;
}

FeFunction inject(const FeFunction& f, std::shared_ptr<const FeSpace> target) {
  if (&f.space().mesh() != &target->mesh() &&
      f.space().mesh().n_cells() != target->mesh().n_cells())
    throw std::invalid_argument("inject: spaces must live on the same mesh");
  FeFunction out(target);
  const int k = target->degree();
  for (int c : target->mesh().active_cells()) {
    const auto& dofs = target->cell_dofs(c);
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= k; ++i)
        out.coeffs()[dofs[j * (k + 1) + i]] =
            f.value_at_ref(c, static_cast<double>(i) / k, static_cast<double>(j) / k);
  }
  out.distribute();
  return out;
}

FeFunction interpolate_patch_onto(const FeFunction& f,
                                  std::shared_ptr<const FeSpace> parent_space) {
  const FeSpace& low = f.space();
  const int k = low.degree();
  if (k != 1 && k != 2)
    throw std::invalid_argument("interpolate_patch: base degree must be 1 or 2");
  if (parent_space->degree() != 2 * k)
    throw std::invalid_argument("interpolate_patch: parent space degree must be 2k");

  const Mesh& fine = low.mesh();
  FeFunction out(parent_space);
  const int K = 2 * k;
  for (int pc : parent_space->mesh().active_cells()) {
    const auto& dofs = parent_space->cell_dofs(pc);
    const auto& children = fine.cell(pc).children;
    for (int j = 0; j <= K; ++j)
      for (int i = 0; i <= K; ++i) {
        // Parent node (i/2k, j/2k) lies in child quadrant (qx,qy) at the
        // child's own Q_k node grid.
        const int qx = i < k ? 0 : (i > k ? 1 : 0);
        const int qy = j < k ? 0 : (j > k ? 1 : 0);
        const int child = children[qy * 2 + qx];
        const double xi = static_cast<double>(i - qx * k) / k;
        const double eta = static_cast<double>(j - qy * k) / k;
        out.coeffs()[dofs[j * (K + 1) + i]] = f.value_at_ref(child, xi, eta);
      }
  }
  out.distribute();
  return out;
}

PatchInterpolant interpolate_patch(const FeFunction& f) {
  const Mesh& fine = f.space().mesh();
  if (!fine.has_patch_structure())
    throw std::runtime_error("interpolate_patch: mesh has no patch structure");
  PatchInterpolant out;
  out.parent_mesh = std::make_shared<Mesh>(fine.parent_mesh());
  out.space = std::make_shared<FeSpace>(out.parent_mesh, 2 * f.space().degree(),
                                        std::vector<std::string>{});
  out.function = interpolate_patch_onto(f, out.space);
  return out;
}

}  // namespace dwr
