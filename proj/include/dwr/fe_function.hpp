#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "dwr/fe_space.hpp"

namespace dwr {

/// Coefficient vector bound to a space. Coefficients of constrained DoFs are
/// kept consistent with their masters via distribute(); evaluation assumes a
/// distributed vector.
class FeFunction {
 public:
  FeFunction() = default;
  explicit FeFunction(std::shared_ptr<const FeSpace> space)
      : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->n_dofs())) {}
  FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coeffs)
      : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    distribute();
  }

  const FeSpace& space() const { return *space_; }
  std::shared_ptr<const FeSpace> space_ptr() const { return space_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  /// Overwrite constrained coefficients with their master combination.
  void distribute();

  double value(Point2 p) const;
  Eigen::Vector2d gradient(Point2 p) const;

  /// Evaluate at reference coordinates of a given active cell.
  double value_at_ref(int cell, double xi, double eta) const;
  Eigen::Vector2d gradient_at_ref(int cell, double xi, double eta) const;

 private:
  std::shared_ptr<const FeSpace> space_;
  Eigen::VectorXd coeffs_;
};

/// Nodal interpolation of a scalar field.
FeFunction interpolate(std::shared_ptr<const FeSpace> space,
                       const std::function<double(Point2)>& f);

/// Exact nodal transfer onto another space over the same mesh (used to warm
/// start enriched solves). The target degree need not match.
FeFunction inject(const FeFunction& f, std::shared_ptr<const FeSpace> target);

/// Patch interpolation I_h: nodal values of a Q_k function on a mesh with
/// patch structure define a Q_2k function on the parent mesh (the child nodes
/// coincide with the parent's Q_2k nodes). Requires k in {1,2}.
struct PatchInterpolant {
  std::shared_ptr<const Mesh> parent_mesh;
  std::shared_ptr<const FeSpace> space;
  FeFunction function;
};

PatchInterpolant interpolate_patch(const FeFunction& f);
/// Variant reusing an existing parent mesh/space (so primal and adjoint
/// interpolants share one space).
FeFunction interpolate_patch_onto(const FeFunction& f, std::shared_ptr<const FeSpace> parent_space);

}  // namespace dwr
