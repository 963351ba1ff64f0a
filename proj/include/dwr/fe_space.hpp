#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dwr/mesh.hpp"

namespace dwr {

/// Continuous tensor-product Lagrange space Q_k (k=1..4) on the active cells
/// of a mesh, with hanging-node constraints and Dirichlet bookkeeping.
///
/// Nodes are equispaced, so nodes shared between cells (including a fine-cell
/// node that coincides with a coarse edge node) receive a single DoF keyed by
/// exact integer coordinates. Fine-side nodes on a refined edge that do not
/// coincide with coarse nodes are constrained to the coarse edge's shape
/// functions; hanging nodes therefore carry no degrees of freedom.
class FeSpace {
 public:
  /// The marker set selects Dirichlet boundary parts: "all" = whole boundary,
  /// otherwise named segments from the DomainSpec. Empty = no Dirichlet DoFs
  /// (used by partition-of-unity spaces).
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree,
          std::vector<std::string> dirichlet_markers);

  int n_dofs() const { return n_dofs_; }
  int degree() const { return degree_; }
  int dofs_per_cell() const { return (degree_ + 1) * (degree_ + 1); }
  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  /// Local (lexicographic) -> global DoF map of an active cell.
  const std::vector<int>& cell_dofs(int cell) const;

  bool is_dirichlet(int dof) const { return dirichlet_[dof] != 0; }
  bool is_constrained(int dof) const { return !constraints_[dof].empty(); }
  /// Dirichlet or constrained: no independent unknown.
  bool is_dependent(int dof) const { return is_dirichlet(dof) || is_constrained(dof); }

  /// Resolved constraint chain (masters are never constrained themselves);
  /// weights sum to 1. Empty for unconstrained DoFs.
  const std::vector<std::pair<int, double>>& constraints(int dof) const {
    return constraints_[dof];
  }
  int n_constraints() const { return n_constraints_; }
  int n_dirichlet() const { return n_dirichlet_; }

  Point2 dof_point(int dof) const;
  /// Active cells whose closure supports the DoF, in ascending id order.
  const std::vector<int>& dof_cells(int dof) const { return dof_cells_[dof]; }

  /// Global DoF at exact node coordinates (units of 1/12 of the topological
  /// grid), or -1. Used for exact cross-space nodal transfer.
  int dof_at_node(std::int64_t nx12, std::int64_t ny12) const;

 private:
  void number_dofs();
  void build_constraints();
  void build_dirichlet(const std::vector<std::string>& markers);

  std::shared_ptr<const Mesh> mesh_;
  int degree_ = 1;
  int n_dofs_ = 0;
  int n_constraints_ = 0;
  int n_dirichlet_ = 0;
  std::map<int, std::vector<int>> cell_dofs_;  // active cell id -> dofs
  std::map<std::pair<std::int64_t, std::int64_t>, int> node_ids_;
  std::vector<std::pair<std::int64_t, std::int64_t>> dof_nodes_;
  std::vector<std::vector<std::pair<int, double>>> constraints_;
  std::vector<char> dirichlet_;
  std::vector<std::vector<int>> dof_cells_;
};

/// Q_k space intended as a partition of unity: no Dirichlet elimination, so
/// the constrained basis functions sum to one everywhere.
FeSpace make_pu_space(std::shared_ptr<const Mesh> mesh, int degree);

}  // namespace dwr
