#include "dwr/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dwr/lagrange.hpp"

namespace dwr {

namespace {
constexpr std::int64_t kNodeScale = 12;  // lcm of degrees 1..4
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree,
                 std::vector<std::string> dirichlet_markers)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ < 1 || degree_ > 4) throw std::invalid_argument("FeSpace: degree must be in 1..4");
  number_dofs();
  build_constraints();
  build_dirichlet(dirichlet_markers);
}

void FeSpace::number_dofs() {
  const int k = degree_;
  for (int c : mesh_->active_cells()) {
    const Mesh::Cell& cell = mesh_->cell(c);
    std::vector<int>& dofs = cell_dofs_[c];
    dofs.resize(dofs_per_cell());
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= k; ++i) {
        const std::int64_t nx = kNodeScale * cell.ix0 + kNodeScale * cell.isize * i / k;
        const std::int64_t ny = kNodeScale * cell.iy0 + kNodeScale * cell.isize * j / k;
        auto key = std::make_pair(nx, ny);
        auto it = node_ids_.find(key);
        int dof;
        if (it == node_ids_.end()) {
          dof = n_dofs_++;
          node_ids_.emplace(key, dof);
          dof_nodes_.push_back(key);
        } else {
          dof = it->second;
        }
        dofs[j * (k + 1) + i] = dof;
      }
  }
  dof_cells_.resize(n_dofs_);
  for (const auto& [c, dofs] : cell_dofs_)
    for (int d : dofs) dof_cells_[d].push_back(c);
  for (auto& cells : dof_cells_) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  }
}

void FeSpace::build_constraints() {
  const int k = degree_;
  constraints_.assign(n_dofs_, {});

  // Raw constraints from each refined edge, seen from the coarse side.
  for (int c : mesh_->active_cells()) {
    for (int e = 0; e < 4; ++e) {
      const auto nbrs = mesh_->active_neighbors(c, e);
      if (nbrs.size() != 2) continue;

      const Mesh::Cell& coarse = mesh_->cell(c);
      // Edge geometry in node coordinates.
      const bool vertical = (e == 1 || e == 3);
      const std::int64_t line =
          vertical ? kNodeScale * (coarse.ix0 + (e == 1 ? coarse.isize : 0))
                   : kNodeScale * (coarse.iy0 + (e == 2 ? coarse.isize : 0));
      const std::int64_t lo = vertical ? kNodeScale * coarse.iy0 : kNodeScale * coarse.ix0;
      const std::int64_t len = kNodeScale * coarse.isize;

      // Coarse-edge DoFs at parameters j/k.
      std::vector<int> masters(k + 1);
      for (int j = 0; j <= k; ++j) {
        const std::int64_t t = lo + len * j / k;
        masters[j] = node_ids_.at(vertical ? std::make_pair(line, t) : std::make_pair(t, line));
      }

      // Fine-side nodes on the edge line that are not coarse nodes.
      for (int f : nbrs) {
        const Mesh::Cell& fine = mesh_->cell(f);
        const std::int64_t flo = vertical ? kNodeScale * fine.iy0 : kNodeScale * fine.ix0;
        const std::int64_t flen = kNodeScale * fine.isize;
        for (int j = 0; j <= k; ++j) {
          const std::int64_t t = flo + flen * j / k;
          const std::int64_t rel = t - lo;
          if ((rel * k) % len == 0) continue;  // coincides with a coarse node
          const int dof = node_ids_.at(vertical ? std::make_pair(line, t) : std::make_pair(t, line));
          if (!constraints_[dof].empty()) continue;
          const double param = static_cast<double>(rel) / static_cast<double>(len);
          std::vector<std::pair<int, double>> entry;
          for (int m = 0; m <= k; ++m)
            entry.emplace_back(masters[m], lagrange_value(k, m, param));
          constraints_[dof] = std::move(entry);
        }
      }
    }
  }

  // Resolve chains: a master may itself be constrained on a coarser edge.
  for (int pass = 0; pass < 64; ++pass) {
    bool changed = false;
    for (int d = 0; d < n_dofs_; ++d) {
      auto& entry = constraints_[d];
      if (entry.empty()) continue;
      bool has_constrained_master = false;
      for (const auto& [m, w] : entry)
        if (!constraints_[m].empty()) has_constrained_master = true;
      if (!has_constrained_master) continue;
      changed = true;
      std::map<int, double> resolved;
      for (const auto& [m, w] : entry) {
        if (constraints_[m].empty()) {
          resolved[m] += w;
        } else {
          for (const auto& [mm, ww] : constraints_[m]) resolved[mm] += w * ww;
        }
      }
      entry.assign(resolved.begin(), resolved.end());
    }
    if (!changed) break;
    if (pass == 63) throw std::logic_error("constraint chains did not resolve");
  }

  n_constraints_ = 0;
  for (const auto& entry : constraints_)
    if (!entry.empty()) ++n_constraints_;
}

void FeSpace::build_dirichlet(const std::vector<std::string>& markers) {
  dirichlet_.assign(n_dofs_, 0);
  if (markers.empty()) return;

  const bool all = std::find(markers.begin(), markers.end(), "all") != markers.end();
  std::vector<std::pair<int, int>> edges;
  if (all) {
    edges = mesh_->boundary_edges();
  } else {
    for (const auto& name : markers) {
      auto part = mesh_->boundary_edges(name);
      edges.insert(edges.end(), part.begin(), part.end());
    }
  }

  const int k = degree_;
  for (auto [c, e] : edges) {
    const auto& dofs = cell_dofs_.at(c);
    for (int j = 0; j <= k; ++j) {
      int local;
      switch (e) {
        case 0: local = j; break;                        // bottom row
        case 1: local = j * (k + 1) + k; break;          // right column
        case 2: local = k * (k + 1) + j; break;          // top row
        default: local = j * (k + 1); break;             // left column
      }
      dirichlet_[dofs[local]] = 1;
    }
  }
  n_dirichlet_ = 0;
  for (char d : dirichlet_)
    if (d) ++n_dirichlet_;
}

const std::vector<int>& FeSpace::cell_dofs(int cell) const {
  auto it = cell_dofs_.find(cell);
  if (it == cell_dofs_.end()) throw std::invalid_argument("cell_dofs: cell not active");
  return it->second;
}

Point2 FeSpace::dof_point(int dof) const {
  const auto& [nx, ny] = dof_nodes_[dof];
  // Node coordinates are 12x the topological grid; convert exactly.
  const Point2 p0 = mesh_->to_physical(nx / kNodeScale, ny / kNodeScale);
  const std::int64_t rx = nx % kNodeScale, ry = ny % kNodeScale;
  if (rx == 0 && ry == 0) return p0;
  const Point2 p1 = mesh_->to_physical(nx / kNodeScale + 1, ny / kNodeScale + 1);
  return {p0.x + (p1.x - p0.x) * rx / kNodeScale, p0.y + (p1.y - p0.y) * ry / kNodeScale};
}

int FeSpace::dof_at_node(std::int64_t nx12, std::int64_t ny12) const {
  auto it = node_ids_.find({nx12, ny12});
  return it == node_ids_.end() ? -1 : it->second;
}

FeSpace make_pu_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return FeSpace(std::move(mesh), degree, {});
}

}  // namespace dwr
