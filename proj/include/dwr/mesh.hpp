#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwr/geometry.hpp"

namespace dwr {

/// Named axis-aligned boundary segment (axis=0: the line x=coord, axis=1: y=coord).
struct BoundarySegment {
  std::string name;
  int axis = 0;
  double coord = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Rectangular domain with an initial nx x ny grid and optional removed boxes
/// (which must align with initial cell boundaries).
struct DomainSpec {
  BBox box{0.0, 0.0, 1.0, 1.0};
  int nx = 1;
  int ny = 1;
  std::vector<BBox> removed_boxes;
  std::vector<BoundarySegment> segments;
};

struct HangingNode {
  int vertex = -1;    // node on the interior of a coarse edge
  int master_a = -1;  // coarse edge endpoints
  int master_b = -1;
};

struct RefineOptions {
  // Expand every split to the full sibling group, keeping the patch
  // structure needed by the interpolation estimator.
  bool sibling_groups = false;
};

/// Hierarchical quadrilateral mesh on an axis-aligned rectangular domain,
/// possibly with rectangular holes. Cells refine 1->4; the one-irregular rule
/// (at most one hanging node per edge) is restored by refining coarse
/// neighbors. Topology uses exact integer coordinates: one level-0 cell spans
/// 2^40 units per direction, so midpoints stay exact through 40 levels.
class Mesh {
 public:
  static constexpr int kLevelBits = 40;
  static constexpr std::int64_t kUnit = std::int64_t(1) << kLevelBits;

  struct Vertex {
    std::int64_t ix = 0, iy = 0;
    double x = 0.0, y = 0.0;
  };

  struct Cell {
    std::array<int, 4> v{-1, -1, -1, -1};  // CCW: (x0,y0),(x1,y0),(x1,y1),(x0,y1)
    std::int64_t ix0 = 0, iy0 = 0, isize = 0;
    int level = 0;
    int parent = -1;
    std::array<int, 4> children{-1, -1, -1, -1};
    bool active = true;
  };

  using RefineOptions = dwr::RefineOptions;

  static Mesh build_grid(const DomainSpec& spec);

  /// New mesh with each marked active cell split 1->4 plus the closure
  /// refinements restoring the one-irregular rule.
  Mesh refine(std::span<const int> marked, RefineOptions opts = RefineOptions()) const;
  Mesh refine_uniform(RefineOptions opts = RefineOptions()) const;

  /// Mesh whose active cells are the parents of this mesh's active cells.
  /// Requires patch structure.
  Mesh parent_mesh() const;
  bool has_patch_structure() const;

  std::vector<HangingNode> hanging_nodes() const;

  const std::vector<int>& active_cells() const { return active_cells_; }
  int n_active_cells() const { return static_cast<int>(active_cells_.size()); }
  const Cell& cell(int c) const { return cells_[c]; }
  const Vertex& vertex(int v) const { return vertices_[v]; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }

  BBox cell_box(int c) const;
  double domain_area() const;
  const DomainSpec& spec() const { return spec_; }

  /// Active cells sharing (part of) the given local edge (0=bottom, 1=right,
  /// 2=top, 3=left). Empty on the domain boundary.
  std::vector<int> active_neighbors(int c, int edge) const;
  bool edge_on_boundary(int c, int edge) const { return active_neighbors(c, edge).empty(); }

  /// Boundary edges of active cells lying on a named segment, as (cell, edge).
  std::vector<std::pair<int, int>> boundary_edges(const std::string& segment_name) const;
  /// All boundary edges of active cells.
  std::vector<std::pair<int, int>> boundary_edges() const;

  /// Active cell containing the point (any containing cell if on an edge).
  /// Throws if the point is outside the domain closure.
  int locate(Point2 p) const;

  /// Physical coordinates of an integer grid point.
  Point2 to_physical(std::int64_t ix, std::int64_t iy) const;

 private:
  using LineKey = std::tuple<int, std::int64_t, int>;  // axis, line, side
  struct EdgeEntry {
    std::int64_t hi = 0;
    int cell = -1;
  };

  void add_to_index(int c);
  void remove_from_index(int c);
  int get_or_create_vertex(std::int64_t ix, std::int64_t iy);
  void split_cell(int c);
  void refine_with_closure(int c, bool sibling_groups);
  void refine_group(int c, bool sibling_groups);
  void rebuild_active_list();
  void edge_interval(int c, int edge, int& axis, std::int64_t& line, int& side,
                     std::int64_t& lo, std::int64_t& hi) const;

  DomainSpec spec_;
  double dx_ = 1.0, dy_ = 1.0;  // level-0 cell size
  std::vector<Vertex> vertices_;
  std::vector<Cell> cells_;
  std::vector<int> active_cells_;
  std::map<std::pair<std::int64_t, std::int64_t>, int> vertex_ids_;
  std::vector<int> grid0_;  // level-0 (i,j) -> cell id or -1 (removed)
  std::map<LineKey, std::map<std::int64_t, EdgeEntry>> edge_index_;
};

}  // namespace dwr
