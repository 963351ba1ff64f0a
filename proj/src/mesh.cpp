#include "dwr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwr {

namespace {

// Index of a value on the initial grid; throws on misalignment.
int aligned_index(double v, double origin, double h, int n, const char* what) {
  const double t = (v - origin) / h;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9 * std::max(1.0, std::abs(t)) + 1e-12)
    throw std::invalid_argument(std::string("removed box not aligned with initial grid: ") + what);
  const int i = static_cast<int>(r);
  if (i < 0 || i > n) throw std::invalid_argument(std::string("removed box outside domain: ") + what);
  return i;
}

}  // namespace

Mesh Mesh::build_grid(const DomainSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw std::invalid_argument("build_grid: nx, ny must be >= 1");
  if (spec.box.width() <= 0 || spec.box.height() <= 0)
    throw std::invalid_argument("build_grid: empty bounding box");

  Mesh m;
  m.spec_ = spec;
  m.dx_ = spec.box.width() / spec.nx;
  m.dy_ = spec.box.height() / spec.ny;

  // Mark removed level-0 cells.
  std::vector<char> removed(static_cast<std::size_t>(spec.nx) * spec.ny, 0);
  for (const BBox& b : spec.removed_boxes) {
    const int i0 = aligned_index(b.x0, spec.box.x0, m.dx_, spec.nx, "x0");
    const int i1 = aligned_index(b.x1, spec.box.x0, m.dx_, spec.nx, "x1");
    const int j0 = aligned_index(b.y0, spec.box.y0, m.dy_, spec.ny, "y0");
    const int j1 = aligned_index(b.y1, spec.box.y0, m.dy_, spec.ny, "y1");
    if (i0 >= i1 || j0 >= j1) throw std::invalid_argument("removed box is empty");
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) removed[static_cast<std::size_t>(j) * spec.nx + i] = 1;
  }

  m.grid0_.assign(static_cast<std::size_t>(spec.nx) * spec.ny, -1);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      if (removed[static_cast<std::size_t>(j) * spec.nx + i]) continue;
      Cell c;
      c.ix0 = std::int64_t(i) * kUnit;
      c.iy0 = std::int64_t(j) * kUnit;
      c.isize = kUnit;
      c.level = 0;
      c.v[0] = m.get_or_create_vertex(c.ix0, c.iy0);
      c.v[1] = m.get_or_create_vertex(c.ix0 + kUnit, c.iy0);
      c.v[2] = m.get_or_create_vertex(c.ix0 + kUnit, c.iy0 + kUnit);
      c.v[3] = m.get_or_create_vertex(c.ix0, c.iy0 + kUnit);
      const int id = static_cast<int>(m.cells_.size());
      m.cells_.push_back(c);
      m.grid0_[static_cast<std::size_t>(j) * spec.nx + i] = id;
      m.add_to_index(id);
    }
  if (m.cells_.empty()) throw std::invalid_argument("build_grid: all cells removed");
  m.rebuild_active_list();
  return m;
}

Point2 Mesh::to_physical(std::int64_t ix, std::int64_t iy) const {
  return {spec_.box.x0 + static_cast<double>(ix) / kUnit * dx_,
          spec_.box.y0 + static_cast<double>(iy) / kUnit * dy_};
}

int Mesh::get_or_create_vertex(std::int64_t ix, std::int64_t iy) {
  auto key = std::make_pair(ix, iy);
  auto it = vertex_ids_.find(key);
  if (it != vertex_ids_.end()) return it->second;
  Vertex v;
  v.ix = ix;
  v.iy = iy;
  const Point2 p = to_physical(ix, iy);
  v.x = p.x;
  v.y = p.y;
  const int id = static_cast<int>(vertices_.size());
  vertices_.push_back(v);
  vertex_ids_.emplace(key, id);
  return id;
}

void Mesh::edge_interval(int c, int edge, int& axis, std::int64_t& line, int& side,
                         std::int64_t& lo, std::int64_t& hi) const {
  const Cell& k = cells_[c];
  switch (edge) {
    case 0:  // bottom: on horizontal line y=iy0, cell lies above (side 1)
      axis = 1; line = k.iy0; side = 1; lo = k.ix0; hi = k.ix0 + k.isize; break;
    case 1:  // right: on vertical line x=ix0+isize, cell lies left (side 0)
      axis = 0; line = k.ix0 + k.isize; side = 0; lo = k.iy0; hi = k.iy0 + k.isize; break;
    case 2:  // top
      axis = 1; line = k.iy0 + k.isize; side = 0; lo = k.ix0; hi = k.ix0 + k.isize; break;
    case 3:  // left
      axis = 0; line = k.ix0; side = 1; lo = k.iy0; hi = k.iy0 + k.isize; break;
    default: throw std::logic_error("edge index out of range");
  }
}

void Mesh::add_to_index(int c) {
  for (int e = 0; e < 4; ++e) {
    int axis, side;
    std::int64_t line, lo, hi;
    edge_interval(c, e, axis, line, side, lo, hi);
    edge_index_[{axis, line, side}].emplace(lo, EdgeEntry{hi, c});
  }
}

void Mesh::remove_from_index(int c) {
  for (int e = 0; e < 4; ++e) {
    int axis, side;
    std::int64_t line, lo, hi;
    edge_interval(c, e, axis, line, side, lo, hi);
    auto it = edge_index_.find({axis, line, side});
    if (it != edge_index_.end()) {
      it->second.erase(lo);
      if (it->second.empty()) edge_index_.erase(it);
    }
  }
}

std::vector<int> Mesh::active_neighbors(int c, int edge) const {
  int axis, side;
  std::int64_t line, lo, hi;
  edge_interval(c, edge, axis, line, side, lo, hi);
  std::vector<int> out;
  auto it = edge_index_.find({axis, line, 1 - side});
  if (it == edge_index_.end()) return out;
  const auto& entries = it->second;
  auto jt = entries.lower_bound(lo);
  if (jt != entries.begin()) {
    auto prev = std::prev(jt);
    if (prev->second.hi > lo) out.push_back(prev->second.cell);
  }
  for (; jt != entries.end() && jt->first < hi; ++jt) out.push_back(jt->second.cell);
  return out;
}

void Mesh::split_cell(int c) {
  remove_from_index(c);
  cells_[c].active = false;
  // push_back below may reallocate; copy the parent's data first
  const std::int64_t h = cells_[c].isize / 2;
  const std::int64_t x = cells_[c].ix0, y = cells_[c].iy0;
  const int child_level = cells_[c].level + 1;
  for (int q = 0; q < 4; ++q) {
    const int qx = q % 2, qy = q / 2;
    Cell child;
    child.ix0 = x + qx * h;
    child.iy0 = y + qy * h;
    child.isize = h;
    child.level = child_level;
    child.parent = c;
    child.v[0] = get_or_create_vertex(child.ix0, child.iy0);
    child.v[1] = get_or_create_vertex(child.ix0 + h, child.iy0);
    child.v[2] = get_or_create_vertex(child.ix0 + h, child.iy0 + h);
    child.v[3] = get_or_create_vertex(child.ix0, child.iy0 + h);
    const int id = static_cast<int>(cells_.size());
    cells_.push_back(child);
    cells_[c].children[q] = id;
    add_to_index(id);
  }
}

void Mesh::refine_with_closure(int c, bool sibling_groups) {
  if (!cells_[c].active) return;
  // Coarser neighbors must be split first so no edge ends up with more than
  // one hanging node.
  for (;;) {
    std::vector<int> coarse;
    for (int e = 0; e < 4; ++e)
      for (int n : active_neighbors(c, e))
        if (cells_[n].level < cells_[c].level) coarse.push_back(n);
    if (coarse.empty()) break;
    for (int n : coarse)
      if (cells_[n].active) {
        if (sibling_groups)
          refine_group(n, sibling_groups);
        else
          refine_with_closure(n, sibling_groups);
      }
  }
  if (cells_[c].active) split_cell(c);
}

void Mesh::refine_group(int c, bool sibling_groups) {
  if (!cells_[c].active) return;
  const int parent = cells_[c].parent;
  if (parent < 0) {
    refine_with_closure(c, sibling_groups);
    return;
  }
  for (int sib : cells_[parent].children)
    if (sib >= 0 && cells_[sib].active) refine_with_closure(sib, sibling_groups);
}

Mesh Mesh::refine(std::span<const int> marked, RefineOptions opts) const {
  Mesh m = *this;
  std::vector<int> ids(marked.begin(), marked.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int c : ids) {
    if (c < 0 || c >= m.n_cells()) throw std::invalid_argument("refine: cell id out of range");
    if (!m.cells_[c].active) throw std::invalid_argument("refine: marked cell is not active");
  }
  for (int c : ids) {
    if (!m.cells_[c].active) continue;  // already split by closure
    if (opts.sibling_groups)
      m.refine_group(c, true);
    else
      m.refine_with_closure(c, false);
  }
  m.rebuild_active_list();
  return m;
}

Mesh Mesh::refine_uniform(RefineOptions opts) const { return refine(active_cells_, opts); }

bool Mesh::has_patch_structure() const {
  for (int c : active_cells_) {
    const int p = cells_[c].parent;
    if (p < 0) return false;
    for (int ch : cells_[p].children)
      if (ch < 0 || !cells_[ch].active) return false;
  }
  return !active_cells_.empty();
}

Mesh Mesh::parent_mesh() const {
  if (!has_patch_structure())
    throw std::runtime_error("parent_mesh: mesh has no patch structure");
  Mesh m = *this;
  m.edge_index_.clear();
  std::vector<char> parent_active(m.cells_.size(), 0);
  for (int c : active_cells_) parent_active[cells_[c].parent] = 1;
  for (int c = 0; c < m.n_cells(); ++c) m.cells_[c].active = parent_active[c] != 0;
  for (int c = 0; c < m.n_cells(); ++c)
    if (m.cells_[c].active) m.add_to_index(c);
  m.rebuild_active_list();
  return m;
}

void Mesh::rebuild_active_list() {
  active_cells_.clear();
  for (int c = 0; c < n_cells(); ++c)
    if (cells_[c].active) active_cells_.push_back(c);
}

std::vector<HangingNode> Mesh::hanging_nodes() const {
  std::vector<HangingNode> out;
  for (int c : active_cells_) {
    for (int e = 0; e < 4; ++e) {
      const auto nbrs = active_neighbors(c, e);
      if (nbrs.size() != 2) continue;  // hanging node sits on the coarse side
      int axis, side;
      std::int64_t line, lo, hi;
      edge_interval(c, e, axis, line, side, lo, hi);
      const std::int64_t mid = lo + (hi - lo) / 2;
      std::pair<std::int64_t, std::int64_t> mid_key, a_key, b_key;
      if (axis == 0) {
        mid_key = {line, mid};
        a_key = {line, lo};
        b_key = {line, hi};
      } else {
        mid_key = {mid, line};
        a_key = {lo, line};
        b_key = {hi, line};
      }
      HangingNode h;
      h.vertex = vertex_ids_.at(mid_key);
      h.master_a = vertex_ids_.at(a_key);
      h.master_b = vertex_ids_.at(b_key);
      out.push_back(h);
    }
  }
  std::sort(out.begin(), out.end(), [](const HangingNode& a, const HangingNode& b) {
    return a.vertex < b.vertex;
  });
  return out;
}

BBox Mesh::cell_box(int c) const {
  const Cell& k = cells_[c];
  const Point2 p0 = to_physical(k.ix0, k.iy0);
  const Point2 p1 = to_physical(k.ix0 + k.isize, k.iy0 + k.isize);
  return {p0.x, p0.y, p1.x, p1.y};
}

double Mesh::domain_area() const {
  double removed = 0.0;
  for (const BBox& b : spec_.removed_boxes) removed += b.area();
  return spec_.box.area() - removed;
}

std::vector<std::pair<int, int>> Mesh::boundary_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int c : active_cells_)
    for (int e = 0; e < 4; ++e)
      if (edge_on_boundary(c, e)) out.emplace_back(c, e);
  return out;
}

std::vector<std::pair<int, int>> Mesh::boundary_edges(const std::string& segment_name) const {
  const BoundarySegment* seg = nullptr;
  for (const auto& s : spec_.segments)
    if (s.name == segment_name) seg = &s;
  if (!seg) throw std::invalid_argument("unknown boundary segment: " + segment_name);

  std::vector<std::pair<int, int>> out;
  for (auto [c, e] : boundary_edges()) {
    const BBox box = cell_box(c);
    const double tol = 1e-12 * (std::abs(seg->coord) + box.width() + box.height() + 1.0);
    if (seg->axis == 0) {
      const double x = (e == 3) ? box.x0 : (e == 1 ? box.x1 : std::nan(""));
      if (!(e == 1 || e == 3)) continue;
      if (std::abs(x - seg->coord) > tol) continue;
      if (box.y0 >= seg->lo - tol && box.y1 <= seg->hi + tol) out.emplace_back(c, e);
    } else {
      const double y = (e == 0) ? box.y0 : (e == 2 ? box.y1 : std::nan(""));
      if (!(e == 0 || e == 2)) continue;
      if (std::abs(y - seg->coord) > tol) continue;
      if (box.x0 >= seg->lo - tol && box.x1 <= seg->hi + tol) out.emplace_back(c, e);
    }
  }
  return out;
}

int Mesh::locate(Point2 p) const {
  const BBox& box = spec_.box;
  const double tol = 1e-10 * (1.0 + std::abs(box.width()) + std::abs(box.height()));
  if (!box.contains(p, tol)) throw std::runtime_error("locate: point outside bounding box");

  auto grid_cell = [&](int i, int j) -> int {
    if (i < 0 || i >= spec_.nx || j < 0 || j >= spec_.ny) return -1;
    return grid0_[static_cast<std::size_t>(j) * spec_.nx + i];
  };
  const int i0 = std::clamp(static_cast<int>(std::floor((p.x - box.x0) / dx_)), 0, spec_.nx - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor((p.y - box.y0) / dy_)), 0, spec_.ny - 1);

  int root = -1;
  // The straight index may hit a removed cell when the point sits on a hole
  // boundary; check the up-to-four incident level-0 cells.
  for (int dj = 0; dj >= -1 && root < 0; --dj)
    for (int di = 0; di >= -1 && root < 0; --di) {
      const int c = grid_cell(i0 + di, j0 + dj);
      if (c < 0) continue;
      if (cell_box(c).contains(p, tol)) root = c;
    }
  if (root < 0) throw std::runtime_error("locate: point outside domain");

  int c = root;
  while (!cells_[c].active) {
    const BBox b = cell_box(c);
    const Point2 mid = b.center();
    const int qx = p.x >= mid.x ? 1 : 0;
    const int qy = p.y >= mid.y ? 1 : 0;
    c = cells_[c].children[qy * 2 + qx];
  }
  return c;
}

}  // namespace dwr
