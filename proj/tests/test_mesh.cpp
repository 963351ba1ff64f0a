#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "dwr/mesh.hpp"

using namespace dwr;

namespace {

DomainSpec unit_square(int n) {
  DomainSpec spec;
  spec.box = {0, 0, 1, 1};
  spec.nx = spec.ny = n;
  return spec;
}

double active_area(const Mesh& m) {
  double a = 0.0;
  for (int c : m.active_cells()) a += m.cell_box(c).area();
  return a;
}

// Brute-force one-irregularity check: each active cell edge may border at
// most two active neighbor sub-edges, via geometric interval overlap.
bool one_irregular(const Mesh& m) {
  for (int c : m.active_cells())
    for (int e = 0; e < 4; ++e)
      if (m.active_neighbors(c, e).size() > 2) return false;
  // cross-check with a quadratic pass over cell pairs
  const auto& act = m.active_cells();
  for (int a : act) {
    const BBox ba = m.cell_box(a);
    int right = 0;
    for (int b : act) {
      if (a == b) continue;
      const BBox bb = m.cell_box(b);
      const bool touch_x = std::abs(bb.x0 - ba.x1) < 1e-14;
      const double lo = std::max(ba.y0, bb.y0), hi = std::min(ba.y1, bb.y1);
      if (touch_x && hi - lo > 1e-14) ++right;
    }
    if (right > 2) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("build_grid basic counts") {
  const Mesh m = Mesh::build_grid(unit_square(2));
  CHECK(m.n_active_cells() == 4);
  CHECK(m.n_vertices() == 9);

  const Mesh one = Mesh::build_grid(unit_square(1));
  CHECK(one.n_active_cells() == 1);
  CHECK(one.n_vertices() == 4);
}

TEST_CASE("build_grid with removed boxes (nonlinear example domain)") {
  DomainSpec spec;
  spec.box = {0, 0, 5, 3};
  spec.nx = 5;
  spec.ny = 3;
  spec.removed_boxes.push_back({1, 1, 2, 2});
  spec.removed_boxes.push_back({3, 1, 4, 2});
  const Mesh m = Mesh::build_grid(spec);
  CHECK(m.n_active_cells() == 13);
  CHECK(active_area(m) == doctest::Approx(13.0).epsilon(1e-12));

  SUBCASE("misaligned removed box is a configuration error") {
    DomainSpec bad = spec;
    bad.removed_boxes.push_back({0.5, 0, 1.5, 1});
    CHECK_THROWS_AS(Mesh::build_grid(bad), std::invalid_argument);
  }
}

TEST_CASE("refine one corner cell of a 2x2 grid") {
  const Mesh m0 = Mesh::build_grid(unit_square(2));
  const Mesh m1 = m0.refine(std::vector<int>{0});
  CHECK(m1.n_active_cells() == 7);
  CHECK(m1.hanging_nodes().size() == 2);
  CHECK(one_irregular(m1));
  CHECK(active_area(m1) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("hanging nodes sit at master-edge midpoints") {
    for (const auto& h : m1.hanging_nodes()) {
      const auto& v = m1.vertex(h.vertex);
      const auto& a = m1.vertex(h.master_a);
      const auto& b = m1.vertex(h.master_b);
      CHECK(v.x == doctest::Approx(0.5 * (a.x + b.x)).epsilon(1e-14));
      CHECK(v.y == doctest::Approx(0.5 * (a.y + b.y)).epsilon(1e-14));
    }
  }
}

TEST_CASE("uniform refinement has no hanging nodes") {
  Mesh m = Mesh::build_grid(unit_square(3));
  m = m.refine_uniform();
  CHECK(m.n_active_cells() == 36);
  CHECK(m.hanging_nodes().empty());
  CHECK(active_area(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closure keeps the mesh one-irregular under repeated marking") {
  Mesh m = Mesh::build_grid(unit_square(2));
  m = m.refine(std::vector<int>{0});
  // twice more on the cell at the origin, forcing closure of the coarse
  // neighbors.
  for (int round = 0; round < 2; ++round) {
    const int c = m.locate({0.01, 0.01});
    m = m.refine(std::vector<int>{c});
    CHECK(one_irregular(m));
  }
  CHECK(active_area(m) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("refining nothing changes nothing (closure idempotence)") {
    const int before = m.n_active_cells();
    const Mesh m2 = m.refine(std::vector<int>{});
    CHECK(m2.n_active_cells() == before);
  }
}

TEST_CASE("refinement monotonicity") {
  Mesh m = Mesh::build_grid(unit_square(2));
  for (int i = 0; i < 4; ++i) {
    const int before = m.n_active_cells();
    m = m.refine(std::vector<int>{m.active_cells()[0]});
    CHECK(m.n_active_cells() > before);
  }
}

TEST_CASE("patch structure and parent mesh") {
  Mesh base = Mesh::build_grid(unit_square(2));
  CHECK_FALSE(base.has_patch_structure());
  Mesh m = base.refine_uniform();
  CHECK(m.has_patch_structure());

  const Mesh parent = m.parent_mesh();
  CHECK(parent.n_active_cells() == 4);

  SUBCASE("sibling-group refinement keeps patches") {
    Mesh::RefineOptions opts;
    opts.sibling_groups = true;
    Mesh r = m.refine(std::vector<int>{m.active_cells()[0]}, opts);
    CHECK(r.has_patch_structure());
    r = r.refine(std::vector<int>{r.active_cells()[5]}, opts);
    CHECK(r.has_patch_structure());
    CHECK(one_irregular(r));
    CHECK(r.parent_mesh().n_active_cells() * 4 == r.n_active_cells());
  }

  SUBCASE("plain marking breaks patches") {
    Mesh r = m.refine(std::vector<int>{m.active_cells()[0]});
    CHECK_FALSE(r.has_patch_structure());
  }
}

TEST_CASE("locate finds containing cells, also on hole boundaries") {
  DomainSpec spec;
  spec.box = {0, 0, 5, 3};
  spec.nx = 5;
  spec.ny = 3;
  spec.removed_boxes.push_back({1, 1, 2, 2});
  const Mesh m = Mesh::build_grid(spec);

  const int c = m.locate({0.2, 0.2});
  CHECK(m.cell_box(c).contains({0.2, 0.2}));
  // on the hole's left edge, the containing cell is to the left
  const int cl = m.locate({1.0, 1.5});
  CHECK(m.cell_box(cl).x1 == doctest::Approx(1.0));
  CHECK_THROWS(m.locate({1.5, 1.5}));   // inside the hole
  CHECK_THROWS(m.locate({-1.0, 0.5}));  // outside
}

TEST_CASE("boundary segments") {
  DomainSpec spec;
  spec.box = {0, 0, 5, 3};
  spec.nx = 5;
  spec.ny = 3;
  spec.segments.push_back({"flux", 0, 0.0, 0.0, 3.0});
  Mesh m = Mesh::build_grid(spec);
  m = m.refine_uniform();
  const auto edges = m.boundary_edges("flux");
  CHECK(edges.size() == 6);  // 3 level-0 rows, refined once
  double len = 0.0;
  for (auto [c, e] : edges) {
    CHECK(e == 3);
    len += m.cell_box(c).height();
  }
  CHECK(len == doctest::Approx(3.0));
}
