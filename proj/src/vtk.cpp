#include "dwr/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dwr {

void VtkWriter::write(const Mesh& mesh, const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[128];

  out << "# vtk DataFile Version 3.0\n";
  out << "goaladapt output\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    std::snprintf(buf, sizeof(buf), "%.16g %.16g 0\n", mesh.vertex(v).x, mesh.vertex(v).y);
    out << buf;
  }

  const auto& actives = mesh.active_cells();
  out << "CELLS " << actives.size() << " " << 5 * actives.size() << "\n";
  for (int c : actives) {
    const auto& k = mesh.cell(c);
    out << "4 " << k.v[0] << " " << k.v[1] << " " << k.v[2] << " " << k.v[3] << "\n";
  }
  out << "CELL_TYPES " << actives.size() << "\n";
  for (std::size_t i = 0; i < actives.size(); ++i) out << "9\n";

  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    for (const auto& field : point_fields) {
      out << "SCALARS " << field.name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      const FeSpace& sp = field.function->space();
      for (int v = 0; v < mesh.n_vertices(); ++v) {
        const auto& vert = mesh.vertex(v);
        // Every vertex is a corner of some active cell, hence a Q_k node.
        const int dof = sp.dof_at_node(12 * vert.ix, 12 * vert.iy);
        const double val = dof >= 0 ? field.function->coeffs()[dof] : 0.0;
        std::snprintf(buf, sizeof(buf), "%.16g\n", val);
        out << buf;
      }
    }
  }

  if (!cell_fields.empty()) {
    out << "CELL_DATA " << actives.size() << "\n";
    for (const auto& field : cell_fields) {
      out << "SCALARS " << field.name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (std::size_t i = 0; i < actives.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.16g\n",
                      i < field.values->size() ? (*field.values)[i] : 0.0);
        out << buf;
      }
    }
  }
}

}  // namespace dwr
