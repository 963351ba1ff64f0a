#pragma once

#include <string>
#include <vector>

#include "dwr/fe_function.hpp"

namespace dwr {

/// Legacy ASCII VTK writer (unstructured grid, quad cells). Point fields are
/// written through vertex DoF values; cell fields align with active cells.
struct VtkWriter {
  struct PointField {
    std::string name;
    const FeFunction* function;
  };
  struct CellField {
    std::string name;
    const std::vector<double>* values;
  };

  std::vector<PointField> point_fields;
  std::vector<CellField> cell_fields;

  void write(const Mesh& mesh, const std::string& path) const;
};

}  // namespace dwr
