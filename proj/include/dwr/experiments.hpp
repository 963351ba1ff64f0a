#pragma once

#include <span>
#include <string>

namespace dwr {

/// Built-in experiment configurations reproducing the bundled studies.
struct BundledExperiment {
  const char* name;
  const char* description;
  const char* text;
};

std::span<const BundledExperiment> bundled_experiments();
const BundledExperiment* find_bundled(const std::string& name);

}  // namespace dwr
