#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dwr/adapt.hpp"

namespace dwr {

/// Raised for unparseable or invalid configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One parsed section: ordered key -> values (whitespace-separated tokens).
/// Repeated keys append rows (e.g. several removed_box lines).
struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;

  bool has(const std::string& key) const;
  std::vector<std::string> get(const std::string& key) const;  // throws if missing
  std::vector<std::vector<std::string>> get_all(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
};

/// Key/value format with [section] headers; '#' starts a comment. Sections
/// may repeat ([goal] once per goal functional).
std::vector<ConfigSection> parse_config(const std::string& text);

/// A full experiment: either a PDE adaptive run or the ODE consistency study.
struct ExperimentConfig {
  std::string name;
  enum class Kind { pde, ode } kind = Kind::pde;

  // pde
  ProblemDef problem;
  DomainSpec domain;
  int initial_uniform_refines = 0;
  std::vector<GoalSpec> goals;
  std::optional<WeightingSpec> weighting;  // multigoal if set
  LoopConfig loop;
  std::optional<Eigen::VectorXd> reference;
  std::string reference_provenance;
  bool write_vtk = true;

  // ode
  double ode_u0 = 1.0;
  double ode_T = 1.0;
  std::vector<int> ode_steps{64, 128, 256};
};

ExperimentConfig parse_experiment(const std::string& text, const std::string& name);
ExperimentConfig load_experiment_file(const std::string& path);

/// Runs the experiment, writing table.txt, steps.csv and per-step VTK files
/// into output_dir. Returns the records of the (last) run.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg,
                                          const std::string& output_dir, bool quiet);

}  // namespace dwr
