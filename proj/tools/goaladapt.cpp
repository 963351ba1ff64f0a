#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "dwr/config.hpp"
#include "dwr/experiments.hpp"

namespace {

dwr::ExperimentConfig load(const std::string& name_or_path) {
  if (const auto* bundled = dwr::find_bundled(name_or_path))
    return dwr::parse_experiment(bundled->text, bundled->name);
  return dwr::load_experiment_file(name_or_path);
}

int run_one(const std::string& name_or_path, const std::string& output_root, bool quiet) {
  dwr::ExperimentConfig cfg;
  try {
    cfg = load(name_or_path);
  } catch (const dwr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string out = output_root + "/" + cfg.name;
  try {
    if (!quiet) std::printf("== %s -> %s\n", cfg.name.c_str(), out.c_str());
    dwr::run_experiment(cfg, out, quiet);
  } catch (const dwr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int run_batch(const std::vector<std::string>& names, const std::string& output_root, bool quiet,
              int jobs) {
  if (jobs <= 1 || names.size() <= 1) {
    int status = 0;
    for (const auto& n : names) status = std::max(status, run_one(n, output_root, quiet));
    return status;
  }
  // Parallel batch: one child process per experiment, at most `jobs` at once.
  int status = 0;
  std::size_t next = 0;
  int running = 0;
  while (next < names.size() || running > 0) {
    while (running < jobs && next < names.size()) {
      const pid_t pid = fork();
      if (pid < 0) {
        std::cerr << "fork failed\n";
        return 3;
      }
      if (pid == 0) _exit(run_one(names[next], output_root, true));
      ++next;
      ++running;
    }
    int wstatus = 0;
    if (wait(&wstatus) > 0) {
      --running;
      if (WIFEXITED(wstatus)) status = std::max(status, WEXITSTATUS(wstatus));
      else status = std::max(status, 3);
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented adaptive FEM experiments (dual-weighted residual estimators)"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string output_dir = "output";
  bool quiet = false;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run one or more experiments (bundled name or config file)");
  run->add_option("config", configs, "bundled experiment names or config file paths")->required();
  run->add_option("--output-dir", output_dir, "root directory for experiment outputs");
  run->add_flag("--quiet", quiet, "suppress per-step progress output");
  run->add_option("--jobs", jobs, "run this many experiments in parallel processes");

  auto* list = app.add_subcommand("list", "List the bundled experiments");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& e : dwr::bundled_experiments())
      std::printf("%-24s %s\n", e.name, e.description);
    return 0;
  }
  return run_batch(configs, output_dir, quiet, jobs);
}
