#include "dwr/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dwr/ode_consistency.hpp"
#include "dwr/vtk.hpp"

namespace dwr {

bool ConfigSection::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

std::vector<std::string> ConfigSection::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw ConfigError("missing key '" + key + "' in section [" + name + "]");
}

std::vector<std::vector<std::string>> ConfigSection::get_all(const std::string& key) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

std::string ConfigSection::get_string(const std::string& key) const {
  const auto v = get(key);
  if (v.empty()) throw ConfigError("empty value for '" + key + "'");
  return v[0];
}

std::string ConfigSection::get_string_or(const std::string& key,
                                         const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

namespace {

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw ConfigError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

}  // namespace

double ConfigSection::get_double(const std::string& key) const { return to_double(get_string(key)); }
double ConfigSection::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
int ConfigSection::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? to_int(get_string(key)) : fallback;
}
bool ConfigSection::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? to_bool(get_string(key)) : fallback;
}

std::vector<ConfigSection> parse_config(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> tokens;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;

    if (tokens[0].front() == '[') {
      std::string name;
      for (const auto& t : tokens) name += t;
      if (name.back() != ']') throw ConfigError("bad section header at line " + std::to_string(lineno));
      sections.push_back({name.substr(1, name.size() - 2), {}});
      continue;
    }
    if (sections.empty()) throw ConfigError("key outside of any section at line " + std::to_string(lineno));
    // key = v1 v2 ...
    auto eq = std::find(tokens.begin(), tokens.end(), "=");
    if (eq == tokens.end()) {
      // allow "key=value" without spaces
      const auto pos = tokens[0].find('=');
      if (pos == std::string::npos)
        throw ConfigError("expected 'key = value' at line " + std::to_string(lineno));
      std::vector<std::string> vals;
      if (pos + 1 < tokens[0].size()) vals.push_back(tokens[0].substr(pos + 1));
      vals.insert(vals.end(), tokens.begin() + 1, tokens.end());
      sections.back().entries.emplace_back(tokens[0].substr(0, pos), vals);
      continue;
    }
    std::string key;
    for (auto it = tokens.begin(); it != eq; ++it) key += *it;
    sections.back().entries.emplace_back(key, std::vector<std::string>(eq + 1, tokens.end()));
  }
  return sections;
}

namespace {

const ConfigSection* find_section(const std::vector<ConfigSection>& sections,
                                  const std::string& name) {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

void check_known_keys(const ConfigSection& s, const std::vector<std::string>& known) {
  for (const auto& [k, v] : s.entries)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown key '" + k + "' in section [" + s.name + "]");
}

GoalSpec parse_goal(const ConfigSection& s) {
  check_known_keys(s, {"kind", "point", "segment", "label"});
  const std::string kind = s.get_string("kind");
  GoalSpec g;
  if (kind == "point") {
    const auto p = s.get("point");
    if (p.size() != 2) throw ConfigError("goal point needs two coordinates");
    g = GoalSpec::point_value({to_double(p[0]), to_double(p[1])});
  } else if (kind == "flux") {
    g = GoalSpec::flux(s.get_string("segment"));
  } else if (kind == "l2") {
    g = GoalSpec::l2_norm_squared();
  } else {
    throw ConfigError("unknown goal kind '" + kind + "'");
  }
  g.label = s.get_string_or("label", kind);
  return g;
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::string& name) {
  const auto sections = parse_config(text);
  ExperimentConfig cfg;
  cfg.name = name;

  for (const auto& s : sections) {
    static const std::vector<std::string> known_sections{
        "experiment", "problem", "goal", "weighting", "loop", "newton", "reference", "output",
        "ode"};
    if (std::find(known_sections.begin(), known_sections.end(), s.name) == known_sections.end())
      throw ConfigError("unknown section [" + s.name + "]");
  }

  if (const auto* s = find_section(sections, "experiment")) {
    check_known_keys(*s, {"kind", "name"});
    const std::string kind = s->get_string_or("kind", "pde");
    if (kind == "pde")
      cfg.kind = ExperimentConfig::Kind::pde;
    else if (kind == "ode")
      cfg.kind = ExperimentConfig::Kind::ode;
    else
      throw ConfigError("unknown experiment kind '" + kind + "'");
    cfg.name = s->get_string_or("name", name);
  }

  if (cfg.kind == ExperimentConfig::Kind::ode) {
    if (const auto* s = find_section(sections, "ode")) {
      check_known_keys(*s, {"u0", "T", "steps"});
      cfg.ode_u0 = s->get_double_or("u0", 1.0);
      cfg.ode_T = s->get_double_or("T", 1.0);
      if (s->has("steps")) {
        cfg.ode_steps.clear();
        for (const auto& t : s->get("steps")) cfg.ode_steps.push_back(to_int(t));
      }
    }
    for (int n : cfg.ode_steps)
      if (n < 1) throw ConfigError("ode steps must be positive");
    return cfg;
  }

  const auto* prob = find_section(sections, "problem");
  if (!prob) throw ConfigError("missing [problem] section");
  check_known_keys(*prob,
                   {"kind", "source", "domain", "subdivisions", "removed_box", "segment",
                    "initial_refines"});
  const std::string pkind = prob->get_string("kind");
  const double source = prob->get_double_or("source", pkind == "poisson" ? -1.0 : 10.0);
  if (pkind == "poisson")
    cfg.problem = ProblemDef::poisson(source);
  else if (pkind == "nonlinear_arctan")
    cfg.problem = ProblemDef::nonlinear(source);
  else
    throw ConfigError("unknown problem kind '" + pkind + "'");

  if (prob->has("domain")) {
    const auto d = prob->get("domain");
    if (d.size() != 4) throw ConfigError("domain needs x0 y0 x1 y1");
    cfg.domain.box = {to_double(d[0]), to_double(d[1]), to_double(d[2]), to_double(d[3])};
  }
  if (prob->has("subdivisions")) {
    const auto d = prob->get("subdivisions");
    if (d.size() != 2) throw ConfigError("subdivisions needs nx ny");
    cfg.domain.nx = to_int(d[0]);
    cfg.domain.ny = to_int(d[1]);
  }
  for (const auto& row : prob->get_all("removed_box")) {
    if (row.size() != 4) throw ConfigError("removed_box needs x0 y0 x1 y1");
    cfg.domain.removed_boxes.push_back(
        {to_double(row[0]), to_double(row[1]), to_double(row[2]), to_double(row[3])});
  }
  for (const auto& row : prob->get_all("segment")) {
    if (row.size() != 5) throw ConfigError("segment needs: name axis coord lo hi");
    BoundarySegment seg;
    seg.name = row[0];
    if (row[1] == "x")
      seg.axis = 0;
    else if (row[1] == "y")
      seg.axis = 1;
    else
      throw ConfigError("segment axis must be x or y");
    seg.coord = to_double(row[2]);
    seg.lo = to_double(row[3]);
    seg.hi = to_double(row[4]);
    cfg.domain.segments.push_back(seg);
  }
  cfg.initial_uniform_refines = prob->get_int_or("initial_refines", 0);

  for (const auto& s : sections)
    if (s.name == "goal") cfg.goals.push_back(parse_goal(s));
  if (cfg.goals.empty()) throw ConfigError("at least one [goal] section is required");
  for (const auto& g : cfg.goals)
    if (g.kind == GoalSpec::Kind::flux_on_segment) {
      bool found = false;
      for (const auto& seg : cfg.domain.segments) found |= seg.name == g.segment;
      if (!found) throw ConfigError("flux goal references unknown segment '" + g.segment + "'");
    }

  if (const auto* s = find_section(sections, "weighting")) {
    check_known_keys(*s, {"kind", "power", "weights", "frozen_m"});
    WeightingSpec w;
    const std::string kind = s->get_string_or("kind", "relative_sum");
    if (kind == "relative_sum")
      w.kind = WeightingSpec::Kind::relative_sum;
    else if (kind == "absolute_sum")
      w.kind = WeightingSpec::Kind::absolute_sum;
    else if (kind == "relative_power")
      w.kind = WeightingSpec::Kind::relative_power;
    else if (kind == "sqrt_sum")
      w.kind = WeightingSpec::Kind::sqrt_sum;
    else
      throw ConfigError("unknown weighting kind '" + kind + "'");
    w.power = s->get_double_or("power", 2.0);
    if (w.kind == WeightingSpec::Kind::relative_power && w.power <= 1.0)
      throw ConfigError("relative_power needs power > 1");
    if (s->has("weights")) {
      const auto row = s->get("weights");
      w.user_weights.resize(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) w.user_weights[i] = to_double(row[i]);
      if (w.user_weights.size() != static_cast<int>(cfg.goals.size()))
        throw ConfigError("weighting weights size mismatch");
    }
    w.frozen_m = s->get_bool_or("frozen_m", false);
    cfg.weighting = w;
  }

  if (const auto* s = find_section(sections, "loop")) {
    check_known_keys(*s, {"primal_degree", "enriched_degree", "pu_degree", "theta", "tol",
                          "max_dofs", "max_steps", "uniform", "estimate", "estimator",
                          "sibling_groups", "allow_equal_degrees"});
    LoopConfig& l = cfg.loop;
    l.primal_degree = s->get_int_or("primal_degree", 1);
    l.enriched_degree = s->get_int_or("enriched_degree", l.primal_degree + 1);
    l.pu_degree = s->get_int_or("pu_degree", 1);
    l.theta = s->get_double_or("theta", 0.5);
    l.tol = s->get_double_or("tol", 0.0);
    l.max_dofs = s->get_int_or("max_dofs", 20000);
    l.max_steps = s->get_int_or("max_steps", 100);
    l.uniform = s->get_bool_or("uniform", false);
    l.estimate = s->get_bool_or("estimate", true);
    const std::string est = s->get_string_or("estimator", "enriched");
    if (est == "enriched")
      l.estimator = LoopConfig::Estimator::enriched;
    else if (est == "interpolation")
      l.estimator = LoopConfig::Estimator::interpolation;
    else
      throw ConfigError("unknown estimator '" + est + "'");
    l.sibling_groups = s->get_bool_or("sibling_groups", false);

    if (l.primal_degree < 1 || l.primal_degree > 4 || l.enriched_degree < 1 ||
        l.enriched_degree > 4 || l.pu_degree < 1 || l.pu_degree > 3)
      throw ConfigError("polynomial degree out of range");
    if (l.theta <= 0.0 || l.theta > 1.0) throw ConfigError("theta must be in (0,1]");
    const bool allow_equal = s->get_bool_or("allow_equal_degrees", false);
    if (l.estimate && l.estimator == LoopConfig::Estimator::enriched &&
        l.enriched_degree <= l.primal_degree && !allow_equal)
      throw ConfigError(
          "enriched degree must exceed the primal degree "
          "(set allow_equal_degrees for the Galerkin-orthogonality demonstration)");
    if (!l.uniform && !l.estimate)
      throw ConfigError("adaptive runs need the estimator (estimate = true)");
  }

  if (const auto* s = find_section(sections, "newton")) {
    check_known_keys(*s, {"atol", "max_iters", "balance_fraction", "check_identity"});
    cfg.loop.newton_atol = s->get_double_or("atol", 1e-10);
    cfg.loop.newton_max_iters = s->get_int_or("max_iters", 30);
    cfg.loop.balance_fraction = s->get_double_or("balance_fraction", 0.0);
    cfg.loop.check_iteration_identity = s->get_bool_or("check_identity", false);
  }

  if (cfg.weighting && cfg.loop.estimator == LoopConfig::Estimator::interpolation)
    throw ConfigError("multigoal runs require the enriched estimator");

  if (const auto* s = find_section(sections, "reference")) {
    check_known_keys(*s, {"value", "values", "provenance"});
    std::vector<std::string> vals;
    if (s->has("value"))
      vals = s->get("value");
    else if (s->has("values"))
      vals = s->get("values");
    if (!vals.empty()) {
      Eigen::VectorXd r(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) r[i] = to_double(vals[i]);
      if (r.size() != static_cast<int>(cfg.goals.size()))
        throw ConfigError("reference size must match the number of goals");
      cfg.reference = r;
    }
    if (s->has("provenance")) {
      std::string prov;
      for (const auto& t : s->get("provenance")) prov += (prov.empty() ? "" : " ") + t;
      cfg.reference_provenance = prov;
    }
  }

  if (const auto* s = find_section(sections, "output")) {
    check_known_keys(*s, {"vtk"});
    cfg.write_vtk = s->get_bool_or("vtk", true);
  }
  return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), std::filesystem::path(path).stem().string());
}

namespace {

void run_ode_experiment(const ExperimentConfig& cfg, const std::string& output_dir, bool quiet) {
  OdeProblem base;
  base.f = [](double, double u) { return -u; };
  base.f_u = [](double, double) { return -1.0; };
  base.u0 = cfg.ode_u0;
  base.T = cfg.ode_T;

  std::ofstream csv(output_dir + "/ode.csv");
  csv << "N,true_error,estimate,weighted_residual,consistency,sum_abs_consistency,I_eff\n";
  char buf[256];
  for (int n : cfg.ode_steps) {
    OdeProblem p = base;
    p.N = n;
    const DgZeroFunction u = backward_euler(p);
    const OdeEstimate est = estimate_ode_error(p, u);
    const double exact = std::exp(-p.T) * p.u0;
    const double err = exact - u.values.back();
    const double ieff = err != 0.0 ? est.estimate / err : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof(buf), "%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", n, err,
                  est.estimate, est.weighted_residual, est.consistency, est.consistency_abs, ieff);
    csv << buf;
    if (!quiet)
      std::printf("N=%5d  err=%+.4e  est=%+.4e  I_eff=%.4f\n", n, err, est.estimate, ieff);
  }
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg,
                                          const std::string& output_dir, bool quiet) {
  std::filesystem::create_directories(output_dir);

  if (cfg.kind == ExperimentConfig::Kind::ode) {
    run_ode_experiment(cfg, output_dir, quiet);
    return {};
  }

  Mesh mesh = Mesh::build_grid(cfg.domain);
  for (int i = 0; i < cfg.initial_uniform_refines; ++i) mesh = mesh.refine_uniform();

  std::vector<MetricsRecord> collected;
  StepCallback cb = [&](const MetricsRecord& r, const Mesh& m, const FeFunction& u,
                        const FeFunction* z, const ErrorBreakdown* bd) {
    collected.push_back(r);
    if (!quiet) {
      std::printf("step %2d  dofs %7d  J %.8e  eta_h %+.4e  err %+.4e  I_eff %.4f\n", r.step,
                  r.dofs, r.J_low, r.eta_h, r.exact_error, r.I_eff);
      std::fflush(stdout);
    }
    if (cfg.write_vtk) {
      char name[64];
      std::snprintf(name, sizeof(name), "/step_%03d.vtk", r.step);
      VtkWriter w;
      w.point_fields.push_back({"u", &u});
      FeFunction nodal_fn;
      if (z) w.point_fields.push_back({"z", z});
      std::vector<double> levels;
      for (int c : m.active_cells()) levels.push_back(m.cell(c).level);
      w.cell_fields.push_back({"level", &levels});
      if (bd) w.cell_fields.push_back({"indicator", &bd->element});
      w.write(m, output_dir + name);
    }
  };

  std::vector<MetricsRecord> records;
  try {
    std::optional<double> ref1;
    if (!cfg.weighting) {
      if (cfg.reference) ref1 = (*cfg.reference)[0];
      records = run_single_goal(cfg.problem, cfg.goals[0], std::move(mesh), cfg.loop, ref1, cb);
    } else {
      records = run_multigoal(cfg.problem, cfg.goals, *cfg.weighting, std::move(mesh), cfg.loop,
                              cfg.reference, cb);
    }
  } catch (...) {
    write_csv(collected, output_dir + "/steps.csv");
    write_table(collected, output_dir + "/table.txt");
    throw;
  }
  write_csv(records, output_dir + "/steps.csv");
  write_table(records, output_dir + "/table.txt");
  return records;
}

}  // namespace dwr
