#include <doctest.h>

#include <set>

#include "dwr/config.hpp"
#include "dwr/experiments.hpp"

using namespace dwr;

TEST_CASE("config parser basics") {
  const std::string text = R"(
# comment
[problem]
kind = poisson
domain = 0 0 1 1
subdivisions = 4 4

[goal]
kind = point
point = 0.5 0.5
)";
  const auto cfg = parse_experiment(text, "t");
  CHECK(cfg.kind == ExperimentConfig::Kind::pde);
  CHECK(cfg.goals.size() == 1);
  CHECK(cfg.domain.nx == 4);
  CHECK(cfg.loop.primal_degree == 1);
  CHECK(cfg.loop.enriched_degree == 2);
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_experiment("[problem]\nkind = nope\n[goal]\nkind = l2\n", "x"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment("kind = poisson\n", "x"), ConfigError);
  CHECK_THROWS_AS(parse_experiment("[problem]\nkind = poisson\n", "x"), ConfigError);  // no goal
  CHECK_THROWS_AS(parse_experiment("[nonsense]\nfoo = 1\n", "x"), ConfigError);
  CHECK_THROWS_AS(
      parse_experiment("[problem]\nkind = poisson\nbogus_key = 1\n[goal]\nkind = l2\n", "x"),
      ConfigError);
  // flux goal without the segment defined
  CHECK_THROWS_AS(parse_experiment(R"(
[problem]
kind = poisson
[goal]
kind = flux
segment = gamma
)",
                                   "x"),
                  ConfigError);
  // equal degrees without the explicit opt-in
  CHECK_THROWS_AS(parse_experiment(R"(
[problem]
kind = poisson
[goal]
kind = l2
[loop]
primal_degree = 2
enriched_degree = 2
)",
                                   "x"),
                  ConfigError);
  // multigoal with the interpolation estimator
  CHECK_THROWS_AS(parse_experiment(R"(
[problem]
kind = poisson
[goal]
kind = l2
[goal]
kind = point
point = 0.5 0.5
[weighting]
kind = relative_sum
[loop]
estimator = interpolation
)",
                                   "x"),
                  ConfigError);
}

TEST_CASE("bundled experiment catalog") {
  const auto list = bundled_experiments();
  CHECK(list.size() >= 12);

  std::set<std::string> names;
  for (const auto& e : list) names.insert(e.name);
  CHECK(names.size() == list.size());  // unique

  for (const auto& e : list) {
    INFO("config: " << e.name);
    CHECK_NOTHROW(parse_experiment(e.text, e.name));
  }

  CHECK(find_bundled("example1_comp2") != nullptr);
  CHECK(find_bundled("does_not_exist") == nullptr);
}

TEST_CASE("multigoal example 2 config parses with references") {
  const auto* e = find_bundled("example2_multigoal");
  REQUIRE(e != nullptr);
  const auto cfg = parse_experiment(e->text, e->name);
  CHECK(cfg.goals.size() == 3);
  CHECK(cfg.weighting.has_value());
  REQUIRE(cfg.reference.has_value());
  CHECK(cfg.reference->size() == 3);
  CHECK(!cfg.reference_provenance.empty());
  CHECK(cfg.domain.removed_boxes.size() == 2);
}
