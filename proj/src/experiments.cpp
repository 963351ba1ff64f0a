#include "dwr/experiments.hpp"

#include <deque>
#include <vector>

namespace dwr {

namespace {

// Poisson on the unit square, point goal at the center. The reference value
// is the fine-mesh value of u(0.5,0.5) for -Laplace(u) = -1.
constexpr const char* kExample1Common = R"(
[problem]
kind = poisson
source = -1
domain = 0 0 1 1
subdivisions = 4 4

[goal]
kind = point
point = 0.5 0.5

[reference]
value = -7.3671353258859554e-02
provenance = fine-mesh reference for u(0.5,0.5), globally refined super-mesh
)";

std::string example1(int primal, int enriched, int pu, int max_dofs, bool allow_equal) {
  std::string s = kExample1Common;
  s += "\n[loop]\n";
  s += "primal_degree = " + std::to_string(primal) + "\n";
  s += "enriched_degree = " + std::to_string(enriched) + "\n";
  s += "pu_degree = " + std::to_string(pu) + "\n";
  s += "theta = 0.5\n";
  s += "max_dofs = " + std::to_string(max_dofs) + "\n";
  if (allow_equal) s += "allow_equal_degrees = true\n";
  return s;
}

struct Storage {
  std::deque<std::string> texts;  // stable addresses for the catalog
  std::vector<BundledExperiment> list;

  void add(const char* name, const char* desc, std::string text) {
    texts.push_back(std::move(text));
    list.push_back({name, desc, texts.back().c_str()});
  }

  Storage() {
    add("example1_comp1", "Poisson point goal, Q1 primal / Q1 adjoint (Galerkin orthogonality)",
        example1(1, 1, 1, 20000, true));
    add("example1_comp2", "Poisson point goal, Q1/Q2 adaptive PU-DWR", example1(1, 2, 1, 20000, false));
    add("example1_comp3", "Poisson point goal, Q1/Q3", example1(1, 3, 1, 12000, false));
    add("example1_comp4", "Poisson point goal, Q1/Q4", example1(1, 4, 1, 12000, false));
    add("example1_comp5", "Poisson point goal, Q2/Q1 (inverted orders)", example1(2, 1, 1, 20000, true));
    add("example1_comp6", "Poisson point goal, Q2/Q2 (Galerkin orthogonality)",
        example1(2, 2, 1, 20000, true));
    add("example1_comp7", "Poisson point goal, Q2/Q3", example1(2, 3, 1, 8000, false));
    add("example1_comp8", "Poisson point goal, Q2/Q4", example1(2, 4, 1, 8000, false));
    add("example1_comp9", "Poisson point goal, Q1/Q2 with Q2 partition of unity",
        example1(1, 2, 2, 16000, false));
    add("example1_comp10", "Poisson point goal, Q1/Q2 with Q3 partition of unity",
        example1(1, 2, 3, 16000, false));

    add("example1_uniform_q2", "Poisson point goal under uniform Q2 refinement (reference study)",
        std::string(kExample1Common) + R"(
[loop]
primal_degree = 2
enriched_degree = 3
uniform = true
estimate = false
max_dofs = 70000
max_steps = 6
)");

    add("example1_interpolation",
        "Poisson point goal, Q1 with the patch-interpolation estimator (no enriched solves)",
        R"(
[problem]
kind = poisson
source = -1
domain = 0 0 1 1
subdivisions = 2 2
initial_refines = 1

[goal]
kind = point
point = 0.5 0.5

[reference]
value = -7.3671353258859554e-02
provenance = fine-mesh reference for u(0.5,0.5), globally refined super-mesh

[loop]
primal_degree = 1
enriched_degree = 2
theta = 0.5
max_dofs = 20000
estimator = interpolation
sibling_groups = true
)");

    // Non-linear example: -div(nu(|grad u|) grad u) = 10 with the arctan law on
    // (0,5)x(0,3) minus two unit squares. Reference values computed with this
    // code (Q2 primal / Q3 enriched adaptive runs per goal, estimator-corrected,
    // stable digits across the last steps).
    // J1 flux: -8.5103712364  J2: 1.2010584955  J3: 1.7945407924  L2: 50.6354544464
    constexpr const char* ex2_common = R"(
[problem]
kind = nonlinear_arctan
source = 10
domain = 0 0 5 3
subdivisions = 5 3
removed_box = 1 1 2 2
removed_box = 3 1 4 2
segment = flux x 0 0 3
)";

    add("example2_multigoal",
        "Nonlinear elliptic, three goals (flux, two point values) with relative error weighting",
        std::string(ex2_common) + R"(
[goal]
kind = flux
segment = flux
label = J1_flux

[goal]
kind = point
point = 0.2 0.2
label = J2_point

[goal]
kind = point
point = 0.9 0.1
label = J3_point

[weighting]
kind = relative_sum

[reference]
values = -8.5103712364 1.2010584955 1.7945407924
provenance = self-computed, adaptive Q2/Q3 per-goal runs, estimator-corrected

[loop]
primal_degree = 1
enriched_degree = 2
theta = 0.5
max_dofs = 40000

[newton]
atol = 1e-10
)");

    add("example2_identity",
        "Nonlinear elliptic, point goal, Newton iteration-error identity instrumented",
        std::string(ex2_common) + R"(
[goal]
kind = point
point = 0.2 0.2

[reference]
value = 1.2010584955
provenance = self-computed, adaptive Q2/Q3 run, estimator-corrected

[loop]
primal_degree = 1
enriched_degree = 2
theta = 0.5
max_dofs = 8000

[newton]
atol = 1e-10
check_identity = true
)");

    add("example2_l2", "Nonlinear elliptic, squared L2-norm goal, adaptive",
        std::string(ex2_common) + R"(
[goal]
kind = l2

[reference]
value = 50.6354544464
provenance = self-computed, adaptive Q2/Q3 run, estimator-corrected

[loop]
primal_degree = 1
enriched_degree = 2
theta = 0.5
max_dofs = 40000
)");

    add("example2_l2_uniform", "Nonlinear elliptic, squared L2-norm goal, uniform refinement",
        std::string(ex2_common) + R"(
[goal]
kind = l2

[reference]
value = 50.6354544464
provenance = self-computed, adaptive Q2/Q3 run, estimator-corrected

[loop]
primal_degree = 1
enriched_degree = 2
uniform = true
estimate = false
max_dofs = 60000
)");

    add("ode_consistency",
        "Backward Euler as inconsistent dG(0): u' = -u, goal u(1), consistency-aware estimate",
        R"(
[experiment]
kind = ode

[ode]
u0 = 1
T = 1
steps = 64 128 256 512
)");
  }
};

const Storage& storage() {
  static Storage s;
  return s;
}

}  // namespace

std::span<const BundledExperiment> bundled_experiments() { return storage().list; }

const BundledExperiment* find_bundled(const std::string& name) {
  for (const auto& e : storage().list)
    if (name == e.name) return &e;
  return nullptr;
}

}  // namespace dwr
