#pragma once

// Operational and denotational evaluation of resolved programs.

#include <cstddef>
#include <functional>
#include <vector>

#include "qrobust/lang.hpp"

namespace qrobust {

// A program paired with a partial state; an invalid program stands for termination.
struct Configuration {
  Program program;
  ComplexMatrix state;

  bool terminated() const { return !program.valid(); }
};

// One transition: a successor per measurement outcome, a single successor otherwise.
std::vector<Configuration> step(const Configuration& c, const Register& reg);

struct OperationalOptions {
  double cutoff = 1e-12;          // configurations lighter than this are pruned
  std::size_t step_budget = 1000000;
  // Successors with the same remaining program are summed into one configuration (exact by linearity).
  bool merge = true;
  // Called on every configuration of the breadth-first frontier, before it is stepped.
  std::function<void(const Configuration&)> observer;
};

struct OperationalResult {
  ComplexMatrix state;   // sum of terminal states
  double residual = 0.0;  // pruned trace mass
  std::size_t steps = 0;
  std::size_t terminals = 0;
};

// Throws BudgetExceeded when the step budget runs out.
OperationalResult run_operational(const Program& p, const Register& reg, const ComplexMatrix& rho,
                                  const OperationalOptions& opts = {});

struct DenoteOptions {
  double loop_tol = 1e-12;
  std::size_t k_max = 1000000;
  // Verifies at every unrolling that the loop increment is PSD.
  bool check_monotone = true;
};

// Choi matrix of a (possibly rectangular) map, output factor first.
struct DenotedMap {
  ComplexMatrix choi;
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  Register inputs;   // variables of the input factor, most significant first
  Register outputs;  // variables of the output factor
  // Every loop stopped on the tolerance test (never on k_max).
  bool converged = true;
  // Trace bound on the Choi mass dropped by loop truncation.
  double residual = 0.0;

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  // tr_out J, which is <= I exactly when the map is trace-non-increasing.
  ComplexMatrix input_marginal() const;
};

// Full map on the register.
DenotedMap denote(const Program& p, const Register& reg, const DenoteOptions& opts = {});

// Map with the `dropped` inputs fixed to |0> (valid for variables initialised before use) and
// the `traced` outputs discarded.
DenotedMap denote(const Program& p, const Register& reg, const Register& dropped, const Register& traced,
                  const DenoteOptions& opts = {});

// Map used for robustness: initialised-first inputs dropped and ancillas traced at the end.
DenotedMap denote_program(const Elaborated& e, const Program& body, const DenoteOptions& opts = {});
inline DenotedMap denote_program(const Elaborated& e, const DenoteOptions& opts = {}) {
  return denote_program(e, e.body, opts);
}

// Max over output |1> populations of `vars`, i.e. how far the map is from resetting them.
double reset_defect(const DenotedMap& m, const Register& vars);
// Same map with `vars` (which must be among the outputs) traced away.
DenotedMap trace_outputs(const DenotedMap& m, const Register& vars);

struct DualResult {
  ComplexMatrix matrix;
  double residual = 0.0;  // operator-norm bound on the truncation error
  bool converged = true;
};

// Heisenberg picture of the program applied to an observable on the full register.
DualResult heisenberg(const Program& p, const Register& reg, const ComplexMatrix& a, const DenoteOptions& opts = {});

}  // namespace qrobust
