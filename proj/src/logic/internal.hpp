#pragma once

// Helpers shared by the proof rules and the automatic derivation.

#include <optional>

#include "qrobust/logic.hpp"

namespace qrobust::detail {

inline std::size_t register_dim(const Register& reg) { return std::size_t{1} << reg.size(); }

AstPath child_path(const AstPath& p, std::size_t i);

bool is_zero(const ComplexMatrix& m, double tolerance = 1e-14);
bool same_predicate(const ComplexMatrix& a, const ComplexMatrix& b, double tolerance = 1e-12);

// Throws SideConditionFailed unless 0 <= q <= I on the given dimension.
void require_predicate(const ComplexMatrix& q, std::size_t dim, const std::string& what);
void require_unit_interval(double x, const std::string& what);

// A predicate on `vars` (in that order) that dominates q when q is a product across vars and the rest.
struct LocalPredicate {
  ComplexMatrix q;
  bool exact = false;  // q equals local (x) I
};
std::optional<LocalPredicate> local_predicate(const ComplexMatrix& q, const Register& reg, const Register& vars);

// Measurement operator of `label` lifted to the register.
ComplexMatrix lifted_outcome(const Node& n, const std::string& label, const Register& reg);

// Distance between the noisy statement and its ideal version under (q, lambda).
// Inputs initialised first are dropped when q allows it. With trace_ancillas every ancilla is traced at the
// end; otherwise only ancillas that both maps reset are traced and the reset slack enters the residual.
SemanticResult statement_distance(const Elaborated& e, const Program& stmt, const ComplexMatrix& q, double lambda,
                                  bool trace_ancillas, const LogicOptions& opts);

}  // namespace qrobust::detail
