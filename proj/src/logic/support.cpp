#include <algorithm>
#include <cmath>

#include "../semantics/kernels.hpp"
#include "internal.hpp"

namespace qrobust::detail {

AstPath child_path(const AstPath& p, std::size_t i) {
  AstPath c = p;
  c.push_back(i);
  return c;
}

bool is_zero(const ComplexMatrix& m, double tolerance) { return m.empty() || max_abs(m) <= tolerance; }

bool same_predicate(const ComplexMatrix& a, const ComplexMatrix& b, double tolerance) {
  return a.rows() == b.rows() && a.cols() == b.cols() && max_abs_diff(a, b) <= tolerance;
}

void require_predicate(const ComplexMatrix& q, std::size_t dim, const std::string& what) {
  if (q.rows() != dim || q.cols() != dim)
    throw SideConditionFailed(what + ": predicate is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()) +
                              ", register needs " + std::to_string(dim));
  if (!is_hermitian(q)) throw SideConditionFailed(what + ": predicate is not Hermitian");
  const auto ev = hermitian_eigenvalues(q);
  if (ev.back() < -tol::psd) throw SideConditionFailed(what + ": predicate is not positive semidefinite");
  if (ev.front() > 1.0 + tol::psd) throw SideConditionFailed(what + ": predicate exceeds the identity");
}

void require_unit_interval(double x, const std::string& what) {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) throw SideConditionFailed(what + " = " + std::to_string(x) + " is outside [0, 1]");
}

std::optional<LocalPredicate> local_predicate(const ComplexMatrix& q, const Register& reg, const Register& vars) {
  const std::size_t n = reg.size();
  const auto pos = positions_in(vars, reg);
  const std::size_t k = vars.size();
  if (is_zero(q)) return LocalPredicate{ComplexMatrix(std::size_t{1} << k, std::size_t{1} << k), true};
  std::vector<std::size_t> sorted = pos;
  std::sort(sorted.begin(), sorted.end());
  Register sorted_vars, rest_vars;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(sorted.begin(), sorted.end(), i)) {
      sorted_vars.push_back(reg[i]);
    } else {
      rest.push_back(i);
      rest_vars.push_back(reg[i]);
    }
  }
  if (rest.empty()) return LocalPredicate{lift(q, reg, vars), true};
  const std::vector<std::size_t> dims(n, 2);
  const double tr = trace(q).real();
  ComplexMatrix a = sorted.empty() ? ComplexMatrix{{tr}} : partial_trace(q, dims, sorted);
  ComplexMatrix b = partial_trace(q, dims, rest);
  ComplexMatrix product = lift(b, rest_vars, reg) * cplx(1.0 / tr);
  if (!sorted.empty()) product = lift(a, sorted_vars, reg) * product;
  else product = product * a(0, 0);
  if (max_abs_diff(product, q) > 1e-10) return std::nullopt;
  const double bmax = max_eigenvalue(b);
  LocalPredicate out;
  out.exact = max_abs_diff(b, ComplexMatrix::identity(b.rows()) * cplx(bmax)) <= 1e-10;
  ComplexMatrix local = hermitian_part(a * cplx(bmax / tr));
  out.q = sorted.empty() ? local : lift(local, sorted_vars, vars);
  return out;
}

ComplexMatrix lifted_outcome(const Node& n, const std::string& label, const Register& reg) {
  return lift(outcome_op(resolved_of(n).measurement, label), n.vars, reg);
}

namespace {

// Sum over `vars` of how far a map is from leaving each of them in |0>.
double total_defect(const DenotedMap& m, const Register& vars) {
  double s = 0.0;
  for (const auto& v : vars) s += reset_defect(m, {v});
  return s;
}

double reset_slack(double defect) { return 2.0 * std::sqrt(std::max(defect, 0.0)) + std::max(defect, 0.0); }

}  // namespace

SemanticResult statement_distance(const Elaborated& e, const Program& stmt, const ComplexMatrix& q, double lambda,
                                  bool trace_ancillas, const LogicOptions& opts) {
  const std::size_t dim = register_dim(e.reg);
  const ComplexMatrix full_q = q.empty() ? ComplexMatrix::identity(dim) : q;
  if (full_q.rows() != dim) throw DimensionError("predicate does not match the register");
  const auto ev = hermitian_eigenvalues(full_q);
  SemanticResult res;
  if (lambda > ev.front() + 1e-9) return res;  // no admissible input
  const bool unconstrained = lambda <= ev.back() + 1e-9;

  // Work on the touched variables when the predicate allows it.
  Register sub;
  if (trace_ancillas) {
    sub = e.reg;
  } else {
    const auto touched = touched_vars(stmt);
    for (const auto& v : e.reg)
      if (std::find(touched.begin(), touched.end(), v) != touched.end()) sub.push_back(v);
  }
  ComplexMatrix sub_q;
  if (unconstrained) {
    sub_q = ComplexMatrix::identity(register_dim(sub));
  } else if (auto lp = local_predicate(full_q, e.reg, sub)) {
    sub_q = lp->q;
  } else {
    sub = e.reg;
    sub_q = full_q;
  }

  Register dropped = initialized_first(stmt, sub);
  Register kept;
  for (const auto& v : sub)
    if (std::find(dropped.begin(), dropped.end(), v) == dropped.end()) kept.push_back(v);
  ComplexMatrix in_q;
  if (unconstrained) {
    in_q = ComplexMatrix::identity(register_dim(kept));
  } else if (auto lp = local_predicate(sub_q, sub, kept); lp && lp->exact) {
    in_q = lp->q;
  } else {
    dropped.clear();
    kept = sub;
    in_q = sub_q;
  }

  const Program ideal_stmt = ideal(stmt);
  DenotedMap noisy = denote(stmt, sub, dropped, {}, opts.denote);
  DenotedMap clean = denote(ideal_stmt, sub, dropped, {}, opts.denote);
  Register traced;
  for (const auto& v : e.ancillas) {
    if (std::find(sub.begin(), sub.end(), v) == sub.end()) continue;
    if (trace_ancillas) {
      traced.push_back(v);
    } else if (reset_defect(noisy, {v}) <= opts.reset_tol && reset_defect(clean, {v}) <= opts.reset_tol) {
      traced.push_back(v);
    }
  }
  double slack = 0.0;
  if (!trace_ancillas && !traced.empty())
    slack = reset_slack(total_defect(noisy, traced)) + reset_slack(total_defect(clean, traced));
  if (!traced.empty()) {
    noisy = trace_outputs(noisy, traced);
    clean = trace_outputs(clean, traced);
  }
  // Reorder the predicate to the input factor of the maps.
  if (!kept.empty()) in_q = lift(in_q, kept, noisy.inputs);

  SdpInstance inst{noisy.choi - clean.choi, noisy.d_out, noisy.d_in, in_q, unconstrained ? 0.0 : lambda};
  try {
    const SdpSolution sol = sdp_solve(inst, opts.sdp);
    res.value = sol.value;
    res.gap = sol.duality_gap;
  } catch (const Infeasible&) {
    res.value = 0.0;
  }
  res.residual = 2.0 * (noisy.residual + clean.residual) + slack;
  return res;
}

}  // namespace qrobust::detail

namespace qrobust {

SemanticResult semantic_robustness(const Elaborated& e, const ComplexMatrix& q, double lambda,
                                   const LogicOptions& opts) {
  return detail::statement_distance(e, e.body, q, lambda, true, opts);
}

SemanticResult semantic_robustness(const Elaborated& e, const LogicOptions& opts) {
  return semantic_robustness(e, ComplexMatrix{}, 0.0, opts);
}

}  // namespace qrobust
