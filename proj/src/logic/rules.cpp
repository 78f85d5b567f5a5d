#include <algorithm>
#include <cmath>

#include "../semantics/kernels.hpp"
#include "internal.hpp"

namespace qrobust {

namespace {

constexpr const char* kRuleNames[] = {"Skip",     "Init", "Unitary",      "Weaken",          "Rescale",
                                      "Sequence", "Case", "While-Bounded", "While-Unbounded", "Semantic"};

std::string at(const AstPath& p) { return "at " + path_to_string(p); }

[[noreturn]] void fail(const AstPath& p, const std::string& msg) { throw SideConditionFailed(msg + " " + at(p)); }

SideCondition holds(std::string description, double witness = 0.0) { return {std::move(description), true, witness}; }

// Records the condition, throwing when it does not hold.
void check(DerivationTree& t, bool ok, const std::string& description, double witness = 0.0) {
  if (!ok) fail(t.conclusion.path, description + " fails (witness " + std::to_string(witness) + ")");
  t.side_conditions.push_back(holds(description, witness));
}

// The trace distance between two trace-non-increasing maps never exceeds 1.
double capped(DerivationTree& t, double eps) {
  if (eps > 1.0) {
    t.side_conditions.push_back(holds("distance capped at 1", eps));
    return 1.0;
  }
  return std::max(0.0, eps);
}

Program statement(const Elaborated& e, const AstPath& path, NodeKind want, Rule rule) {
  Program s;
  try {
    s = at_path(e.body, path);
  } catch (const Error& ex) {
    throw SideConditionFailed(ex.what());
  }
  if (rule != Rule::Semantic && rule != Rule::Weaken && rule != Rule::Rescale && s.kind() != want)
    throw SideConditionFailed(std::string(to_string(rule)) + " rule needs a " + qrobust::to_string(want) +
                              " statement " + at(path) + ", found " + qrobust::to_string(s.kind()));
  return s;
}

DerivationTree node(const Elaborated& e, Rule rule, const AstPath& path, NodeKind kind, const ComplexMatrix& q,
                    double lambda) {
  DerivationTree t;
  t.rule = rule;
  t.conclusion.program = statement(e, path, kind, rule);
  t.conclusion.path = path;
  t.conclusion.q = q;
  t.conclusion.lambda = lambda;
  detail::require_predicate(q, detail::register_dim(e.reg), std::string(to_string(rule)) + " " + at(path));
  detail::require_unit_interval(lambda, "lambda " + at(path));
  t.side_conditions.push_back(holds("precondition is a predicate and lambda lies in [0, 1]"));
  return t;
}

void require_premise_path(const DerivationTree& p, const AstPath& want) {
  if (p.conclusion.path != want)
    throw SideConditionFailed("premise is about " + path_to_string(p.conclusion.path) +
                              ", expected " + path_to_string(want));
}

// Norm of U o U^dag - Phi under (q, lambda), evaluated on the statement's qubits whenever that is exact or an
// upper bound; on the full register when q does not factor and the register is small.
double unitary_norm(const Elaborated& e, const Node& n, const ComplexMatrix& q, double lambda,
                    const LogicOptions& opts, std::string& how) {
  const Resolved& r = detail::resolved_of(n);
  const Superoperator ideal_map = Superoperator::unitary(r.unitary);
  const Superoperator& noise = *r.noise;
  const auto ev = hermitian_eigenvalues(q);
  if (lambda > ev.front() + 1e-9) {
    how = "no admissible input";
    return 0.0;
  }
  if (lambda <= ev.back() + 1e-9) {
    how = "diamond norm";
    return diamond_norm(ideal_map, noise, opts.sdp);
  }
  if (auto lp = detail::local_predicate(q, e.reg, n.vars)) {
    how = lp->exact ? "local (Q, lambda) norm" : "local norm under a dominating product predicate";
    return q_lambda_diamond_norm(ideal_map, noise, Predicate(lp->q), lambda, opts.sdp);
  }
  if (e.reg.size() <= opts.full_register_qubits) {
    how = "(Q, lambda) norm on the full register";
    return q_lambda_diamond_norm(lift(ideal_map, n.vars, e.reg), lift(noise, n.vars, e.reg), Predicate(q), lambda,
                                 opts.sdp);
  }
  how = "diamond norm (upper bound, predicate does not factor)";
  return diamond_norm(ideal_map, noise, opts.sdp);
}

DerivationTree weaken(const DerivationTree& premise, const RuleInput& in, std::size_t dim) {
  DerivationTree t;
  t.rule = Rule::Weaken;
  t.conclusion = premise.conclusion;
  t.conclusion.q = in.q;
  t.conclusion.lambda = in.lambda;
  t.conclusion.epsilon = in.epsilon;
  detail::require_predicate(in.q, dim, "Weaken " + at(premise.conclusion.path));
  detail::require_unit_interval(in.lambda, "lambda " + at(premise.conclusion.path));
  detail::require_unit_interval(in.epsilon, "epsilon " + at(premise.conclusion.path));
  check(t, premise.conclusion.epsilon <= in.epsilon + 1e-15, "premise epsilon <= epsilon",
        premise.conclusion.epsilon - in.epsilon);
  check(t, loewner_leq(in.q, premise.conclusion.q), "Q below the premise predicate",
        min_eigenvalue(hermitian_part(premise.conclusion.q - in.q)));
  check(t, premise.conclusion.lambda <= in.lambda + 1e-12, "premise lambda <= lambda",
        premise.conclusion.lambda - in.lambda);
  t.premises.push_back(premise);
  return t;
}

DerivationTree rescale(const DerivationTree& premise, double delta, std::size_t dim) {
  DerivationTree t;
  t.rule = Rule::Rescale;
  t.delta = delta;
  t.conclusion = premise.conclusion;
  const AstPath& path = premise.conclusion.path;
  check(t, delta > 0.0 && std::isfinite(delta), "delta > 0", delta);
  // Undoing an earlier rescale restores its premise exactly.
  if (premise.rule == Rule::Rescale && std::abs(premise.delta * delta - 1.0) <= 1e-15) {
    t.conclusion.q = premise.premises[0].conclusion.q;
    t.conclusion.lambda = premise.premises[0].conclusion.lambda;
  } else {
    t.conclusion.q = hermitian_part(premise.conclusion.q * cplx(delta));
    t.conclusion.lambda = premise.conclusion.lambda * delta;
  }
  detail::require_predicate(t.conclusion.q, dim, "Rescale " + at(path));
  detail::require_unit_interval(t.conclusion.lambda, "rescaled lambda " + at(path));
  t.side_conditions.push_back(holds("Q and Q/delta are predicates, lambda and lambda/delta lie in [0, 1]", delta));
  t.premises.push_back(premise);
  return t;
}

DerivationTree case_rule(const Elaborated& e, const std::vector<DerivationTree>& premises, const RuleInput& in) {
  const Program s = statement(e, in.path, NodeKind::Case, Rule::Case);
  const Node& n = s.node();
  if (premises.size() != n.children.size())
    throw SideConditionFailed("Case " + at(in.path) + " needs one premise per branch");
  double lam = 0.0, eps = 0.0;
  for (std::size_t i = 0; i < premises.size(); ++i) {
    require_premise_path(premises[i], detail::child_path(in.path, i));
    lam = std::max(lam, premises[i].conclusion.lambda);
    eps = std::max(eps, premises[i].conclusion.epsilon);
  }
  const std::size_t dim = detail::register_dim(e.reg);
  DerivationTree t;
  t.rule = Rule::Case;
  ComplexMatrix pre(dim, dim);
  for (std::size_t i = 0; i < premises.size(); ++i) {
    const DerivationTree& p = premises[i];
    // Bring every branch to the common (1 - delta, epsilon).
    if (p.conclusion.lambda != lam || p.conclusion.epsilon != eps) {
      RuleInput w;
      w.q = p.conclusion.q;
      w.lambda = lam;
      w.epsilon = eps;
      t.premises.push_back(weaken(p, w, dim));
    } else {
      t.premises.push_back(p);
    }
    const ComplexMatrix m = detail::lifted_outcome(n, n.labels[i], e.reg);
    pre += dagger(m) * p.conclusion.q * m;
  }
  t.delta = 1.0 - lam;
  t.t = in.t;
  t.conclusion.program = s;
  t.conclusion.path = in.path;
  t.conclusion.q = hermitian_part(pre);
  t.conclusion.lambda = 1.0 - in.t * t.delta;
  check(t, in.t >= 0.0 && in.t <= 1.0, "t in [0, 1]", in.t);
  check(t, t.delta >= -1e-15 && t.delta <= 1.0, "delta in [0, 1]", t.delta);
  t.side_conditions.push_back(holds("branches share 1 - delta and epsilon", eps));
  t.conclusion.epsilon = capped(t, (1.0 - in.t) * eps + in.t);
  return t;
}

}  // namespace

const char* to_string(Rule r) { return kRuleNames[static_cast<int>(r)]; }

Rule rule_from_string(const std::string& s) {
  for (int i = 0; i < 10; ++i)
    if (s == kRuleNames[i]) return static_cast<Rule>(i);
  throw Error("unknown rule '" + s + "'");
}

bool DerivationTree::verified() const {
  for (const auto& c : side_conditions)
    if (!c.verified) return false;
  return std::all_of(premises.begin(), premises.end(), [](const DerivationTree& p) { return p.verified(); });
}

std::size_t DerivationTree::size() const {
  std::size_t s = 1;
  for (const auto& p : premises) s += p.size();
  return s;
}

DerivationTree apply_rule(const Elaborated& e, Rule rule, const std::vector<DerivationTree>& premises,
                          const RuleInput& in, const LogicOptions& opts) {
  const std::size_t dim = detail::register_dim(e.reg);
  auto need = [&](std::size_t k) {
    if (premises.size() != k)
      throw SideConditionFailed(std::string(to_string(rule)) + " rule takes " + std::to_string(k) + " premise(s)");
  };
  switch (rule) {
    case Rule::Skip:
    case Rule::Init: {
      need(0);
      DerivationTree t = node(e, rule, in.path, rule == Rule::Skip ? NodeKind::Skip : NodeKind::Init, in.q, in.lambda);
      t.conclusion.epsilon = 0.0;
      return t;
    }
    case Rule::Unitary: {
      need(0);
      DerivationTree t = node(e, rule, in.path, NodeKind::Unitary, in.q, in.lambda);
      const Node& n = t.conclusion.program.node();
      const Resolved& r = detail::resolved_of(n);
      if (r.probability == 0.0 || !r.noise) {
        t.side_conditions.push_back(holds("noise probability is 0"));
        t.conclusion.epsilon = 0.0;
        return t;
      }
      std::string how;
      t.norm = unitary_norm(e, n, in.q, in.lambda, opts, how);
      t.side_conditions.push_back(holds("||U o U^dag - Phi||_(Q,lambda) <= " + std::to_string(t.norm) + " by " + how,
                                        t.norm));
      t.conclusion.epsilon = capped(t, r.probability * t.norm);
      return t;
    }
    case Rule::Weaken:
      need(1);
      return weaken(premises[0], in, dim);
    case Rule::Rescale:
      need(1);
      return rescale(premises[0], in.delta, dim);
    case Rule::Sequence: {
      const Program s = statement(e, in.path, NodeKind::Seq, rule);
      if (premises.size() != s.children().size())
        throw SideConditionFailed("Sequence " + at(in.path) + " needs one premise per item");
      DerivationTree t;
      t.rule = rule;
      t.conclusion.program = s;
      t.conclusion.path = in.path;
      t.conclusion.q = premises[0].conclusion.q;
      t.conclusion.lambda = premises[0].conclusion.lambda;
      double eps = 0.0;
      for (std::size_t i = 0; i < premises.size(); ++i) {
        require_premise_path(premises[i], detail::child_path(in.path, i));
        check(t, std::abs(premises[i].conclusion.lambda - t.conclusion.lambda) <= 1e-12,
              "item " + std::to_string(i) + " shares lambda", premises[i].conclusion.lambda);
        eps += premises[i].conclusion.epsilon;
        if (i + 1 < premises.size()) {
          const HoareResult h = check_hoare(premises[i].conclusion.q, s.children()[i],
                                            premises[i + 1].conclusion.q, e.reg, opts);
          check(t, h.holds, "{Q" + std::to_string(i) + "} item " + std::to_string(i) + " {Q" + std::to_string(i + 1) + "}",
                h.margin);
        }
      }
      t.premises = premises;
      t.conclusion.epsilon = capped(t, eps);
      return t;
    }
    case Rule::Case:
      return case_rule(e, premises, in);
    case Rule::WhileBounded: {
      need(1);
      const Program s = statement(e, in.path, NodeKind::While, rule);
      const DerivationTree& body = premises[0];
      require_premise_path(body, detail::child_path(in.path, 0));
      if (!in.certificate) throw SideConditionFailed("While-Bounded " + at(in.path) + " needs a boundedness certificate");
      DerivationTree t;
      t.rule = rule;
      t.conclusion.program = s;
      t.conclusion.path = in.path;
      t.certificate = in.certificate;
      const BoundednessCertificate& c = *in.certificate;
      check(t, c.n >= 1 && c.a >= 0.0 && c.a < 1.0, "0 <= a < 1 and n >= 1", c.a);
      check(t, verify_certificate(s, e.reg, c, opts), "loop is (a, n)-bounded", c.a);
      if (t.certificate->witness.empty()) {
        // Keep the recomputed witness with the certificate.
        BoundednessResult b = boundedness(s, e.reg, c.n, opts);
        t.certificate->witness = b.certificate.witness;
        t.certificate->off_support_leak = b.certificate.off_support_leak;
      }
      const Node& n = s.node();
      const ComplexMatrix m0 = detail::lifted_outcome(n, "0", e.reg);
      const ComplexMatrix m1 = detail::lifted_outcome(n, "1", e.reg);
      const double lam = body.conclusion.lambda;
      const ComplexMatrix post =
          hermitian_part(dagger(m0) * m0 * cplx(lam) + dagger(m1) * body.conclusion.q * m1);
      const HoareResult h = check_hoare(body.conclusion.q, s.children()[0], post, e.reg, opts);
      check(t, h.holds, "{Q} body {lambda M0^dag M0 + M1^dag Q M1}", h.margin);
      t.conclusion.q = post;
      t.conclusion.lambda = lam;
      t.premises = premises;
      t.conclusion.epsilon = capped(t, c.n * body.conclusion.epsilon / (1.0 - c.a));
      return t;
    }
    case Rule::WhileUnbounded: {
      need(0);
      DerivationTree t = node(e, rule, in.path, NodeKind::While, in.q, in.lambda);
      t.conclusion.epsilon = 1.0;
      return t;
    }
    case Rule::Semantic: {
      need(0);
      DerivationTree t = node(e, rule, in.path, NodeKind::Skip, in.q, in.lambda);
      const SemanticResult sr =
          detail::statement_distance(e, t.conclusion.program, in.q, in.lambda, false, opts);
      t.norm = sr.value;
      t.residual = sr.residual;
      t.side_conditions.push_back(holds("||[[P~]] - [[P]]||_(Q,lambda) = " + std::to_string(sr.value) +
                                        " with SDP gap " + std::to_string(sr.gap), sr.value));
      t.conclusion.epsilon = capped(t, sr.value + sr.residual);
      return t;
    }
  }
  throw SideConditionFailed("unknown rule");
}

}  // namespace qrobust
