#pragma once

// Robustness judgments, their proof rules, loop boundedness and automatic derivation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrobust/lang.hpp"
#include "qrobust/norms.hpp"
#include "qrobust/semantics.hpp"

namespace qrobust {

using AstPath = std::vector<std::size_t>;

// "program is epsilon-robust under (q, lambda)"; q acts on the full register of the elaboration.
struct Judgment {
  ComplexMatrix q;
  double lambda = 0.0;
  Program program;
  AstPath path;
  double epsilon = 0.0;
};

enum class Rule { Skip, Init, Unitary, Weaken, Rescale, Sequence, Case, WhileBounded, WhileUnbounded, Semantic };
const char* to_string(Rule r);
Rule rule_from_string(const std::string& s);

struct SideCondition {
  std::string description;
  bool verified = false;
  double witness = 0.0;
};

// Certifies (E*)^n(M1^dag M1) <= a M1^dag M1 for the ideal loop.
struct BoundednessCertificate {
  double a = 1.0;
  int n = 1;
  double off_support_leak = 0.0;
  ComplexMatrix witness;  // (E*)^n(M1^dag M1)
};

struct BoundednessResult {
  bool bounded = false;
  BoundednessCertificate certificate;  // best attempt when not bounded
  std::string diagnostic;
};

struct CaseFrontierPoint {
  double t = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
};

struct DerivationTree {
  Rule rule = Rule::Skip;
  Judgment conclusion;
  std::vector<DerivationTree> premises;
  std::vector<SideCondition> side_conditions;
  // Additive term on top of the rule formula (truncation and reset slack).
  double residual = 0.0;
  // Rule parameters: Case t and delta, Rescale factor, Unitary/Semantic norm value.
  double t = 0.0;
  double delta = 0.0;
  double norm = 0.0;
  std::optional<BoundednessCertificate> certificate;
  std::vector<CaseFrontierPoint> frontier;  // Case nodes whose t was not pinned

  // Every side condition of this node and of all premises holds.
  bool verified() const;
  std::size_t size() const;
};

struct LogicOptions {
  DenoteOptions denote;
  SdpOptions sdp;
  double hoare_tol = 1e-9;
  double hoare_residual_tol = 1e-9;
  double a_tol = 1e-9;
  double leak_tol = 1e-9;
  double reset_tol = 1e-10;
  int n_max = 10;
  // Unitary-rule norms whose predicate does not factor are evaluated on the full register up to this size.
  std::size_t full_register_qubits = 2;
};

struct HoareResult {
  bool holds = false;
  double margin = 0.0;    // min eigenvalue of dual(p)(r) - q
  double residual = 0.0;  // truncation bound of the dual
};

// {q} p {r} for the ideal version of p, as q <= dual(p)(r).
// Throws Unconverged when only the truncation residual separates the result from acceptance.
HoareResult check_hoare(const ComplexMatrix& q, const Program& p, const ComplexMatrix& r, const Register& reg,
                        const LogicOptions& opts = {});

// Smallest a with (E*)^n(M1^dag M1) <= a M1^dag M1 for the ideal loop.
BoundednessResult boundedness(const Program& loop, const Register& reg, int n, const LogicOptions& opts = {});
// First n in 1..n_max that certifies a < 1.
BoundednessResult boundedness_search(const Program& loop, const Register& reg, int n_max,
                                     const LogicOptions& opts = {});
// Recomputes the witness and checks the Loewner inequality for the certificate's (a, n).
bool verify_certificate(const Program& loop, const Register& reg, const BoundednessCertificate& c,
                        const LogicOptions& opts = {});

// Inputs of a single rule application. Unused fields are ignored by each rule.
struct RuleInput {
  AstPath path;       // statement the conclusion is about
  ComplexMatrix q;    // Skip, Init, Unitary, Semantic, While-Unbounded, Weaken: conclusion predicate
  double lambda = 0.0;
  double epsilon = 0.0;   // Weaken: conclusion epsilon
  double t = 0.0;         // Case
  double delta = 1.0;     // Rescale: conclusion is (delta Q', delta lambda')
  std::optional<BoundednessCertificate> certificate;  // While-Bounded
};

// Applies one rule, checking all its side conditions. Throws SideConditionFailed naming the first failure.
DerivationTree apply_rule(const Elaborated& e, Rule rule, const std::vector<DerivationTree>& premises,
                          const RuleInput& in, const LogicOptions& opts = {});

// Per-site user input for automatic derivation.
struct SiteAnnotation {
  std::optional<ComplexMatrix> q;  // on the full register
  std::optional<double> lambda;
  std::optional<double> t;         // Case
  std::optional<int> loop_n;       // While: fixed n
  std::optional<double> loop_a;    // While: claimed a (checked)
  std::optional<int> n_max;        // While: search bound
  bool semantic = false;           // bound this statement by its semantic robustness
};

// Precondition used where no annotation applies: (0, 0), or (I, 1) which is needed for Case.
enum class DefaultPrecondition { Auto, False, Universal };

struct Annotation {
  DefaultPrecondition default_pre = DefaultPrecondition::Auto;
  std::map<AstPath, SiteAnnotation> sites;
};

// JSON form: {"version": 1, "default": "auto"|"false"|"universal",
//   "sites": [{"path": [..], "Q": expr, "vars": [..], "lambda": x, "t": x,
//              "loop": {"n": k, "a": x, "n_max": k}, "rule": "semantic"}]}
Annotation parse_annotation(const std::string& json_text, const Elaborated& e);

DefaultPrecondition resolved_default(const Program& p, const Annotation& ann);

// Bottom-up derivation of a robustness judgment for the noisy body of e.
DerivationTree auto_derive(const Elaborated& e, const Annotation& ann = {}, const LogicOptions& opts = {});

struct SemanticResult {
  double value = 0.0;     // SDP value of the (Q, lambda)-diamond distance
  double residual = 0.0;  // 2 (residual_noisy + residual_ideal)
  double gap = 0.0;       // SDP duality gap
  double bound() const { return value + residual; }
};

// (Q, lambda)-diamond distance between the noisy and ideal programs: initialised-first inputs dropped and
// ancillas traced at the end. q acts on the full register; an empty q means the identity.
SemanticResult semantic_robustness(const Elaborated& e, const ComplexMatrix& q, double lambda,
                                   const LogicOptions& opts = {});
SemanticResult semantic_robustness(const Elaborated& e, const LogicOptions& opts = {});

// Derivation documents: every node carries rule, path, conclusion and parameters.
std::string derivation_to_json(const DerivationTree& t, int indent = 2);
// Re-applies every rule bottom-up and compares conclusions; throws SideConditionFailed on mismatch.
DerivationTree recheck_derivation(const Elaborated& e, const std::string& json_text, const LogicOptions& opts = {});

}  // namespace qrobust
