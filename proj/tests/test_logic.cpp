#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qrobust/logic.hpp"

using namespace qrobust;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string corpus(const std::string& file) { return std::string(QROBUST_CORPUS_DIR) + "/" + file; }

Elaborated load(const std::string& stem, const ParamMap& params = {}) {
  return elaborate(parse(slurp(corpus(stem + ".qw"))), params);
}

Annotation annotation(const Elaborated& e, const std::string& stem) {
  return parse_annotation(slurp(corpus(stem + ".annot.json")), e);
}

Elaborated load_text(const std::string& text) { return elaborate(parse(text)); }

ComplexMatrix zero_pred(const Elaborated& e) {
  const std::size_t d = std::size_t{1} << e.reg.size();
  return ComplexMatrix(d, d);
}
ComplexMatrix id_pred(const Elaborated& e) { return ComplexMatrix::identity(std::size_t{1} << e.reg.size()); }

const ComplexMatrix k0 = {{1, 0}, {0, 0}};
const ComplexMatrix k1 = {{0, 0}, {0, 1}};

RuleInput at(const AstPath& path, const ComplexMatrix& q, double lambda) {
  RuleInput in;
  in.path = path;
  in.q = q;
  in.lambda = lambda;
  return in;
}

DerivationTree weaken_eps(const Elaborated& e, const DerivationTree& t, double eps) {
  RuleInput in = at(t.conclusion.path, t.conclusion.q, t.conclusion.lambda);
  in.epsilon = eps;
  return apply_rule(e, Rule::Weaken, {t}, in);
}

// Rebuilds a derivation with every premise inflated by `extra` through Weaken.
DerivationTree inflate(const Elaborated& e, const DerivationTree& t, double extra) {
  std::vector<DerivationTree> premises;
  for (const auto& p : t.premises) {
    DerivationTree q = inflate(e, p, extra);
    premises.push_back(weaken_eps(e, q, std::min(1.0, q.conclusion.epsilon + extra)));
  }
  RuleInput in = at(t.conclusion.path, t.conclusion.q, t.conclusion.lambda);
  in.t = t.t;
  in.delta = t.delta;
  in.certificate = t.certificate;
  in.epsilon = premises.empty() ? t.conclusion.epsilon
                                : std::max(t.conclusion.epsilon, premises[0].conclusion.epsilon);
  return apply_rule(e, t.rule, premises, in);
}

const char* const kPrograms[] = {"bse", "noisy-bse", "ssp", "sp", "qbf", "qw6", "p1", "p2", "p3", "ftqbf", "case-demo"};
const char* const kAnnotated[] = {"ssp", "qw6", "ftqbf", "case-demo"};

}  // namespace

TEST_CASE("Hoare triples") {
  const auto bse = load("bse");
  const auto p2 = load("p2");
  const auto ssp = load("ssp");
  const Register& reg = ssp.reg;

  SUBCASE("false precondition and postcondition") {
    for (const char* name : kPrograms) {
      const auto e = load(name);
      CHECK(check_hoare(zero_pred(e), e.body, zero_pred(e), e.reg).holds);
    }
  }
  SUBCASE("identity through trace-preserving loop-free programs") {
    CHECK(check_hoare(id_pred(bse), bse.body, id_pred(bse), bse.reg).holds);
    const auto h = check_hoare(id_pred(p2), p2.body, id_pred(p2), p2.reg);
    CHECK(h.holds);
    CHECK(h.margin == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("loop-body triple for slow state preparation") {
    const Program loop = at_path(ssp.body, {1});
    const Program body = loop.children()[0];
    // lambda M0^dag M0 + M1^dag Q M1 with Q = |0><0| and lambda = 1 is the identity.
    const ComplexMatrix post = k1 + k0 * k0 * k0;
    CHECK(check_hoare(lift(k0, {"q"}, reg), body, post, reg).holds);
  }
  SUBCASE("false triple reports a negative margin") {
    const auto r = check_hoare(id_pred(bse), at_path(bse.body, {0}), lift(k1, {"q1"}, bse.reg), bse.reg);
    CHECK_FALSE(r.holds);
    CHECK(r.margin == doctest::Approx(-1.0));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(check_hoare(ComplexMatrix::identity(4), ssp.body, id_pred(ssp), reg), DimensionError);
  }
  SUBCASE("coarse loop truncation leaves the triple undecided") {
    LogicOptions opts;
    opts.denote.loop_tol = 1e-2;
    const Program loop = at_path(ssp.body, {1});
    CHECK_THROWS_AS(check_hoare(id_pred(ssp), loop, id_pred(ssp), reg, opts), Unconverged);
    CHECK(check_hoare(id_pred(ssp), loop, id_pred(ssp), reg).holds);
  }
}

TEST_CASE("loop boundedness") {
  SUBCASE("Bernoulli factory is (1/2, 1)-bounded") {
    const auto e = load("qbf");
    const Program loop = at_path(e.body, {4});
    const auto b = boundedness(loop, e.reg, 1);
    REQUIRE(b.bounded);
    CHECK(b.certificate.a == 0.5);
    CHECK(b.certificate.n == 1);
    const auto s = boundedness_search(loop, e.reg, 10);
    REQUIRE(s.bounded);
    CHECK(s.certificate.n == 1);
    CHECK(s.certificate.a == 0.5);
  }
  SUBCASE("slow state preparation is (1/2, 1)-bounded") {
    const auto e = load("ssp");
    const auto b = boundedness(at_path(e.body, {1}), e.reg, 1);
    REQUIRE(b.bounded);
    CHECK(b.certificate.a == 0.5);
  }
  SUBCASE("walk on six points") {
    const auto e = load("qw6");
    const Program loop = at_path(e.body, {4});
    const auto b5 = boundedness(loop, e.reg, 5);
    REQUIRE(b5.bounded);
    CHECK(b5.certificate.a <= 5.0 / 6.0 + 1e-12);
    const auto s = boundedness_search(loop, e.reg, 10);
    REQUIRE(s.bounded);
    CHECK(s.certificate.n <= 5);
    CHECK(verify_certificate(loop, e.reg, s.certificate));
  }
  SUBCASE("a loop that never exits") {
    const auto e = load_text(
        "qubits q;\nmeasurement Stay = { 0: [[0, 0], [0, 0]], 1: [[1, 0], [0, 1]] };\n"
        "while measure Stay[q] = 1 do skip end");
    const auto r = boundedness_search(e.body, e.reg, 10);
    CHECK_FALSE(r.bounded);
    CHECK(r.certificate.a == doctest::Approx(1.0));
    CHECK_FALSE(r.diagnostic.empty());
  }
  SUBCASE("certificates re-check") {
    for (const char* name : {"qbf", "ssp", "qw6", "ftqbf"}) {
      const auto e = load(name);
      std::function<void(const Program&)> walk = [&](const Program& p) {
        if (p.kind() == NodeKind::While) {
          const auto b = boundedness_search(p, e.reg, 10);
          REQUIRE(b.bounded);
          CHECK(verify_certificate(p, e.reg, b.certificate));
          CHECK(loewner_leq(b.certificate.witness, ComplexMatrix::identity(b.certificate.witness.rows()) * 1.0));
          BoundednessCertificate tight = b.certificate;
          tight.a -= 0.01;
          if (tight.a >= 0.0) CHECK_FALSE(verify_certificate(p, e.reg, tight));
        }
        for (const auto& c : p.children()) walk(c);
      };
      walk(e.body);
    }
  }
}

TEST_CASE("single rules") {
  const auto e = load("case-demo");
  const ComplexMatrix id = id_pred(e);

  SUBCASE("case rule trade-off between lambda and epsilon") {
    // Both branches at (Q_m, 1 - delta) with delta = 0.05 and epsilon = 0.1.
    auto b0 = weaken_eps(e, apply_rule(e, Rule::Unitary, {}, at({0}, k0, 0.95)), 0.1);
    auto b1 = weaken_eps(e, apply_rule(e, Rule::Skip, {}, at({1}, id, 0.95)), 0.1);
    RuleInput in;
    in.path = {};
    in.t = 0.25;
    auto t = apply_rule(e, Rule::Case, {b0, b1}, in);
    CHECK(t.conclusion.lambda == doctest::Approx(0.9875).epsilon(1e-12));
    CHECK(t.conclusion.epsilon == doctest::Approx(0.325).epsilon(1e-12));
    CHECK(max_abs_diff(t.conclusion.q, id) < 1e-12);
    in.t = 0.5;
    t = apply_rule(e, Rule::Case, {b0, b1}, in);
    CHECK(t.conclusion.lambda == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(t.conclusion.epsilon == doctest::Approx(0.55).epsilon(1e-12));
    in.t = 1.5;
    CHECK_THROWS_AS(apply_rule(e, Rule::Case, {b0, b1}, in), SideConditionFailed);
  }
  SUBCASE("case branches are brought to a common lambda and epsilon") {
    auto b0 = apply_rule(e, Rule::Unitary, {}, at({0}, id, 0.0));
    auto b1 = apply_rule(e, Rule::Skip, {}, at({1}, id, 0.5));
    RuleInput in;
    auto t = apply_rule(e, Rule::Case, {b0, b1}, in);
    CHECK(t.delta == doctest::Approx(0.5));
    CHECK(t.premises[1].rule == Rule::Weaken);
    CHECK(t.premises[1].conclusion.epsilon == doctest::Approx(0.1));
    CHECK(t.conclusion.epsilon == doctest::Approx(0.1));
  }
  SUBCASE("unitary rule under a predicate that hides the error") {
    auto t = apply_rule(e, Rule::Unitary, {}, at({0}, lift(k0, {"q"}, e.reg), 1.0));
    CHECK(t.conclusion.epsilon == doctest::Approx(0.0).epsilon(1e-7));
    auto full = apply_rule(e, Rule::Unitary, {}, at({0}, id, 1.0));
    CHECK(full.conclusion.epsilon == doctest::Approx(0.1).epsilon(1e-7));
  }
  SUBCASE("wrong statement kind") {
    CHECK_THROWS_AS(apply_rule(e, Rule::Skip, {}, at({0}, id, 1.0)), SideConditionFailed);
    CHECK_THROWS_AS(apply_rule(e, Rule::Init, {}, at({7}, id, 1.0)), SideConditionFailed);
  }
  SUBCASE("weaken side conditions") {
    auto s = apply_rule(e, Rule::Skip, {}, at({1}, k1, 0.5));
    RuleInput w = at({1}, k1, 0.6);
    w.epsilon = 0.01;
    CHECK(apply_rule(e, Rule::Weaken, {s}, w).verified());
    w.q = id;  // I is not below |1><1|
    CHECK_THROWS_AS(apply_rule(e, Rule::Weaken, {s}, w), SideConditionFailed);
    w.q = k1;
    w.lambda = 0.4;
    CHECK_THROWS_AS(apply_rule(e, Rule::Weaken, {s}, w), SideConditionFailed);
    auto u = apply_rule(e, Rule::Unitary, {}, at({0}, id, 1.0));
    CHECK_THROWS_AS(weaken_eps(e, u, 0.05), SideConditionFailed);
  }
  SUBCASE("rescale and its inverse") {
    auto u = apply_rule(e, Rule::Unitary, {}, at({0}, lift(k0, {"q"}, e.reg) * 0.8 + k1 * 0.3, 0.7));
    RuleInput r;
    r.delta = 0.3;
    auto down = apply_rule(e, Rule::Rescale, {u}, r);
    CHECK(down.conclusion.lambda == doctest::Approx(0.21));
    CHECK(down.conclusion.epsilon == u.conclusion.epsilon);
    r.delta = 1.0 / 0.3;
    auto back = apply_rule(e, Rule::Rescale, {down}, r);
    CHECK(back.conclusion.lambda == u.conclusion.lambda);
    CHECK(back.conclusion.q.entries() == u.conclusion.q.entries());
    CHECK(back.conclusion.epsilon == u.conclusion.epsilon);
    r.delta = 2.0;  // 1.6 |0><0| is not a predicate
    CHECK_THROWS_AS(apply_rule(e, Rule::Rescale, {u}, r), SideConditionFailed);
  }
}

TEST_CASE("loop rules") {
  const auto e = load("qbf", {{"pV", 1e-3}, {"pU", 2e-3}});
  const ComplexMatrix z = zero_pred(e);
  Annotation none;
  const DerivationTree full = auto_derive(e, none);
  const DerivationTree* wb = nullptr;
  std::function<void(const DerivationTree&)> find = [&](const DerivationTree& t) {
    if (t.rule == Rule::WhileBounded) wb = &t;
    for (const auto& p : t.premises) find(p);
  };
  find(full);
  REQUIRE(wb != nullptr);
  const DerivationTree& body = wb->premises[0];
  // Body: two V gates and one U gate in sequence.
  double eps_v = 0.0, eps_u = 0.0;
  for (const auto& p : body.premises) {
    if (p.conclusion.path == AstPath{4, 0, 2}) eps_v = p.conclusion.epsilon;
    if (p.conclusion.path == AstPath{4, 0, 4}) eps_u = p.conclusion.epsilon;
  }
  CHECK(eps_v == doctest::Approx(1e-3 * 0.75).epsilon(1e-6));
  CHECK(body.conclusion.epsilon == doctest::Approx(2 * eps_v + eps_u).epsilon(1e-12));
  CHECK(wb->conclusion.epsilon == doctest::Approx(4 * eps_v + 2 * eps_u).epsilon(1e-12));

  SUBCASE("certificate is required and checked") {
    RuleInput in = at({4}, z, 0.0);
    CHECK_THROWS_AS(apply_rule(e, Rule::WhileBounded, {body}, in), SideConditionFailed);
    BoundednessCertificate bad;
    bad.a = 0.25;
    bad.n = 1;
    in.certificate = bad;
    CHECK_THROWS_AS(apply_rule(e, Rule::WhileBounded, {body}, in), SideConditionFailed);
  }
  SUBCASE("unbounded rule") {
    auto t = apply_rule(e, Rule::WhileUnbounded, {}, at({4}, z, 0.0));
    CHECK(t.conclusion.epsilon == 1.0);
  }
  SUBCASE("sequence needs the Hoare link") {
    const auto bse = load("bse");
    const ComplexMatrix zq = zero_pred(bse);
    std::vector<DerivationTree> items;
    const ComplexMatrix one = lift(k1, {"q1"}, bse.reg);
    items.push_back(apply_rule(bse, Rule::Init, {}, at({0}, zq, 0.0)));
    items.push_back(apply_rule(bse, Rule::Unitary, {}, at({1}, zq, 0.0)));
    items.push_back(apply_rule(bse, Rule::Unitary, {}, at({2}, one, 0.0)));
    RuleInput in;
    CHECK_NOTHROW(apply_rule(bse, Rule::Sequence, items, in));
    // After one H, |1><1| is not implied by |1><1| before it.
    items[1] = apply_rule(bse, Rule::Unitary, {}, at({1}, one, 0.0));
    CHECK_THROWS_AS(apply_rule(bse, Rule::Sequence, items, in), SideConditionFailed);
  }
}

TEST_CASE("automatic derivations reproduce the case studies") {
  SUBCASE("Bernoulli factory") {
    const auto e = load("qbf");
    const auto t = auto_derive(e);
    CHECK(t.verified());
    CHECK(std::abs(t.conclusion.epsilon - 1.875e-5) <= 1e-9 * 1.875e-5);
    const DerivationTree& loop = t.premises.back();
    REQUIRE(loop.rule == Rule::WhileBounded);
    CHECK(loop.certificate->a == 0.5);
    CHECK(loop.certificate->n == 1);
  }
  SUBCASE("walk on six points") {
    const auto e = load("qw6");
    const auto t = auto_derive(e, annotation(e, "qw6"));
    CHECK(t.verified());
    CHECK(t.conclusion.epsilon == doctest::Approx(1.125e-3).epsilon(1e-8 / 1.125e-3));
    // The unpinned search certifies a smaller a at the same n.
    const auto free = auto_derive(e);
    CHECK(free.conclusion.epsilon < t.conclusion.epsilon);
  }
  SUBCASE("slow state preparation") {
    const auto e = load("ssp");
    const auto annotated = auto_derive(e, annotation(e, "ssp"));
    CHECK(annotated.verified());
    CHECK(annotated.conclusion.epsilon == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(annotated.conclusion.lambda == 1.0);
    CHECK(max_abs_diff(annotated.conclusion.q, id_pred(e)) < 1e-12);
    const auto plain = auto_derive(e);
    CHECK(plain.conclusion.epsilon == doctest::Approx(0.02).epsilon(1e-6));
  }
  SUBCASE("fault-tolerant Bernoulli factory") {
    for (double p : {1e-3, 1e-2}) {
      const auto e = load("ftqbf", {{"p", p}});
      const auto t = auto_derive(e, annotation(e, "ftqbf"));
      CHECK(t.verified());
      const double q = 3 * p * p * (1 - p) + p * p * p;
      CHECK(t.conclusion.epsilon == doctest::Approx(4 * q + 2 * (2 * q - q * q)).epsilon(1e-6));
    }
  }
  SUBCASE("noisy Hadamard behind a measurement") {
    const auto e = load("case-demo");
    const auto annotated = auto_derive(e, annotation(e, "case-demo"));
    CHECK(annotated.conclusion.epsilon == doctest::Approx(0.0).epsilon(1e-7));
    const auto plain = auto_derive(e);
    CHECK(plain.conclusion.epsilon == doctest::Approx(0.1).epsilon(1e-7));
    CHECK(resolved_default(e.body, {}) == DefaultPrecondition::Universal);
    // Without a pinned t the Case node carries the whole frontier.
    CHECK(plain.frontier.size() == 21);
  }
}

TEST_CASE("semantic robustness of the error-correction programs") {
  SUBCASE("values at p = 0.1") {
    CHECK(semantic_robustness(load("p1", {{"p", 0.1}})).value == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(semantic_robustness(load("p2", {{"p", 0.1}})).value == doctest::Approx(0.028).epsilon(1e-6));
    CHECK(semantic_robustness(load("p3", {{"p", 0.1}})).value == doctest::Approx(0.244).epsilon(1e-6));
    CHECK(semantic_robustness(load("sp")).value == doctest::Approx(0.01).epsilon(1e-6));
  }
  SUBCASE("curves and ordering") {
    for (double p : {0.05, 0.1, 0.2, 0.3, 0.4}) {
      const double e1 = semantic_robustness(load("p1", {{"p", p}})).value;
      const double e2 = semantic_robustness(load("p2", {{"p", p}})).value;
      const double e3 = semantic_robustness(load("p3", {{"p", p}})).value;
      CHECK(std::abs(e1 - p) <= 1e-4);
      CHECK(std::abs(e2 - (3 * p * p - 2 * p * p * p)) <= 1e-4);
      CHECK(std::abs(e3 - (3 * p * (1 - p) * (1 - p) + p * p * p)) <= 1e-4);
      CHECK(e2 < e1);
      CHECK(e1 < e3);
    }
  }
}

TEST_CASE("derivations are sound on the corpus") {
  auto check_tree = [](const Elaborated& e, const DerivationTree& t) {
    CHECK(t.verified());
    const auto s = semantic_robustness(e, t.conclusion.q, t.conclusion.lambda);
    CHECK(s.value <= t.conclusion.epsilon + s.residual + 1e-6);
  };
  for (const char* name : kPrograms) {
    CAPTURE(name);
    const auto e = load(name);
    check_tree(e, auto_derive(e));
  }
  for (const char* name : kAnnotated) {
    CAPTURE(name);
    const auto e = load(name);
    check_tree(e, auto_derive(e, annotation(e, name)));
  }
}

TEST_CASE("error scaling of the two Bernoulli factories") {
  for (double p : {1e-3, 1e-2}) {
    const auto plain = auto_derive(load("qbf", {{"pV", p}, {"pU", p}}));
    const double r = plain.conclusion.epsilon / p;
    CHECK(r >= 3.9);
    CHECK(r <= 6.1);
  }
  // The encoded version shrinks quadratically: eps / p^2 barely moves across a decade of p.
  std::vector<double> ratios;
  for (double p : {1e-3, 1e-2}) {
    const auto e = load("ftqbf", {{"p", p}});
    ratios.push_back(auto_derive(e, annotation(e, "ftqbf")).conclusion.epsilon / (p * p));
  }
  CHECK(ratios[1] / ratios[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("weakening every step keeps derivations valid") {
  for (const char* name : {"qbf", "ssp", "p2", "case-demo"}) {
    CAPTURE(name);
    const auto e = load(name);
    const auto t = auto_derive(e);
    const auto inflated = inflate(e, t, 0.01);
    CHECK(inflated.verified());
    CHECK(inflated.conclusion.epsilon >= t.conclusion.epsilon);
  }
}

TEST_CASE("derivation documents") {
  for (const char* name : kAnnotated) {
    CAPTURE(name);
    const auto e = load(name);
    const auto t = auto_derive(e, annotation(e, name));
    const std::string doc = derivation_to_json(t);
    const auto back = recheck_derivation(e, doc);
    CHECK(derivation_to_json(back) == doc);
  }
  const auto e = load("qbf");
  auto doc = nlohmann::json::parse(derivation_to_json(auto_derive(e)));
  doc["derivation"]["conclusion"]["epsilon"] = 1e-6;
  CHECK_THROWS_AS(recheck_derivation(e, doc.dump()), SideConditionFailed);
  doc["derivation"]["conclusion"]["epsilon"] = 1.875e-5;
  doc["derivation"]["premises"][4]["certificate"]["a"] = 0.25;
  CHECK_THROWS_AS(recheck_derivation(e, doc.dump()), SideConditionFailed);
  CHECK_THROWS_AS(recheck_derivation(e, "{\"version\": 2}"), ValidationError);
}

TEST_CASE("annotation documents") {
  const auto e = load("ssp");
  CHECK_NOTHROW(parse_annotation(R"({"version": 1, "default": "universal", "sites": []})", e));
  CHECK_THROWS_AS(parse_annotation(R"({"version": 3})", e), ValidationError);
  CHECK_THROWS_AS(parse_annotation("not json", e), ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"version": 1, "sites": [{"path": [5]}]})", e), ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"version": 1, "sites": [{"path": [1], "lambda": 2}]})", e), ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"version": 1, "sites": [{"path": [1], "Q": "2 * I", "vars": ["q"]}]})", e),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"version": 1, "sites": [{"path": [1], "rule": "magic"}]})", e),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"version": 1, "default": "sometimes"})", e), ValidationError);
  const auto a = parse_annotation(R"({"version": 1, "sites": [{"path": [1], "Q": "[[1]]", "lambda": 0.5,
                                        "loop": {"n": 2, "n_max": 4}}]})", e);
  const auto& s = a.sites.at({1});
  CHECK(max_abs_diff(*s.q, id_pred(e)) == 0.0);
  CHECK(*s.loop_n == 2);
  CHECK(*s.n_max == 4);
  // A pinned a below the true value is rejected by the loop rule.
  const auto tight = parse_annotation(R"({"version": 1, "sites": [{"path": [1], "loop": {"n": 1, "a": 0.3}}]})", e);
  CHECK_THROWS_AS(auto_derive(e, tight), SideConditionFailed);
}
