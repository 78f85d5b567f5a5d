#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qrobust/semantics.hpp"
#include "test_support.hpp"

using namespace qrobust;

namespace {

Elaborated load(const std::string& stem, const ParamMap& params = {}) {
  std::ifstream in(std::string(QROBUST_CORPUS_DIR) + "/" + stem + ".qw");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return elaborate(parse(ss.str()), params);
}

Elaborated load_text(const std::string& text) { return elaborate(parse(text)); }

const std::vector<std::string> kCorpus = {"bse", "noisy-bse", "ssp", "sp",    "qbf",      "qw6",
                                          "p1",  "p2",        "p3",  "ftqbf", "case-demo"};

ComplexMatrix ket_dm(const std::string& bits) { return projector(basis_ket(bits)); }

// Output of the full program on rho, ancillas traced, as predicted by the reduced denotation.
ComplexMatrix via_denotation(const Elaborated& e, const DenotedMap& m, const ComplexMatrix& rho) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < e.reg.size(); ++i)
    if (std::find(m.inputs.begin(), m.inputs.end(), e.reg[i]) != m.inputs.end()) keep.push_back(i);
  const ComplexMatrix reduced = partial_trace(rho, std::vector<std::size_t>(e.reg.size(), 2), keep);
  return m.apply(reduced);
}

ComplexMatrix trace_ancillas(const Elaborated& e, const ComplexMatrix& full) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < e.reg.size(); ++i)
    if (std::find(e.ancillas.begin(), e.ancillas.end(), e.reg[i]) == e.ancillas.end()) keep.push_back(i);
  if (keep.size() == e.reg.size()) return full;
  return partial_trace(full, std::vector<std::size_t>(e.reg.size(), 2), keep);
}

}  // namespace

TEST_CASE("beam splitter steps through four configurations") {
  const auto e = load("bse");
  std::vector<Configuration> seen;
  OperationalOptions opts;
  opts.observer = [&](const Configuration& c) { seen.push_back(c); };
  const auto r = run_operational(e.body, e.reg, ket_dm("1"), opts);
  REQUIRE(seen.size() == 4);
  CHECK(max_abs_diff(seen[0].state, ket_dm("1")) < 1e-14);
  CHECK(seen[1].program.kind() == NodeKind::Seq);
  CHECK(max_abs_diff(seen[1].state, ket_dm("0")) < 1e-14);
  CHECK(seen[2].program.kind() == NodeKind::Unitary);
  const ComplexMatrix plus = projector(ComplexMatrix{{1 / std::sqrt(2.0)}, {1 / std::sqrt(2.0)}});
  CHECK(max_abs_diff(seen[2].state, plus) < 1e-14);
  CHECK(seen[3].terminated());
  CHECK(max_abs_diff(r.state, ket_dm("0")) < 1e-14);
  CHECK(r.residual == 0.0);
  CHECK(r.steps == 3);
}

TEST_CASE("noisy beam splitter output") {
  const auto e = load("noisy-bse");
  const auto r = run_operational(e.body, e.reg, ket_dm("1"));
  CHECK(std::abs(r.state(0, 0).real() - 0.91) < 1e-12);
  CHECK(std::abs(r.state(1, 1).real() - 0.09) < 1e-12);
  CHECK(std::abs(r.state(0, 1)) < 1e-12);
}

TEST_CASE("skip steps to termination") {
  const auto e = load_text("program s\nqubits q;\nskip");
  const ComplexMatrix rho = testsupport::random_density(2);
  const auto next = step({e.body, rho}, e.reg);
  REQUIRE(next.size() == 1);
  CHECK(next[0].terminated());
  CHECK(max_abs_diff(next[0].state, rho) == 0.0);
  CHECK(max_abs_diff(denote(e.body, e.reg).choi, choi(Superoperator::identity(2))) < 1e-14);
  CHECK_THROWS_AS(step(next[0], e.reg), Error);
}

TEST_CASE("operational examples") {
  const auto bse = load("bse");
  for (int t = 0; t < 5; ++t) {
    const auto r = run_operational(bse.body, bse.reg, testsupport::random_density(2));
    CHECK(max_abs_diff(r.state, ket_dm("0")) < 1e-12);
  }
  const auto ssp = load("ssp", {{"p", 0.0}});
  const auto r = run_operational(ssp.body, ssp.reg, ket_dm("0"));
  CHECK(max_abs_diff(r.state, ket_dm("1")) < 1e-11);
  CHECK(r.residual <= 1e-12 * static_cast<double>(r.steps));
  CHECK(r.residual > 0.0);

  OperationalOptions tight;
  tight.step_budget = 10;
  CHECK_THROWS_AS(run_operational(ssp.body, ssp.reg, ket_dm("0"), tight), BudgetExceeded);
  CHECK_THROWS_AS(run_operational(ssp.body, ssp.reg, ComplexMatrix::identity(4)), DimensionError);
}

TEST_CASE("denotation examples") {
  const auto bse = load("bse");
  const auto m = denote(bse.body, bse.reg);
  CHECK(max_abs_diff(m.choi, kron(ket_dm("0"), ComplexMatrix::identity(2))) < 1e-12);

  const double p = 0.1;
  const auto p2 = load("p2", {{"p", p}});
  const auto d = denote_program(p2);
  REQUIRE(d.d_in == 2);
  REQUIRE(d.d_out == 2);
  CHECK(d.inputs == Register{"q1"});
  const double keep = std::pow(1 - p, 3) + 3 * p * (1 - p) * (1 - p);
  const double flip = 3 * p * p * (1 - p) + std::pow(p, 3);
  const Superoperator expect = mix(flip, Superoperator::identity(2), Superoperator::unitary(builtins::gate("X")));
  CHECK(std::abs(keep + flip - 1) < 1e-15);
  CHECK(max_abs_diff(d.choi, choi(expect)) < 1e-12);

  const auto qbf = load("qbf");
  const Program id = ideal(qbf.body);
  const auto q = denote(id, qbf.reg);
  CHECK(max_abs_diff(q.input_marginal(), ComplexMatrix::identity(4)) < 1e-10);
  CHECK(q.residual <= 1e-12);
  CHECK(q.converged);
  // Output is |0>|0> with the amplified probability in q1... the map is constant.
  const auto qr = denote_program(qbf, id);
  CHECK(qr.d_in == 1);
  CHECK(std::abs(trace(qr.choi).real() - 1.0) < 1e-10);
}

TEST_CASE("loop budget") {
  const auto forever = load_text("program f\nqubits q;\nq := H[q];\nwhile measure std[q] = 1 do q := X[q]; q := X[q] end");
  DenoteOptions o;
  o.k_max = 50;
  CHECK_THROWS_AS(denote(forever.body, forever.reg, o), BudgetExceeded);
  CHECK_THROWS_AS(heisenberg(forever.body, forever.reg, ComplexMatrix::identity(2), o), BudgetExceeded);
}

TEST_CASE("operational and denotational semantics agree") {
  // Heavier programs get fewer random inputs.
  for (const auto& stem : kCorpus) {
    CAPTURE(stem);
    const auto e = load(stem);
    const auto m = denote_program(e);
    const std::size_t dim = std::size_t{1} << e.reg.size();
    // The fault-tolerant factory branches on every syndrome; fewer inputs and coarser pruning keep it quick.
    const bool heavy = e.reg.size() > 5;
    const int trials = heavy ? 3 : 20;
    OperationalOptions oo;
    oo.cutoff = heavy ? 1e-9 : 1e-12;
    for (int t = 0; t < trials; ++t) {
      const ComplexMatrix rho = testsupport::random_density(dim);
      const auto op = run_operational(e.body, e.reg, rho, oo);
      const ComplexMatrix lhs = trace_ancillas(e, op.state);
      const ComplexMatrix rhs = via_denotation(e, m, rho);
      CHECK(0.5 * trace_norm(lhs - rhs) <= 2 * (op.residual + m.residual) + 1e-9);
    }
  }
}

TEST_CASE("merging equal configurations does not change the result") {
  for (const std::string stem : {"ssp", "p2", "qbf", "case-demo"}) {
    CAPTURE(stem);
    const auto e = load(stem);
    const ComplexMatrix rho = testsupport::random_density(std::size_t{1} << e.reg.size());
    OperationalOptions plain;
    plain.merge = false;
    const auto a = run_operational(e.body, e.reg, rho, plain);
    const auto b = run_operational(e.body, e.reg, rho);
    CHECK(0.5 * trace_norm(a.state - b.state) <= a.residual + b.residual + 1e-12);
    CHECK(b.steps <= a.steps);
  }
}

TEST_CASE("denotations are trace-non-increasing and noise-free at p = 0") {
  for (const auto& stem : kCorpus) {
    CAPTURE(stem);
    const auto e = load(stem);
    const auto m = denote_program(e);
    CHECK(is_psd(m.choi, 1e-9));
    CHECK(loewner_leq(m.input_marginal(), ComplexMatrix::identity(m.d_in), 1e-9));
    for (int t = 0; t < 5; ++t) {
      const ComplexMatrix out = m.apply(testsupport::random_density(m.d_in));
      CHECK(trace(out).real() <= 1.0 + 1e-9);
    }
    const auto zero = denote_program(e, zero_noise(e.body));
    const auto clean = denote_program(e, ideal(e.body));
    CHECK(max_abs_diff(zero.choi, clean.choi) <= 1e-10);
  }
}

TEST_CASE("Heisenberg picture matches the Schroedinger picture") {
  for (const auto& stem : kCorpus) {
    const auto e = load(stem);
    if (e.reg.size() > 4) continue;
    CAPTURE(stem);
    DenoteOptions fast;
    fast.check_monotone = false;
    const auto m = denote(e.body, e.reg, fast);
    const std::size_t dim = std::size_t{1} << e.reg.size();
    for (int t = 0; t < 5; ++t) {
      const ComplexMatrix a = testsupport::random_hermitian(dim);
      const ComplexMatrix rho = testsupport::random_density(dim);
      const auto dual = heisenberg(e.body, e.reg, a);
      const double lhs = trace(a * m.apply(rho)).real();
      const double rhs = trace(dual.matrix * rho).real();
      CHECK(std::abs(lhs - rhs) <= 1e-9 + dual.residual + m.residual * max_abs(a) * dim);
    }
  }
}

TEST_CASE("reset defect and output tracing") {
  const auto e = load("p2", {{"p", 0.2}});
  const auto full = denote(e.body, e.reg, initialized_first(e.body, e.reg), {});
  CHECK(full.d_out == 32);
  CHECK(reset_defect(full, {"q4", "q5"}) < 1e-12);
  const auto flip = load_text("program f\nqubits q r;\nq := |1>;\nr := H[r]");
  CHECK(std::abs(reset_defect(denote(flip.body, flip.reg), {"q"}) - 1.0) < 1e-12);
  CHECK(reset_defect(denote(flip.body, flip.reg), {"r"}) > 0.49);
  const auto traced = trace_outputs(full, e.ancillas);
  CHECK(max_abs_diff(traced.choi, denote_program(e).choi) < 1e-12);
}
