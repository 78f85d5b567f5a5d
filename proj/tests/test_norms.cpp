#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "qrobust/norms.hpp"
#include "test_support.hpp"

using namespace qrobust;

namespace {

Superoperator gate_channel(const char* name) { return Superoperator::unitary(builtins::gate(name)); }

// H o H against the error HZ o ZH.
Superoperator hz_error() { return Superoperator::unitary(builtins::gate("H") * builtins::gate("Z")); }

Superoperator random_channel(std::size_t d, std::size_t kraus) {
  // Normalise a random Kraus family: E_k S^{-1/2} with S = sum E_k^dag E_k.
  std::vector<ComplexMatrix> ks;
  ComplexMatrix s(d, d);
  for (std::size_t k = 0; k < kraus; ++k) {
    ks.push_back(testsupport::random_matrix(d, d));
    s += dagger(ks.back()) * ks.back();
  }
  const Spectrum sp = hermitian_eig(s);
  ComplexMatrix inv_sqrt(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    ComplexMatrix v(d, 1);
    for (std::size_t r = 0; r < d; ++r) v(r, 0) = sp.eigenvectors(r, i);
    inv_sqrt += projector(v) * cplx(1.0 / std::sqrt(sp.eigenvalues[i]));
  }
  for (auto& k : ks) k = k * inv_sqrt;
  return Superoperator(ks);
}

ComplexMatrix ket(std::initializer_list<cplx> v) {
  ComplexMatrix k(v.size(), 1);
  std::size_t i = 0;
  for (auto x : v) k(i++, 0) = x;
  return k * cplx(1.0 / frobenius_norm(k));
}

}  // namespace

TEST_CASE("trace distance") {
  const auto zero = DensityOperator::basis("0"), one = DensityOperator::basis("1");
  CHECK(std::abs(trace_distance(zero, one) - 1.0) < 1e-12);
  CHECK(trace_distance(zero, zero) == doctest::Approx(0.0));
  const auto plus = DensityOperator::from_ket(ket({1, 1}));
  CHECK(std::abs(trace_distance(zero, plus) - 1 / std::sqrt(2.0)) < 1e-12);
  CHECK_THROWS_AS(trace_distance(zero.matrix(), ComplexMatrix::identity(4)), DimensionError);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = testsupport::random_density(4), b = testsupport::random_density(4);
    const double v = trace_distance(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("sdp anchors") {
  SdpInstance inst;
  inst.objective = ComplexMatrix::identity(4);
  inst.d_out = 2;
  inst.d_in = 2;
  inst.q = ComplexMatrix::identity(2);
  const auto sol = sdp_solve(inst);
  CHECK(std::abs(sol.value - 2.0) < 1e-7);
  CHECK(sol.duality_gap <= 1e-7);
  CHECK(std::abs(trace(sol.rho).real() - 1.0) < 1e-9);
  CHECK(is_psd(sol.w, 1e-9));
  CHECK(loewner_leq(sol.w, kron(ComplexMatrix::identity(2), sol.sigma), 1e-8));

  inst.q = projector(basis_ket("0"));
  inst.lambda = 1.5;
  CHECK_THROWS_AS(sdp_solve(inst), Infeasible);

  inst.objective = ComplexMatrix(4, 4);
  inst.lambda = 0.5;
  CHECK(sdp_solve(inst).value == 0.0);
  CHECK_THROWS_AS(sdp_solve({ComplexMatrix::identity(3), 2, 2, {}, 0.0}), DimensionError);
}

TEST_CASE("diamond norm anchors") {
  const auto h = gate_channel("H");
  CHECK(std::abs(diamond_norm(h, hz_error()) - 1.0) < 1e-6);
  CHECK(std::abs(diamond_norm(builtins::channel("depolarizing", {1}), Superoperator::identity(2)) - 0.75) < 1e-6);
  const auto u = Superoperator::unitary(builtins::gate("QBF_U"));
  CHECK(std::abs(diamond_norm(builtins::channel("depolarizing", {2}), u) - 0.9375) < 1e-6);
  CHECK(std::abs(diamond_norm(h, h)) < 1e-7);
  CHECK(std::abs(diamond_norm(gate_channel("X"), gate_channel("X"))) < 1e-12);
}

TEST_CASE("constrained diamond norm anchors") {
  const auto h = gate_channel("H");
  const Predicate p0(projector(basis_ket("0")));
  CHECK(std::abs(q_lambda_diamond_norm(h, hz_error(), p0, 0.75) - std::sqrt(3.0) / 2) < 1e-6);
  CHECK(std::abs(q_lambda_diamond_norm(h, hz_error(), p0, 0.0) - 1.0) < 1e-6);
  CHECK(std::abs(q_lambda_diamond_norm(h, hz_error(), Predicate::identity(2), 1.0) - 1.0) < 1e-6);
  // Noisy SSP loop body against its ideal version.
  const auto noisy = mix(0.01, h, Superoperator::unitary(builtins::gate("X") * builtins::gate("H")));
  CHECK(std::abs(q_lambda_diamond_norm(h, noisy, p0, 1.0)) < 1e-7);
  CHECK(std::abs(diamond_norm(h, noisy) - 0.01) < 1e-7);
}

TEST_CASE("threshold edges") {
  const auto h = gate_channel("H");
  SdpInstance inst{choi(h) - choi(hz_error()), 2, 2, projector(basis_ket("0")), 1.0};
  const auto face = sdp_solve(inst);
  CHECK(face.face_reduced);
  CHECK(face.value < 1e-7);
  inst.lambda = 1.0 + 5e-10;
  CHECK(sdp_solve(inst).face_reduced);
  inst.lambda = 0.0;
  CHECK(sdp_solve(inst).constraint_dropped);
  CHECK_THROWS_AS(sdp_solve({choi(h), 2, 2, {}, -0.5}), Error);
}

TEST_CASE("rectangular maps") {
  // Preparation |0> from a trivial input versus preparation of |+>.
  const ComplexMatrix j0 = projector(basis_ket("0"));
  const ComplexMatrix jp = projector(ket({1, 1}));
  const double v = q_lambda_diamond_norm_choi(j0 - jp, 2, 1, {}, 0.0);
  CHECK(std::abs(v - 1 / std::sqrt(2.0)) < 1e-7);
  // Discarding a qubit versus measuring then discarding.
  const Superoperator discard({ComplexMatrix{{1, 0}}, ComplexMatrix{{0, 1}}});
  CHECK(discard.d_out() == 1);
  CHECK(std::abs(q_lambda_diamond_norm(discard, discard, Predicate::identity(2), 0.0)) < 1e-7);
}

TEST_CASE("sampling oracle") {
  const auto h = gate_channel("H");
  CHECK(sampled_lower_bound(h, hz_error(), Predicate::identity(2), 0.0, 500, 7) >= 0.99);
  CHECK(sampled_lower_bound(h, h, Predicate::identity(2), 0.0, 0, 1) == 0.0);
  CHECK(sampled_lower_bound(h, hz_error(), Predicate::identity(2), 0.0, 0, 1) == 0.0);
  const Predicate p0(projector(basis_ket("0")));
  CHECK(sampled_lower_bound(h, hz_error(), p0, 0.75, 400, 3) <= std::sqrt(3.0) / 2 + 1e-9);
  CHECK(sampled_lower_bound(h, hz_error(), p0, 0.75, 400, 3) >= std::sqrt(3.0) / 2 - 0.05);
}

TEST_CASE("complex predicates use the input state, not its transpose") {
  // |+i><+i| is not real, so Q and Q^T differ.
  const Predicate qi(projector(ket({1, cplx(0, 1)})));
  for (int t = 0; t < 4; ++t) {
    const auto e = random_channel(2, 2), f = random_channel(2, 2);
    const double v = q_lambda_diamond_norm(e, f, qi, 0.9);
    const double s = sampled_lower_bound(e, f, qi, 0.9, 600, 11 + t);
    CHECK(s <= v + 1e-6);
    CHECK(s >= v - 0.05);
  }
}

TEST_CASE("seminorm properties on random channels") {
  for (int t = 0; t < 6; ++t) {
    const auto e = random_channel(2, 2), e2 = random_channel(2, 3), f = random_channel(2, 2),
               f2 = random_channel(2, 1);
    const Predicate q(hermitian_part(testsupport::random_density(2)) * cplx(0.9));
    const double lam = 0.3 * max_eigenvalue(q.matrix());
    const ComplexMatrix d1 = choi(e) - choi(e2), d2 = choi(f) - choi(f2);
    const double n1 = q_lambda_diamond_norm_choi(d1, 2, 2, q.matrix(), lam);
    const double n2 = q_lambda_diamond_norm_choi(d2, 2, 2, q.matrix(), lam);
    const double n12 = q_lambda_diamond_norm_choi(d1 + d2, 2, 2, q.matrix(), lam);
    CHECK(n1 >= -1e-9);
    CHECK(n12 <= n1 + n2 + 1e-6);
    const double scaled = q_lambda_diamond_norm_choi(d1 * cplx(0.37), 2, 2, q.matrix(), lam);
    CHECK(std::abs(scaled - 0.37 * n1) < 1e-6);
    // More demanding thresholds shrink the feasible set.
    double prev = 2.0;
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double v = q_lambda_diamond_norm_choi(d1, 2, 2, q.matrix(), l * max_eigenvalue(q.matrix()));
      CHECK(v <= prev + 1e-7);
      prev = v;
    }
    const double full = q_lambda_diamond_norm_choi(d1, 2, 2, {}, 0.0);
    CHECK(n1 <= full + 1e-7);
    CHECK(full <= 1.0 + 1e-7);
    CHECK(sampled_lower_bound_choi(d1, 2, 2, q.matrix(), lam, 200, 5 + t) <= n1 + 1e-6);
  }
}

TEST_CASE("two-qubit channels") {
  for (int t = 0; t < 2; ++t) {
    const auto e = random_channel(4, 2), f = random_channel(4, 2);
    const double v = diamond_norm(e, f);
    CHECK(v <= 1.0 + 1e-7);
    CHECK(sampled_lower_bound(e, f, Predicate::identity(4), 0.0, 200, 9) <= v + 1e-6);
    CHECK(std::abs(diamond_norm(e, f) - diamond_norm(f, e)) < 1e-6);
  }
}

TEST_CASE("SDPA dump") {
  SdpOptions o;
  o.dump_path = "qrobust_test_dump.dat-s";
  diamond_norm(gate_channel("H"), hz_error(), o);
  std::ifstream in(o.dump_path);
  REQUIRE(in.good());
  std::string first, m;
  std::getline(in, first);
  std::getline(in, m);
  CHECK(first.front() == '"');
  CHECK(std::stoi(m) == 16 + 3);
  in.close();
  std::remove(o.dump_path.c_str());
  SdpOptions tiny;
  tiny.max_variables = 10;
  CHECK_THROWS_AS(diamond_norm(gate_channel("H"), hz_error(), tiny), NumericalFailure);
}
