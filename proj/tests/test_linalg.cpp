#include <cmath>

#include "doctest.h"
#include "qrobust/linalg.hpp"
#include "test_support.hpp"

using namespace qrobust;
using testsupport::random_density;
using testsupport::random_hermitian;
using testsupport::random_matrix;

namespace {
const double r2 = 1.0 / std::sqrt(2.0);
const ComplexMatrix I2 = ComplexMatrix::identity(2);
const ComplexMatrix X{{0, 1}, {1, 0}};
const ComplexMatrix Z{{1, 0}, {0, -1}};
const ComplexMatrix H{{r2, r2}, {r2, -r2}};
}  // namespace

TEST_CASE("matmul basics") {
  CHECK(max_abs_diff(I2 * X, X) == 0.0);
  CHECK(max_abs_diff(H * H, I2) < 1e-15);
  ComplexMatrix hz = H * Z;
  CHECK(std::abs(hz(0, 0) - r2) < 1e-15);
  CHECK(std::abs(hz(1, 0) - r2) < 1e-15);
  CHECK(std::abs(hz(0, 1) + r2) < 1e-15);
  CHECK(std::abs(hz(1, 1) - r2) < 1e-15);
  CHECK_THROWS_AS(matmul(ComplexMatrix(2, 3), ComplexMatrix(2, 3)), DimensionError);
}

TEST_CASE("dagger") {
  CHECK(max_abs_diff(dagger(X), X) == 0.0);
  ComplexMatrix k01 = ket_bra(basis_ket("0"), basis_ket("1"));
  CHECK(max_abs_diff(dagger(k01), ket_bra(basis_ket("1"), basis_ket("0"))) == 0.0);
  ComplexMatrix iI = I2 * cplx(0, 1);
  CHECK(max_abs_diff(dagger(iI), I2 * cplx(0, -1)) == 0.0);
}

TEST_CASE("kron") {
  CHECK(max_abs_diff(kron(I2, I2), ComplexMatrix::identity(4)) == 0.0);
  CHECK(max_abs_diff(kron(basis_ket("0"), basis_ket("0")), basis_ket("00")) == 0.0);
  ComplexMatrix m = kron(X, projector(basis_ket("0")));
  CHECK(m(2, 0) == cplx(1.0));
  for (std::size_t i = 0; i < 4; ++i)
    if (i != 2) CHECK(m(i, 0) == cplx(0.0));
}

TEST_CASE("kron associativity and bilinearity") {
  for (int t = 0; t < 10; ++t) {
    ComplexMatrix a = random_matrix(2, 2), b = random_matrix(4, 4), c = random_matrix(2, 2);
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
    ComplexMatrix a2 = random_matrix(2, 2);
    cplx al(0.3, -1.2), be(2.0, 0.5);
    CHECK(max_abs_diff(kron(al * a + be * a2, b), al * kron(a, b) + be * kron(a2, b)) < 1e-12);
  }
}

TEST_CASE("partial trace") {
  CHECK(max_abs_diff(partial_trace(projector(basis_ket("00")), {2, 2}, {0}), projector(basis_ket("0"))) == 0.0);
  ComplexMatrix phi = (basis_ket("00") + basis_ket("11")) * cplx(r2);
  CHECK(max_abs_diff(partial_trace(projector(phi), {2, 2}, {0}), I2 * cplx(0.5)) < 1e-15);
  for (int t = 0; t < 10; ++t) {
    ComplexMatrix rho = random_density(8);
    CHECK(std::abs(trace(partial_trace(rho, {2, 2, 2}, {0, 2})) - trace(rho)) < 1e-12);
    ComplexMatrix all = partial_trace(rho, {2, 2, 2}, {});
    CHECK(all.rows() == 1);
    CHECK(std::abs(all(0, 0) - trace(rho)) < 1e-12);
  }
  // Keeping a middle factor of a product state.
  ComplexMatrix a = random_density(2), b = random_density(4), c = random_density(2);
  CHECK(max_abs_diff(partial_trace(kron(kron(a, b), c), {2, 4, 2}, {1}), b) < 1e-12);
  CHECK(max_abs_diff(partial_trace(kron(kron(a, b), c), {2, 4, 2}, {2, 0}), kron(a, c)) < 1e-12);
  CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(3), {2, 2}, {0}), DimensionError);
}

TEST_CASE("hermitian eigendecomposition examples") {
  auto ez = hermitian_eigenvalues(Z);
  CHECK(ez[0] == doctest::Approx(1.0));
  CHECK(ez[1] == doctest::Approx(-1.0));
  auto eh = hermitian_eigenvalues(H);
  CHECK(eh[0] == doctest::Approx(1.0));
  CHECK(eh[1] == doctest::Approx(-1.0));
  ComplexMatrix plus = (basis_ket("0") + basis_ket("1")) * cplx(r2);
  auto ep = hermitian_eigenvalues(projector(plus));
  CHECK(ep[0] == doctest::Approx(1.0));
  CHECK(std::abs(ep[1]) < 1e-14);
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix{{0, 1}, {0, 0}}), NotHermitianError);
}

TEST_CASE("hermitian eigendecomposition reconstruction up to 64x64") {
  for (std::size_t n : {1u, 2u, 3u, 8u, 17u, 32u, 64u}) {
    ComplexMatrix a = random_hermitian(n);
    Spectrum sp = hermitian_eig(a);
    for (std::size_t k = 1; k < n; ++k) CHECK(sp.eigenvalues[k - 1] >= sp.eigenvalues[k]);
    ComplexMatrix v = sp.eigenvectors;
    std::vector<cplx> d(sp.eigenvalues.begin(), sp.eigenvalues.end());
    ComplexMatrix rec = v * ComplexMatrix::diagonal(d) * dagger(v);
    CHECK(max_abs_diff(rec, a) <= 1e-10);
    CHECK(max_abs_diff(dagger(v) * v, ComplexMatrix::identity(n)) <= tol::orth);
  }
  // Degenerate spectrum.
  ComplexMatrix u = testsupport::random_unitary(6);
  ComplexMatrix deg = u * ComplexMatrix::diagonal({1, 1, 1, 0, 0, -2}) * dagger(u);
  Spectrum sp = hermitian_eig(deg);
  CHECK(max_abs_diff(dagger(sp.eigenvectors) * sp.eigenvectors, ComplexMatrix::identity(6)) <= tol::orth);
  CHECK(sp.eigenvalues[2] == doctest::Approx(1.0));
  CHECK(sp.eigenvalues[5] == doctest::Approx(-2.0));
}

TEST_CASE("trace norm") {
  CHECK(trace_norm(Z) == doctest::Approx(2.0));
  CHECK(trace_norm(random_density(5)) == doctest::Approx(1.0));
  ComplexMatrix plus = (basis_ket("0") + basis_ket("1")) * cplx(r2);
  CHECK(trace_norm(projector(basis_ket("0")) - projector(plus)) == doctest::Approx(std::sqrt(2.0)));
  for (int t = 0; t < 20; ++t) {
    ComplexMatrix a = random_hermitian(4), b = random_hermitian(4);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12);
  }
}

TEST_CASE("loewner order") {
  CHECK(loewner_leq(ComplexMatrix(2, 2), I2));
  CHECK_FALSE(loewner_leq(I2, projector(basis_ket("0"))));
  for (int t = 0; t < 10; ++t) {
    ComplexMatrix a = random_hermitian(5);
    CHECK(loewner_leq(a, a));
    ComplexMatrix p1 = random_density(5), p2 = random_density(5), p3 = random_density(5);
    ComplexMatrix c1 = p1, c2 = p1 + p2, c3 = p1 + p2 + p3;
    CHECK(loewner_leq(c1, c2));
    CHECK(loewner_leq(c2, c3));
    CHECK(loewner_leq(c1, c3));
  }
  CHECK_THROWS_AS(loewner_leq(I2, ComplexMatrix::identity(3)), DimensionError);
}

TEST_CASE("psd square root") {
  ComplexMatrix rho = random_density(4);
  ComplexMatrix s = psd_sqrt(rho);
  CHECK(max_abs_diff(s * s, rho) < 1e-12);
}

TEST_CASE("real kernels") {
  RealMatrix a(3, 3);
  double vals[9] = {4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2};
  for (int i = 0; i < 9; ++i) a.data()[i] = vals[i];
  RealMatrix l;
  REQUIRE(cholesky(a, l));
  RealMatrix llt = matmul(l, transpose(l));
  for (int i = 0; i < 9; ++i) CHECK(llt.data()[i] == doctest::Approx(vals[i]));
  std::vector<double> b{1, 2, 3};
  cholesky_solve(l, b);
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += a(i, j) * b[j];
    CHECK(s == doctest::Approx(i + 1.0));
  }
  RealMatrix inv = cholesky_inverse(l);
  RealMatrix id = matmul(inv, a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  RealSpectrum rs = symmetric_eig(a);
  double tr = 0.0;
  for (double e : rs.eigenvalues) tr += e;
  CHECK(tr == doctest::Approx(9.0));
  CHECK(rs.eigenvalues[0] <= rs.eigenvalues[1]);
  RealMatrix neg = a * -1.0;
  CHECK_FALSE(cholesky(neg, l));
  ComplexMatrix h = random_hermitian(3);
  CHECK(max_abs_diff(complexify(realify(h)), h) < 1e-15);
  auto re = symmetric_eig(realify(h), false).eigenvalues;
  auto he = hermitian_eigenvalues(h);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(re[2 * k] == doctest::Approx(he[2 - k]));
    CHECK(re[2 * k + 1] == doctest::Approx(he[2 - k]));
  }
}

TEST_CASE("smallest symmetric eigenvalue agrees with Jacobi") {
  for (std::size_t n : {1, 2, 3, 8, 32, 65}) {
    CAPTURE(n);
    const RealMatrix a = realify(random_hermitian(n)) * 1.0;
    const double jac = symmetric_eig(a, false).eigenvalues.front();
    CHECK(std::abs(symmetric_min_eigenvalue(a) - jac) <= 1e-10 * std::max(1.0, std::abs(jac)));
  }
  // Repeated and singular spectra: diag(2, 0, 0, 5) rotated.
  const ComplexMatrix u = testsupport::random_unitary(4);
  const ComplexMatrix h = hermitian_part(u * ComplexMatrix::diagonal({2, 0, 0, 5}) * dagger(u));
  CHECK(std::abs(symmetric_min_eigenvalue(realify(h))) <= 1e-12);
  RealMatrix one(1, 1);
  one(0, 0) = -3.5;
  CHECK(symmetric_min_eigenvalue(one) == -3.5);
}
