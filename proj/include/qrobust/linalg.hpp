#pragma once

// Dense complex linear algebra used throughout the library.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "qrobust/error.hpp"

namespace qrobust {

using cplx = std::complex<double>;

namespace tol {
inline constexpr double herm = 1e-9;
inline constexpr double eig = 1e-10;
inline constexpr double orth = 1e-9;
inline constexpr double psd = 1e-9;
}  // namespace tol

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(const std::vector<cplx>& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& entries() const { return data_; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  // Throws when any entry is NaN or infinite.
  void check_finite(const char* what) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& a);
ComplexMatrix transpose(const ComplexMatrix& a);
ComplexMatrix conjugate(const ComplexMatrix& a);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
cplx trace(const ComplexMatrix& a);

// Reduced matrix on the subsystems listed in `keep` (order of `keep` is ignored;
// kept factors appear in increasing index order).
ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

double max_abs(const ComplexMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius_norm(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double tolerance = tol::herm);
ComplexMatrix hermitian_part(const ComplexMatrix& a);

// Column vector for a bit string such as "010"; the first character is the most significant factor.
ComplexMatrix basis_ket(const std::string& bits);
ComplexMatrix ket_bra(const ComplexMatrix& ket, const ComplexMatrix& bra_ket);
ComplexMatrix projector(const ComplexMatrix& ket);

struct Spectrum {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns
};

Spectrum hermitian_eig(const ComplexMatrix& a);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a);
double min_eigenvalue(const ComplexMatrix& a);
double max_eigenvalue(const ComplexMatrix& a);
double trace_norm(const ComplexMatrix& a);
bool loewner_leq(const ComplexMatrix& a, const ComplexMatrix& b, double tolerance = tol::psd);
bool is_psd(const ComplexMatrix& a, double tolerance = tol::psd);

// Principal square root of a PSD matrix (negative eigenvalues clipped to zero).
ComplexMatrix psd_sqrt(const ComplexMatrix& a);

// Dense real matrices for the realified solver.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  static RealMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  RealMatrix& operator+=(const RealMatrix& o);
  RealMatrix& operator-=(const RealMatrix& o);
  RealMatrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

RealMatrix operator+(RealMatrix a, const RealMatrix& b);
RealMatrix operator-(RealMatrix a, const RealMatrix& b);
RealMatrix operator*(RealMatrix a, double s);
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
RealMatrix transpose(const RealMatrix& a);
RealMatrix symmetrize(const RealMatrix& a);
double dot(const RealMatrix& a, const RealMatrix& b);

struct RealSpectrum {
  std::vector<double> eigenvalues;  // ascending
  RealMatrix eigenvectors;          // columns
};

// Cyclic Jacobi rotations; input must be symmetric.
RealSpectrum symmetric_eig(const RealMatrix& a, bool want_vectors = true);
// Smallest eigenvalue via Householder tridiagonalisation and Sturm bisection; input must be symmetric.
double symmetric_min_eigenvalue(const RealMatrix& a);

// Lower-triangular L with a = L L^T; returns false when a is not positive definite.
bool cholesky(const RealMatrix& a, RealMatrix& lower);
// Solves L L^T x = b in place given the Cholesky factor.
void cholesky_solve(const RealMatrix& lower, std::vector<double>& b);
// (L L^T)^{-1}
RealMatrix cholesky_inverse(const RealMatrix& lower);
// L^{-1} A L^{-T} for symmetric A.
RealMatrix congruence_by_inverse(const RealMatrix& lower, const RealMatrix& a);

// [[Re, -Im], [Im, Re]]
RealMatrix realify(const ComplexMatrix& h);
ComplexMatrix complexify(const RealMatrix& r);

}  // namespace qrobust
