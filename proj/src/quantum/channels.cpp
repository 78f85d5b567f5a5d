#include <algorithm>
#include <cmath>

#include "qrobust/quantum.hpp"

namespace qrobust {

DensityOperator::DensityOperator(ComplexMatrix mat, double tolerance) : mat_(std::move(mat)) {
  if (!mat_.square() || mat_.empty()) throw DimensionError("density operator must be a non-empty square matrix");
  mat_.check_finite("density operator");
  if (!is_hermitian(mat_, tol::herm)) throw NotHermitianError("density operator is not Hermitian");
  if (min_eigenvalue(mat_) < -tolerance) throw Error("density operator is not positive semidefinite");
  if (trace() > 1.0 + 1e-9) throw Error("density operator has trace above 1");
}

DensityOperator DensityOperator::from_ket(const ComplexMatrix& ket) {
  if (ket.cols() != 1) throw DimensionError("ket must be a column vector");
  return DensityOperator(projector(ket));
}

DensityOperator DensityOperator::basis(const std::string& bits) { return from_ket(basis_ket(bits)); }

Superoperator::Superoperator(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw DimensionError("superoperator needs at least one Kraus operator");
  d_out_ = kraus_.front().rows();
  d_in_ = kraus_.front().cols();
  for (const auto& k : kraus_) {
    if (k.rows() != d_out_ || k.cols() != d_in_) throw DimensionError("Kraus operators have inconsistent shapes");
    k.check_finite("Kraus operator");
  }
}

Superoperator Superoperator::identity(std::size_t d) { return Superoperator({ComplexMatrix::identity(d)}); }

Superoperator Superoperator::unitary(const ComplexMatrix& u) { return Superoperator({u}); }

Superoperator Superoperator::zero(std::size_t d_out, std::size_t d_in) {
  return Superoperator({ComplexMatrix(d_out, d_in)});
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& rho) const {
  if (rho.rows() != d_in_ || rho.cols() != d_in_) {
    throw DimensionError("apply: state dimension " + std::to_string(rho.rows()) + " vs channel input " +
                         std::to_string(d_in_));
  }
  ComplexMatrix out(d_out_, d_out_);
  for (const auto& k : kraus_) out += k * rho * dagger(k);
  return out;
}

DensityOperator Superoperator::apply(const DensityOperator& rho) const {
  return DensityOperator(hermitian_part(apply(rho.matrix())));
}

ComplexMatrix Superoperator::apply_dual(const ComplexMatrix& a) const {
  if (a.rows() != d_out_ || a.cols() != d_out_) throw DimensionError("apply_dual: observable dimension mismatch");
  ComplexMatrix out(d_in_, d_in_);
  for (const auto& k : kraus_) out += dagger(k) * a * k;
  return out;
}

ComplexMatrix Superoperator::kraus_sum() const {
  ComplexMatrix s(d_in_, d_in_);
  for (const auto& k : kraus_) s += dagger(k) * k;
  return s;
}

bool Superoperator::trace_non_increasing(double tolerance) const {
  return loewner_leq(hermitian_part(kraus_sum()), ComplexMatrix::identity(d_in_), tolerance);
}

bool Superoperator::trace_preserving(double tolerance) const {
  return max_abs_diff(kraus_sum(), ComplexMatrix::identity(d_in_)) <= tolerance;
}

Superoperator compose(const Superoperator& e2, const Superoperator& e1) {
  if (e1.d_out() != e2.d_in()) throw DimensionError("compose: inner dimensions differ");
  std::vector<ComplexMatrix> k;
  k.reserve(e1.kraus().size() * e2.kraus().size());
  for (const auto& f : e2.kraus())
    for (const auto& e : e1.kraus()) k.push_back(f * e);
  return Superoperator(std::move(k));
}

Superoperator dual(const Superoperator& e) {
  std::vector<ComplexMatrix> k;
  for (const auto& x : e.kraus()) k.push_back(dagger(x));
  return Superoperator(std::move(k));
}

Superoperator tensor(const Superoperator& a, const Superoperator& b) {
  std::vector<ComplexMatrix> k;
  for (const auto& x : a.kraus())
    for (const auto& y : b.kraus()) k.push_back(kron(x, y));
  return Superoperator(std::move(k));
}

Superoperator scale(const Superoperator& e, double alpha) {
  if (alpha < 0.0) throw Error("scale: factor must be nonnegative");
  std::vector<ComplexMatrix> k;
  const double s = std::sqrt(alpha);
  for (const auto& x : e.kraus()) k.push_back(x * cplx(s));
  return Superoperator(std::move(k));
}

Superoperator sum(const Superoperator& a, const Superoperator& b) {
  if (a.d_in() != b.d_in() || a.d_out() != b.d_out()) throw DimensionError("sum: channel shapes differ");
  std::vector<ComplexMatrix> k = a.kraus();
  k.insert(k.end(), b.kraus().begin(), b.kraus().end());
  return Superoperator(std::move(k));
}

Superoperator mix(double p, const Superoperator& a, const Superoperator& b) {
  if (p < 0.0 || p > 1.0) throw Error("mix: probability outside [0, 1]");
  if (p == 0.0) return a;
  if (p == 1.0) return b;
  return sum(scale(a, 1.0 - p), scale(b, p));
}

ComplexMatrix choi_rect(const Superoperator& e) {
  const std::size_t din = e.d_in(), dout = e.d_out();
  const std::size_t n = dout * din;
  ComplexMatrix j(n, n);
  // Entry ((a,i),(b,k)) = sum_E E[a,i] conj(E[b,k]).
  for (const auto& k : e.kraus()) {
    for (std::size_t a = 0; a < dout; ++a)
      for (std::size_t i = 0; i < din; ++i) {
        const cplx x = k(a, i);
        if (x == cplx(0.0)) continue;
        for (std::size_t b = 0; b < dout; ++b)
          for (std::size_t l = 0; l < din; ++l) j(a * din + i, b * din + l) += x * std::conj(k(b, l));
      }
  }
  return j;
}

ComplexMatrix choi(const Superoperator& e) {
  if (e.d_in() != e.d_out()) throw DimensionError("choi: input and output dimensions differ");
  return choi_rect(e);
}

ComplexMatrix choi_difference(const Superoperator& e, const Superoperator& f) { return choi(e) - choi(f); }

ComplexMatrix apply_choi(const ComplexMatrix& j, const ComplexMatrix& rho, std::size_t d_out, std::size_t d_in) {
  if (j.rows() != d_out * d_in || !j.square()) throw DimensionError("apply_choi: Choi matrix shape mismatch");
  if (rho.rows() != d_in || rho.cols() != d_in) throw DimensionError("apply_choi: state dimension mismatch");
  ComplexMatrix out(d_out, d_out);
  // out[a,b] = sum_{i,k} J[(a,i),(b,k)] rho[i,k]
  for (std::size_t a = 0; a < d_out; ++a)
    for (std::size_t b = 0; b < d_out; ++b) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < d_in; ++i)
        for (std::size_t k = 0; k < d_in; ++k) s += j(a * d_in + i, b * d_in + k) * rho(i, k);
      out(a, b) = s;
    }
  return out;
}

bool same_channel(const Superoperator& e, const Superoperator& f, double tolerance) {
  if (e.d_in() != f.d_in() || e.d_out() != f.d_out()) return false;
  return max_abs_diff(choi_rect(e), choi_rect(f)) <= tolerance;
}

Measurement::Measurement(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw DimensionError("measurement needs at least one outcome");
  dim_ = outcomes_.front().second.cols();
  for (const auto& [label, m] : outcomes_) {
    if (m.rows() != dim_ || m.cols() != dim_) throw DimensionError("measurement operators have inconsistent shapes");
    m.check_finite("measurement operator");
  }
  for (std::size_t i = 0; i < outcomes_.size(); ++i)
    for (std::size_t j = i + 1; j < outcomes_.size(); ++j)
      if (outcomes_[i].first == outcomes_[j].first) throw Error("duplicate measurement label '" + outcomes_[i].first + "'");
}

std::optional<std::size_t> Measurement::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < outcomes_.size(); ++i)
    if (outcomes_[i].first == label) return i;
  return std::nullopt;
}

double Measurement::completeness_defect() const {
  ComplexMatrix s(dim_, dim_);
  for (const auto& o : outcomes_) s += dagger(o.second) * o.second;
  return max_abs_diff(s, ComplexMatrix::identity(dim_));
}

Predicate::Predicate(ComplexMatrix mat, double tolerance) : mat_(std::move(mat)) {
  if (!mat_.square() || mat_.empty()) throw DimensionError("predicate must be a non-empty square matrix");
  mat_.check_finite("predicate");
  if (!is_hermitian(mat_, tol::herm)) throw NotHermitianError("predicate is not Hermitian");
  mat_ = hermitian_part(mat_);
  const auto ev = hermitian_eigenvalues(mat_);
  if (ev.back() < -tolerance || ev.front() > 1.0 + tolerance) {
    throw Error("predicate eigenvalues must lie in [0, 1]");
  }
}

}  // namespace qrobust
