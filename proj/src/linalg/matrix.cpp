#include <algorithm>
#include <cmath>
#include <numeric>

#include "qrobust/linalg.hpp"

namespace qrobust {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix entry count " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

static void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "subtract");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

void ComplexMatrix::check_finite(const char* what) const {
  for (const auto& x : data_) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
      throw NumericalFailure(std::string(what) + ": non-finite matrix entry");
    }
  }
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx* ci = c.data() + i * m;
    for (std::size_t k = 0; k < n; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* bk = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

ComplexMatrix dagger(const ComplexMatrix& a) {
  ComplexMatrix d(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(j, i) = std::conj(a(i, j));
  return d;
}

ComplexMatrix transpose(const ComplexMatrix& a) {
  ComplexMatrix d(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(j, i) = a(i, j);
  return d;
}

ComplexMatrix conjugate(const ComplexMatrix& a) {
  ComplexMatrix d = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(i, j) = std::conj(a(i, j));
  return d;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t s = 0; s < b.cols(); ++s)
          k(i * b.rows() + r, j * b.cols() + s) = aij * b(r, s);
    }
  return k;
}

cplx trace(const ComplexMatrix& a) {
  if (!a.square()) throw DimensionError("trace of non-square matrix");
  cplx t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw DimensionError("partial_trace: zero subsystem dimension");
    total *= d;
  }
  if (!a.square() || a.rows() != total) {
    throw DimensionError("partial_trace: subsystem dims multiply to " + std::to_string(total) +
                         " but matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) throw DimensionError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  const std::size_t n = dims.size();
  // Strides in the full index.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  std::size_t dk = 1, dt = 1;
  std::vector<std::size_t> kdims, tdims, kstr, tstr;
  for (std::size_t i = 0; i < n; ++i) {
    if (kept[i]) {
      dk *= dims[i];
      kdims.push_back(dims[i]);
      kstr.push_back(stride[i]);
    } else {
      dt *= dims[i];
      tdims.push_back(dims[i]);
      tstr.push_back(stride[i]);
    }
  }
  auto offsets = [](const std::vector<std::size_t>& ds, const std::vector<std::size_t>& st) {
    std::size_t count = 1;
    for (auto d : ds) count *= d;
    std::vector<std::size_t> off(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx, o = 0;
      for (std::size_t j = ds.size(); j-- > 0;) {
        o += (rem % ds[j]) * st[j];
        rem /= ds[j];
      }
      off[idx] = o;
    }
    return off;
  };
  const auto koff = offsets(kdims, kstr);
  const auto toff = offsets(tdims, tstr);
  ComplexMatrix out(dk, dk);
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < dt; ++t) s += a(koff[i] + toff[t], koff[j] + toff[t]);
      out(i, j) = s;
    }
  return out;
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const auto& x : a.entries()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.entries()) s += std::norm(x);
  return std::sqrt(s);
}

bool is_hermitian(const ComplexMatrix& a, double tolerance) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tolerance) return false;
  return true;
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  if (!a.square()) throw DimensionError("hermitian_part of non-square matrix");
  ComplexMatrix h(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return h;
}

ComplexMatrix basis_ket(const std::string& bits) {
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw DimensionError("basis_ket: invalid bit string '" + bits + "'");
    index = index * 2 + static_cast<std::size_t>(c - '0');
  }
  ComplexMatrix k(std::size_t{1} << bits.size(), 1);
  k(index, 0) = 1.0;
  return k;
}

ComplexMatrix ket_bra(const ComplexMatrix& ket, const ComplexMatrix& bra_ket) {
  return matmul(ket, dagger(bra_ket));
}

ComplexMatrix projector(const ComplexMatrix& ket) { return ket_bra(ket, ket); }

RealMatrix RealMatrix::identity(std::size_t n) {
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

RealMatrix& RealMatrix::operator+=(const RealMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("real add: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

RealMatrix& RealMatrix::operator-=(const RealMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("real subtract: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

RealMatrix& RealMatrix::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

RealMatrix operator+(RealMatrix a, const RealMatrix& b) { return a += b; }
RealMatrix operator-(RealMatrix a, const RealMatrix& b) { return a -= b; }
RealMatrix operator*(RealMatrix a, double s) { return a *= s; }

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("real matmul: inner dimension mismatch");
  RealMatrix c(a.rows(), b.cols());
  const std::size_t n = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.data() + i * m;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

RealMatrix transpose(const RealMatrix& a) {
  RealMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

RealMatrix symmetrize(const RealMatrix& a) {
  RealMatrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

double dot(const RealMatrix& a, const RealMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

RealMatrix realify(const ComplexMatrix& h) {
  const std::size_t n = h.rows();
  RealMatrix r(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = h(i, j).real(), im = h(i, j).imag();
      r(i, j) = re;
      r(i + n, j + n) = re;
      r(i, j + n) = -im;
      r(i + n, j) = im;
    }
  return r;
}

ComplexMatrix complexify(const RealMatrix& r) {
  const std::size_t n = r.rows() / 2;
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = 0.5 * (r(i, j) + r(i + n, j + n));
      const double im = 0.5 * (r(i + n, j) - r(i, j + n));
      h(i, j) = cplx(re, im);
    }
  return h;
}

}  // namespace qrobust
