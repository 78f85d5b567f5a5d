#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qrobust/linalg.hpp"

namespace qrobust {

namespace {

constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

double off_diagonal_norm(const RealMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Rotation parameters annihilating r in the symmetric 2x2 block [[app, r], [r, aqq]].
void jacobi_angle(double app, double aqq, double r, double& c, double& s) {
  const double theta = (aqq - app) / (2.0 * r);
  const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  c = 1.0 / std::sqrt(t * t + 1.0);
  s = t * c;
}

}  // namespace

Spectrum hermitian_eig(const ComplexMatrix& input) {
  if (!input.square()) throw DimensionError("hermitian_eig: matrix is not square");
  input.check_finite("hermitian_eig");
  if (!is_hermitian(input, tol::herm * std::max(1.0, max_abs(input)))) {
    throw NotHermitianError("hermitian_eig: matrix is not Hermitian");
  }
  const std::size_t n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double scale = std::max(frobenius_norm(a), 1e-300);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        const cplx phase = std::conj(apq) / r;  // e^{-i arg a_pq}
        double c, s;
        jacobi_angle(a(p, p).real(), a(q, q).real(), r, c, s);
        // U restricted to (p, q): columns (c, -s*phase) and (s, c*phase).
        const cplx u_pp = c, u_qp = -s * phase, u_pq = s, u_qq = c * phase;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * u_pp + akq * u_qp;
          a(k, q) = akp * u_pq + akq * u_qq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
          a(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * u_pp + vkq * u_qp;
          v(k, q) = vkp * u_pq + vkq * u_qq;
        }
      }
    }
  }
  if (off_diagonal_norm(a) > 1e-10 * scale) throw NumericalFailure("hermitian_eig: Jacobi did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });
  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]).real();
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, j) = v(k, order[j]);
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) { return hermitian_eig(a).eigenvalues; }

double min_eigenvalue(const ComplexMatrix& a) {
  const auto ev = hermitian_eigenvalues(a);
  return ev.empty() ? 0.0 : ev.back();
}

double max_eigenvalue(const ComplexMatrix& a) {
  const auto ev = hermitian_eigenvalues(a);
  return ev.empty() ? 0.0 : ev.front();
}

double trace_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (double x : hermitian_eigenvalues(a)) s += std::abs(x);
  return s;
}

bool loewner_leq(const ComplexMatrix& a, const ComplexMatrix& b, double tolerance) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("loewner_leq: shape mismatch");
  return min_eigenvalue(b - a) >= -tolerance;
}

bool is_psd(const ComplexMatrix& a, double tolerance) { return min_eigenvalue(a) >= -tolerance; }

ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  const Spectrum sp = hermitian_eig(a);
  const std::size_t n = a.rows();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(0.0, sp.eigenvalues[k]));
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += s * sp.eigenvectors(i, k) * std::conj(sp.eigenvectors(j, k));
  }
  return out;
}

RealSpectrum symmetric_eig(const RealMatrix& input, bool want_vectors) {
  if (input.rows() != input.cols()) throw DimensionError("symmetric_eig: matrix is not square");
  const std::size_t n = input.rows();
  RealMatrix a = symmetrize(input);
  RealMatrix v = want_vectors ? RealMatrix::identity(n) : RealMatrix();
  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale += a.data()[i] * a.data()[i];
  scale = std::max(std::sqrt(scale), 1e-300);
  if (!std::isfinite(scale)) throw NumericalFailure("symmetric_eig: non-finite matrix entry");

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = a(p, q);
        if (std::abs(r) <= 1e-300) continue;
        double c, s;
        jacobi_angle(a(p, p), a(q, q), r, c, s);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (want_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  if (off_diagonal_norm(a) > 1e-10 * scale) throw NumericalFailure("symmetric_eig: Jacobi did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  RealSpectrum out;
  out.eigenvalues.resize(n);
  if (want_vectors) out.eigenvectors = RealMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    if (want_vectors)
      for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, j) = v(k, order[j]);
  }
  return out;
}

double symmetric_min_eigenvalue(const RealMatrix& input) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw DimensionError("symmetric_min_eigenvalue: matrix is not square");
  if (n == 0) throw DimensionError("symmetric_min_eigenvalue: empty matrix");
  RealMatrix a = input;
  std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
  std::vector<double> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    const double alpha = a(k + 1, k) > 0.0 ? -norm : norm;
    off[k] = alpha;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k) - (i == k + 1 ? alpha : 0.0);
      vnorm += v[i] * v[i];
    }
    if (vnorm == 0.0) continue;
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;
    // a <- H a H with H = I - 2 v v^T on the trailing block
    double kappa = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      p[i] = 2.0 * s;
      kappa += v[i] * p[i];
    }
    for (std::size_t i = k + 1; i < n; ++i) p[i] -= kappa * v[i];
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= v[i] * p[j] + p[i] * v[j];
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  if (n >= 2) off[n - 2] = a(n - 1, n - 2);

  // Number of eigenvalues below x.
  auto below = [&](double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      q = diag[i] - x - (i > 0 ? off[i - 1] * off[i - 1] / q : 0.0);
      if (q == 0.0) q = -std::numeric_limits<double>::epsilon() * (std::abs(diag[i]) + std::abs(x) + 1e-300);
      if (q < 0.0) ++count;
    }
    return count;
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
    if (below(mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

bool cholesky(const RealMatrix& a, RealMatrix& lower) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("cholesky: matrix is not square");
  // Right-looking on the upper factor u = lower^T, so every update is a contiguous row axpy.
  RealMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k) u(i, k) = a(k, i);
  double* d = u.data();
  for (std::size_t j = 0; j < n; ++j) {
    double* rj = d + j * n;
    const double pivot = rj[j];
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
    const double l = std::sqrt(pivot);
    rj[j] = l;
    for (std::size_t k = j + 1; k < n; ++k) rj[k] /= l;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double f = rj[i];
      if (f == 0.0) continue;
      double* ri = d + i * n;
      for (std::size_t k = i; k < n; ++k) ri[k] -= f * rj[k];
    }
  }
  lower = RealMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k) lower(k, i) = u(i, k);
  return true;
}

void cholesky_solve(const RealMatrix& lower, std::vector<double>& b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw DimensionError("cholesky_solve: right-hand side length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * b[k];
    b[i] = s / lower(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= lower(k, i) * b[k];
    b[i] = s / lower(i, i);
  }
}

namespace {

// L^{-1} as a dense lower-triangular matrix.
RealMatrix lower_inverse(const RealMatrix& lower) {
  const std::size_t n = lower.rows();
  RealMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = 1.0 / lower(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= lower(i, k) * inv(k, j);
      inv(i, j) = s / lower(i, i);
    }
  }
  return inv;
}

}  // namespace

RealMatrix cholesky_inverse(const RealMatrix& lower) {
  const RealMatrix li = lower_inverse(lower);
  return matmul(transpose(li), li);
}

RealMatrix congruence_by_inverse(const RealMatrix& lower, const RealMatrix& a) {
  const RealMatrix li = lower_inverse(lower);
  return symmetrize(matmul(matmul(li, a), transpose(li)));
}

}  // namespace qrobust
