#include <cmath>

#include "../semantics/kernels.hpp"
#include "internal.hpp"

namespace qrobust {

HoareResult check_hoare(const ComplexMatrix& q, const Program& p, const ComplexMatrix& r, const Register& reg,
                        const LogicOptions& opts) {
  const std::size_t dim = detail::register_dim(reg);
  if (q.rows() != dim || q.cols() != dim || r.rows() != dim || r.cols() != dim)
    throw DimensionError("Hoare triple: predicates do not match the register");
  HoareResult res;
  if (detail::is_zero(q) && detail::is_zero(r)) {
    res.holds = true;
    return res;
  }
  const DualResult dual = heisenberg(ideal(p), reg, r, opts.denote);
  res.margin = min_eigenvalue(hermitian_part(dual.matrix - q));
  res.residual = dual.residual;
  // The truncated dual only under-approximates, so acceptance is final.
  res.holds = res.margin >= -opts.hoare_tol;
  if (!res.holds && res.residual > opts.hoare_residual_tol && res.margin + res.residual >= -opts.hoare_tol)
    throw Unconverged("Hoare triple undecided: margin " + std::to_string(res.margin) + " is within the loop residual " +
                      std::to_string(res.residual));
  return res;
}

namespace {

struct LoopOperators {
  ComplexMatrix m1;
  ComplexMatrix guard;  // M1^dag M1
  Program body;
};

LoopOperators loop_operators(const Program& loop, const Register& reg) {
  if (!loop.valid() || loop.kind() != NodeKind::While) throw Error("boundedness needs a while loop");
  LoopOperators ops;
  ops.m1 = detail::lifted_outcome(loop.node(), "1", reg);
  ops.guard = hermitian_part(dagger(ops.m1) * ops.m1);
  ops.body = ideal(loop.children()[0]);
  return ops;
}

// One application of E*(X) = M1^dag body*(X) M1; the truncation bound accumulates into `residual`.
ComplexMatrix dual_step(const LoopOperators& ops, const Register& reg, const ComplexMatrix& x, double& residual,
                        const LogicOptions& opts) {
  const DualResult d = heisenberg(ops.body, reg, x, opts.denote);
  residual += d.residual;
  return hermitian_part(dagger(ops.m1) * d.matrix * ops.m1);
}

// Keeps a when it sits on a 1e-9 grid point up to rounding.
double snap(double a) {
  const double grid = std::round(a * 1e9) / 1e9;
  return std::abs(grid - a) <= 1e-12 ? grid : a;
}

BoundednessResult analyse(const LoopOperators& ops, const ComplexMatrix& w, int n, double truncation,
                          const LogicOptions& opts) {
  BoundednessResult res;
  res.certificate.n = n;
  res.certificate.witness = w;
  const std::size_t d = w.rows();
  const ComplexMatrix& g = ops.guard;
  double a = 0.0;
  double leak = 0.0;
  if (max_abs_diff(g * g, g) <= 1e-9) {
    const ComplexMatrix rest = ComplexMatrix::identity(d) - g;
    a = detail::is_zero(g) ? 0.0 : max_eigenvalue(hermitian_part(g * w * g));
    leak = max_abs(rest * w * rest);
  } else {
    // Generalised eigenvalues on the support of the guard through its pseudo-inverse square root.
    const Spectrum sp = hermitian_eig(g);
    ComplexMatrix inv_sqrt(d, d), kernel(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      ComplexMatrix v(d, 1);
      for (std::size_t r = 0; r < d; ++r) v(r, 0) = sp.eigenvectors(r, i);
      if (sp.eigenvalues[i] > 1e-10) inv_sqrt += projector(v) * cplx(1.0 / std::sqrt(sp.eigenvalues[i]));
      else kernel += projector(v);
    }
    a = max_eigenvalue(hermitian_part(inv_sqrt * w * inv_sqrt));
    leak = max_abs(kernel * w * kernel);
  }
  a = snap(std::max(a, 0.0) + truncation);
  leak += truncation;
  res.certificate.a = a;
  res.certificate.off_support_leak = leak;
  if (leak > opts.leak_tol) {
    res.diagnostic = "iterated guard leaks " + std::to_string(leak) + " outside the guard support at n = " +
                     std::to_string(n);
    return res;
  }
  if (a >= 1.0 - opts.a_tol) {
    res.diagnostic = "a = " + std::to_string(a) + " at n = " + std::to_string(n) + " does not certify exit";
    return res;
  }
  res.bounded = true;
  return res;
}

}  // namespace

BoundednessResult boundedness(const Program& loop, const Register& reg, int n, const LogicOptions& opts) {
  if (n < 1) throw Error("boundedness: n must be positive");
  const LoopOperators ops = loop_operators(loop, reg);
  ComplexMatrix w = ops.guard;
  double truncation = 0.0;
  for (int k = 0; k < n; ++k) w = dual_step(ops, reg, w, truncation, opts);
  return analyse(ops, w, n, truncation, opts);
}

BoundednessResult boundedness_search(const Program& loop, const Register& reg, int n_max, const LogicOptions& opts) {
  if (n_max < 1) throw Error("boundedness search: n_max must be positive");
  const LoopOperators ops = loop_operators(loop, reg);
  ComplexMatrix w = ops.guard;
  double truncation = 0.0;
  BoundednessResult last;
  for (int n = 1; n <= n_max; ++n) {
    w = dual_step(ops, reg, w, truncation, opts);
    last = analyse(ops, w, n, truncation, opts);
    if (last.bounded) return last;
  }
  last.diagnostic = "no n <= " + std::to_string(n_max) + " certifies the loop (" + last.diagnostic + ")";
  return last;
}

bool verify_certificate(const Program& loop, const Register& reg, const BoundednessCertificate& c,
                        const LogicOptions& opts) {
  if (c.n < 1 || !(c.a >= 0.0 && c.a < 1.0)) return false;
  const LoopOperators ops = loop_operators(loop, reg);
  ComplexMatrix w = ops.guard;
  double truncation = 0.0;
  for (int k = 0; k < c.n; ++k) w = dual_step(ops, reg, w, truncation, opts);
  const ComplexMatrix slack = ComplexMatrix::identity(w.rows()) * cplx(truncation);
  return loewner_leq(w + slack, ops.guard * cplx(c.a), opts.a_tol);
}

}  // namespace qrobust
