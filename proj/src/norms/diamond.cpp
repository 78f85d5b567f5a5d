#include <algorithm>
#include <cmath>

#include "block_sdp.hpp"
#include "qrobust/norms.hpp"

namespace qrobust {

namespace {

using detail::SparseEntry;

constexpr double kRoot2 = 1.4142135623730951;
constexpr double kInvRoot2 = 0.7071067811865476;
// Spectral slack used to decide whether the threshold sits at an end of Q's spectrum.
constexpr double kEdgeTol = 1e-9;

// Orthonormal basis element of Hermitian n x n matrices: a diagonal unit, or the
// symmetric / antisymmetric imaginary pair on (a, b) with a < b.
struct HermBasis {
  enum Kind { Diag, Sym, Imag } kind;
  std::size_t a, b;
};

std::vector<HermBasis> hermitian_basis(std::size_t n) {
  std::vector<HermBasis> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back({HermBasis::Diag, a, a});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      out.push_back({HermBasis::Sym, a, b});
      out.push_back({HermBasis::Imag, a, b});
    }
  return out;
}

// Entries of realify(B) for an n x n basis element, scaled by s.
void realified(std::vector<SparseEntry>& out, std::size_t block, const HermBasis& e, std::size_t n, double s) {
  const std::size_t a = e.a, b = e.b;
  switch (e.kind) {
    case HermBasis::Diag:
      out.push_back({block, a, a, s});
      out.push_back({block, a + n, a + n, s});
      return;
    case HermBasis::Sym: {
      const double v = s * kInvRoot2;
      out.push_back({block, a, b, v});
      out.push_back({block, b, a, v});
      out.push_back({block, a + n, b + n, v});
      out.push_back({block, b + n, a + n, v});
      return;
    }
    case HermBasis::Imag: {
      const double v = s * kInvRoot2;
      out.push_back({block, a, b + n, -v});
      out.push_back({block, b + n, a, -v});
      out.push_back({block, b, a + n, v});
      out.push_back({block, a + n, b, v});
      return;
    }
  }
}

// tr(H B) for Hermitian H.
double coordinate(const ComplexMatrix& h, const HermBasis& e) {
  switch (e.kind) {
    case HermBasis::Diag: return h(e.a, e.a).real();
    case HermBasis::Sym: return kRoot2 * h(e.a, e.b).real();
    case HermBasis::Imag: return kRoot2 * h(e.a, e.b).imag();
  }
  return 0.0;
}

void accumulate(ComplexMatrix& h, const HermBasis& e, double y) {
  switch (e.kind) {
    case HermBasis::Diag: h(e.a, e.a) += y; return;
    case HermBasis::Sym:
      h(e.a, e.b) += y * kInvRoot2;
      h(e.b, e.a) += y * kInvRoot2;
      return;
    case HermBasis::Imag:
      h(e.a, e.b) += cplx(0.0, y * kInvRoot2);
      h(e.b, e.a) -= cplx(0.0, y * kInvRoot2);
      return;
  }
}

struct Core {
  double value = 0.0;
  ComplexMatrix w;
  ComplexMatrix sigma;
  double gap = 0.0;
  int iterations = 0;
};

// Solves the SDP with sigma in E dimensions; `qt` empty means no threshold constraint.
Core solve_core(const ComplexMatrix& j, std::size_t dout, std::size_t din, const ComplexMatrix& qt, double lambda,
                const SdpOptions& opts) {
  const std::size_t n = dout * din;
  const bool constrained = !qt.empty();
  const auto wbasis = hermitian_basis(n);
  // Traceless basis for sigma: off-diagonal pairs plus e_kk - e_last.
  std::vector<HermBasis> soff;
  for (const auto& e : hermitian_basis(din))
    if (e.kind != HermBasis::Diag) soff.push_back(e);
  const std::size_t ndiag = din - 1;
  const std::size_t m = wbasis.size() + soff.size() + ndiag;
  if (m > opts.max_variables)
    throw NumericalFailure("sdp: instance needs " + std::to_string(m) + " variables, above the limit of " +
                           std::to_string(opts.max_variables));

  detail::BlockSdp sdp;
  sdp.block_dims = {2 * n, 2 * n};
  if (constrained) sdp.block_dims.push_back(1);

  for (const auto& e : wbasis) {
    std::vector<SparseEntry> f;
    realified(f, 0, e, n, 1.0);
    realified(f, 1, e, n, -1.0);
    sdp.f.push_back(std::move(f));
    sdp.c.push_back(-coordinate(j, e));
  }
  // I_out (x) B on the second block.
  auto lift_entries = [&](std::vector<SparseEntry>& f, const HermBasis& e, double s) {
    for (std::size_t o = 0; o < dout; ++o) realified(f, 1, {e.kind, o * din + e.a, o * din + e.b}, n, s);
  };
  for (const auto& e : soff) {
    std::vector<SparseEntry> f;
    lift_entries(f, e, 1.0);
    if (constrained) f.push_back({2, 0, 0, coordinate(qt, e)});
    sdp.f.push_back(std::move(f));
    sdp.c.push_back(0.0);
  }
  const std::size_t last = din - 1;
  for (std::size_t k = 0; k < ndiag; ++k) {
    std::vector<SparseEntry> f;
    lift_entries(f, {HermBasis::Diag, k, k}, 1.0);
    lift_entries(f, {HermBasis::Diag, last, last}, -1.0);
    if (constrained) f.push_back({2, 0, 0, (qt(k, k) - qt(last, last)).real()});
    sdp.f.push_back(std::move(f));
    sdp.c.push_back(0.0);
  }
  // Constant part: sigma offset I / E and the threshold.
  const double inv_e = 1.0 / static_cast<double>(din);
  for (std::size_t i = 0; i < 2 * n; ++i) sdp.f0.push_back({1, i, i, -inv_e});
  if (constrained) sdp.f0.push_back({2, 0, 0, lambda - trace(qt).real() * inv_e});

  // Strictly feasible start: sigma0 leans toward Q's top eigenvector when constrained, W0 = sigma0 / 2.
  ComplexMatrix sigma0 = ComplexMatrix::identity(din) * cplx(inv_e);
  if (constrained) {
    const Spectrum s = hermitian_eig(qt);
    const double lmax = s.eigenvalues.front();
    const double avg = trace(qt).real() * inv_e;
    const double t = std::min(0.5, (lmax - lambda) / (2.0 * (lmax - avg)));
    ComplexMatrix v(din, 1);
    for (std::size_t i = 0; i < din; ++i) v(i, 0) = s.eigenvectors(i, 0);
    sigma0 = projector(v) * cplx(1.0 - t) + ComplexMatrix::identity(din) * cplx(t * inv_e);
  }
  const ComplexMatrix w0 = kron(ComplexMatrix::identity(dout), sigma0) * cplx(0.5);
  std::vector<double> y0;
  for (const auto& e : wbasis) y0.push_back(coordinate(w0, e));
  for (const auto& e : soff) y0.push_back(coordinate(sigma0, e));
  for (std::size_t k = 0; k < ndiag; ++k) y0.push_back(sigma0(k, k).real() - inv_e);

  if (!opts.dump_path.empty()) detail::write_sdpa(sdp, opts.dump_path, "constrained diamond norm, realified");

  detail::BlockSdpOptions bo;
  bo.gap_tol = opts.gap_tol;
  bo.target_gap = opts.target_gap;
  bo.feas_tol = opts.feas_tol;
  bo.max_iterations = opts.max_iterations;
  bo.step_fraction = opts.step_fraction;
  const detail::BlockSdpResult r = detail::solve_block_sdp(sdp, y0, bo);

  Core out;
  out.w = ComplexMatrix(n, n);
  for (std::size_t i = 0; i < wbasis.size(); ++i) accumulate(out.w, wbasis[i], r.y[i]);
  out.sigma = ComplexMatrix::identity(din) * cplx(inv_e);
  for (std::size_t i = 0; i < soff.size(); ++i) accumulate(out.sigma, soff[i], r.y[wbasis.size() + i]);
  for (std::size_t k = 0; k < ndiag; ++k) {
    const double t = r.y[wbasis.size() + soff.size() + k];
    out.sigma(k, k) += t;
    out.sigma(last, last) -= t;
  }
  out.value = -r.primal;
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

}  // namespace

double positive_part(const ComplexMatrix& h) {
  double s = 0.0;
  for (double v : hermitian_eigenvalues(hermitian_part(h)))
    if (v > 0.0) s += v;
  return s;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_distance: dimension mismatch");
  return 0.5 * trace_norm(a - b);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  return trace_distance(a.matrix(), b.matrix());
}

SdpSolution sdp_solve(const SdpInstance& inst, const SdpOptions& opts) {
  const std::size_t dout = inst.d_out, din = inst.d_in;
  if (dout == 0 || din == 0) throw DimensionError("sdp: dimensions must be positive");
  const std::size_t n = dout * din;
  if (inst.objective.rows() != n || inst.objective.cols() != n)
    throw DimensionError("sdp: objective must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!is_hermitian(inst.objective)) throw NotHermitianError("sdp: objective is not Hermitian");
  if (!std::isfinite(inst.lambda) || inst.lambda < 0.0) throw Error("sdp: threshold must be a nonnegative number");
  const ComplexMatrix q = inst.q.empty() ? ComplexMatrix::identity(din) : inst.q;
  if (q.rows() != din || q.cols() != din) throw DimensionError("sdp: predicate does not match the input dimension");
  (void)Predicate(q);  // validates 0 <= Q <= I
  const ComplexMatrix j = hermitian_part(inst.objective);
  const ComplexMatrix qt = hermitian_part(transpose(q));
  const Spectrum qs = hermitian_eig(qt);
  const double lmax = qs.eigenvalues.front(), lmin = qs.eigenvalues.back();

  SdpSolution sol;
  if (inst.lambda > lmax + kEdgeTol)
    throw Infeasible("no input state reaches tr(Q rho) >= " + std::to_string(inst.lambda) +
                     " (largest eigenvalue of Q is " + std::to_string(lmax) + ")");
  const bool dropped = inst.lambda <= lmin + kEdgeTol;
  const bool face = !dropped && inst.lambda >= lmax - kEdgeTol;
  sol.constraint_dropped = dropped;
  sol.face_reduced = face;

  ComplexMatrix top(din, 0);
  if (face || max_abs(j) == 0.0) {
    std::size_t s = 0;
    while (s < din && qs.eigenvalues[s] >= lmax - kEdgeTol) ++s;
    top = ComplexMatrix(din, s);
    for (std::size_t i = 0; i < din; ++i)
      for (std::size_t c = 0; c < s; ++c) top(i, c) = qs.eigenvectors(i, c);
  }

  if (max_abs(j) == 0.0) {
    ComplexMatrix v(din, 1);
    for (std::size_t i = 0; i < din; ++i) v(i, 0) = top(i, 0);
    sol.w = ComplexMatrix(n, n);
    sol.sigma = projector(v);
    sol.rho = transpose(sol.sigma);
    return sol;
  }

  Core core;
  if (face) {
    // Every admissible sigma lives on Q's top eigenspace, and so does every admissible W.
    const ComplexMatrix lift = kron(ComplexMatrix::identity(dout), top);
    const ComplexMatrix jr = hermitian_part(dagger(lift) * j * lift);
    core = solve_core(jr, dout, top.cols(), ComplexMatrix(), 0.0, opts);
    core.w = lift * core.w * dagger(lift);
    core.sigma = top * core.sigma * dagger(top);
  } else {
    core = solve_core(j, dout, din, dropped ? ComplexMatrix() : qt, inst.lambda, opts);
  }
  sol.value = core.value;
  sol.w = hermitian_part(core.w);
  sol.sigma = hermitian_part(core.sigma);
  sol.rho = transpose(sol.sigma);
  sol.duality_gap = core.gap;
  sol.iterations = core.iterations;
  return sol;
}

double q_lambda_diamond_norm_choi(const ComplexMatrix& j, std::size_t d_out, std::size_t d_in, const ComplexMatrix& q,
                                  double lambda, const SdpOptions& opts) {
  SdpInstance inst;
  inst.objective = j;
  inst.d_out = d_out;
  inst.d_in = d_in;
  inst.q = q;
  inst.lambda = lambda;
  return sdp_solve(inst, opts).value;
}

double q_lambda_diamond_norm(const Superoperator& e, const Superoperator& f, const Predicate& q, double lambda,
                             const SdpOptions& opts) {
  if (e.d_in() != f.d_in() || e.d_out() != f.d_out()) throw DimensionError("diamond norm: maps have different shapes");
  if (q.dim() != e.d_in()) throw DimensionError("diamond norm: predicate does not match the input dimension");
  return q_lambda_diamond_norm_choi(choi_rect(e) - choi_rect(f), e.d_out(), e.d_in(), q.matrix(), lambda, opts);
}

double diamond_norm(const Superoperator& e, const Superoperator& f, const SdpOptions& opts) {
  return q_lambda_diamond_norm(e, f, Predicate::identity(e.d_in()), 0.0, opts);
}

}  // namespace qrobust
