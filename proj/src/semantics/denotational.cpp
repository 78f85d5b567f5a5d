#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "qrobust/semantics.hpp"

namespace qrobust {

namespace {

// Cheap upper bound on the largest eigenvalue of a PSD matrix (max absolute row sum).
double row_sum_bound(const ComplexMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

void require_psd_increment(const ComplexMatrix& inc) {
  const double shift = 1e-10 * std::max(1.0, std::abs(trace(inc).real()));
  RealMatrix r = realify(hermitian_part(inc));
  for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) += shift;
  RealMatrix l;
  if (!cholesky(r, l)) throw NumericalFailure("loop approximants are not Loewner-increasing");
}

// Schroedinger evaluation on register qubits followed by untouched reference qubits.
class Forward {
 public:
  Forward(const Register& reg, std::size_t nq, const DenoteOptions& opts) : reg_(reg), nq_(nq), opts_(opts) {}

  ComplexMatrix run(const Program& p, const ComplexMatrix& m) {
    const Node& n = p.node();
    switch (n.kind) {
      case NodeKind::Skip: return m;
      case NodeKind::Init: return detail::forward_init(m, positions_in(n.vars, reg_)[0], nq_);
      case NodeKind::Unitary: return detail::forward_unitary(m, n, positions_in(n.vars, reg_), nq_);
      case NodeKind::Seq: {
        ComplexMatrix cur = m;
        for (const auto& c : n.children) cur = run(c, cur);
        return cur;
      }
      case NodeKind::Case: {
        const Measurement& meas = detail::resolved_of(n).measurement;
        const auto pos = positions_in(n.vars, reg_);
        ComplexMatrix out(m.rows(), m.cols());
        for (std::size_t i = 0; i < n.children.size(); ++i)
          out += run(n.children[i], conjugate_local(m, detail::outcome_op(meas, n.labels[i]), pos, nq_));
        return out;
      }
      case NodeKind::While: return loop(n, m);
    }
    throw Error("denote: unknown statement");
  }

  double residual = 0.0;

 private:
  ComplexMatrix loop(const Node& n, const ComplexMatrix& m) {
    const Measurement& meas = detail::resolved_of(n).measurement;
    const auto pos = positions_in(n.vars, reg_);
    const ComplexMatrix& exit_op = detail::outcome_op(meas, "0");
    const ComplexMatrix& stay_op = detail::outcome_op(meas, "1");
    ComplexMatrix acc(m.rows(), m.cols());
    ComplexMatrix cur = m;
    for (std::size_t k = 0;; ++k) {
      if (k >= opts_.k_max)
        throw BudgetExceeded("loop did not converge within " + std::to_string(opts_.k_max) + " unrollings");
      ComplexMatrix inc = conjugate_local(cur, exit_op, pos, nq_);
      if (opts_.check_monotone) require_psd_increment(inc);
      acc += inc;
      cur = run(n.children[0], conjugate_local(cur, stay_op, pos, nq_));
      // cur is PSD, so its trace bounds both its max-norm and all mass still inside the loop.
      const double mass = trace(cur).real();
      if (mass <= opts_.loop_tol) {
        residual += std::max(mass, 0.0);
        return acc;
      }
    }
  }

  const Register& reg_;
  std::size_t nq_;
  const DenoteOptions& opts_;
};

class Dual {
 public:
  Dual(const Register& reg, const DenoteOptions& opts) : reg_(reg), nq_(reg.size()), opts_(opts) {}

  ComplexMatrix run(const Program& p, const ComplexMatrix& a) {
    const Node& n = p.node();
    switch (n.kind) {
      case NodeKind::Skip: return a;
      case NodeKind::Init: return detail::dual_init(a, positions_in(n.vars, reg_)[0], nq_);
      case NodeKind::Unitary: return detail::dual_unitary(a, n, positions_in(n.vars, reg_), nq_);
      case NodeKind::Seq: {
        ComplexMatrix cur = a;
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) cur = run(*it, cur);
        return cur;
      }
      case NodeKind::Case: {
        const Measurement& meas = detail::resolved_of(n).measurement;
        const auto pos = positions_in(n.vars, reg_);
        ComplexMatrix out(a.rows(), a.cols());
        for (std::size_t i = 0; i < n.children.size(); ++i)
          out += conjugate_local(run(n.children[i], a), dagger(detail::outcome_op(meas, n.labels[i])), pos, nq_);
        return out;
      }
      case NodeKind::While: return loop(n, a);
    }
    throw Error("heisenberg: unknown statement");
  }

  double residual = 0.0;

 private:
  ComplexMatrix stay(const Node& n, const ComplexMatrix& x, const ComplexMatrix& stay_dag,
                     const std::vector<std::size_t>& pos) {
    return conjugate_local(run(n.children[0], x), stay_dag, pos, nq_);
  }

  ComplexMatrix loop(const Node& n, const ComplexMatrix& a) {
    const Measurement& meas = detail::resolved_of(n).measurement;
    const auto pos = positions_in(n.vars, reg_);
    const ComplexMatrix exit_dag = dagger(detail::outcome_op(meas, "0"));
    const ComplexMatrix stay_dag = dagger(detail::outcome_op(meas, "1"));
    const double scale = max_abs(a) == 0.0 ? 0.0 : row_sum_bound(a);
    const ComplexMatrix base = conjugate_local(a, exit_dag, pos, nq_);
    // x_k sums the first k unrollings; the tail is bounded by |a| * (stay-step^k)(I).
    ComplexMatrix x = base;
    ComplexMatrix reach = ComplexMatrix::identity(a.rows());
    for (std::size_t k = 1;; ++k) {
      reach = stay(n, reach, stay_dag, pos);
      const double tail = scale * row_sum_bound(reach);
      if (tail <= opts_.loop_tol) {
        residual += tail;
        return x;
      }
      if (k >= opts_.k_max)
        throw BudgetExceeded("loop did not converge within " + std::to_string(opts_.k_max) + " unrollings");
      x = base + stay(n, x, stay_dag, pos);
    }
  }

  const Register& reg_;
  std::size_t nq_;
  const DenoteOptions& opts_;
};

std::vector<std::size_t> complement_positions(const Register& reg, const Register& removed) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < reg.size(); ++i)
    if (std::find(removed.begin(), removed.end(), reg[i]) == removed.end()) keep.push_back(i);
  return keep;
}

}  // namespace

ComplexMatrix DenotedMap::apply(const ComplexMatrix& rho) const { return apply_choi(choi, rho, d_out, d_in); }

ComplexMatrix DenotedMap::input_marginal() const { return partial_trace(choi, {d_out, d_in}, {1}); }

DenotedMap denote(const Program& p, const Register& reg, const DenoteOptions& opts) {
  return denote(p, reg, {}, {}, opts);
}

DenotedMap denote(const Program& p, const Register& reg, const Register& dropped, const Register& traced,
                  const DenoteOptions& opts) {
  positions_in(dropped, reg);
  positions_in(traced, reg);
  const std::size_t n = reg.size();
  const auto kept_in = complement_positions(reg, dropped);
  const std::size_t k = kept_in.size();
  const std::size_t din = std::size_t{1} << k;
  const std::size_t nq = n + k;
  // |Omega><Omega| with Omega = sum_i |x_i>|i>, where x_i sets the kept inputs to i and the rest to 0.
  std::vector<std::size_t> rows(din);
  for (std::size_t i = 0; i < din; ++i) {
    std::size_t r = 0;
    for (std::size_t t = 0; t < k; ++t)
      if ((i >> (k - 1 - t)) & 1U) r |= std::size_t{1} << (n - 1 - kept_in[t]);
    rows[i] = r * din + i;
  }
  const std::size_t dim = std::size_t{1} << nq;
  ComplexMatrix m(dim, dim);
  for (std::size_t i : rows)
    for (std::size_t j : rows) m(i, j) = 1.0;

  Forward fw(reg, nq, opts);
  ComplexMatrix out = fw.run(p, m);

  DenotedMap res;
  const auto kept_out = complement_positions(reg, traced);
  for (auto i : kept_in) res.inputs.push_back(reg[i]);
  for (auto i : kept_out) res.outputs.push_back(reg[i]);
  if (!traced.empty()) {
    std::vector<std::size_t> keep = kept_out;
    for (std::size_t t = 0; t < k; ++t) keep.push_back(n + t);
    out = partial_trace(out, std::vector<std::size_t>(nq, 2), keep);
  }
  res.choi = hermitian_part(out);
  res.d_in = din;
  res.d_out = std::size_t{1} << kept_out.size();
  res.residual = fw.residual;
  return res;
}

DenotedMap denote_program(const Elaborated& e, const Program& body, const DenoteOptions& opts) {
  return denote(body, e.reg, initialized_first(body, e.reg), e.ancillas, opts);
}

double reset_defect(const DenotedMap& m, const Register& vars) {
  const auto pos = positions_in(vars, m.outputs);
  const std::size_t nout = m.outputs.size();
  double worst = 0.0;
  const ComplexMatrix one = {{0, 0}, {0, 1}};
  for (auto p : pos) {
    ComplexMatrix proj = kron(embed(one, {p}, nout), ComplexMatrix::identity(m.d_in));
    ComplexMatrix marg = partial_trace(proj * m.choi, {m.d_out, m.d_in}, {1});
    worst = std::max(worst, max_eigenvalue(hermitian_part(marg)));
  }
  return worst;
}

DenotedMap trace_outputs(const DenotedMap& m, const Register& vars) {
  positions_in(vars, m.outputs);
  const std::size_t nout = m.outputs.size();
  const std::size_t k = qubit_count(m.d_in);
  DenotedMap res = m;
  res.outputs.clear();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < nout; ++i)
    if (std::find(vars.begin(), vars.end(), m.outputs[i]) == vars.end()) {
      keep.push_back(i);
      res.outputs.push_back(m.outputs[i]);
    }
  for (std::size_t t = 0; t < k; ++t) keep.push_back(nout + t);
  res.choi = partial_trace(m.choi, std::vector<std::size_t>(nout + k, 2), keep);
  res.d_out = std::size_t{1} << res.outputs.size();
  return res;
}

DualResult heisenberg(const Program& p, const Register& reg, const ComplexMatrix& a, const DenoteOptions& opts) {
  const std::size_t d = std::size_t{1} << reg.size();
  if (a.rows() != d || a.cols() != d) throw DimensionError("heisenberg: observable does not match the register");
  Dual dl(reg, opts);
  DualResult r;
  r.matrix = dl.run(p, a);
  r.residual = dl.residual;
  return r;
}

}  // namespace qrobust
