#include "kernels.hpp"

namespace qrobust::detail {

const Resolved& resolved_of(const Node& n) {
  if (!n.resolved) throw Error(std::string(to_string(n.kind)) + " statement has not been elaborated");
  return *n.resolved;
}

ComplexMatrix forward_unitary(const ComplexMatrix& m, const Node& n, const std::vector<std::size_t>& pos,
                              std::size_t nq) {
  const Resolved& r = resolved_of(n);
  ComplexMatrix out = conjugate_local(m, r.unitary, pos, nq);
  if (r.probability <= 0.0 || !r.noise) return out;
  out *= 1.0 - r.probability;
  for (const auto& k : r.noise->kraus()) out += r.probability * conjugate_local(m, k, pos, nq);
  return out;
}

ComplexMatrix dual_unitary(const ComplexMatrix& a, const Node& n, const std::vector<std::size_t>& pos,
                           std::size_t nq) {
  const Resolved& r = resolved_of(n);
  ComplexMatrix out = conjugate_local(a, dagger(r.unitary), pos, nq);
  if (r.probability <= 0.0 || !r.noise) return out;
  out *= 1.0 - r.probability;
  for (const auto& k : r.noise->kraus()) out += r.probability * conjugate_local(a, dagger(k), pos, nq);
  return out;
}

namespace {
const ComplexMatrix kKeep0 = {{1, 0}, {0, 0}};   // |0><0|
const ComplexMatrix kLower = {{0, 1}, {0, 0}};   // |0><1|
}  // namespace

ComplexMatrix forward_init(const ComplexMatrix& m, std::size_t pos, std::size_t nq) {
  return conjugate_local(m, kKeep0, {pos}, nq) + conjugate_local(m, kLower, {pos}, nq);
}

ComplexMatrix dual_init(const ComplexMatrix& a, std::size_t pos, std::size_t nq) {
  return conjugate_local(a, dagger(kKeep0), {pos}, nq) + conjugate_local(a, dagger(kLower), {pos}, nq);
}

const ComplexMatrix& outcome_op(const Measurement& m, const std::string& label) {
  const auto i = m.index_of(label);
  if (!i) throw Error("measurement has no outcome '" + label + "'");
  return m.op(*i);
}

}  // namespace qrobust::detail
