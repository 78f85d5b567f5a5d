#include <algorithm>

#include "qrobust/quantum.hpp"

namespace qrobust {

std::size_t qubit_count(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim) throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
  return n;
}

std::vector<std::size_t> positions_in(const std::vector<std::string>& targets, const Register& reg) {
  std::vector<std::size_t> pos;
  pos.reserve(targets.size());
  for (const auto& t : targets) {
    auto it = std::find(reg.begin(), reg.end(), t);
    if (it == reg.end()) throw UnknownVariableError("unknown variable '" + t + "'");
    const auto p = static_cast<std::size_t>(it - reg.begin());
    if (std::find(pos.begin(), pos.end(), p) != pos.end()) throw Error("variable '" + t + "' listed twice");
    pos.push_back(p);
  }
  return pos;
}

namespace {

struct LocalIndex {
  std::vector<std::size_t> local;  // full-space offset of each local basis state
  std::vector<std::size_t> rest;   // full-space offset of each assignment to the other qubits
};

LocalIndex local_index(const std::vector<std::size_t>& pos, std::size_t nqubits) {
  const std::size_t k = pos.size();
  for (auto p : pos)
    if (p >= nqubits) throw DimensionError("qubit position out of range");
  LocalIndex li;
  li.local.resize(std::size_t{1} << k);
  for (std::size_t a = 0; a < li.local.size(); ++a) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < k; ++j)
      if ((a >> (k - 1 - j)) & 1u) off |= std::size_t{1} << (nqubits - 1 - pos[j]);
    li.local[a] = off;
  }
  std::vector<std::size_t> others;
  for (std::size_t q = 0; q < nqubits; ++q)
    if (std::find(pos.begin(), pos.end(), q) == pos.end()) others.push_back(q);
  li.rest.resize(std::size_t{1} << others.size());
  for (std::size_t r = 0; r < li.rest.size(); ++r) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < others.size(); ++j)
      if ((r >> (others.size() - 1 - j)) & 1u) off |= std::size_t{1} << (nqubits - 1 - others[j]);
    li.rest[r] = off;
  }
  return li;
}

void check_local(const ComplexMatrix& op, const std::vector<std::size_t>& pos) {
  const std::size_t d = std::size_t{1} << pos.size();
  if (op.rows() != d || op.cols() != d) {
    throw DimensionError("local operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                         " but acts on " + std::to_string(pos.size()) + " qubits");
  }
}

}  // namespace

void apply_local_left(ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                      std::size_t nqubits) {
  check_local(op, pos);
  if (m.rows() != (std::size_t{1} << nqubits)) throw DimensionError("apply_local_left: row dimension mismatch");
  const LocalIndex li = local_index(pos, nqubits);
  const std::size_t d = li.local.size(), cols = m.cols();
  std::vector<cplx> buf(d);
  for (std::size_t r : li.rest) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t a = 0; a < d; ++a) {
        cplx s = 0.0;
        for (std::size_t b = 0; b < d; ++b) s += op(a, b) * m(r + li.local[b], c);
        buf[a] = s;
      }
      for (std::size_t a = 0; a < d; ++a) m(r + li.local[a], c) = buf[a];
    }
  }
}

void apply_local_right_dagger(ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                              std::size_t nqubits) {
  check_local(op, pos);
  if (m.cols() != (std::size_t{1} << nqubits)) throw DimensionError("apply_local_right_dagger: column dimension mismatch");
  const LocalIndex li = local_index(pos, nqubits);
  const std::size_t d = li.local.size(), rows = m.rows();
  std::vector<cplx> buf(d);
  for (std::size_t r : li.rest) {
    for (std::size_t row = 0; row < rows; ++row) {
      // (m op^dag)[row, a] = sum_b m[row, b] conj(op[a, b])
      for (std::size_t a = 0; a < d; ++a) {
        cplx s = 0.0;
        for (std::size_t b = 0; b < d; ++b) s += m(row, r + li.local[b]) * std::conj(op(a, b));
        buf[a] = s;
      }
      for (std::size_t a = 0; a < d; ++a) m(row, r + li.local[a]) = buf[a];
    }
  }
}

ComplexMatrix conjugate_local(const ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                              std::size_t nqubits) {
  ComplexMatrix out = m;
  apply_local_left(out, op, pos, nqubits);
  apply_local_right_dagger(out, op, pos, nqubits);
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, const std::vector<std::size_t>& pos, std::size_t nqubits) {
  ComplexMatrix full = ComplexMatrix::identity(std::size_t{1} << nqubits);
  apply_local_left(full, op, pos, nqubits);
  return full;
}

ComplexMatrix lift(const ComplexMatrix& op, const std::vector<std::string>& targets, const Register& reg) {
  return embed(op, positions_in(targets, reg), reg.size());
}

Superoperator lift(const Superoperator& e, const std::vector<std::string>& targets, const Register& reg) {
  if (e.d_in() != e.d_out()) throw DimensionError("lift: channel must be square");
  const auto pos = positions_in(targets, reg);
  std::vector<ComplexMatrix> k;
  for (const auto& x : e.kraus()) k.push_back(embed(x, pos, reg.size()));
  return Superoperator(std::move(k));
}

}  // namespace qrobust
