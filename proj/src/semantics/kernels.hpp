#pragma once

// Local superoperator kernels shared by the evaluators.

#include "qrobust/lang.hpp"

namespace qrobust::detail {

const Resolved& resolved_of(const Node& n);

// Noisy unitary statement on qubits `pos` of an nq-qubit matrix.
ComplexMatrix forward_unitary(const ComplexMatrix& m, const Node& n, const std::vector<std::size_t>& pos,
                              std::size_t nq);
ComplexMatrix dual_unitary(const ComplexMatrix& a, const Node& n, const std::vector<std::size_t>& pos,
                           std::size_t nq);
// Reset of one qubit to |0>.
ComplexMatrix forward_init(const ComplexMatrix& m, std::size_t pos, std::size_t nq);
ComplexMatrix dual_init(const ComplexMatrix& a, std::size_t pos, std::size_t nq);

// Operator of the branch with the given label.
const ComplexMatrix& outcome_op(const Measurement& m, const std::string& label);

}  // namespace qrobust::detail
