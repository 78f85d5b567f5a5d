#include <cmath>
#include <set>

#include "qrobust/quantum.hpp"

namespace qrobust::builtins {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

ComplexMatrix pauli(char p) {
  switch (p) {
    case 'I': return ComplexMatrix::identity(2);
    case 'X': return ComplexMatrix{{0, 1}, {1, 0}};
    case 'Y': return ComplexMatrix{{0, cplx(0, -1)}, {cplx(0, 1), 0}};
    case 'Z': return ComplexMatrix{{1, 0}, {0, -1}};
    default: throw UnknownGateError(std::string("unknown Pauli '") + p + "'");
  }
}

void expect_params(const std::string& name, const std::vector<double>& params, std::size_t n) {
  if (params.size() != n) {
    throw Error("builtin " + name + " takes " + std::to_string(n) + " parameter(s), got " +
                std::to_string(params.size()));
  }
  for (double x : params)
    if (!std::isfinite(x)) throw Error("builtin " + name + ": non-finite parameter");
}

double probability_param(const std::string& name, const std::vector<double>& params) {
  expect_params(name, params, 1);
  if (params[0] < 0.0 || params[0] > 1.0) throw Error("builtin " + name + ": parameter must lie in [0, 1]");
  return params[0];
}

std::size_t count_param(const std::string& name, const std::vector<double>& params, std::size_t min) {
  expect_params(name, params, 1);
  const double v = params[0];
  if (v != std::floor(v) || v < static_cast<double>(min) || v > 64) {
    throw Error("builtin " + name + ": parameter must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

const std::set<std::string> kGates = {"I", "X", "Y", "Z", "H", "S", "T", "CNOT", "SWAP", "TOFFOLI", "QBF_U", "QBF_V", "QW_S"};
const std::set<std::string> kChannels = {"bitflip", "phaseflip", "depolarizing"};

}  // namespace

bool is_gate(const std::string& name) { return kGates.count(name) > 0; }
bool is_channel(const std::string& name) { return kChannels.count(name) > 0; }

ComplexMatrix pauli_power(char p, std::size_t copies) {
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (std::size_t i = 0; i < copies; ++i) out = kron(out, pauli(p));
  return out;
}

ComplexMatrix controlled_x(const std::string& pattern) {
  if (pattern.empty()) throw Error("controlled_x: empty control pattern");
  for (char c : pattern)
    if (c != '0' && c != '1') throw Error("controlled_x: pattern must contain only 0 and 1");
  const std::size_t k = pattern.size();
  const std::size_t d = std::size_t{1} << (k + 1);
  std::size_t ctrl = 0;
  for (char c : pattern) ctrl = ctrl * 2 + static_cast<std::size_t>(c - '0');
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t j = ((i >> 1) == ctrl) ? (i ^ 1u) : i;
    m(j, i) = 1.0;
  }
  return m;
}

ComplexMatrix walk_shift(std::size_t n) {
  if (n < 2) throw Error("walk_shift: circle needs at least 2 points");
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  const std::size_t dp = std::size_t{1} << k;
  ComplexMatrix s(2 * dp, 2 * dp);
  for (std::size_t i = 0; i < dp; ++i) {
    if (i < n) {
      s((i + n - 1) % n, i) = 1.0;           // coin |0> (left)
      s(dp + (i + 1) % n, dp + i) = 1.0;     // coin |1> (right)
    } else {
      s(i, i) = 1.0;
      s(dp + i, dp + i) = 1.0;
    }
  }
  return s;
}

ComplexMatrix repetition_logical(const ComplexMatrix& g) {
  const std::size_t k = qubit_count(g.rows());
  if (!g.square()) throw DimensionError("repetition_logical: gate must be square");
  const std::size_t n = 3 * k;
  // Encoder: CNOT from the first qubit of every block onto its two partners.
  ComplexMatrix enc = ComplexMatrix::identity(std::size_t{1} << n);
  const ComplexMatrix cx = controlled_x("1");
  for (std::size_t b = 0; b < k; ++b) {
    apply_local_left(enc, cx, {3 * b, 3 * b + 1}, n);
    apply_local_left(enc, cx, {3 * b, 3 * b + 2}, n);
  }
  std::vector<std::size_t> heads;
  for (std::size_t b = 0; b < k; ++b) heads.push_back(3 * b);
  return enc * embed(g, heads, n) * dagger(enc);
}

ComplexMatrix gate(const std::string& name, const std::vector<double>& params) {
  if (name == "I" || name == "X" || name == "Y" || name == "Z") {
    expect_params(name, params, 0);
    return pauli(name[0]);
  }
  if (name == "H") {
    expect_params(name, params, 0);
    return ComplexMatrix{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
  }
  if (name == "S") {
    expect_params(name, params, 0);
    return ComplexMatrix{{1, 0}, {0, cplx(0, 1)}};
  }
  if (name == "T") {
    expect_params(name, params, 0);
    return ComplexMatrix{{1, 0}, {0, std::polar(1.0, M_PI / 4)}};
  }
  if (name == "CNOT") {
    expect_params(name, params, 0);
    return controlled_x("1");
  }
  if (name == "TOFFOLI") {
    expect_params(name, params, 0);
    return controlled_x("11");
  }
  if (name == "SWAP") {
    expect_params(name, params, 0);
    return ComplexMatrix{{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}};
  }
  if (name == "QBF_U") {
    expect_params(name, params, 0);
    const ComplexMatrix phi_p = (basis_ket("00") + basis_ket("11")) * cplx(kInvSqrt2);
    const ComplexMatrix phi_m = (basis_ket("00") - basis_ket("11")) * cplx(kInvSqrt2);
    const ComplexMatrix psi_p = (basis_ket("01") + basis_ket("10")) * cplx(kInvSqrt2);
    const ComplexMatrix psi_m = (basis_ket("01") - basis_ket("10")) * cplx(kInvSqrt2);
    return ket_bra(basis_ket("01"), phi_p) + ket_bra(basis_ket("00"), phi_m) + ket_bra(basis_ket("10"), psi_p) +
           ket_bra(basis_ket("11"), psi_m);
  }
  if (name == "QBF_V") {
    const double p = probability_param(name, params);
    const double a = std::sqrt(p), b = std::sqrt(1.0 - p);
    return ComplexMatrix{{a, -b}, {b, a}};
  }
  if (name == "QW_S") return walk_shift(count_param(name, params, 2));
  throw UnknownGateError("unknown gate '" + name + "'");
}

Superoperator channel(const std::string& name, const std::vector<double>& params) {
  if (name == "bitflip" || name == "phaseflip") {
    const double p = probability_param(name, params);
    const char err = name == "bitflip" ? 'X' : 'Z';
    if (p == 0.0) return Superoperator::identity(2);
    if (p == 1.0) return Superoperator::unitary(pauli(err));
    return Superoperator({pauli('I') * cplx(std::sqrt(1.0 - p)), pauli(err) * cplx(std::sqrt(p))});
  }
  if (name == "depolarizing") {
    const std::size_t k = count_param(name, params, 1);
    if (k > 4) throw Error("builtin depolarizing: at most 4 qubits");
    std::vector<ComplexMatrix> single;
    for (char p : {'I', 'X', 'Y', 'Z'}) single.push_back(pauli(p) * cplx(0.5));
    std::vector<ComplexMatrix> ops = {ComplexMatrix::identity(1)};
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<ComplexMatrix> next;
      for (const auto& a : ops)
        for (const auto& s : single) next.push_back(kron(a, s));
      ops = std::move(next);
    }
    return Superoperator(std::move(ops));
  }
  throw UnknownGateError("unknown channel '" + name + "'");
}

}  // namespace qrobust::builtins
