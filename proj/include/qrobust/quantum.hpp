#pragma once

// States, channels, measurements and predicates over qubit registers.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrobust/linalg.hpp"

namespace qrobust {

class DensityOperator {
 public:
  // Validates Hermiticity, positivity and tr <= 1 (partial states are allowed).
  explicit DensityOperator(ComplexMatrix mat, double tolerance = tol::psd);
  static DensityOperator from_ket(const ComplexMatrix& ket);
  static DensityOperator basis(const std::string& bits);

  const ComplexMatrix& matrix() const { return mat_; }
  std::size_t dim() const { return mat_.rows(); }
  double trace() const { return qrobust::trace(mat_).real(); }

 private:
  ComplexMatrix mat_;
};

class Superoperator {
 public:
  Superoperator() = default;
  // All operators must share one shape d_out x d_in.
  explicit Superoperator(std::vector<ComplexMatrix> kraus);
  static Superoperator identity(std::size_t d);
  static Superoperator unitary(const ComplexMatrix& u);
  static Superoperator zero(std::size_t d_out, std::size_t d_in);

  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  std::size_t d_in() const { return d_in_; }
  std::size_t d_out() const { return d_out_; }

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  DensityOperator apply(const DensityOperator& rho) const;
  // Heisenberg picture: sum_k E_k^dag A E_k.
  ComplexMatrix apply_dual(const ComplexMatrix& a) const;
  // sum_k E_k^dag E_k
  ComplexMatrix kraus_sum() const;
  bool trace_non_increasing(double tolerance = tol::psd) const;
  bool trace_preserving(double tolerance = tol::psd) const;

 private:
  std::vector<ComplexMatrix> kraus_;
  std::size_t d_in_ = 0;
  std::size_t d_out_ = 0;
};

// e2 after e1.
Superoperator compose(const Superoperator& e2, const Superoperator& e1);
Superoperator dual(const Superoperator& e);
Superoperator tensor(const Superoperator& a, const Superoperator& b);
// (1 - p) a + p b as a scaled Kraus union.
Superoperator mix(double p, const Superoperator& a, const Superoperator& b);
// alpha * e for alpha >= 0.
Superoperator scale(const Superoperator& e, double alpha);
// a + b (Kraus union).
Superoperator sum(const Superoperator& a, const Superoperator& b);

// J = sum_ij e(|i><j|) (x) |i><j|, output factor first; requires d_in == d_out.
ComplexMatrix choi(const Superoperator& e);
// Same construction without the square requirement: (d_out * d_in) square matrix.
ComplexMatrix choi_rect(const Superoperator& e);
ComplexMatrix choi_difference(const Superoperator& e, const Superoperator& f);
// tr_in(J (I (x) rho^T)): applies the map described by a Choi matrix.
ComplexMatrix apply_choi(const ComplexMatrix& j, const ComplexMatrix& rho, std::size_t d_out, std::size_t d_in);
// Choi-matrix equality within tolerance (gauge-free comparison).
bool same_channel(const Superoperator& e, const Superoperator& f, double tolerance = 1e-10);

class Measurement {
 public:
  using Outcome = std::pair<std::string, ComplexMatrix>;
  Measurement() = default;
  explicit Measurement(std::vector<Outcome> outcomes);

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& label(std::size_t i) const { return outcomes_.at(i).first; }
  const ComplexMatrix& op(std::size_t i) const { return outcomes_.at(i).second; }
  std::optional<std::size_t> index_of(const std::string& label) const;
  // max |sum_m M_m^dag M_m - I|
  double completeness_defect() const;
  bool complete(double tolerance = 1e-9) const { return completeness_defect() <= tolerance; }

 private:
  std::vector<Outcome> outcomes_;
  std::size_t dim_ = 0;
};

class Predicate {
 public:
  // Requires 0 <= mat <= I within tolerance.
  explicit Predicate(ComplexMatrix mat, double tolerance = tol::psd);
  static Predicate identity(std::size_t d) { return Predicate(ComplexMatrix::identity(d)); }
  static Predicate zero(std::size_t d) { return Predicate(ComplexMatrix(d, d)); }
  const ComplexMatrix& matrix() const { return mat_; }
  std::size_t dim() const { return mat_.rows(); }

 private:
  ComplexMatrix mat_;
};

struct NoiseSpec {
  double probability = 0.0;
  Superoperator channel;
};

using Register = std::vector<std::string>;

// Qubit positions of targets inside reg; position 0 is the most significant factor.
std::vector<std::size_t> positions_in(const std::vector<std::string>& targets, const Register& reg);
std::size_t qubit_count(std::size_t dim);

// Operator acting on qubits `pos` (first listed is the most significant of op) of an n-qubit space.
ComplexMatrix embed(const ComplexMatrix& op, const std::vector<std::size_t>& pos, std::size_t nqubits);
ComplexMatrix lift(const ComplexMatrix& op, const std::vector<std::string>& targets, const Register& reg);
Superoperator lift(const Superoperator& e, const std::vector<std::string>& targets, const Register& reg);

// In-place kernels for local operators on the row/column qubits of a 2^n-dimensional matrix.
// left: m <- op_local m.  right_dagger: m <- m op_local^dag.
void apply_local_left(ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                      std::size_t nqubits);
void apply_local_right_dagger(ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                              std::size_t nqubits);
// op m op^dag with op acting locally.
ComplexMatrix conjugate_local(const ComplexMatrix& m, const ComplexMatrix& op, const std::vector<std::size_t>& pos,
                              std::size_t nqubits);

namespace builtins {

bool is_gate(const std::string& name);
bool is_channel(const std::string& name);
ComplexMatrix gate(const std::string& name, const std::vector<double>& params = {});
Superoperator channel(const std::string& name, const std::vector<double>& params = {});

// Controlled X with one control bit per pattern character ('0' or '1'); target is the last qubit.
ComplexMatrix controlled_x(const std::string& pattern);
// Coin (x) position shift for a walk on a circle of n points, positions stored in ceil(log2 n) qubits.
ComplexMatrix walk_shift(std::size_t n);
// Logical version of a k-qubit gate on the 3-qubit repetition code (3k physical qubits, contiguous blocks).
ComplexMatrix repetition_logical(const ComplexMatrix& g);
ComplexMatrix pauli_power(char pauli, std::size_t copies);

}  // namespace builtins

}  // namespace qrobust
