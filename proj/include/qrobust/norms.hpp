#pragma once

// Trace distance, diamond norm and the (Q, lambda)-constrained diamond norm.

#include <cstdint>
#include <string>

#include "qrobust/quantum.hpp"

namespace qrobust {

double trace_distance(const DensityOperator& a, const DensityOperator& b);
// Half the trace norm of the difference of two Hermitian matrices.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// Maximise tr(J W) over 0 <= W <= I_out (x) sigma, tr sigma = 1, tr(Q rho) >= lambda,
// where rho = sigma^T is the reduced input state (W lives in Choi coordinates, output factor first).
// J is the Choi matrix of a difference of maps and the value is the largest distinguishing
// advantage max_P tr(P (Delta (x) I)(psi)) over admissible inputs psi.
struct SdpInstance {
  ComplexMatrix objective;  // (d_out * d_in) square, Hermitian
  std::size_t d_out = 0;
  std::size_t d_in = 0;
  ComplexMatrix q;          // d_in x d_in predicate; empty means the identity
  double lambda = 0.0;
};

struct SdpOptions {
  double gap_tol = 1e-7;      // success threshold
  double target_gap = 1e-12;  // iterate toward this while progress is possible
  double feas_tol = 1e-9;
  int max_iterations = 200;
  double step_fraction = 0.95;
  std::size_t max_variables = 5000;  // larger instances raise NumericalFailure
  std::string dump_path;             // write the realified instance in SDPA format when set
};

struct SdpSolution {
  double value = 0.0;
  ComplexMatrix w;
  ComplexMatrix rho;    // optimal reduced input state
  ComplexMatrix sigma;  // rho^T, the operator bounding W
  double duality_gap = 0.0;
  int iterations = 0;
  // The threshold reached the top of Q's spectrum and the input was restricted to that eigenspace.
  bool face_reduced = false;
  // The threshold was at or below the bottom of Q's spectrum and imposed nothing.
  bool constraint_dropped = false;
};

// Throws Infeasible when lambda exceeds the largest eigenvalue of Q, NumericalFailure when
// the solver cannot reach gap_tol or the instance is too large.
SdpSolution sdp_solve(const SdpInstance& inst, const SdpOptions& opts = {});

double diamond_norm(const Superoperator& e, const Superoperator& f, const SdpOptions& opts = {});
double q_lambda_diamond_norm(const Superoperator& e, const Superoperator& f, const Predicate& q, double lambda,
                             const SdpOptions& opts = {});
// Same norm for a map given by the Choi matrix of a difference.
double q_lambda_diamond_norm_choi(const ComplexMatrix& j, std::size_t d_out, std::size_t d_in, const ComplexMatrix& q,
                                  double lambda, const SdpOptions& opts = {});

// Random-search lower bound: best distinguishing advantage over `trials` admissible pure
// inputs on input (x) ancilla, ancilla dimension d_in.
double sampled_lower_bound(const Superoperator& e, const Superoperator& f, const Predicate& q, double lambda,
                           int trials, std::uint64_t seed);
double sampled_lower_bound_choi(const ComplexMatrix& j, std::size_t d_out, std::size_t d_in, const ComplexMatrix& q,
                                double lambda, int trials, std::uint64_t seed);

// Sum of the positive eigenvalues: the distinguishing advantage max_P tr(P h).
double positive_part(const ComplexMatrix& h);

}  // namespace qrobust
