#pragma once

// Primal-dual interior-point method for real block-diagonal SDPs in SDPA form:
//   min c.y  s.t.  X = sum_i y_i F_i - F_0 >= 0        (primal, y free)
//   max <F_0, Y>  s.t.  <F_i, Y> = c_i, Y >= 0         (dual)

#include <string>
#include <vector>

#include "qrobust/linalg.hpp"

namespace qrobust::detail {

// One nonzero of a symmetric block matrix; off-diagonal entries appear twice.
struct SparseEntry {
  std::size_t block;
  std::size_t row;
  std::size_t col;
  double value;
};

struct BlockSdp {
  std::vector<std::size_t> block_dims;
  std::vector<double> c;
  std::vector<std::vector<SparseEntry>> f;  // F_1 .. F_m
  std::vector<SparseEntry> f0;
};

struct BlockSdpOptions {
  double gap_tol = 1e-7;      // required for success
  double target_gap = 1e-12;  // iteration continues toward this while steps make progress
  double feas_tol = 1e-9;
  int max_iterations = 200;
  double step_fraction = 0.95;
};

struct BlockSdpResult {
  std::vector<double> y;
  std::vector<RealMatrix> x;
  std::vector<RealMatrix> z;  // dual variable
  double primal = 0.0;        // c.y
  double dual = 0.0;          // <F_0, Z>
  double gap = 0.0;           // <X, Z>
  double dual_residual = 0.0;
  int iterations = 0;
};

// y0 must give a strictly feasible X. Throws NumericalFailure when the gap tolerance is not reached.
BlockSdpResult solve_block_sdp(const BlockSdp& sdp, const std::vector<double>& y0, const BlockSdpOptions& opts);

// SDPA sparse format (upper triangles, 1-based indices).
void write_sdpa(const BlockSdp& sdp, const std::string& path, const std::string& comment);

}  // namespace qrobust::detail
