#include "block_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdio>
#include <fstream>
#include <limits>

namespace qrobust::detail {

namespace {

using Blocks = std::vector<RealMatrix>;

Blocks zero_blocks(const std::vector<std::size_t>& dims) {
  Blocks b;
  for (auto d : dims) b.emplace_back(d, d);
  return b;
}

void add_entries(Blocks& b, const std::vector<SparseEntry>& f, double s) {
  for (const auto& e : f) b[e.block](e.row, e.col) += s * e.value;
}

// <F, G> = sum_ab F_ab G_ba
double sparse_inner(const std::vector<SparseEntry>& f, const Blocks& g) {
  double s = 0.0;
  for (const auto& e : f) s += e.value * g[e.block](e.col, e.row);
  return s;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += dot(a[k], b[k]);
  return s;
}

Blocks primal_slack(const BlockSdp& sdp, const std::vector<double>& y) {
  Blocks x = zero_blocks(sdp.block_dims);
  for (std::size_t i = 0; i < y.size(); ++i) add_entries(x, sdp.f[i], y[i]);
  add_entries(x, sdp.f0, -1.0);
  for (auto& m : x) m = symmetrize(m);
  return x;
}

bool factor(const Blocks& x, Blocks& lower) {
  lower.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!cholesky(x[k], lower[k])) return false;
  return true;
}

// Largest t with x + t dx >= 0, given the Cholesky factors of x.
double max_step(const Blocks& lower, const Blocks& dx) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dx.size(); ++k) {
    const RealMatrix s = congruence_by_inverse(lower[k], dx[k]);
    const double lmin = symmetric_min_eigenvalue(s);
    if (lmin < 0.0) t = std::min(t, -1.0 / lmin);
  }
  return t;
}

struct Grouped {
  // entries of F_i split by block
  std::vector<std::vector<std::vector<SparseEntry>>> by_block;
  std::vector<std::vector<std::size_t>> blocks_of;
};

Grouped group(const BlockSdp& sdp) {
  Grouped g;
  const std::size_t nb = sdp.block_dims.size();
  g.by_block.resize(sdp.f.size(), std::vector<std::vector<SparseEntry>>(nb));
  g.blocks_of.resize(sdp.f.size());
  for (std::size_t i = 0; i < sdp.f.size(); ++i) {
    for (const auto& e : sdp.f[i]) g.by_block[i][e.block].push_back(e);
    for (std::size_t b = 0; b < nb; ++b)
      if (!g.by_block[i][b].empty()) g.blocks_of[i].push_back(b);
  }
  return g;
}

// M_ij = <F_i, Xinv F_j Z>
RealMatrix schur(const Grouped& g, const Blocks& xinv, const Blocks& z) {
  const std::size_t m = g.by_block.size();
  RealMatrix mm(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t b : g.blocks_of[i]) {
        const auto& fj = g.by_block[j][b];
        if (fj.empty()) continue;
        const RealMatrix& xi = xinv[b];
        const RealMatrix& zb = z[b];
        for (const auto& p : g.by_block[i][b])
          for (const auto& q : fj) s += p.value * q.value * xi(p.col, q.row) * zb(q.col, p.row);
      }
      mm(i, j) = s;
      mm(j, i) = s;
    }
  }
  return mm;
}

// Cholesky factor of the Schur complement, with a tiny diagonal shift when it is numerically singular.
RealMatrix factor_schur(RealMatrix mm) {
  RealMatrix l;
  if (!cholesky(mm, l)) {
    double diag = 0.0;
    for (std::size_t i = 0; i < mm.rows(); ++i) diag = std::max(diag, mm(i, i));
    for (std::size_t i = 0; i < mm.rows(); ++i) mm(i, i) += 1e-13 * std::max(diag, 1.0);
    if (!cholesky(mm, l)) throw NumericalFailure("sdp: Schur complement is not positive definite");
  }
  return l;
}

struct Direction {
  std::vector<double> dy;
  Blocks dx;
  Blocks dz;
};

// HKM direction for complementarity target `shift` I - corr.
Direction direction(const BlockSdp& sdp, const RealMatrix& schur_lower, const Blocks& xinv,
                    const Blocks& z, double shift, const Blocks* corr) {
  const std::size_t nb = z.size();
  Blocks target(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    RealMatrix t = RealMatrix::identity(z[k].rows()) * shift;
    if (corr) t -= (*corr)[k];
    target[k] = matmul(xinv[k], t);
  }
  std::vector<double> rhs(sdp.c.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = sparse_inner(sdp.f[i], target) - sdp.c[i];
  Direction d;
  cholesky_solve(schur_lower, rhs);
  d.dy = std::move(rhs);
  d.dx = zero_blocks(sdp.block_dims);
  for (std::size_t i = 0; i < d.dy.size(); ++i) add_entries(d.dx, sdp.f[i], d.dy[i]);
  d.dz.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    // dZ = sym(Xinv (target_shift - corr - dX Z)) - Z
    RealMatrix t = target[k] - matmul(xinv[k], matmul(d.dx[k], z[k]));
    d.dz[k] = symmetrize(t) - z[k];
  }
  return d;
}

}  // namespace

BlockSdpResult solve_block_sdp(const BlockSdp& sdp, const std::vector<double>& y0, const BlockSdpOptions& opts) {
  const std::size_t m = sdp.c.size();
  if (y0.size() != m || sdp.f.size() != m) throw DimensionError("sdp: inconsistent number of constraints");
  const Grouped g = group(sdp);
  std::size_t ntot = 0;
  for (auto d : sdp.block_dims) ntot += d;

  std::vector<double> y = y0;
  Blocks x = primal_slack(sdp, y);
  Blocks lx;
  if (!factor(x, lx)) throw Error("sdp: starting point is not strictly feasible");
  double cmax = 0.0;
  for (double v : sdp.c) cmax = std::max(cmax, std::abs(v));
  Blocks z = zero_blocks(sdp.block_dims);
  for (auto& b : z) b = RealMatrix::identity(b.rows()) * (1.0 + cmax);

  BlockSdpResult best;
  bool have_best = false;
  auto record = [&](int it) {
    BlockSdpResult r;
    r.y = y;
    r.x = x;
    r.z = z;
    r.iterations = it;
    for (std::size_t i = 0; i < m; ++i) r.primal += sdp.c[i] * y[i];
    for (const auto& e : sdp.f0) r.dual += e.value * z[e.block](e.col, e.row);
    r.gap = inner(x, z);
    for (std::size_t i = 0; i < m; ++i) r.dual_residual = std::max(r.dual_residual, std::abs(sdp.c[i] - sparse_inner(sdp.f[i], z)));
    // Iterates within the acceptance residual compete on gap + residual; rounding keeps late residuals
    // a little above feas_tol while their gap is orders of magnitude below the early ones.
    const double accept = opts.feas_tol * (1.0 + cmax) * 1e3;
    const bool acceptable = r.dual_residual <= accept;
    const bool best_acceptable = have_best && best.dual_residual <= accept;
    const double merit = r.gap + r.dual_residual;
    if (!have_best || (acceptable && !best_acceptable) ||
        (acceptable == best_acceptable && merit < best.gap + best.dual_residual)) {
      best = r;
      have_best = true;
    }
    const bool feasible = r.dual_residual <= opts.feas_tol * (1.0 + cmax);
    return feasible && r.gap <= opts.target_gap * std::max(1.0, std::abs(r.primal));
  };

  // Stop once the best merit has not halved over kStallWindow iterations.
  constexpr int kStallWindow = 6;
  double window_merit = std::numeric_limits<double>::infinity();
  int window_start = 0;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    if (record(it) || it == opts.max_iterations) break;
    const double merit = best.gap + best.dual_residual;
    if (merit < 0.5 * window_merit) {
      window_merit = merit;
      window_start = it;
    } else if (it - window_start >= kStallWindow && best.dual_residual <= opts.feas_tol * (1.0 + cmax) * 1e3 &&
               best.gap <= opts.gap_tol * std::max(1.0, std::abs(best.primal))) {
      break;
    }
    Blocks xinv(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) xinv[k] = cholesky_inverse(lx[k]);
    Blocks lz;
    if (!factor(z, lz)) break;
    const double mu = inner(x, z) / static_cast<double>(ntot);
    const RealMatrix schur_l = factor_schur(schur(g, xinv, z));

    Direction pred = direction(sdp, schur_l, xinv, z, 0.0, nullptr);
    const double ap = std::min(1.0, max_step(lx, pred.dx));
    const double bp = std::min(1.0, max_step(lz, pred.dz));
    Blocks xa = x, za = z;
    for (std::size_t k = 0; k < x.size(); ++k) {
      xa[k] += pred.dx[k] * ap;
      za[k] += pred.dz[k] * bp;
    }
    const double mu_aff = inner(xa, za) / static_cast<double>(ntot);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    Blocks corr(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) corr[k] = matmul(pred.dx[k], pred.dz[k]);
    Direction d = direction(sdp, schur_l, xinv, z, sigma * mu, &corr);

    const double a = std::min(1.0, opts.step_fraction * max_step(lx, d.dx));
    const double b = std::min(1.0, opts.step_fraction * max_step(lz, d.dz));
    if (a < 1e-12 && b < 1e-12) break;
    for (std::size_t i = 0; i < m; ++i) y[i] += a * d.dy[i];
    Blocks xn = primal_slack(sdp, y);
    Blocks ln;
    if (!factor(xn, ln)) {
      for (std::size_t i = 0; i < m; ++i) y[i] -= a * d.dy[i];
      break;
    }
    x = std::move(xn);
    lx = std::move(ln);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = symmetrize(z[k] + d.dz[k] * b);
  }

  const double scale = std::max(1.0, std::abs(best.primal));
  if (best.dual_residual > opts.feas_tol * (1.0 + cmax) * 1e3 || best.gap > opts.gap_tol * scale) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "sdp: stopped with duality gap %.3g and dual residual %.3g after %d iterations",
                  best.gap, best.dual_residual, best.iterations);
    throw NumericalFailure(msg);
  }
  return best;
}

void write_sdpa(const BlockSdp& sdp, const std::string& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write SDPA file '" + path + "'");
  out.precision(17);
  out << "\"" << comment << "\n" << sdp.c.size() << "\n" << sdp.block_dims.size() << "\n";
  for (std::size_t b = 0; b < sdp.block_dims.size(); ++b) out << (b ? " " : "") << sdp.block_dims[b];
  out << "\n";
  for (std::size_t i = 0; i < sdp.c.size(); ++i) out << (i ? " " : "") << sdp.c[i];
  out << "\n";
  auto emit = [&](std::size_t k, const std::vector<SparseEntry>& f) {
    for (const auto& e : f)
      if (e.row <= e.col && e.value != 0.0)
        out << k << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << e.value << "\n";
  };
  emit(0, sdp.f0);
  for (std::size_t i = 0; i < sdp.f.size(); ++i) emit(i + 1, sdp.f[i]);
}

}  // namespace qrobust::detail
