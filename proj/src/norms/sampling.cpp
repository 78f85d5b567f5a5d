#include <cmath>
#include <random>

#include "qrobust/norms.hpp"

namespace qrobust {

namespace {

// Input-ancilla amplitudes as a d_in x d_in matrix psi(i, a), unit Frobenius norm.
void normalize(ComplexMatrix& psi) { psi *= cplx(1.0 / frobenius_norm(psi)); }

double constraint_value(const ComplexMatrix& psi, const ComplexMatrix& q) {
  return trace(dagger(psi) * q * psi).real();
}

// Advantage of the difference map on the purified input.
double advantage(const ComplexMatrix& j, std::size_t dout, std::size_t din, const ComplexMatrix& psi) {
  ComplexMatrix k(dout * din, dout * din);
  for (std::size_t o = 0; o < dout; ++o)
    for (std::size_t a = 0; a < din; ++a)
      for (std::size_t i = 0; i < din; ++i) k(o * din + a, o * din + i) = psi(i, a);
  return positive_part(k * j * dagger(k));
}

}  // namespace

double sampled_lower_bound_choi(const ComplexMatrix& j, std::size_t d_out, std::size_t d_in, const ComplexMatrix& q_in,
                                double lambda, int trials, std::uint64_t seed) {
  if (trials <= 0) return 0.0;
  if (j.rows() != d_out * d_in || j.cols() != d_out * d_in) throw DimensionError("sampled_lower_bound: objective shape");
  const ComplexMatrix q = q_in.empty() ? ComplexMatrix::identity(d_in) : q_in;
  const Spectrum qs = hermitian_eig(q);
  if (lambda > qs.eigenvalues.front() + 1e-9) return 0.0;
  ComplexMatrix top(d_in, 1);
  for (std::size_t i = 0; i < d_in; ++i) top(i, 0) = qs.eigenvectors(i, 0);

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_psi = [&] {
    ComplexMatrix psi(d_in, d_in);
    for (std::size_t i = 0; i < d_in * d_in; ++i) psi.data()[i] = cplx(gauss(gen), gauss(gen));
    normalize(psi);
    return psi;
  };
  // Moves an inadmissible input toward top (x) (closest ancilla vector) until it is admissible.
  auto make_feasible = [&](ComplexMatrix psi) {
    if (constraint_value(psi, q) >= lambda) return psi;
    ComplexMatrix anc = dagger(top) * psi;  // 1 x d_in
    ComplexMatrix target(d_in, d_in);
    const double an = frobenius_norm(anc);
    for (std::size_t i = 0; i < d_in; ++i)
      for (std::size_t a = 0; a < d_in; ++a) target(i, a) = top(i, 0) * (an > 1e-12 ? anc(0, a) / an : cplx(a == 0));
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      ComplexMatrix c = psi * cplx(1.0 - mid) + target * cplx(mid);
      normalize(c);
      (constraint_value(c, q) >= lambda ? hi : lo) = mid;
    }
    ComplexMatrix c = psi * cplx(1.0 - hi) + target * cplx(hi);
    normalize(c);
    return c;
  };

  double best = 0.0;
  ComplexMatrix best_psi = make_feasible(random_psi());
  best = advantage(j, d_out, d_in, best_psi);
  for (int t = 1; t < trials; ++t) {
    ComplexMatrix psi;
    if (t % 2 == 0) {
      psi = random_psi();
    } else {
      const double scale = std::pow(10.0, -3.0 * unit(gen));
      psi = best_psi + random_psi() * cplx(scale);
      normalize(psi);
    }
    psi = make_feasible(psi);
    if (constraint_value(psi, q) < lambda - 1e-12) continue;
    const double v = advantage(j, d_out, d_in, psi);
    if (v > best) {
      best = v;
      best_psi = psi;
    }
  }
  return best;
}

double sampled_lower_bound(const Superoperator& e, const Superoperator& f, const Predicate& q, double lambda,
                           int trials, std::uint64_t seed) {
  if (e.d_in() != f.d_in() || e.d_out() != f.d_out()) throw DimensionError("sampled_lower_bound: maps have different shapes");
  return sampled_lower_bound_choi(choi_rect(e) - choi_rect(f), e.d_out(), e.d_in(), q.matrix(), lambda, trials, seed);
}

}  // namespace qrobust
