#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"
#include "wsrm/dpc_newton.hpp"
#include "wsrm/zf_core.hpp"
#include "wsrm/zf_gradient.hpp"

namespace wsrm::testing {

// Interior Newton state with p in [0.5, 3], lambda and mu in [0.2, 2].
inline NewtonState random_newton_state(std::mt19937_64& rng, const Instance& inst) {
  std::uniform_real_distribution<double> pu(0.5, 3.0);
  std::uniform_real_distribution<double> lu(0.2, 2.0);
  NewtonState s;
  s.powers = RVector::NullaryExpr(inst.users(), [&] { return pu(rng); });
  s.multipliers = RVector::NullaryExpr(inst.extra_constraint_count(), [&] { return lu(rng); });
  s.coupling = lu(rng);
  s.barrier = 0.5 + 2.0 * lu(rng);
  return s;
}

// Packs (p, lambda, mu) so finite differences can sweep every coordinate.
inline RVector pack(const NewtonState& s) {
  RVector x(s.powers.size() + s.multipliers.size() + 1);
  x << s.powers, s.multipliers, s.coupling;
  return x;
}

inline NewtonState unpack(const NewtonState& like, const RVector& x) {
  NewtonState s = like;
  const Index K = like.powers.size();
  const Index L = like.multipliers.size();
  s.powers = x.head(K);
  s.multipliers = x.segment(K, L);
  s.coupling = x(K + L);
  return s;
}

inline double fd_step(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

// The (p, lambda) residual blocks are the barrier gradient shifted by the
// coupling terms (-mu, mu gamma); compares them to central differences.
inline double residual_fd_error(const Instance& inst, const NewtonState& s) {
  const Index K = inst.users();
  const Index L = inst.extra_constraint_count();
  RVector fd(K + L);
  for (Index i = 0; i < K + L; ++i) {
    NewtonState up = s;
    NewtonState down = s;
    double& a = i < K ? up.powers(i) : up.multipliers(i - K);
    double& b = i < K ? down.powers(i) : down.multipliers(i - K);
    const double h = fd_step(a);
    a += h;
    b -= h;
    fd(i) = (barrier_objective(inst, up) - barrier_objective(inst, down)) / (2.0 * h);
  }
  const RVector r = kkt_residual(inst, s);
  RVector analytic(K + L);
  analytic.head(K) = r.head(K).array() + s.coupling;
  for (Index l = 0; l < L; ++l) analytic(K + l) = r(K + l) - s.coupling * inst.constraint(l + 1).gamma();
  return relative_error(analytic, fd);
}

inline double kkt_fd_error(const Instance& inst, const NewtonState& s) {
  const RVector x = pack(s);
  RMatrix fd(x.size(), x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = fd_step(x(j));
    RVector up = x;
    RVector down = x;
    up(j) += h;
    down(j) -= h;
    fd.col(j) = (kkt_residual(inst, unpack(s, up)) - kkt_residual(inst, unpack(s, down))) / (2.0 * h);
  }
  return (kkt_matrix(inst, s) - fd).norm() / fd.norm();
}

// Largest constraint load sum_k tr(A_k reduced[k][l]) / gamma_l.
inline double worst_load(const Instance& inst, const ZfGeometry& geo, const std::vector<CMatrix>& A) {
  const RMatrix budgets = relaxation_budgets(geo, A);
  double worst = 0.0;
  for (Index l = 0; l < inst.constraint_count(); ++l) {
    worst = std::max(worst, budgets.col(l).sum() / inst.constraint(l).gamma());
  }
  return worst;
}

// Interior relaxation point: Hermitian PD blocks scaled to half the tightest
// budget, barrier in [0.5, 5].
inline RelaxState random_relax_state(std::mt19937_64& rng, const Instance& inst, const ZfGeometry& geo) {
  RelaxState s;
  const Index r = geo.reduced_dimension();
  for (Index k = 0; k < inst.users(); ++k) s.A.push_back(random_psd(rng, r, r) + 0.1 * CMatrix::Identity(r, r));
  const double worst = worst_load(inst, geo, s.A);
  for (CMatrix& a : s.A) a *= 0.5 / worst;
  std::uniform_real_distribution<double> t(0.5, 5.0);
  s.barrier = t(rng);
  return s;
}

// Random PSD blocks of the given rank scaled so every constraint keeps slack.
inline std::vector<CMatrix> random_feasible_point(std::mt19937_64& rng, const Instance& inst,
                                                  const ZfGeometry& geo, Index rank) {
  std::vector<CMatrix> A;
  for (Index k = 0; k < inst.users(); ++k) A.push_back(random_psd(rng, geo.reduced_dimension(), rank));
  const double worst = worst_load(inst, geo, A);
  std::uniform_real_distribution<double> fill(0.3, 1.0);
  const double scale = fill(rng) / worst;
  for (CMatrix& a : A) a *= scale;
  return A;
}

inline double relax_rate_reference(const Instance& inst, const ZfGeometry& geo, const std::vector<CMatrix>& A) {
  double total = 0.0;
  for (Index k = 0; k < inst.users(); ++k) {
    total += inst.weights()(k) * std::log1p(geo.d(k) * std::real(A[static_cast<std::size_t>(k)](0, 0)));
  }
  return total;
}

// Central differences in the Hermitian coordinates: diagonal entries, then
// the real and imaginary parts of each entry below the diagonal.
inline std::vector<CMatrix> relax_fd_gradient(const Instance& inst, const ZfGeometry& geo, const RelaxState& s) {
  auto value = [&](Index k, const CMatrix& A) {
    RelaxState moved = s;
    moved.A[static_cast<std::size_t>(k)] = A;
    return relax_objective(inst, geo, moved);
  };
  std::vector<CMatrix> out;
  for (Index k = 0; k < inst.users(); ++k) {
    const CMatrix& A = s.A[static_cast<std::size_t>(k)];
    const Index r = A.rows();
    CMatrix D = CMatrix::Zero(r, r);
    const double h = 1e-6 * std::max(1.0, A.norm());
    auto central = [&](const CMatrix& dir) { return (value(k, A + h * dir) - value(k, A - h * dir)) / (2 * h); };
    for (Index m = 0; m < r; ++m) {
      for (Index n = 0; n <= m; ++n) {
        CMatrix dir = CMatrix::Zero(r, r);
        if (m == n) {
          dir(m, m) = 1.0;
          D(m, m) = central(dir);
          continue;
        }
        dir(m, n) = 1.0;
        dir(n, m) = 1.0;
        const double re = central(dir);
        dir(m, n) = Complex(0.0, 1.0);
        dir(n, m) = Complex(0.0, -1.0);
        const double im = central(dir);
        D(m, n) = Complex(re, im);
        D(n, m) = std::conj(D(m, n));
      }
    }
    out.push_back(D);
  }
  return out;
}

inline double stacked_relative_error(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]).squaredNorm();
    den += b[k].squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace wsrm::testing
