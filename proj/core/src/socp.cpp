#include "wsrm/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wsrm/error.hpp"

namespace wsrm {

namespace {

// x^T Q x + 2 b^T x + d <= 0 with Q symmetric PSD.
struct QuadConstraint {
  RMatrix Q;
  RVector b;
  double d = 0.0;

  double value(const RVector& x) const { return x.dot(Q * x) + 2.0 * b.dot(x) + d; }
  RVector gradient(const RVector& x) const { return 2.0 * (Q * x + b); }
};

struct BarrierOutcome {
  RVector x;
  RVector z;  // multipliers 1 / (t (-f_l)) at the last centering point
  long steps = 0;
};

// Real embedding of a complex matrix acting on [Re x; Im x].
RMatrix real_embedding(const CMatrix& A) {
  const Index m = A.rows();
  const Index n = A.cols();
  RMatrix R(2 * m, 2 * n);
  R.topLeftCorner(m, n) = A.real();
  R.topRightCorner(m, n) = -A.imag();
  R.bottomLeftCorner(m, n) = A.imag();
  R.bottomRightCorner(m, n) = A.real();
  return R;
}

RVector real_stack(const CVector& v) {
  RVector r(2 * v.size());
  r << v.real(), v.imag();
  return r;
}

CVector complex_unstack(const RVector& r) {
  const Index n = r.size() / 2;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(r(i), r(n + i));
  return v;
}

// Orthonormal basis of the null space of A (n columns in, basis n x r out).
CMatrix null_basis(const CMatrix& A, Index n) {
  if (A.rows() == 0) return CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-12 * std::max(smax, 1e-300)) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

// Orthonormal basis of the range of a Hermitian PSD matrix.
CMatrix range_basis(const CMatrix& S) {
  const Index n = S.rows();
  if (n == 0) return CMatrix(0, 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(S);
  const RVector& ev = eig.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Index keep = 0;
  for (Index i = 0; i < n; ++i) {
    if (ev(i) > 1e-12 * top) ++keep;
  }
  return eig.eigenvectors().rightCols(keep);
}

// minimize c^T x subject to the quadratic constraints, starting at a
// strictly feasible x0, by the log-barrier path-following method.
BarrierOutcome barrier_minimize(const RVector& c, const std::vector<QuadConstraint>& cons, RVector x0,
                                double objective_floor, const SocpOptions& options) {
  const Index m = static_cast<Index>(cons.size());
  const Index n = x0.size();
  BarrierOutcome out;
  out.x = std::move(x0);
  RVector fx(m);
  auto eval_f = [&](const RVector& x, RVector& f) {
    for (Index l = 0; l < m; ++l) f(l) = cons[static_cast<std::size_t>(l)].value(x);
  };
  eval_f(out.x, fx);
  if ((fx.array() >= 0.0).any()) throw Error("barrier solver started outside the strict interior");

  auto phi = [&](const RVector& x, const RVector& f, double t) {
    return t * c.dot(x) - (-f.array()).log().sum();
  };

  double t = 1.0;
  while (true) {
    // centering
    while (true) {
      if (out.steps >= options.max_newton_steps) {
        throw ConvergenceError("SOCP barrier solver exceeded " + std::to_string(options.max_newton_steps) +
                               " Newton steps");
      }
      RVector grad = t * c;
      RMatrix hess = RMatrix::Zero(n, n);
      for (Index l = 0; l < m; ++l) {
        const QuadConstraint& q = cons[static_cast<std::size_t>(l)];
        const double slack = -fx(l);
        const RVector gf = q.gradient(out.x);
        grad += gf / slack;
        hess.noalias() += gf * gf.transpose() / (slack * slack);
        hess.noalias() += 2.0 * q.Q / slack;
      }
      const RVector dx = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(dx);
      ++out.steps;
      if (!(decrement > 2e-10) || !dx.allFinite()) break;

      double s = 1.0;
      RVector trial(n);
      RVector ft(m);
      while (true) {
        trial = out.x + s * dx;
        eval_f(trial, ft);
        if ((ft.array() < 0.0).all()) break;
        s *= 0.5;
        if (s < 1e-16) break;
      }
      const double base = phi(out.x, fx, t);
      bool moved = false;
      while (s >= 1e-16) {
        trial = out.x + s * dx;
        eval_f(trial, ft);
        if ((ft.array() < 0.0).all() && phi(trial, ft, t) < base - 0.25 * s * decrement) {
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;  // numerically centered
      out.x = trial;
      fx = ft;
    }
    out.z = (1.0 / (t * (-fx.array()))).matrix();
    if (static_cast<double>(m) / t <= options.relative_gap * std::max(std::abs(c.dot(out.x)), objective_floor)) {
      break;
    }
    t *= 20.0;
  }
  return out;
}

void check_cap(const QuadraticCap& cap, Index n, std::size_t index) {
  const std::string where = "SOCP cap " + std::to_string(index);
  if (cap.psi.rows() != n || cap.psi.cols() != n) throw DimensionError(where + ": matrix size mismatch");
  if (!std::isfinite(cap.eta) || cap.eta < 0.0) throw InputError(where + ": eta must be finite and >= 0");
  if (!cap.psi.allFinite()) throw InputError(where + ": matrix has non-finite entries");
}

}  // namespace

SocpExtractResult socp_max_linear(const SocpExtractProblem& problem, const SocpOptions& options) {
  const Index n = problem.u.size();
  if (problem.equality.rows() > 0 && problem.equality.cols() != n) {
    throw DimensionError("SOCP equality matrix column count must match the variable size");
  }
  double eta_scale = 1.0;
  for (std::size_t i = 0; i < problem.caps.size(); ++i) {
    check_cap(problem.caps[i], n, i);
    eta_scale = std::max(eta_scale, problem.caps[i].eta);
  }

  // Z spans {E a = 0} intersected with the null spaces of zero-budget caps.
  CMatrix Z = null_basis(problem.equality, n);
  std::vector<const QuadraticCap*> active;
  for (const QuadraticCap& cap : problem.caps) {
    if (cap.psi.cwiseAbs().maxCoeff() == 0.0) continue;
    if (cap.eta <= 1e-14 * eta_scale) {
      if (Z.cols() == 0) break;
      const CMatrix restricted = cap.psi * Z;
      Z = Z * null_basis(restricted, Z.cols());
    } else {
      active.push_back(&cap);
    }
  }

  SocpExtractResult result;
  result.a = CVector::Zero(n);
  if (Z.cols() == 0) return result;

  CMatrix total = CMatrix::Zero(Z.cols(), Z.cols());
  std::vector<CMatrix> reduced;
  for (const QuadraticCap* cap : active) {
    reduced.push_back(Z.adjoint() * cap->psi * Z);
    total += reduced.back();
  }
  const CVector u_z = Z.adjoint() * problem.u;
  const CMatrix V = range_basis(total);
  if ((u_z - V * (V.adjoint() * u_z)).norm() > 1e-10 * std::max(problem.u.norm(), 1e-300)) {
    throw DomainError("SOCP objective is unbounded: caps do not bound the objective direction");
  }
  const CMatrix basis = Z * V;
  const CVector u_r = V.adjoint() * u_z;
  if (basis.cols() == 0 || u_r.norm() <= 1e-300) return result;

  std::vector<QuadConstraint> cons;
  const Index r = basis.cols();
  for (std::size_t i = 0; i < active.size(); ++i) {
    QuadConstraint q;
    q.Q = real_embedding(V.adjoint() * reduced[i] * V);
    q.Q = 0.5 * (q.Q + q.Q.transpose());
    q.b = RVector::Zero(2 * r);
    q.d = -active[i]->eta;
    cons.push_back(std::move(q));
  }
  const RVector c = -real_stack(u_r);

  BarrierOutcome bo = barrier_minimize(c, cons, RVector::Zero(2 * r), 1e-300, options);

  // Caps are homogeneous, so pushing the point radially onto the nearest
  // cap only raises the objective.
  double theta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const double used = bo.x.dot(cons[i].Q * bo.x);
    if (used > 0.0) theta = std::min(theta, std::sqrt(-cons[i].d / used));
  }
  if (std::isfinite(theta) && theta > 1.0) bo.x *= theta * (1.0 - 1e-15);

  RMatrix Qz = RMatrix::Zero(2 * r, 2 * r);
  double bound = 0.0;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    Qz += bo.z(static_cast<Index>(i)) * cons[i].Q;
    bound += bo.z(static_cast<Index>(i)) * (-cons[i].d);
  }
  bound += 0.25 * c.dot(Qz.ldlt().solve(c));

  result.a = basis * complex_unstack(bo.x);
  result.value = problem.u.dot(result.a).real();  // dot conjugates u: u^H a
  result.dual_bound = bound;
  result.iterations = bo.steps;
  return result;
}

SocpMinMaxResult socp_min_max_norm(const SocpMinMaxProblem& problem, const SocpOptions& options) {
  const CMatrix& F = problem.fixed;
  const CMatrix& N = problem.basis;
  const Index M = F.rows();
  const Index K = F.cols();
  if (N.rows() != M && N.cols() > 0) throw DimensionError("SOCP nullspace basis must have M rows");
  if (problem.constraints.empty()) throw InputError("SOCP min-max problem needs at least one constraint");
  for (const LinearConstraint& con : problem.constraints) {
    if (con.dimension() != M) throw DimensionError("SOCP constraint dimension mismatch");
  }

  const std::size_t m = problem.constraints.size();
  auto ratio_at = [&](const CMatrix& T) {
    double worst = 0.0;
    for (const LinearConstraint& con : problem.constraints) worst = std::max(worst, con.usage(T) / con.gamma());
    return worst;
  };

  SocpMinMaxResult result;
  result.B = CMatrix::Zero(N.cols(), K);
  const double s_fixed = ratio_at(F);
  if (N.cols() == 0 || K == 0 || s_fixed == 0.0) {
    result.u = std::sqrt(s_fixed);
    result.lower_bound = result.u;
    return result;
  }

  // Restrict B to directions some constraint actually sees.
  std::vector<CMatrix> A(m);
  std::vector<CMatrix> E(m);
  CMatrix total = CMatrix::Zero(N.cols(), N.cols());
  for (std::size_t l = 0; l < m; ++l) {
    const CMatrix& Fl = problem.constraints[l].factor();
    A[l] = Fl.adjoint() * N;
    E[l] = Fl.adjoint() * F;
    total += A[l].adjoint() * A[l] / problem.constraints[l].gamma();
  }
  const CMatrix V = range_basis(total);
  const Index r = V.cols();
  if (r == 0) {
    result.u = std::sqrt(s_fixed);
    result.lower_bound = result.u;
    return result;
  }

  // Variables: [Re c_k; Im c_k] per column k, then s = u^2.
  const Index ny = 2 * r * K;
  std::vector<QuadConstraint> cons(m);
  for (std::size_t l = 0; l < m; ++l) {
    const double g = problem.constraints[l].gamma();
    const RMatrix RA = real_embedding(A[l] * V);
    const RMatrix block = RA.transpose() * RA / g;
    QuadConstraint& q = cons[l];
    q.Q = RMatrix::Zero(ny + 1, ny + 1);
    q.b = RVector::Zero(ny + 1);
    q.d = 0.0;
    for (Index k = 0; k < K; ++k) {
      const RVector e = real_stack(E[l].col(k));
      q.Q.block(2 * r * k, 2 * r * k, 2 * r, 2 * r) = block;
      q.b.segment(2 * r * k, 2 * r) = RA.transpose() * e / g;
      q.d += e.squaredNorm() / g;
    }
    q.b(ny) = -0.5;
  }
  RVector c = RVector::Zero(ny + 1);
  c(ny) = 1.0;
  RVector x0 = RVector::Zero(ny + 1);
  x0(ny) = s_fixed * (1.0 + 1e-3);

  const BarrierOutcome bo = barrier_minimize(c, cons, x0, 1e-14 * s_fixed, options);

  for (Index k = 0; k < K; ++k) {
    result.B.col(k) = V * complex_unstack(bo.x.segment(2 * r * k, 2 * r));
  }
  result.u = std::sqrt(ratio_at(F + N * result.B));

  // Dual bound with the multipliers normalized to sum to one, which removes
  // the epigraph variable from the Lagrangian.
  const RVector z = bo.z / bo.z.sum();
  RMatrix Qz = RMatrix::Zero(ny, ny);
  RVector bz = RVector::Zero(ny);
  double dz = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    const double w = z(static_cast<Index>(l));
    Qz += w * cons[l].Q.topLeftCorner(ny, ny);
    bz += w * cons[l].b.head(ny);
    dz += w * cons[l].d;
  }
  const double bound_s = dz - bz.dot(Qz.ldlt().solve(bz));
  result.lower_bound = std::sqrt(std::max(bound_s, 0.0));
  result.iterations = bo.steps;
  return result;
}

}  // namespace wsrm
