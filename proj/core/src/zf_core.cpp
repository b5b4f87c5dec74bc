#include "wsrm/zf_core.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "wsrm/error.hpp"

namespace wsrm {

ZfGeometry zf_geometry(const Instance& instance, double rank_tolerance) {
  instance.require_full_column_rank(rank_tolerance);
  const CMatrix& H = instance.channels();
  const Index M = instance.antennas();
  const Index K = instance.users();

  Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const CMatrix& U = svd.matrixU();
  const RVector& s = svd.singularValues();

  ZfGeometry geo;
  // H^+ = U_K S^{-1} V^H
  const CMatrix pinv = U.leftCols(K) * s.cwiseInverse().asDiagonal() * svd.matrixV().adjoint();
  geo.G.resize(M, K);
  geo.d.resize(K);
  for (Index k = 0; k < K; ++k) {
    CVector g = pinv.col(k) / pinv.col(k).norm();
    const Complex proj = g.dot(H.col(k));  // g^H h
    if (std::abs(proj) == 0.0) {
      throw RankDeficientError("pseudo-inverse column " + std::to_string(k) + " is orthogonal to its channel");
    }
    g *= proj / std::abs(proj);  // makes g^H h real positive
    geo.G.col(k) = g;
    geo.d(k) = std::norm(proj);
  }
  geo.U_perp = U.rightCols(M - K);

  const Index r = M - K + 1;
  geo.U.reserve(static_cast<std::size_t>(K));
  geo.reduced.resize(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    CMatrix Uk(M, r);
    Uk.col(0) = geo.G.col(k);
    Uk.rightCols(r - 1) = geo.U_perp;
    for (const LinearConstraint& con : instance.constraints()) {
      const CMatrix FU = con.factor().adjoint() * Uk;
      geo.reduced[static_cast<std::size_t>(k)].push_back(FU.adjoint() * FU);
    }
    geo.U.push_back(std::move(Uk));
  }
  return geo;
}

RMatrix relaxation_budgets(const ZfGeometry& geometry, const std::vector<CMatrix>& A) {
  const Index K = geometry.users();
  if (static_cast<Index>(A.size()) != K) throw DimensionError("one reduced matrix per user is required");
  const Index L1 = static_cast<Index>(geometry.reduced.front().size());
  RMatrix budgets(K, L1);
  for (Index k = 0; k < K; ++k) {
    const CMatrix& Ak = A[static_cast<std::size_t>(k)];
    if (Ak.rows() != geometry.reduced_dimension() || Ak.cols() != Ak.rows()) {
      throw DimensionError("reduced matrix " + std::to_string(k) + " has the wrong size");
    }
    for (Index l = 0; l < L1; ++l) {
      const CMatrix& P = geometry.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      budgets(k, l) = (Ak.cwiseProduct(P.transpose())).sum().real();
    }
  }
  return budgets;
}

Precoder rank1_extract(const Instance& instance, const ZfGeometry& geometry, const RMatrix& budgets,
                       const SocpOptions& options) {
  const Index K = instance.users();
  const Index L1 = instance.constraint_count();
  if (budgets.rows() != K || budgets.cols() != L1) {
    throw DimensionError("budgets must be K x (L+1)");
  }
  CMatrix T(instance.antennas(), K);
  for (Index k = 0; k < K; ++k) {
    const CMatrix& Uk = geometry.U[static_cast<std::size_t>(k)];
    SocpExtractProblem problem;
    problem.u = Uk.adjoint() * instance.channel(k);
    for (Index l = 0; l < L1; ++l) {
      problem.caps.push_back({geometry.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)],
                              std::max(budgets(k, l), 0.0)});
    }
    const SocpExtractResult sol = socp_max_linear(problem, options);
    T.col(k) = Uk * sol.a;
  }
  return Precoder(std::move(T));
}

}  // namespace wsrm
