#pragma once

#include <vector>

#include "wsrm/model.hpp"
#include "wsrm/socp.hpp"

namespace wsrm {

/// Pseudo-inverse geometry of a full-column-rank channel matrix.
///
/// g_k is the k-th column of H (H^H H)^{-1} scaled to unit norm, so it is
/// orthogonal to every h_j with j != k and g_k^H h_k is real positive.
/// U_k = [g_k | U_perp] spans every zero-forcing steering vector of user k.
struct ZfGeometry {
  CMatrix G;       // M x K
  CMatrix U_perp;  // M x (M - K)
  RVector d;       // d_k = |g_k^H h_k|^2
  std::vector<CMatrix> U;  // U_k, M x (M - K + 1)
  // reduced[k][l] = U_k^H Phi_l U_k
  std::vector<std::vector<CMatrix>> reduced;

  Index users() const { return G.cols(); }
  Index antennas() const { return G.rows(); }
  Index reduced_dimension() const { return U_perp.cols() + 1; }
};

// Throws RankDeficientError when K > M or sigma_min(H) < tol sigma_max(H).
ZfGeometry zf_geometry(const Instance& instance, double rank_tolerance = 1e-9);

// budgets(k, l) = tr(U_k A_k U_k^H Phi_l) = tr(A_k reduced[k][l]).
RMatrix relaxation_budgets(const ZfGeometry& geometry, const std::vector<CMatrix>& A);

/// Rank-one zero-forcing steering vectors from per-user constraint budgets.
/// For each k: maximize Re(h_k^H t_k) over t_k = U_k a subject to
/// t_k^H Phi_l t_k <= budgets(k, l). When the budgets come from a feasible
/// relaxation point T_k = U_k A_k U_k^H the result satisfies
/// |h_k^H t_k|^2 >= h_k^H T_k h_k and the assembled precoder is feasible.
Precoder rank1_extract(const Instance& instance, const ZfGeometry& geometry, const RMatrix& budgets,
                       const SocpOptions& options = {});

}  // namespace wsrm
