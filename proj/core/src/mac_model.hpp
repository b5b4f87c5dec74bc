#pragma once

#include <vector>

#include "wsrm/model.hpp"

namespace wsrm::detail {

// Dual-MAC view of an instance with users sorted by nonincreasing weight.
struct MacModel {
  explicit MacModel(const Instance& instance);

  Index M = 0;
  Index K = 0;
  Index L = 0;  // extra constraints
  CMatrix H;    // sorted channels
  RVector W;    // sorted weights
  RVector delta;  // W_k - W_{k+1}, W_{K+1} = 0
  std::vector<CMatrix> factors;  // Phi_l = F_l F_l^H, l = 0..L
  std::vector<bool> identity;    // Phi_l == I
  RVector gamma;                 // l = 0..L
  std::vector<Index> order;      // sorted position -> original user

  // sum_l lambda_l Phi_l, lambda indexed 0..L.
  CMatrix noise(const RVector& lambda) const;
  RVector to_sorted(const RVector& original) const;
  RVector to_original(const RVector& sorted) const;
};

// Psi_k = [S + sum_{j<=k} p_j h_j h_j^H]^{-1}, k = 0..K, built by rank-one
// updates from the inverse of the noise matrix S.
struct PsiChain {
  std::vector<CMatrix> psi;
  RVector quad;  // h_k^H Psi_{k-1} h_k
  double logdet_noise = 0.0;
};

// Throws SingularMatrixError when S is not positive definite.
PsiChain psi_chain(const MacModel& model, const CMatrix& noise, const RVector& p);

// Per-user MAC rates log(1 + p_k h_k^H Psi_{k-1} h_k) in sorted order.
RVector mac_rates(const PsiChain& chain, const RVector& p);

// d/dp_i sum_k Delta_k log|S + sum_{j<=k} ...| = sum_{k>=i} Delta_k h_i^H Psi_k h_i.
RVector mac_power_gradient(const MacModel& model, const PsiChain& chain);

// Real part of a quantity that is real in exact arithmetic; throws when the
// imaginary part is not negligible relative to max(1, |z|, magnitude), where
// magnitude bounds the rounding scale of z (for h^H Psi h: |h|^2 |Psi|).
double checked_real(Complex z, const char* what, double magnitude = 0.0);

}  // namespace wsrm::detail
