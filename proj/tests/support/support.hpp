#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "wsrm/instance_io.hpp"
#include "wsrm/model.hpp"

namespace wsrm::testing {

inline std::string table1_path() { return WSRM_TABLE1_PATH; }
inline Instance table1() { return load_instance(table1_path()); }

// CN(0, variance) entries.
inline CVector random_cvector(std::mt19937_64& rng, Index n, double variance = 1.0) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v;
}

inline CMatrix random_cmatrix(std::mt19937_64& rng, Index rows, Index cols, double variance = 1.0) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) m.col(j) = random_cvector(rng, rows, variance);
  return m;
}

// Random channels, L random interference directions and optionally random
// weights in [0.5, 1.5].
inline Instance random_instance(std::mt19937_64& rng, Index M, Index K, Index L, double P = 10.0,
                                double gamma = 5.0, bool random_weights = false) {
  std::vector<LinearConstraint> constraints{LinearConstraint::sum_power(M, P)};
  for (Index l = 0; l < L; ++l) constraints.push_back(LinearConstraint::interference(random_cvector(rng, M), gamma));
  RVector W = RVector::Ones(K);
  if (random_weights) {
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (Index k = 0; k < K; ++k) W(k) = u(rng);
  }
  return Instance(random_cmatrix(rng, M, K), W, std::move(constraints));
}

// Hermitian positive semidefinite matrix of the given rank.
inline CMatrix random_psd(std::mt19937_64& rng, Index n, Index rank) {
  const CMatrix F = random_cmatrix(rng, n, rank);
  return F * F.adjoint();
}

inline double relative_error(const RVector& value, const RVector& reference) {
  return (value - reference).norm() / std::max(reference.norm(), 1e-12);
}

// Sorted-order dual-MAC rates with noise I + sum_{l>=1} lambda_l Phi_l
// (lambda holds lambda_1..lambda_L); returned in original user order.
inline RVector mac_rates(const Instance& instance, const RVector& lambda, const RVector& p) {
  const Index M = instance.antennas();
  CMatrix S = CMatrix::Identity(M, M);
  for (Index l = 0; l < lambda.size(); ++l) S += lambda(l) * instance.constraint(l + 1).phi();
  RVector rates(instance.users());
  for (Index k : instance.weight_order()) {
    const CVector h = instance.channel(k);
    rates(k) = std::log(1.0 + p(k) * std::real(h.dot(S.ldlt().solve(h))));
    S += p(k) * h * h.adjoint();
  }
  return rates;
}

}  // namespace wsrm::testing
