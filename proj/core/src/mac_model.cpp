#include "mac_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsrm/error.hpp"
#include "wsrm/work_counter.hpp"

namespace wsrm::detail {

MacModel::MacModel(const Instance& instance)
    : M(instance.antennas()),
      K(instance.users()),
      L(instance.extra_constraint_count()),
      H(instance.antennas(), instance.users()),
      W(instance.users()),
      delta(instance.users()),
      gamma(instance.constraint_count()),
      order(instance.weight_order()) {
  for (Index k = 0; k < K; ++k) {
    H.col(k) = instance.channel(order[static_cast<std::size_t>(k)]);
    W(k) = instance.weights()(order[static_cast<std::size_t>(k)]);
  }
  for (Index k = 0; k < K; ++k) delta(k) = W(k) - (k + 1 < K ? W(k + 1) : 0.0);
  for (Index l = 0; l <= L; ++l) {
    const auto& c = instance.constraint(l);
    factors.push_back(c.factor());
    identity.push_back(c.kind() == ConstraintKind::SumPower);
    gamma(l) = c.gamma();
  }
}

CMatrix MacModel::noise(const RVector& lambda) const {
  CMatrix S = CMatrix::Zero(M, M);
  for (Index l = 0; l <= L; ++l) {
    if (lambda(l) == 0.0) continue;
    if (identity[static_cast<std::size_t>(l)]) {
      S.diagonal().array() += lambda(l);
    } else {
      const CMatrix& F = factors[static_cast<std::size_t>(l)];
      S.noalias() += lambda(l) * (F * F.adjoint());
      work::matmul(M, F.cols(), M);
    }
  }
  return S;
}

RVector MacModel::to_sorted(const RVector& original) const {
  RVector out(K);
  for (Index k = 0; k < K; ++k) out(k) = original(order[static_cast<std::size_t>(k)]);
  return out;
}

RVector MacModel::to_original(const RVector& sorted) const {
  RVector out(K);
  for (Index k = 0; k < K; ++k) out(order[static_cast<std::size_t>(k)]) = sorted(k);
  return out;
}

PsiChain psi_chain(const MacModel& model, const CMatrix& noise, const RVector& p) {
  const Index M = model.M;
  PsiChain chain;
  Eigen::LLT<CMatrix> llt(noise);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("dual-MAC noise covariance is not positive definite");
  }
  const auto& Lf = llt.matrixL();
  double logdet = 0.0;
  for (Index i = 0; i < M; ++i) logdet += 2.0 * std::log(Lf(i, i).real());
  chain.logdet_noise = logdet;
  work::matmul(M, M, M);  // factorization plus inverse

  chain.psi.reserve(static_cast<std::size_t>(model.K + 1));
  CMatrix psi = llt.solve(CMatrix::Identity(M, M));
  psi = 0.5 * (psi + psi.adjoint()).eval();
  chain.quad.resize(model.K);
  chain.psi.push_back(psi);
  for (Index k = 0; k < model.K; ++k) {
    const CVector u = psi * model.H.col(k);
    const double q = checked_real(model.H.col(k).dot(u), "h^H Psi h", model.H.col(k).squaredNorm() * psi.norm());
    chain.quad(k) = q;
    psi.noalias() -= (p(k) / (1.0 + p(k) * q)) * (u * u.adjoint());
    // Fused multiply-adds round u u^H asymmetrically, and the downdate can
    // cancel most of Psi; restore exact Hermitian symmetry.
    psi = 0.5 * (psi + psi.adjoint()).eval();
    work::add(2.0 * static_cast<double>(M * M));
    chain.psi.push_back(psi);
  }
  return chain;
}

RVector mac_rates(const PsiChain& chain, const RVector& p) {
  RVector r(p.size());
  for (Index k = 0; k < p.size(); ++k) r(k) = std::log1p(p(k) * chain.quad(k));
  return r;
}

RVector mac_power_gradient(const MacModel& model, const PsiChain& chain) {
  RVector g = RVector::Zero(model.K);
  for (Index k = 0; k < model.K; ++k) {
    if (model.delta(k) == 0.0) continue;
    const CMatrix& psi = chain.psi[static_cast<std::size_t>(k + 1)];
    const double psi_norm = psi.norm();
    for (Index i = 0; i <= k; ++i) {
      const CVector v = psi * model.H.col(i);
      g(i) += model.delta(k) *
              checked_real(model.H.col(i).dot(v), "h^H Psi h", model.H.col(i).squaredNorm() * psi_norm);
      work::matvec(model.M, model.M);
    }
  }
  return g;
}

double checked_real(Complex z, const char* what, double magnitude) {
  if (std::abs(z.imag()) > 1e-10 * std::max({1.0, std::abs(z), magnitude})) {
    throw Error(std::string("imaginary part of ") + what + " is not negligible");
  }
  return z.real();
}

}  // namespace wsrm::detail
