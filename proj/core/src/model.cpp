#include "wsrm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wsrm/error.hpp"

namespace wsrm {

namespace {

constexpr double kPsdTolerance = 1e-9;

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("constraint budget gamma must be positive and finite, got " +
                     std::to_string(gamma));
  }
}

// Phi = F F^H from the eigendecomposition, dropping eigenvalues below the
// PSD tolerance. Throws if Phi is not Hermitian PSD.
CMatrix psd_factor(const CMatrix& phi) {
  if (phi.rows() != phi.cols() || phi.rows() == 0) {
    throw DimensionError("constraint matrix must be square and nonempty");
  }
  const double asym = (phi - phi.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(phi.cwiseAbs().maxCoeff(), 1e-300);
  if (asym > 1e-10 * scale) {
    throw InputError("constraint matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (phi + phi.adjoint()));
  const RVector& values = eig.eigenvalues();
  const double largest = std::max(values.maxCoeff(), 0.0);
  if (values.minCoeff() < -kPsdTolerance * std::max(largest, 1.0)) {
    throw InputError("constraint matrix is not positive semidefinite (min eigenvalue " +
                     std::to_string(values.minCoeff()) + ")");
  }
  std::vector<Index> kept;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) > kPsdTolerance * largest) kept.push_back(i);
  }
  if (kept.empty()) throw InputError("constraint matrix is zero");
  CMatrix factor(phi.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    factor.col(static_cast<Index>(j)) =
        eig.eigenvectors().col(kept[j]) * std::sqrt(values(kept[j]));
  }
  return factor;
}

}  // namespace

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::SumPower:
      return "sum-power";
    case ConstraintKind::PerAntenna:
      return "per-antenna";
    case ConstraintKind::InterferenceDirection:
      return "interference-direction";
    case ConstraintKind::General:
      return "general";
  }
  return "general";
}

ConstraintKind constraint_kind_from_string(std::string_view name) {
  if (name == "sum-power") return ConstraintKind::SumPower;
  if (name == "per-antenna") return ConstraintKind::PerAntenna;
  if (name == "interference-direction") return ConstraintKind::InterferenceDirection;
  if (name == "general") return ConstraintKind::General;
  throw InputError("unknown constraint kind '" + std::string(name) + "'");
}

LinearConstraint LinearConstraint::sum_power(Index antennas, double power) {
  check_gamma(power);
  if (antennas <= 0) throw DimensionError("antenna count must be positive");
  LinearConstraint c;
  c.kind_ = ConstraintKind::SumPower;
  c.phi_ = CMatrix::Identity(antennas, antennas);
  c.factor_ = c.phi_;
  c.gamma_ = power;
  return c;
}

LinearConstraint LinearConstraint::per_antenna(Index antennas, std::span<const Index> group,
                                               double gamma) {
  check_gamma(gamma);
  if (group.empty()) throw InputError("per-antenna constraint needs at least one antenna");
  LinearConstraint c;
  c.kind_ = ConstraintKind::PerAntenna;
  c.phi_ = CMatrix::Zero(antennas, antennas);
  c.factor_ = CMatrix::Zero(antennas, static_cast<Index>(group.size()));
  for (std::size_t j = 0; j < group.size(); ++j) {
    const Index a = group[j];
    if (a < 0 || a >= antennas) throw DimensionError("per-antenna index out of range");
    c.phi_(a, a) = 1.0;
    c.factor_(a, static_cast<Index>(j)) = 1.0;
  }
  c.antennas_.assign(group.begin(), group.end());
  c.gamma_ = gamma;
  return c;
}

LinearConstraint LinearConstraint::interference(CVector direction, double gamma) {
  check_gamma(gamma);
  if (direction.size() == 0 || direction.squaredNorm() == 0.0) {
    throw InputError("interference direction must be a nonzero vector");
  }
  LinearConstraint c;
  c.kind_ = ConstraintKind::InterferenceDirection;
  c.phi_ = direction * direction.adjoint();
  c.factor_ = direction;
  c.direction_ = std::move(direction);
  c.gamma_ = gamma;
  return c;
}

LinearConstraint LinearConstraint::general(CMatrix phi, double gamma) {
  check_gamma(gamma);
  LinearConstraint c;
  c.kind_ = ConstraintKind::General;
  c.factor_ = psd_factor(phi);
  c.phi_ = std::move(phi);
  c.gamma_ = gamma;
  return c;
}

LinearConstraint LinearConstraint::with_gamma(double gamma) const {
  check_gamma(gamma);
  LinearConstraint c = *this;
  c.gamma_ = gamma;
  return c;
}

double LinearConstraint::usage(const CMatrix& T) const {
  if (T.rows() != dimension()) throw DimensionError("precoder rows do not match constraint size");
  if (kind_ == ConstraintKind::SumPower) return T.squaredNorm();
  return (factor_.adjoint() * T).squaredNorm();
}

Instance::Instance(CMatrix channels, RVector weights, std::vector<LinearConstraint> constraints)
    : channels_(std::move(channels)),
      weights_(std::move(weights)),
      constraints_(std::move(constraints)) {
  const Index M = channels_.rows();
  const Index K = channels_.cols();
  if (M == 0 || K == 0) throw DimensionError("channel matrix must be nonempty");
  if (weights_.size() != K) {
    throw DimensionError("weight count " + std::to_string(weights_.size()) +
                         " does not match user count " + std::to_string(K));
  }
  if (!channels_.allFinite()) throw InputError("channel matrix has non-finite entries");
  for (Index k = 0; k < K; ++k) {
    if (!(weights_(k) > 0.0) || !std::isfinite(weights_(k))) {
      throw InputError("weights must be positive; remove zero-weight users before solving");
    }
  }
  if (constraints_.empty() || constraints_.front().kind() != ConstraintKind::SumPower) {
    throw InputError("constraint 0 must be the sum-power constraint");
  }
  for (const auto& c : constraints_) {
    if (c.dimension() != M) throw DimensionError("constraint size does not match antenna count");
  }
  weight_order_.resize(static_cast<std::size_t>(K));
  std::iota(weight_order_.begin(), weight_order_.end(), Index{0});
  std::stable_sort(weight_order_.begin(), weight_order_.end(),
                   [this](Index a, Index b) { return weights_(a) > weights_(b); });
}

void Instance::require_full_column_rank(double tol) const {
  if (users() > antennas()) {
    throw RankDeficientError("zero-forcing needs K <= M (K=" + std::to_string(users()) +
                             ", M=" + std::to_string(antennas()) + ")");
  }
  Eigen::JacobiSVD<CMatrix> svd(channels_);
  const RVector& s = svd.singularValues();
  if (s(s.size() - 1) <= tol * s(0)) {
    throw RankDeficientError("channel matrix is rank deficient");
  }
}

Instance Instance::with_users(std::span<const Index> users) const {
  CMatrix H(antennas(), static_cast<Index>(users.size()));
  RVector W(static_cast<Index>(users.size()));
  for (std::size_t j = 0; j < users.size(); ++j) {
    H.col(static_cast<Index>(j)) = channels_.col(users[j]);
    W(static_cast<Index>(j)) = weights_(users[j]);
  }
  return Instance(std::move(H), std::move(W), constraints_);
}

Instance Instance::with_weights(RVector weights) const {
  return Instance(channels_, std::move(weights), constraints_);
}

Instance Instance::with_constraints(std::vector<LinearConstraint> constraints) const {
  return Instance(channels_, weights_, std::move(constraints));
}

CVector Precoder::steering(Index k) const {
  const double n = columns_.col(k).norm();
  if (n == 0.0) return CVector::Zero(columns_.rows());
  return columns_.col(k) / n;
}

namespace {

void check_precoder(const Instance& instance, const Precoder& precoder) {
  if (precoder.antennas() != instance.antennas() || precoder.users() != instance.users()) {
    throw DimensionError("precoder is " + std::to_string(precoder.antennas()) + "x" +
                         std::to_string(precoder.users()) + ", instance needs " +
                         std::to_string(instance.antennas()) + "x" +
                         std::to_string(instance.users()));
  }
}

void fill_usage(const Instance& instance, const Precoder& precoder, RateReport& report) {
  report.weighted_sum = instance.weights().dot(report.rates);
  report.usage = constraint_usage(instance, precoder);
  report.slack.resize(report.usage.size());
  for (Index l = 0; l < report.usage.size(); ++l) {
    report.slack(l) = instance.constraint(l).gamma() - report.usage(l);
  }
}

}  // namespace

RateReport dpc_rates(const Instance& instance, const Precoder& precoder,
                     std::span<const Index> encoding_order) {
  check_precoder(instance, precoder);
  const Index K = instance.users();
  if (static_cast<Index>(encoding_order.size()) != K) {
    throw DimensionError("encoding order must list every user once");
  }
  std::vector<bool> seen(static_cast<std::size_t>(K), false);
  for (Index u : encoding_order) {
    if (u < 0 || u >= K || seen[static_cast<std::size_t>(u)]) {
      throw DimensionError("encoding order is not a permutation");
    }
    seen[static_cast<std::size_t>(u)] = true;
  }
  // gains(i, j) = |h_i^H t_j|^2
  const RMatrix gains = (instance.channels().adjoint() * precoder.columns()).cwiseAbs2();
  RateReport report;
  report.rates = RVector::Zero(K);
  for (Index pos = 0; pos < K; ++pos) {
    const Index k = encoding_order[static_cast<std::size_t>(pos)];
    double interference = 1.0;
    for (Index later = pos + 1; later < K; ++later) {
      interference += gains(k, encoding_order[static_cast<std::size_t>(later)]);
    }
    report.rates(k) = std::log1p(gains(k, k) / interference);
  }
  fill_usage(instance, precoder, report);
  return report;
}

RateReport zf_rates(const Instance& instance, const Precoder& precoder) {
  check_precoder(instance, precoder);
  const Index K = instance.users();
  const CMatrix cross = instance.channels().adjoint() * precoder.columns();
  RateReport report;
  report.rates.resize(K);
  double residual = 0.0;
  for (Index k = 0; k < K; ++k) {
    report.rates(k) = std::log1p(std::norm(cross(k, k)));
    const double tk = precoder.columns().col(k).norm();
    if (tk == 0.0) continue;
    for (Index j = 0; j < K; ++j) {
      if (j == k) continue;
      const double hj = instance.channel(j).norm();
      residual = std::max(residual, std::abs(cross(j, k)) / (hj * tk));
    }
  }
  report.zf_residual = residual;
  fill_usage(instance, precoder, report);
  return report;
}

RVector constraint_usage(const Instance& instance, const Precoder& precoder) {
  RVector usage(instance.constraint_count());
  for (Index l = 0; l < usage.size(); ++l) {
    usage(l) = instance.constraint(l).usage(precoder.columns());
  }
  return usage;
}

RVector constraint_usage_dense(const Instance& instance, const Precoder& precoder) {
  const CMatrix cov = precoder.covariance();
  RVector usage(instance.constraint_count());
  for (Index l = 0; l < usage.size(); ++l) {
    usage(l) = (cov * instance.constraint(l).phi()).trace().real();
  }
  return usage;
}

Precoder scale_to_feasible(const Instance& instance, const Precoder& precoder) {
  const RVector usage = constraint_usage(instance, precoder);
  double factor = 1.0;
  for (Index l = 0; l < usage.size(); ++l) {
    const double gamma = instance.constraint(l).gamma();
    if (usage(l) > gamma) factor = std::min(factor, std::sqrt(gamma / usage(l)));
  }
  if (factor == 1.0) return precoder;
  return Precoder(precoder.columns() * factor);
}

std::vector<Index> identity_order(Index users) {
  std::vector<Index> order(static_cast<std::size_t>(users));
  std::iota(order.begin(), order.end(), Index{0});
  return order;
}

}  // namespace wsrm
