#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wsrm/types.hpp"

namespace wsrm {

enum class ConstraintKind { SumPower, PerAntenna, InterferenceDirection, General };

std::string_view to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(std::string_view name);

/// A linear transmit-covariance constraint tr(Sigma_x Phi) <= gamma.
///
/// Phi is stored together with a factor F (Phi = F F^H) so that usage and
/// trace products never need to form Sigma_x. Interference-direction
/// constraints keep their direction c and reconstruct Phi = c c^H exactly.
class LinearConstraint {
 public:
  static LinearConstraint sum_power(Index antennas, double power);
  static LinearConstraint per_antenna(Index antennas, std::span<const Index> group, double gamma);
  static LinearConstraint interference(CVector direction, double gamma);
  static LinearConstraint general(CMatrix phi, double gamma);

  ConstraintKind kind() const { return kind_; }
  const CMatrix& phi() const { return phi_; }
  const CMatrix& factor() const { return factor_; }
  double gamma() const { return gamma_; }
  Index dimension() const { return phi_.rows(); }
  bool is_rank_one() const { return factor_.cols() == 1; }

  // Only meaningful for InterferenceDirection; empty otherwise.
  const CVector& direction() const { return direction_; }
  // Antenna indices of a PerAntenna constraint.
  const std::vector<Index>& antennas() const { return antennas_; }

  LinearConstraint with_gamma(double gamma) const;

  // sum_k t_k^H Phi t_k for the columns of T, via the factor.
  double usage(const CMatrix& T) const;

 private:
  LinearConstraint() = default;

  ConstraintKind kind_ = ConstraintKind::General;
  CMatrix phi_;
  CMatrix factor_;
  CVector direction_;
  std::vector<Index> antennas_;
  double gamma_ = 0.0;
};

/// The weighted sum-rate problem: channels, rate weights and constraints.
///
/// Columns of H are the user channels h_k (noise normalized to unit
/// variance). Constraint 0 is always the sum-power constraint.
class Instance {
 public:
  Instance(CMatrix channels, RVector weights, std::vector<LinearConstraint> constraints);

  Index antennas() const { return channels_.rows(); }
  Index users() const { return channels_.cols(); }
  // Total number of constraints including the sum-power constraint.
  Index constraint_count() const { return static_cast<Index>(constraints_.size()); }
  // Number of constraints besides the sum-power one (L).
  Index extra_constraint_count() const { return constraint_count() - 1; }

  const CMatrix& channels() const { return channels_; }
  auto channel(Index k) const { return channels_.col(k); }
  const RVector& weights() const { return weights_; }
  // Permutation of user indices that makes the weights nonincreasing
  // (stable with respect to the original order for ties).
  const std::vector<Index>& weight_order() const { return weight_order_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const LinearConstraint& constraint(Index l) const { return constraints_[static_cast<std::size_t>(l)]; }
  double sum_power() const { return constraints_.front().gamma(); }

  // Throws RankDeficientError unless K <= M and the smallest singular value
  // of H exceeds tol times the largest.
  void require_full_column_rank(double tol = 1e-9) const;

  Instance with_users(std::span<const Index> users) const;
  Instance with_weights(RVector weights) const;
  Instance with_constraints(std::vector<LinearConstraint> constraints) const;

 private:
  CMatrix channels_;
  RVector weights_;
  std::vector<Index> weight_order_;
  std::vector<LinearConstraint> constraints_;
};

/// Linear precoder with unnormalized columns t_k = sqrt(q_k) v_k.
class Precoder {
 public:
  Precoder() = default;
  explicit Precoder(CMatrix columns) : columns_(std::move(columns)) {}

  const CMatrix& columns() const { return columns_; }
  Index users() const { return columns_.cols(); }
  Index antennas() const { return columns_.rows(); }
  double power(Index k) const { return columns_.col(k).squaredNorm(); }
  RVector powers() const { return columns_.colwise().squaredNorm().transpose(); }
  // Unit-norm steering vector; zero when the user has no power.
  CVector steering(Index k) const;
  CMatrix covariance() const { return columns_ * columns_.adjoint(); }

 private:
  CMatrix columns_;
};

struct RateReport {
  RVector rates;  // nats per channel use
  double weighted_sum = 0.0;
  RVector usage;  // tr(Sigma_x Phi_l), l = 0..L
  RVector slack;  // gamma_l - usage_l
  // Worst normalized zero-forcing leakage, set by zf_rates.
  std::optional<double> zf_residual;
};

// DPC rates for the given successive encoding order (order[0] is encoded
// first and sees interference from every later-encoded user).
RateReport dpc_rates(const Instance& instance, const Precoder& precoder,
                     std::span<const Index> encoding_order);

// Interference-free rates log(1 + |h_k^H t_k|^2) plus the ZF residual
// max_{j != k} |h_j^H t_k| / (|h_j| |t_k|).
RateReport zf_rates(const Instance& instance, const Precoder& precoder);

// tr(T T^H Phi_l) for every constraint, using the stored factors.
RVector constraint_usage(const Instance& instance, const Precoder& precoder);
// Same quantity through the explicit covariance; used to cross-check.
RVector constraint_usage_dense(const Instance& instance, const Precoder& precoder);

// Scales the precoder by the largest factor <= 1 that satisfies every
// constraint.
Precoder scale_to_feasible(const Instance& instance, const Precoder& precoder);

std::vector<Index> identity_order(Index users);

}  // namespace wsrm
