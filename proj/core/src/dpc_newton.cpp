#include "wsrm/dpc_newton.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mac_model.hpp"
#include "wsrm/dpc_dual.hpp"
#include "wsrm/error.hpp"
#include "wsrm/work_counter.hpp"

namespace wsrm {

namespace {

using detail::checked_real;
using detail::MacModel;
using detail::PsiChain;

// Newton variables in sorted user order plus the cached Psi chain.
class NewtonPoint {
 public:
  NewtonPoint(const MacModel& model, RVector p, RVector lambda, double mu, double t)
      : model_(&model), p_(std::move(p)), lambda_(std::move(lambda)), mu_(mu), t_(t) {
    if ((p_.array() <= 0.0).any() || (lambda_.array() <= 0.0).any()) {
      throw DomainError("Newton state outside the barrier domain (p > 0, lambda > 0)");
    }
    RVector full(model_->L + 1);
    full(0) = 1.0;
    full.tail(model_->L) = lambda_;
    chain_ = detail::psi_chain(*model_, model_->noise(full), p_);
  }

  double dual_value() const {
    // sum_k Delta_k log|S + sum_{j<=k}| - W_1 log|S|; the log|S| terms cancel
    // because sum_k Delta_k = W_1.
    double value = 0.0;
    double cumulative = chain_.logdet_noise;
    for (Index k = 0; k < model_->K; ++k) {
      cumulative += std::log1p(p_(k) * chain_.quad(k));
      value += model_->delta(k) * cumulative;
    }
    return value - model_->W(0) * chain_.logdet_noise;
  }

  double barrier_value() const {
    return dual_value() + (p_.array().log().sum() - lambda_.array().log().sum()) / t_;
  }

  RVector residual() const {
    const Index K = model_->K;
    const Index L = model_->L;
    RVector r(K + L + 1);
    r.head(K) = detail::mac_power_gradient(*model_, chain_);
    for (Index i = 0; i < K; ++i) r(i) += 1.0 / (t_ * p_(i)) - mu_;
    for (Index j = 0; j < L; ++j) {
      const CMatrix& F = model_->factors[static_cast<std::size_t>(j + 1)];
      double grad = 0.0;
      for (Index k = 1; k <= K; ++k) {
        if (model_->delta(k - 1) == 0.0) continue;
        grad += model_->delta(k - 1) * trace_quad(chain_.psi[static_cast<std::size_t>(k)], F);
      }
      grad -= model_->W(0) * trace_quad(chain_.psi[0], F);
      r(K + j) = grad - 1.0 / (t_ * lambda_(j)) + mu_ * model_->gamma(j + 1);
    }
    r(K + L) = model_->gamma(0) + model_->gamma.tail(L).dot(lambda_) - p_.sum();
    return r;
  }

  RMatrix jacobian() const {
    const Index K = model_->K;
    const Index L = model_->L;
    const Index M = model_->M;
    const Index n = K + L + 1;
    RMatrix J = RMatrix::Zero(n, n);

    // y[k][j] = Psi_k h_j for the chain index k = 1..K (1-based) and j < k.
    std::vector<CMatrix> psi_h(static_cast<std::size_t>(K + 1));
    for (Index k = 1; k <= K; ++k) {
      psi_h[static_cast<std::size_t>(k)] = chain_.psi[static_cast<std::size_t>(k)] * model_->H.leftCols(k);
      work::matmul(M, M, k);
    }
    // F_l^H Psi_k for every constraint l and chain index k = 0..K.
    std::vector<std::vector<CMatrix>> f_psi(static_cast<std::size_t>(L));
    for (Index l = 0; l < L; ++l) {
      const CMatrix& F = model_->factors[static_cast<std::size_t>(l + 1)];
      for (Index k = 0; k <= K; ++k) {
        f_psi[static_cast<std::size_t>(l)].push_back(F.adjoint() * chain_.psi[static_cast<std::size_t>(k)]);
        work::matmul(F.cols(), M, M);
      }
    }

    // d r1 / d p
    for (Index k = 1; k <= K; ++k) {
      const double d = model_->delta(k - 1);
      if (d == 0.0) continue;
      const CMatrix& Y = psi_h[static_cast<std::size_t>(k)];
      const CMatrix cross = model_->H.leftCols(k).adjoint() * Y;  // h_i^H Psi_k h_j
      work::matmul(k, M, k);
      for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) J(i, j) -= d * std::norm(cross(i, j));
      }
    }
    for (Index i = 0; i < K; ++i) J(i, i) -= 1.0 / (t_ * p_(i) * p_(i));

    // d r1 / d lambda and its transpose d r2 / d p
    for (Index l = 0; l < L; ++l) {
      for (Index k = 1; k <= K; ++k) {
        const double d = model_->delta(k - 1);
        if (d == 0.0) continue;
        const CMatrix FY = f_psi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] *
                           model_->H.leftCols(k);
        work::matmul(FY.rows(), M, k);
        for (Index i = 0; i < k; ++i) {
          const double v = -d * FY.col(i).squaredNorm();
          J(i, K + l) += v;
          J(K + l, i) += v;
        }
      }
    }

    // d r2 / d lambda
    for (Index a = 0; a < L; ++a) {
      const CMatrix& Fa = model_->factors[static_cast<std::size_t>(a + 1)];
      for (Index b = 0; b <= a; ++b) {
        const CMatrix& Fb = model_->factors[static_cast<std::size_t>(b + 1)];
        double v = 0.0;
        for (Index k = 1; k <= K; ++k) {
          const double d = model_->delta(k - 1);
          if (d == 0.0) continue;
          v -= d * (f_psi[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] * Fb).squaredNorm();
          work::matmul(Fa.cols(), M, Fb.cols());
        }
        v += model_->W(0) * (f_psi[static_cast<std::size_t>(a)][0] * Fb).squaredNorm();
        work::matmul(Fa.cols(), M, Fb.cols());
        J(K + a, K + b) += v;
        if (a != b) J(K + b, K + a) += v;
      }
      J(K + a, K + a) += 1.0 / (t_ * lambda_(a) * lambda_(a));
    }

    // border
    for (Index i = 0; i < K; ++i) {
      J(i, n - 1) = -1.0;
      J(n - 1, i) = -1.0;
    }
    for (Index l = 0; l < L; ++l) {
      J(K + l, n - 1) = model_->gamma(l + 1);
      J(n - 1, K + l) = model_->gamma(l + 1);
    }
    return J;
  }

  const RVector& p() const { return p_; }
  const RVector& lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double t() const { return t_; }

 private:
  // tr(Psi Phi) = tr(F^H Psi F)
  double trace_quad(const CMatrix& psi, const CMatrix& F) const {
    work::matmul(F.cols(), model_->M, model_->M);
    return checked_real((F.adjoint() * psi * F).trace(), "tr(Psi Phi)", psi.norm() * F.squaredNorm());
  }

  const MacModel* model_;
  RVector p_;
  RVector lambda_;
  double mu_;
  double t_;
  PsiChain chain_;
};

NewtonPoint point_from_state(const MacModel& model, const NewtonState& state) {
  if (state.powers.size() != model.K || state.multipliers.size() != model.L) {
    throw DimensionError("Newton state has wrong dimensions");
  }
  if (!(state.barrier > 0.0)) throw DomainError("barrier parameter must be positive");
  return NewtonPoint(model, model.to_sorted(state.powers), state.multipliers, state.coupling,
                     state.barrier);
}

// Reorders the p-block of a residual or Jacobian between sorted and
// original user indexing.
Eigen::PermutationMatrix<Eigen::Dynamic> sorted_to_original(const MacModel& model) {
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(model.K + model.L + 1);
  for (Index k = 0; k < model.K; ++k) perm.indices()(k) = static_cast<int>(model.order[static_cast<std::size_t>(k)]);
  for (Index i = model.K; i < model.K + model.L + 1; ++i) perm.indices()(i) = static_cast<int>(i);
  return perm;
}

// mu multiplies the coupling inequality sum p <= P + gamma^T lambda.
bool in_domain(const RVector& p, const RVector& lambda, double mu) {
  return (p.array() > 0.0).all() && (lambda.array() > 0.0).all() && mu > 0.0;
}

}  // namespace

void validate(const NewtonOptions& o) {
  if (!(o.growth > 1.0)) throw InputError("Newton barrier growth nu must exceed 1");
  if (!(o.tolerance > 0.0)) throw InputError("Newton tolerance must be positive");
  if (!(o.alpha > 0.0 && o.alpha < 0.5)) throw InputError("Newton alpha must lie in (0, 1/2)");
  if (!(o.beta > 0.0 && o.beta < 1.0)) throw InputError("Newton beta must lie in (0, 1)");
  if (o.max_iterations <= 0) throw InputError("Newton max_iterations must be positive");
  if (!(o.initial_barrier > 0.0)) throw InputError("initial barrier must be positive");
}

NewtonState initial_newton_state(const Instance& instance, const NewtonOptions& options) {
  NewtonState s;
  s.powers = RVector::Constant(instance.users(), instance.sum_power() / static_cast<double>(instance.users()));
  // Interference multipliers sized so that each price term starts at a tenth
  // of the budget share; unit multipliers stall on small or badly scaled budgets.
  const Index L = instance.extra_constraint_count();
  s.multipliers.resize(L);
  for (Index l = 0; l < L; ++l) {
    s.multipliers(l) = 0.1 * instance.sum_power() / (static_cast<double>(L) * instance.constraint(l + 1).gamma());
  }
  s.coupling = 1.0;
  s.barrier = options.initial_barrier;
  return s;
}

double barrier_objective(const Instance& instance, const NewtonState& state) {
  const MacModel model(instance);
  return point_from_state(model, state).barrier_value();
}

double dual_objective(const Instance& instance, const NewtonState& state) {
  const MacModel model(instance);
  return point_from_state(model, state).dual_value();
}

RVector kkt_residual(const Instance& instance, const NewtonState& state) {
  const MacModel model(instance);
  return sorted_to_original(model) * point_from_state(model, state).residual();
}

RMatrix kkt_matrix(const Instance& instance, const NewtonState& state) {
  const MacModel model(instance);
  const auto perm = sorted_to_original(model);
  return perm * point_from_state(model, state).jacobian() * perm.transpose();
}

RVector newton_direction(const RMatrix& jacobian, const RVector& residual) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    RMatrix a = jacobian;
    if (attempt == 1) a.diagonal().array() += 1e-10;
    const RVector d = a.partialPivLu().solve(-residual);
    if (d.allFinite()) return d;
  }
  throw SingularMatrixError("KKT matrix is singular");
}

NewtonResult newton_solve(const Instance& instance, const NewtonOptions& options) {
  validate(options);
  const work::Scope scope;
  const MacModel model(instance);
  const Index K = model.K;
  const Index L = model.L;
  const double gap_terms = static_cast<double>(K + L);

  const NewtonState init = initial_newton_state(instance, options);
  NewtonPoint x(model, model.to_sorted(init.powers), init.multipliers, init.coupling, init.barrier);

  NewtonResult result;
  long iteration = 0;
  bool reinitialized = false;

  auto record = [&](const NewtonPoint& point, double residual_norm) {
    const work::Suspend pause;
    RVector full(L + 1);
    full(0) = 1.0;
    full.tail(L) = point.lambda();
    const Precoder pre = mac_to_bc(instance, full, model.to_original(point.p()));
    TraceRow row;
    row.iteration = iteration;
    row.barrier = point.t();
    row.objective = point.dual_value();
    row.residual_norm = residual_norm;
    row.usage = constraint_usage(instance, pre);
    result.trace.rows.push_back(std::move(row));
  };

  RVector r = x.residual();
  double rnorm = r.norm();
  record(x, rnorm);

  // Centers every stage; returns false when the line search stalls.
  auto center = [&]() {
    while (rnorm > options.tolerance) {
      if (iteration >= options.max_iterations) {
        throw ConvergenceError("Newton solver exceeded " + std::to_string(options.max_iterations) +
                               " iterations (residual " + std::to_string(rnorm) + ")");
      }
      RVector d;
      try {
        d = newton_direction(x.jacobian(), r);
      } catch (const SingularMatrixError&) {
        if (reinitialized) throw;
        reinitialized = true;
        x = NewtonPoint(model, model.to_sorted(init.powers), init.multipliers, init.coupling, x.t());
        r = x.residual();
        rnorm = r.norm();
        continue;
      }
      work::add(std::pow(static_cast<double>(K + L + 1), 3) / 3.0);

      double s = 1.0;
      auto trial_p = [&](double step) { return RVector(x.p() + step * d.head(K)); };
      auto trial_l = [&](double step) { return RVector(x.lambda() + step * d.segment(K, L)); };
      auto trial_mu = [&](double step) { return x.mu() + step * d(K + L); };
      while (!in_domain(trial_p(s), trial_l(s), trial_mu(s))) {
        s *= options.beta;
        if (s < 1e-12) return false;
      }
      while (true) {
        NewtonPoint candidate(model, trial_p(s), trial_l(s), trial_mu(s), x.t());
        RVector rc = candidate.residual();
        const double rc_norm = rc.norm();
        if (rc_norm <= (1.0 - options.alpha * s) * rnorm) {
          x = std::move(candidate);
          r = std::move(rc);
          rnorm = rc_norm;
          break;
        }
        s *= options.beta;
        if (s < 1e-12) return false;
      }
      ++iteration;
      record(x, rnorm);
    }
    return true;
  };

  if (!center()) throw LineSearchError("Newton backtracking step underflowed in the first barrier stage");
  double growth = options.growth;
  while (gap_terms / x.t() > options.tolerance) {
    // A long barrier step can leave the region where the residual merit
    // leads back to the central path; retry from this center with a
    // shorter step.
    const NewtonPoint previous = x;
    x = NewtonPoint(model, previous.p(), previous.lambda(), previous.mu(), previous.t() * growth);
    r = x.residual();
    rnorm = r.norm();
    if (center()) {
      growth = options.growth;
      continue;
    }
    growth = std::sqrt(growth);
    if (growth < 1.0 + 1e-3) throw LineSearchError("Newton backtracking step underflowed");
    x = previous;
  }

  RVector full(L + 1);
  full(0) = 1.0;
  full.tail(L) = x.lambda();

  DualSolution& sol = result.solution;
  sol.powers = model.to_original(x.p());
  sol.multipliers = full;
  sol.coupling = x.mu();
  sol.precoder = mac_to_bc(instance, full, sol.powers);
  sol.encoding_order = instance.weight_order();
  sol.objective = x.dual_value();
  sol.converged = true;

  result.state.powers = sol.powers;
  result.state.multipliers = x.lambda();
  result.state.coupling = x.mu();
  result.state.barrier = x.t();

  result.trace.iterations = iteration;
  result.trace.work = scope.elapsed();
  result.trace.matmul_equivalents = result.trace.work / std::pow(static_cast<double>(model.M), 3);
  {
    const work::Suspend pause;
    sol.report = dpc_rates(instance, sol.precoder, sol.encoding_order);
  }
  return result;
}

}  // namespace wsrm
