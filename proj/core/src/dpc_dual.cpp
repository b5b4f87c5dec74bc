#include "wsrm/dpc_dual.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mac_model.hpp"
#include "wsrm/error.hpp"
#include "wsrm/work_counter.hpp"

namespace wsrm {

namespace {

using detail::MacModel;
using detail::PsiChain;

// Euclidean projection onto {x >= 0, sum x <= budget}.
RVector project_budget(const RVector& v, double budget) {
  RVector x = v.cwiseMax(0.0);
  if (x.sum() <= budget) return x;
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - budget) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

double weighted_rate(const MacModel& model, const PsiChain& chain, const RVector& p) {
  return model.W.dot(detail::mac_rates(chain, p));
}

void check_lambda(const MacModel& model, const RVector& lambda) {
  if (lambda.size() != model.L + 1) {
    throw DimensionError("multiplier vector must have one entry per constraint (" +
                         std::to_string(model.L + 1) + ")");
  }
  if ((lambda.array() < 0.0).any()) throw DomainError("multipliers must be nonnegative");
}

using InnerCallback = std::function<void(const RVector& p_original, double value)>;

InnerResult inner_solve(const MacModel& model, const RVector& lambda, const InnerOptions& options,
                        const RVector* warm_start, const InnerCallback& on_iteration) {
  check_lambda(model, lambda);
  const double budget = lambda.dot(model.gamma);
  InnerResult result;
  if (budget <= 0.0) {
    result.powers = RVector::Zero(model.K);
    return result;
  }
  const CMatrix S = model.noise(lambda);

  RVector p = warm_start != nullptr ? project_budget(model.to_sorted(*warm_start), budget)
                                    : RVector::Constant(model.K, budget / static_cast<double>(model.K));
  if (p.sum() == 0.0) p.setConstant(budget / static_cast<double>(model.K));
  if (p.sum() < budget) p *= budget / p.sum();

  PsiChain chain = detail::psi_chain(model, S, p);
  double f = weighted_rate(model, chain, p);
  RVector grad = detail::mac_power_gradient(model, chain);
  double step = budget / std::max(grad.cwiseAbs().maxCoeff(), 1e-300);

  long it = 0;
  while (it < options.max_iterations) {
    const double pg_norm = (p - project_budget(p + grad, budget)).norm();
    if (pg_norm <= options.tolerance) break;
    bool accepted = false;
    while (step > 1e-20 * budget) {
      const RVector candidate = project_budget(p + step * grad, budget);
      PsiChain c_chain = detail::psi_chain(model, S, candidate);
      const double fc = weighted_rate(model, c_chain, candidate);
      if (fc >= f + 1e-4 * grad.dot(candidate - p)) {
        p = candidate;
        f = fc;
        chain = std::move(c_chain);
        grad = detail::mac_power_gradient(model, chain);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // numerically stationary
    ++it;
    step *= 2.0;
    if (on_iteration) on_iteration(model.to_original(p), f);
  }
  result.iterations = it;
  result.powers = model.to_original(p);
  result.value = f;
  return result;
}

}  // namespace

InnerResult inner_wsrm(const Instance& instance, const RVector& lambda, const InnerOptions& options,
                       const RVector* warm_start) {
  const MacModel model(instance);
  return inner_solve(model, lambda, options, warm_start, {});
}

Precoder mac_to_bc(const Instance& instance, const RVector& lambda, const RVector& p_original) {
  const MacModel model(instance);
  check_lambda(model, lambda);
  if (p_original.size() != model.K) throw DimensionError("power vector size must equal user count");
  if ((p_original.array() < 0.0).any()) throw DomainError("dual-MAC powers must be nonnegative");
  const RVector p = model.to_sorted(p_original);
  const PsiChain chain = detail::psi_chain(model, model.noise(lambda), p);

  const Index K = model.K;
  CMatrix V(model.M, K);
  RVector sinr(K);
  for (Index k = 0; k < K; ++k) {
    // MMSE-SIC receiver of the user decoded at stage k: users j > k are
    // already cancelled, users j < k remain as interference.
    const CVector w = chain.psi[static_cast<std::size_t>(k)] * model.H.col(k);
    work::matvec(model.M, model.M);
    const double n = w.norm();
    V.col(k) = n > 0.0 ? CVector(w / n) : CVector::Zero(model.M);
    sinr(k) = p(k) * chain.quad(k);
  }
  // gains(k, j) = |h_k^H v_j|^2
  const RMatrix gains = (model.H.adjoint() * V).cwiseAbs2();
  work::matmul(K, model.M, K);
  RVector q = RVector::Zero(K);
  for (Index k = K - 1; k >= 0; --k) {
    if (sinr(k) <= 0.0) continue;
    if (!(gains(k, k) > 0.0)) {
      throw SingularMatrixError("SINR matching system is singular (user " + std::to_string(k) + ")");
    }
    double interference = 1.0;
    for (Index j = k + 1; j < K; ++j) interference += q(j) * gains(k, j);
    q(k) = sinr(k) * interference / gains(k, k);
  }
  CMatrix T(model.M, K);
  for (Index k = 0; k < K; ++k) {
    T.col(model.order[static_cast<std::size_t>(k)]) = std::sqrt(q(k)) * V.col(k);
  }
  return Precoder(std::move(T));
}

double subgradient_step(const SubgradientOptions& options, long n) {
  return options.step0 * (1.0 + options.step_b) / (static_cast<double>(n) + options.step_b);
}

RVector dual_subgradient(const Instance& instance, const Precoder& precoder) {
  const RVector usage = constraint_usage(instance, precoder);
  RVector s(usage.size());
  for (Index l = 0; l < usage.size(); ++l) s(l) = instance.constraint(l).gamma() - usage(l);
  return s;
}

SubgradientResult outer_subgradient_solve(const Instance& instance, const SubgradientOptions& options) {
  const work::Scope scope;
  const MacModel model(instance);
  const Index Lp1 = model.L + 1;
  const auto& order = instance.weight_order();

  RVector lambda = RVector::Ones(Lp1);
  RVector p;
  SubgradientResult result;
  result.trace.marks_outer_steps = true;

  double best_value = -std::numeric_limits<double>::infinity();
  DualSolution best;
  long total_inner = 0;
  long n = 0;
  bool converged = false;

  for (; n < options.max_outer_iterations; ++n) {
    InnerCallback record;
    if (options.record_inner_iterations) {
      record = [&](const RVector& powers, double value) {
        const work::Suspend pause;
        const Precoder pre = mac_to_bc(instance, lambda, powers);
        TraceRow row;
        row.iteration = ++total_inner;
        row.objective = value;
        row.usage = constraint_usage(instance, pre);
        result.trace.rows.push_back(std::move(row));
      };
    }
    const InnerResult inner =
        inner_solve(model, lambda, options.inner, p.size() > 0 ? &p : nullptr, record);
    if (!options.record_inner_iterations) total_inner += inner.iterations;
    if (options.record_inner_iterations && inner.iterations == 0) record(inner.powers, inner.value);
    p = inner.powers;

    const Precoder precoder = mac_to_bc(instance, lambda, p);
    const RVector s = dual_subgradient(instance, precoder);
    if (!result.trace.rows.empty()) result.trace.rows.back().outer_step = true;

    {
      const work::Suspend pause;
      const Precoder feasible = scale_to_feasible(instance, precoder);
      RateReport report = dpc_rates(instance, feasible, order);
      if (report.weighted_sum > best_value) {
        best_value = report.weighted_sum;
        best.powers = p;
        best.multipliers = lambda;
        best.precoder = feasible;
        best.report = std::move(report);
        best.objective = inner.value;
      }
    }

    const double scale = lambda.dot(model.gamma);
    bool done = true;
    for (Index l = 0; l < Lp1; ++l) {
      if (s(l) < -options.tolerance * model.gamma(l)) done = false;
      if (lambda(l) * std::abs(s(l)) > options.tolerance * scale) done = false;
    }
    if (done) {
      converged = true;
      break;
    }

    lambda = (lambda - subgradient_step(options, n + 1) * s).cwiseMax(0.0);
    // lambda_0 multiplies the identity; keep S(lambda) nonsingular.
    lambda(0) = std::max(lambda(0), 1e-9 * lambda.maxCoeff());
  }
  result.outer_iterations = n + (converged ? 1 : 0);
  if (!converged) {
    throw ConvergenceError("inner-outer solver did not converge in " +
                           std::to_string(options.max_outer_iterations) + " outer iterations");
  }

  best.encoding_order = order;
  best.converged = true;
  result.solution = std::move(best);
  result.trace.iterations = total_inner;
  result.trace.work = scope.elapsed();
  const double m3 = std::pow(static_cast<double>(model.M), 3);
  result.trace.matmul_equivalents = result.trace.work / m3;
  return result;
}

}  // namespace wsrm
