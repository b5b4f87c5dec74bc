#include "wsrm/zf_twostep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsrm/error.hpp"
#include "wsrm/socp.hpp"

namespace wsrm {

namespace {

double zf_objective(const Instance& instance, const CMatrix& T) {
  double value = 0.0;
  for (Index k = 0; k < instance.users(); ++k) {
    value += instance.weights()(k) * std::log1p(std::norm(instance.channel(k).dot(T.col(k))));
  }
  return value;
}

double worst_ratio(const Instance& instance, const CMatrix& T) {
  double worst = 0.0;
  for (const LinearConstraint& con : instance.constraints()) worst = std::max(worst, con.usage(T) / con.gamma());
  return worst;
}

}  // namespace

PowerStepResult power_step(const Instance& instance, const CMatrix& T, const PowerStepOptions& options,
                           const RVector* lambda_start) {
  const Index K = instance.users();
  const Index L1 = instance.constraint_count();
  if (T.rows() != instance.antennas() || T.cols() != K) throw DimensionError("steering matrix must be M x K");
  if (!(options.step > 0.0) || options.iterations <= 0) throw InputError("invalid power step options");

  RVector gain(K);
  RMatrix C(L1, K);
  for (Index k = 0; k < K; ++k) {
    gain(k) = std::norm(instance.channel(k).dot(T.col(k)));
    for (Index l = 0; l < L1; ++l) {
      C(l, k) = instance.constraint(l).usage(T.col(k)) / instance.constraint(l).gamma();
    }
  }
  if (!(gain.maxCoeff() > 0.0)) throw DomainError("every steering vector is orthogonal to its channel");

  const RVector& W = instance.weights();
  auto value_of = [&](const RVector& q) {
    double v = 0.0;
    for (Index k = 0; k < K; ++k) v += W(k) * std::log1p(q(k) * gain(k));
    return v;
  };
  auto response = [&](const RVector& lambda) {
    RVector q = RVector::Zero(K);
    for (Index k = 0; k < K; ++k) {
      if (gain(k) <= 0.0) continue;
      const double price = std::max(lambda.dot(C.col(k)), 1e-12);
      q(k) = std::max(W(k) / price - 1.0 / gain(k), 0.0);
    }
    return q;
  };

  PowerStepResult best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](RVector q, const RVector& lambda) {
    const double load = (C * q).maxCoeff();
    if (!(load > 0.0)) return;
    q /= load;
    const double v = value_of(q);
    if (v > best.value) {
      best.value = v;
      best.q = std::move(q);
      best.lambda = lambda;
    }
  };

  RVector lambda = lambda_start != nullptr && lambda_start->size() == L1
                       ? RVector(*lambda_start)
                       : RVector::Constant(L1, W.sum() / static_cast<double>(L1));
  RVector ones = RVector::Ones(K);
  for (Index k = 0; k < K; ++k) {
    if (gain(k) <= 0.0) ones(k) = 0.0;
  }
  consider(ones, lambda);
  for (long n = 1; n <= options.iterations; ++n) {
    const RVector q = response(lambda);
    consider(q, lambda);
    const RVector s = RVector::Ones(L1) - C * q;
    lambda = (lambda - options.step / std::sqrt(static_cast<double>(n)) * s).cwiseMax(0.0);
  }
  best.lambda = lambda;
  return best;
}

SteeringStepResult steering_step(const Instance& instance, const ZfGeometry& geometry, const CVector& a) {
  if (a.size() != instance.users()) throw DimensionError("one coefficient per user is required");
  SocpMinMaxProblem problem;
  problem.fixed = geometry.G * a.asDiagonal();
  problem.basis = geometry.U_perp;
  problem.constraints = instance.constraints();
  const SocpMinMaxResult sol = socp_min_max_norm(problem);
  if (!(sol.u > 0.0)) throw DomainError("steering step received an all-zero coefficient vector");
  SteeringStepResult out;
  out.B = sol.B;
  out.eta = 1.0 / sol.u;
  out.T = out.eta * (problem.fixed + geometry.U_perp * sol.B);
  return out;
}

TwoStepResult twostep_solve(const Instance& instance, const TwoStepOptions& options,
                            const RelaxSolution* warm_start) {
  if (!(options.tolerance > 0.0) || options.max_rounds <= 0) throw InputError("invalid two-step options");
  const ZfGeometry geo = zf_geometry(instance);
  const Index K = instance.users();

  CMatrix T = warm_start != nullptr ? rank1_extract(instance, geo, relaxation_budgets(geo, warm_start->A)).columns()
                                    : geo.G;
  TwoStepResult result;
  auto record = [&](long round, const CMatrix& current, double value) {
    TraceRow row;
    row.iteration = round;
    row.objective = value;
    row.usage = constraint_usage(instance, Precoder(current));
    result.trace.rows.push_back(std::move(row));
  };
  {
    const double load = worst_ratio(instance, T);
    if (load > 0.0) T /= std::sqrt(load);
  }
  double previous = zf_objective(instance, T);
  record(0, T, previous);

  RVector lambda;
  long round = 1;
  for (; round <= options.max_rounds; ++round) {
    const PowerStepResult ps = power_step(instance, T, options.power, lambda.size() > 0 ? &lambda : nullptr);
    lambda = ps.lambda;
    CVector a(K);
    for (Index k = 0; k < K; ++k) a(k) = std::sqrt(ps.q(k)) * geo.G.col(k).dot(T.col(k));
    const SteeringStepResult st = steering_step(instance, geo, a);
    const double value = zf_objective(instance, st.T);
    // The steering step keeps every user's gain, so a drop can only come
    // from rounding; keep the better point.
    if (value >= previous) T = st.T;
    record(round, T, std::max(value, previous));
    const bool done = std::abs(value - previous) <= options.tolerance * std::max(std::abs(value), 1e-300);
    previous = std::max(value, previous);
    if (done) break;
  }
  result.rounds = std::min(round, options.max_rounds);
  result.precoder = Precoder(T);
  result.report = zf_rates(instance, result.precoder);
  result.trace.iterations = result.rounds;
  return result;
}

}  // namespace wsrm
