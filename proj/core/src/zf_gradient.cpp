#include "wsrm/zf_gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "wsrm/error.hpp"

namespace wsrm {

namespace {

struct Evaluation {
  bool in_domain = false;
  double value = 0.0;
  RVector slack;  // gamma_l - usage_l
};

double trace_product(const CMatrix& A, const CMatrix& P) {
  return A.cwiseProduct(P.transpose()).sum().real();
}

// Objective without throwing; in_domain is false outside dom f_t.
Evaluation evaluate(const Instance& instance, const ZfGeometry& geo, const std::vector<CMatrix>& A,
                    double t) {
  const Index K = instance.users();
  const Index L1 = instance.constraint_count();
  Evaluation ev;
  ev.slack.resize(L1);
  for (Index l = 0; l < L1; ++l) ev.slack(l) = instance.constraint(l).gamma();
  double logdet = 0.0;
  double rate = 0.0;
  for (Index k = 0; k < K; ++k) {
    const CMatrix& Ak = A[static_cast<std::size_t>(k)];
    Eigen::LLT<CMatrix> llt(Ak);
    if (llt.info() != Eigen::Success) return ev;
    const auto diag = llt.matrixLLT().diagonal().real();
    if ((diag.array() <= 0.0).any()) return ev;
    logdet += 2.0 * diag.array().log().sum();
    const double a11 = Ak(0, 0).real();
    rate += instance.weights()(k) * std::log1p(geo.d(k) * a11);
    for (Index l = 0; l < L1; ++l) {
      ev.slack(l) -= trace_product(Ak, geo.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
    }
  }
  if ((ev.slack.array() <= 0.0).any()) return ev;
  ev.in_domain = true;
  ev.value = rate + (ev.slack.array().log().sum() + logdet) / t;
  return ev;
}

void check_state(const Instance& instance, const ZfGeometry& geo, const RelaxState& state) {
  if (static_cast<Index>(state.A.size()) != instance.users() || geo.users() != instance.users()) {
    throw DimensionError("relaxation state needs one matrix per user");
  }
  for (const CMatrix& Ak : state.A) {
    if (Ak.rows() != geo.reduced_dimension() || Ak.cols() != geo.reduced_dimension()) {
      throw DimensionError("relaxation matrix must be (M-K+1) x (M-K+1)");
    }
  }
  if (!(state.barrier > 0.0)) throw DomainError("barrier parameter must be positive");
}

std::vector<CMatrix> gradient_at(const Instance& instance, const ZfGeometry& geo,
                                 const std::vector<CMatrix>& A, const RVector& slack, double t) {
  const Index K = instance.users();
  const Index L1 = instance.constraint_count();
  std::vector<CMatrix> D;
  D.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    const CMatrix& Ak = A[static_cast<std::size_t>(k)];
    CMatrix g = Ak.llt().solve(CMatrix::Identity(Ak.rows(), Ak.cols()));
    for (Index l = 0; l < L1; ++l) {
      g -= geo.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] / slack(l);
    }
    g /= t;
    // Off-diagonal entries pair up with their conjugates.
    CMatrix Dk = 2.0 * g;
    Dk.diagonal() = g.diagonal().real().cast<Complex>();
    Dk(0, 0) += instance.weights()(k) * geo.d(k) / (1.0 + geo.d(k) * Ak(0, 0).real());
    D.push_back(std::move(Dk));
  }
  return D;
}

double lower_norm_sq(const std::vector<CMatrix>& D) {
  double total = 0.0;
  for (const CMatrix& Dk : D) {
    for (Index j = 0; j < Dk.cols(); ++j) {
      for (Index i = j; i < Dk.rows(); ++i) total += std::norm(Dk(i, j));
    }
  }
  return total;
}

}  // namespace

void validate(const GradientOptions& o) {
  if (!(o.alpha > 0.0 && o.alpha < 0.5)) throw InputError("gradient alpha must lie in (0, 1/2)");
  if (!(o.beta > 0.0 && o.beta < 1.0)) throw InputError("gradient beta must lie in (0, 1)");
  if (!(o.tolerance > 0.0)) throw InputError("gradient tolerance must be positive");
  if (!(o.growth > 1.0)) throw InputError("gradient barrier growth must exceed 1");
  if (!(o.initial_barrier > 0.0)) throw InputError("initial barrier must be positive");
  if (!(o.gap_tolerance > 0.0)) throw InputError("gap tolerance must be positive");
  if (o.max_iterations < 0) throw InputError("max_iterations must be nonnegative");
  if (o.trace_stride <= 0) throw InputError("trace stride must be positive");
}

RelaxState initial_relax_state(const Instance& instance, const ZfGeometry& geometry,
                               const GradientOptions& options) {
  double c = std::numeric_limits<double>::infinity();
  for (Index l = 0; l < instance.constraint_count(); ++l) {
    double total = 0.0;
    for (Index k = 0; k < instance.users(); ++k) {
      total += geometry.reduced[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].trace().real();
    }
    if (total > 0.0) c = std::min(c, 0.5 * instance.constraint(l).gamma() / total);
  }
  RelaxState state;
  const Index r = geometry.reduced_dimension();
  state.A.assign(static_cast<std::size_t>(instance.users()), c * CMatrix::Identity(r, r));
  state.barrier = options.initial_barrier;
  return state;
}

double relax_objective(const Instance& instance, const ZfGeometry& geometry, const RelaxState& state) {
  check_state(instance, geometry, state);
  const Evaluation ev = evaluate(instance, geometry, state.A, state.barrier);
  if (!ev.in_domain) throw DomainError("relaxation point outside the barrier domain");
  return ev.value;
}

double relax_rate(const Instance& instance, const ZfGeometry& geometry, const std::vector<CMatrix>& A) {
  double rate = 0.0;
  for (Index k = 0; k < instance.users(); ++k) {
    rate += instance.weights()(k) * std::log1p(geometry.d(k) * A[static_cast<std::size_t>(k)](0, 0).real());
  }
  return rate;
}

std::vector<CMatrix> relax_gradient(const Instance& instance, const ZfGeometry& geometry,
                                    const RelaxState& state) {
  check_state(instance, geometry, state);
  const Evaluation ev = evaluate(instance, geometry, state.A, state.barrier);
  if (!ev.in_domain) throw DomainError("relaxation point outside the barrier domain");
  return gradient_at(instance, geometry, state.A, ev.slack, state.barrier);
}

GradientResult gradient_solve(const Instance& instance, const GradientOptions& options) {
  validate(options);
  const ZfGeometry geo = zf_geometry(instance);
  const Index K = instance.users();
  const Index L1 = instance.constraint_count();
  const double barrier_terms = static_cast<double>(K * geo.reduced_dimension() + L1);

  RelaxState state = initial_relax_state(instance, geo, options);
  double t = state.barrier;
  Evaluation current = evaluate(instance, geo, state.A, t);
  if (!current.in_domain) throw Error("relaxation initialization is not strictly feasible");

  GradientResult result;
  long iteration = 0;
  bool converged = false;
  auto record = [&]() {
    TraceRow row;
    row.iteration = iteration;
    row.barrier = t;
    row.objective = relax_rate(instance, geo, state.A);
    row.usage.resize(L1);
    for (Index l = 0; l < L1; ++l) row.usage(l) = instance.constraint(l).gamma() - current.slack(l);
    result.trace.rows.push_back(std::move(row));
  };
  record();

  std::vector<CMatrix> trial(state.A.size());
  while (!converged) {
    bool limit_hit = false;
    while (true) {
      if (iteration >= options.max_iterations) {
        limit_hit = true;
        break;
      }
      const std::vector<CMatrix> D = gradient_at(instance, geo, state.A, current.slack, t);
      const double nsq = lower_norm_sq(D);
      double s = 1.0;
      Evaluation next;
      while (true) {
        for (std::size_t k = 0; k < trial.size(); ++k) {
          trial[k] = state.A[k] + s * D[k];
          trial[k] = 0.5 * (trial[k] + trial[k].adjoint()).eval();
        }
        next = evaluate(instance, geo, trial, t);
        if (next.in_domain && next.value >= current.value + options.alpha * s * nsq) break;
        s *= options.beta;
        if (s < 1e-30) break;
      }
      if (!next.in_domain || s < 1e-30) break;  // no ascent left at this t
      state.A.swap(trial);
      current = std::move(next);
      ++iteration;
      if (iteration % options.trace_stride == 0) record();
      if (s * std::sqrt(nsq) < options.tolerance) break;
    }
    if (limit_hit) {
      if (options.throw_on_limit) {
        throw ConvergenceError("zero-forcing gradient solver exceeded " + std::to_string(options.max_iterations) +
                               " iterations");
      }
      break;
    }
    if (barrier_terms / t <= options.gap_tolerance) {
      converged = true;
      break;
    }
    t *= options.growth;
    current = evaluate(instance, geo, state.A, t);
  }
  if (iteration % options.trace_stride != 0) record();

  result.relaxation.A = state.A;
  result.relaxation.value = relax_rate(instance, geo, state.A);
  result.relaxation.barrier = t;
  result.relaxation.iterations = iteration;
  result.relaxation.converged = converged;
  result.precoder = rank1_extract(instance, geo, relaxation_budgets(geo, state.A));
  result.report = zf_rates(instance, result.precoder);
  result.trace.iterations = iteration;
  return result;
}

}  // namespace wsrm
