#pragma once

#include "wsrm/dual_solution.hpp"
#include "wsrm/model.hpp"
#include "wsrm/trace.hpp"

namespace wsrm {

/// Point of the min-max dual-MAC problem with the sum-power multiplier
/// fixed to one. Powers use the original user indexing.
struct NewtonState {
  RVector powers;       // p, K entries, > 0
  RVector multipliers;  // lambda_1..lambda_L, > 0
  double coupling = 1.0;  // mu
  double barrier = 1.0;   // t
};

struct NewtonOptions {
  double growth = 10.0;     // nu
  double tolerance = 1e-6;  // delta: residual norm and final gap (K+L)/t
  double alpha = 0.3;
  double beta = 0.8;
  long max_iterations = 500;
  double initial_barrier = 1.0;
};

void validate(const NewtonOptions& options);

// p = (P/K) 1, lambda_l = P / (10 L gamma_l), mu = 1, t = options.initial_barrier.
NewtonState initial_newton_state(const Instance& instance, const NewtonOptions& options = {});

/// Barrier objective
///   sum_k Delta_k log|I + sum_l lambda_l Phi_l + sum_{j<=k} p_j h_j h_j^H|
///   - W_1 log|I + sum_l lambda_l Phi_l| + (1/t)(sum log p_k - sum log lambda_l)
/// with users in nonincreasing weight order. Throws DomainError outside
/// p > 0, lambda > 0.
double barrier_objective(const Instance& instance, const NewtonState& state);

// Same objective without the barrier terms (the dual value g).
double dual_objective(const Instance& instance, const NewtonState& state);

/// KKT residual (r_1, r_2, r_3) of size K + L + 1, r_1 in original user order.
RVector kkt_residual(const Instance& instance, const NewtonState& state);

/// Jacobian of kkt_residual with respect to (p, lambda, mu).
RMatrix kkt_matrix(const Instance& instance, const NewtonState& state);

// Solves J d = -r by LU with partial pivoting. A singular J is
// retried once with a 1e-10 diagonal shift before SingularMatrixError.
RVector newton_direction(const RMatrix& jacobian, const RVector& residual);

struct NewtonResult {
  DualSolution solution;
  NewtonState state;
  ConvergenceTrace trace;
};

/// Infeasible-start Newton method on the KKT residual with backtracking
/// ||r(x + s d)|| <= (1 - alpha s) ||r(x)||, inner loop to ||r|| <= delta and
/// barrier growth t <- nu t until (K + L)/t <= delta. The domain also keeps
/// mu > 0. A stage whose line search stalls is restarted from the previous
/// center with the growth factor replaced by its square root. The BC
/// precoder is recovered with mac_to_bc at the final (lambda, p).
///
/// Throws ConvergenceError after max_iterations Newton steps and
/// LineSearchError when the step underflows 1e-12.
NewtonResult newton_solve(const Instance& instance, const NewtonOptions& options = {});

}  // namespace wsrm
