#pragma once

#include "wsrm/dual_solution.hpp"
#include "wsrm/model.hpp"
#include "wsrm/trace.hpp"

namespace wsrm {

struct InnerOptions {
  double tolerance = 1e-8;  // on the projected-gradient norm
  long max_iterations = 20000;
};

struct InnerResult {
  RVector powers;  // original user indexing
  double value = 0.0;
  long iterations = 0;
};

/// Dual-MAC weighted sum-rate for fixed multipliers lambda (size L+1,
/// lambda_0 for the sum-power constraint): maximizes
/// sum_k W_k log(1 + p_k h_k^H [S + sum_{j<k} p_j h_j h_j^H]^{-1} h_k)
/// over p >= 0, sum p <= lambda^T gamma, with S = sum_l lambda_l Phi_l.
///
/// Projected gradient ascent with Armijo backtracking. A warm start is
/// projected onto the budget first. Throws SingularMatrixError if S is
/// singular.
InnerResult inner_wsrm(const Instance& instance, const RVector& lambda,
                       const InnerOptions& options = {}, const RVector* warm_start = nullptr);

/// Maps dual-MAC powers p (original indexing) under noise S(lambda) to the
/// BC precoder with SINRs matched user by user. The BC encoding order is
/// instance.weight_order(); the MAC decodes in the reverse order.
Precoder mac_to_bc(const Instance& instance, const RVector& lambda, const RVector& p);

struct SubgradientOptions {
  double step0 = 0.5;   // epsilon_0
  double step_b = 5.0;  // b in epsilon_n = epsilon_0 (1 + b) / (n + b)
  double tolerance = 1e-3;
  long max_outer_iterations = 20000;
  InnerOptions inner;
  bool record_inner_iterations = true;
};

// epsilon_n of the diminishing step schedule; the first outer step uses n = 1.
double subgradient_step(const SubgradientOptions& options, long n);

// s_l(lambda) = gamma_l - tr(Sigma_x(lambda) Phi_l) for a BC precoder.
RVector dual_subgradient(const Instance& instance, const Precoder& precoder);

struct SubgradientResult {
  DualSolution solution;
  ConvergenceTrace trace;
  long outer_iterations = 0;
};

/// Inner-outer algorithm: lambda(n+1) = [lambda(n) - epsilon_n s(lambda(n))]_+
/// around inner_wsrm. Returns the best feasible BC point seen (the precoder
/// at each outer step is scaled into the feasible set before comparison).
/// Stops when s_l >= -tol gamma_l and lambda_l |s_l| <= tol lambda^T gamma for
/// every l; throws ConvergenceError after max_outer_iterations.
SubgradientResult outer_subgradient_solve(const Instance& instance,
                                          const SubgradientOptions& options = {});

}  // namespace wsrm
