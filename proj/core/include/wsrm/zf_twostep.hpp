#pragma once

#include <optional>

#include "wsrm/model.hpp"
#include "wsrm/trace.hpp"
#include "wsrm/zf_core.hpp"
#include "wsrm/zf_gradient.hpp"

namespace wsrm {

struct PowerStepOptions {
  double step = 0.1;  // subgradient step step / sqrt(n)
  long iterations = 500;
};

struct PowerStepResult {
  RVector q;       // power multipliers for the columns of T
  RVector lambda;  // L + 1 dual variables
  double value = 0.0;  // sum_k W_k log(1 + q_k |h_k^H t_k|^2)
};

/// Power allocation over fixed zero-forcing columns t_k: maximize
/// sum_k W_k log(1 + q_k g_k), g_k = |h_k^H t_k|^2, subject to C q <= 1 with
/// C_lk = t_k^H Phi_l t_k / gamma_l. Projected subgradient on the dual with
/// q_k(lambda) = [W_k / lambda^T c_k - 1 / g_k]_+ and subgradient 1 - C q.
/// Every dual iterate yields a primal candidate scaled onto C q <= 1; the
/// best candidate (including q = 1 scaled) is returned.
/// Throws DomainError when every g_k is zero.
PowerStepResult power_step(const Instance& instance, const CMatrix& T, const PowerStepOptions& options = {},
                           const RVector* lambda_start = nullptr);

struct SteeringStepResult {
  CMatrix B;      // (M - K) x K nullspace coefficients
  double eta = 0.0;  // common scaling factor
  CMatrix T;      // eta (G diag(a) + U_perp B)
};

/// Minimizes max_l sqrt(tr(T T^H Phi_l) / gamma_l) over B for
/// T = G diag(a) + U_perp B, then scales the result onto the constraints.
SteeringStepResult steering_step(const Instance& instance, const ZfGeometry& geometry, const CVector& a);

struct TwoStepOptions {
  double tolerance = 1e-6;  // relative objective change over a round
  long max_rounds = 200;
  PowerStepOptions power;
};

struct TwoStepResult {
  Precoder precoder;
  RateReport report;
  ConvergenceTrace trace;  // one row per round; row 0 is the starting point
  long rounds = 0;
};

/// Alternates power_step and steering_step from T = G, or from the rank-one
/// extraction of a relaxation point when warm_start is given.
TwoStepResult twostep_solve(const Instance& instance, const TwoStepOptions& options = {},
                            const RelaxSolution* warm_start = nullptr);

}  // namespace wsrm
