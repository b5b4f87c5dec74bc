#pragma once

#include <vector>

#include "wsrm/model.hpp"
#include "wsrm/trace.hpp"
#include "wsrm/zf_core.hpp"

namespace wsrm {

/// Point of the reduced zero-forcing relaxation: one Hermitian positive
/// definite (M-K+1) x (M-K+1) matrix per user and the barrier parameter.
struct RelaxState {
  std::vector<CMatrix> A;
  double barrier = 1.0;
};

struct GradientOptions {
  double alpha = 0.1;
  double beta = 0.5;
  double tolerance = 1e-5;      // delta in the stopping rule
  double growth = 5.0;          // nu
  double initial_barrier = 1.0;
  // Stop when the barrier gap bound (K (M-K+1) + L + 1) / t falls below this.
  double gap_tolerance = 1e-4;
  long max_iterations = 2'000'000;
  // When false, reaching max_iterations returns the current point instead
  // of throwing (used for warm starts).
  bool throw_on_limit = true;
  long trace_stride = 1;  // record every n-th iteration
};

void validate(const GradientOptions& options);

// A_k = c I with c = 0.5 min_l gamma_l / sum_k tr(reduced[k][l]).
RelaxState initial_relax_state(const Instance& instance, const ZfGeometry& geometry,
                               const GradientOptions& options = {});

/// sum_k W_k log(1 + d_k [A_k]_11)
///   + (1/t)(sum_l log(gamma_l - sum_k tr(A_k reduced[k][l])) + sum_k log det A_k)
/// over every constraint l = 0..L. Throws DomainError outside the domain.
double relax_objective(const Instance& instance, const ZfGeometry& geometry, const RelaxState& state);

// The rate part sum_k W_k log(1 + d_k [A_k]_11) only.
double relax_rate(const Instance& instance, const ZfGeometry& geometry, const std::vector<CMatrix>& A);

/// Hermitian ascent directions D_k: diagonal entries are the derivatives
/// with respect to [A_k]_mm; entry (m, n) off the diagonal is
/// d/dRe[A_k]_mn + j d/dIm[A_k]_mn.
std::vector<CMatrix> relax_gradient(const Instance& instance, const ZfGeometry& geometry,
                                    const RelaxState& state);

struct RelaxSolution {
  std::vector<CMatrix> A;
  double value = 0.0;  // relax_rate at A
  double barrier = 0.0;
  long iterations = 0;
  bool converged = false;
};

struct GradientResult {
  RelaxSolution relaxation;
  Precoder precoder;  // rank-one extraction of the relaxation point
  RateReport report;
  ConvergenceTrace trace;
};

/// Gradient ascent A_k <- A_k + s D_k with backtracking (sufficient increase
/// alpha s sum_k sum_{i>=j} |[D_k]_ij|^2 and domain membership), inner stop
/// s ||D||_lower < delta, outer t <- nu t. The result is mapped to zero-forcing
/// steering vectors with rank1_extract.
GradientResult gradient_solve(const Instance& instance, const GradientOptions& options = {});

}  // namespace wsrm
