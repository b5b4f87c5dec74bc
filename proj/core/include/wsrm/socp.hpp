#pragma once

#include <vector>

#include "wsrm/model.hpp"

namespace wsrm {

struct QuadraticCap {
  CMatrix psi;  // Hermitian PSD
  double eta = 0.0;
};

/// maximize Re(u^H a)  subject to  E a = 0,  a^H Psi_l a <= eta_l.
struct SocpExtractProblem {
  CVector u;
  CMatrix equality;  // rows x n, may have zero rows
  std::vector<QuadraticCap> caps;
};

struct SocpExtractResult {
  CVector a;
  double value = 0.0;       // Re(u^H a)
  double dual_bound = 0.0;  // certified upper bound on the optimum
  long iterations = 0;      // Newton steps
};

/// minimize u over B  subject to  sqrt(tr(T T^H Phi_l) / gamma_l) <= u,
/// T = F + N B.
struct SocpMinMaxProblem {
  CMatrix fixed;  // F, M x K
  CMatrix basis;  // N, M x r (r may be 0)
  std::vector<LinearConstraint> constraints;
};

struct SocpMinMaxResult {
  CMatrix B;                 // r x K
  double u = 0.0;
  double lower_bound = 0.0;  // certified lower bound on the optimal u
  long iterations = 0;
};

struct SocpOptions {
  double relative_gap = 1e-10;
  long max_newton_steps = 2000;
};

// Caps with eta_l <= 1e-14 max(1, max eta) are imposed as Psi_l a = 0 and
// caps with Psi_l = 0 are ignored. Throws DomainError if the remaining caps
// leave the objective unbounded and InputError on malformed data.
SocpExtractResult socp_max_linear(const SocpExtractProblem& problem, const SocpOptions& options = {});

SocpMinMaxResult socp_min_max_norm(const SocpMinMaxProblem& problem, const SocpOptions& options = {});

}  // namespace wsrm
