#pragma once

#include <vector>

#include "wsrm/model.hpp"

namespace wsrm {

/// Output of the DPC solvers.
struct DualSolution {
  RVector powers;       // dual-MAC powers p, original user indexing
  RVector multipliers;  // lambda_0..lambda_L (lambda_0 = 1 for the Newton solver)
  double coupling = 0.0;  // mu, the multiplier of the dual sum-power coupling
  Precoder precoder;      // BC precoder from the MAC-to-BC map
  std::vector<Index> encoding_order;
  RateReport report;      // dpc_rates(precoder, encoding_order)
  double objective = 0.0; // dual objective g(lambda) at the returned point
  bool converged = false;
};

}  // namespace wsrm
