#pragma once

#include <cstdint>

#include "wsrm/model.hpp"
#include "wsrm/zf_gradient.hpp"
#include "wsrm/zf_twostep.hpp"

namespace wsrm {

struct CdfSettings {
  Index antennas = 4;
  Index users = 3;
  double power = 10.0;
  double gamma = 5.0;
  Index interference_constraints = 2;
  long warmstart_iterations = 10;  // N gradient iterations for the hybrid run
};

/// Random instance for the two-step CDF experiment: i.i.d. CN(0, 1) channels
/// and constraint directions (left unnormalized), unit weights.
Instance random_cdf_instance(std::uint64_t seed, const CdfSettings& settings);

struct CdfTrial {
  std::uint64_t seed = 0;
  double gradient_value = 0.0;  // zero-forcing optimum from gradient_solve
  double twostep_value = 0.0;   // cold start from the pseudo-inverse
  double warm_value = 0.0;      // after N gradient iterations
  double ratio() const { return twostep_value / gradient_value; }
  double warm_ratio() const { return warm_value / gradient_value; }
};

CdfTrial run_cdf_trial(std::uint64_t seed, const CdfSettings& settings,
                       const GradientOptions& gradient = {}, const TwoStepOptions& twostep = {});

}  // namespace wsrm
