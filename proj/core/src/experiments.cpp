#include "wsrm/experiments.hpp"

#include <random>

namespace wsrm {

namespace {

CMatrix complex_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix X(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      X(i, j) = Complex(re, normal(rng));
    }
  }
  return X;
}

}  // namespace

Instance random_cdf_instance(std::uint64_t seed, const CdfSettings& s) {
  std::mt19937_64 rng(seed);
  const CMatrix H = complex_gaussian(s.antennas, s.users, rng);
  const CMatrix C = complex_gaussian(s.antennas, s.interference_constraints, rng);
  std::vector<LinearConstraint> constraints{LinearConstraint::sum_power(s.antennas, s.power)};
  for (Index l = 0; l < C.cols(); ++l) constraints.push_back(LinearConstraint::interference(C.col(l), s.gamma));
  return Instance(H, RVector::Ones(s.users), std::move(constraints));
}

CdfTrial run_cdf_trial(std::uint64_t seed, const CdfSettings& settings, const GradientOptions& gradient,
                       const TwoStepOptions& twostep) {
  const Instance instance = random_cdf_instance(seed, settings);
  CdfTrial trial;
  trial.seed = seed;
  trial.gradient_value = gradient_solve(instance, gradient).report.weighted_sum;
  trial.twostep_value = twostep_solve(instance, twostep).report.weighted_sum;

  GradientOptions short_run = gradient;
  short_run.max_iterations = settings.warmstart_iterations;
  short_run.throw_on_limit = false;
  const GradientResult warm = gradient_solve(instance, short_run);
  trial.warm_value = twostep_solve(instance, twostep, &warm.relaxation).report.weighted_sum;
  return trial;
}

}  // namespace wsrm
