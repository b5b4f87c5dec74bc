#include "wsrm/cellsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "wsrm/dpc_newton.hpp"
#include "wsrm/error.hpp"

namespace wsrm {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Coordinated: return "coordinated";
    case Scheme::Ffr: return "ffr";
    case Scheme::Reuse1: return "reuse1";
  }
  return "unknown";
}

std::string_view to_string(Scheduler s) { return s == Scheduler::Pfs ? "pfs" : "hfs"; }
std::string_view to_string(PrecoderKind p) { return p == PrecoderKind::Dpc ? "dpc" : "zfbf"; }

Scheme scheme_from_string(std::string_view name) {
  if (name == "coordinated") return Scheme::Coordinated;
  if (name == "ffr") return Scheme::Ffr;
  if (name == "reuse1") return Scheme::Reuse1;
  throw InputError("unknown scheme '" + std::string(name) + "' (coordinated, ffr, reuse1)");
}

Scheduler scheduler_from_string(std::string_view name) {
  if (name == "pfs") return Scheduler::Pfs;
  if (name == "hfs") return Scheduler::Hfs;
  throw InputError("unknown scheduler '" + std::string(name) + "' (pfs, hfs)");
}

PrecoderKind precoder_from_string(std::string_view name) {
  if (name == "dpc") return PrecoderKind::Dpc;
  if (name == "zfbf") return PrecoderKind::Zfbf;
  throw InputError("unknown precoder '" + std::string(name) + "' (dpc, zfbf)");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InputError(std::string("simulation config: ") + what);
  };
  require(radius_km > 0.0, "radius must be positive");
  require(users >= 1, "at least one user per cell");
  require(antennas >= 1, "at least one antenna");
  require(pathloss_exponent > 0.0, "pathloss exponent must be positive");
  require(breakpoint_km > 0.0, "breakpoint distance must be positive");
  require(ici_threshold > 0.0, "ICI threshold epsilon must be positive");
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  require(slots >= 1, "slots must be positive");
  require(ewma_window >= 1.0, "EWMA window must be at least one slot");
  require(rate_floor > 0.0, "rate floor must be positive");
  require(hfs_v > 0.0, "HFS V must be positive");
  require(hfs_arrival >= 0.0, "HFS arrival must be nonnegative");
  require(std::isfinite(power_db) && std::isfinite(gain_db), "power and gain must be finite");
}

double pathgain(double distance_km, const SimConfig& config) {
  return db_to_linear(config.gain_db) /
         (1.0 + std::pow(distance_km / config.breakpoint_km, config.pathloss_exponent));
}

std::vector<double> user_positions(const SimConfig& config, std::mt19937_64* rng) {
  std::vector<double> d(static_cast<std::size_t>(config.users));
  if (config.random_positions) {
    if (rng == nullptr) throw InputError("random positions need a random generator");
    std::uniform_real_distribution<double> uni(0.0, config.radius_km);
    for (double& x : d) x = uni(*rng);
    std::sort(d.begin(), d.end());
  } else {
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = (static_cast<double>(k) + 0.5) * config.radius_km / static_cast<double>(config.users);
    }
  }
  return d;
}

double equivalent_noise(const SimConfig& config, Index user, double d, double interferer_power) {
  if (config.scheme == Scheme::Coordinated && user == config.users - 1) return 1.0 + config.ici_threshold;
  return 1.0 + pathgain(cross_distance(d, config), config) * interferer_power;
}

SchedulerState initial_scheduler_state(const SimConfig& config) {
  SchedulerState s;
  s.average_rate = RVector::Zero(config.users);
  s.queue = RVector::Zero(config.users);
  s.served_total = RVector::Zero(config.users);
  return s;
}

RVector schedule_weights(const SchedulerState& state, const SimConfig& config) {
  if (config.scheduler == Scheduler::Pfs) return state.average_rate.cwiseMax(config.rate_floor).cwiseInverse();
  return state.queue;
}

RVector update_scheduler(SchedulerState& state, const SimConfig& config, const RVector& rates, double arrival) {
  RVector credited = rates;
  if (config.scheduler == Scheduler::Hfs) {
    const RVector backlog = state.queue.array() + arrival;
    credited = rates.cwiseMin(backlog);
    state.queue = (backlog - rates).cwiseMax(0.0);
  }
  const double forget = 1.0 / config.ewma_window;
  state.average_rate = (1.0 - forget) * state.average_rate + forget * credited;
  state.served_total += credited;
  ++state.slots;
  return credited;
}

SelectionResult greedy_user_selection(const Instance& instance, const PowerStepOptions& options) {
  SelectionResult best;
  std::vector<Index> pool;
  for (Index k = 0; k < instance.users(); ++k) {
    if (instance.weights()(k) > 0.0) pool.push_back(k);
  }
  const std::size_t limit = static_cast<std::size_t>(instance.antennas());
  while (best.users.size() < limit) {
    double round_value = best.proxy_value;
    Index pick = -1;
    for (Index candidate : pool) {
      if (std::find(best.users.begin(), best.users.end(), candidate) != best.users.end()) continue;
      std::vector<Index> trial = best.users;
      trial.push_back(candidate);
      std::sort(trial.begin(), trial.end());
      const Instance sub = instance.with_users(trial);
      double value = 0.0;
      try {
        const ZfGeometry geo = zf_geometry(sub);
        value = power_step(sub, geo.G, options).value;
      } catch (const InputError&) {
        continue;  // rank deficient
      }
      if (value > round_value * (1.0 + 1e-12)) {
        round_value = value;
        pick = candidate;
      }
    }
    if (pick < 0) break;
    best.users.push_back(pick);
    std::sort(best.users.begin(), best.users.end());
    best.proxy_value = round_value;
  }
  return best;
}

SlotOutcome solve_cell_slot(const SimConfig& config, const CMatrix& channels, const RVector& weights,
                            const CVector& ici_direction, double power) {
  const Index K = channels.cols();
  const Index M = channels.rows();
  SlotOutcome out;
  out.rates = RVector::Zero(K);
  std::vector<Index> active;
  for (Index k = 0; k < K; ++k) {
    if (weights(k) > 0.0) active.push_back(k);
  }
  if (active.empty() || power <= 0.0) return out;

  std::vector<LinearConstraint> constraints{LinearConstraint::sum_power(M, power)};
  if (ici_direction.size() > 0) constraints.push_back(LinearConstraint::interference(ici_direction, config.ici_threshold));

  CMatrix H(M, static_cast<Index>(active.size()));
  RVector W(static_cast<Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    H.col(static_cast<Index>(j)) = channels.col(active[j]);
    W(static_cast<Index>(j)) = weights(active[j]);
  }
  // The maximizer is invariant to a common weight scale.
  const Instance instance(H, W / W.maxCoeff(), constraints);

  RateReport report;
  std::vector<Index> served;
  if (config.precoder == PrecoderKind::Dpc) {
    const NewtonResult nr = newton_solve(instance);
    const Precoder pre = scale_to_feasible(instance, nr.solution.precoder);
    report = dpc_rates(instance, pre, instance.weight_order());
    served = identity_order(instance.users());
  } else {
    const SelectionResult sel = greedy_user_selection(instance);
    const Instance sub = instance.with_users(sel.users);
    const TwoStepResult ts = twostep_solve(sub);
    report = zf_rates(sub, scale_to_feasible(sub, ts.precoder));
    served = sel.users;
  }
  for (std::size_t j = 0; j < served.size(); ++j) {
    const Index user = active[static_cast<std::size_t>(served[j])];
    out.rates(user) = report.rates(static_cast<Index>(j));
  }
  out.weighted_sum = weights.dot(out.rates);
  out.sum_power_usage = report.usage(0);
  out.ici = report.usage.size() > 1 ? report.usage(1) : 0.0;
  return out;
}

double default_hfs_arrival(const SimConfig& config) {
  const double d = config.random_positions
                       ? config.radius_km
                       : (static_cast<double>(config.users) - 0.5) * config.radius_km / static_cast<double>(config.users);
  const double P = config.power();
  const double noise = config.scheme == Scheme::Coordinated
                           ? 1.0 + config.ici_threshold
                           : 1.0 + pathgain(cross_distance(d, config), config) * P;
  return 2.0 * std::log1p(static_cast<double>(config.antennas) * P * pathgain(d, config) / noise);
}

namespace {

struct Band {
  double own[2];  // transmit power of cell n in this band
  double share;   // bandwidth fraction
};

std::vector<Band> bands_for(const SimConfig& config) {
  const double P = config.power();
  if (config.scheme != Scheme::Ffr) return {Band{{P, P}, 1.0}};
  return {Band{{2.0 * P * config.rho, 2.0 * P * (1.0 - config.rho)}, 0.5},
          Band{{2.0 * P * (1.0 - config.rho), 2.0 * P * config.rho}, 0.5}};
}

CMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix X(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      X(i, j) = Complex(re, im);
    }
  }
  return X;
}

}  // namespace

SimResult run_simulation(const SimConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const Index K = config.users;
  const Index M = config.antennas;

  SimResult result;
  result.positions = user_positions(config, &rng);
  result.hfs_arrival = config.hfs_arrival > 0.0 ? config.hfs_arrival : default_hfs_arrival(config);

  RVector own_gain(K);
  RVector cross_gain(K);
  for (Index k = 0; k < K; ++k) {
    const double d = result.positions[static_cast<std::size_t>(k)];
    own_gain(k) = pathgain(d, config);
    cross_gain(k) = pathgain(cross_distance(d, config), config);
  }

  std::array<SchedulerState, 2> state{initial_scheduler_state(config), initial_scheduler_state(config)};
  const std::vector<Band> bands = bands_for(config);
  const bool coordinated = config.scheme == Scheme::Coordinated;

  for (long slot = 0; slot < config.slots; ++slot) {
    // Unit-variance fading; own[n] feeds the users of cell n from their
    // station, cross[n] feeds them from the other station.
    std::array<CMatrix, 2> own;
    std::array<CMatrix, 2> cross;
    for (int n = 0; n < 2; ++n) {
      own[static_cast<std::size_t>(n)] = gaussian_matrix(M, K, rng);
      cross[static_cast<std::size_t>(n)] = gaussian_matrix(M, K, rng);
    }
    for (int n = 0; n < 2; ++n) {
      const auto cell = static_cast<std::size_t>(n);
      const auto other = static_cast<std::size_t>(1 - n);
      const RVector weights = schedule_weights(state[cell], config);
      const double arrival =
          config.scheduler == Scheduler::Hfs && config.hfs_v > state[cell].queue.sum() ? result.hfs_arrival : 0.0;
      RVector rates = RVector::Zero(K);
      for (const Band& band : bands) {
        const double p_own = band.own[cell];
        const double p_other = band.own[other];
        if (p_own <= 0.0) continue;
        CMatrix H(M, K);
        for (Index k = 0; k < K; ++k) {
          const double noise = equivalent_noise(config, k, result.positions[static_cast<std::size_t>(k)], p_other);
          H.col(k) = std::sqrt(p_own * own_gain(k) / noise) * own[cell].col(k);
        }
        CVector direction;
        if (coordinated) direction = std::sqrt(p_own * cross_gain(K - 1)) * cross[other].col(K - 1);
        try {
          const SlotOutcome so = solve_cell_slot(config, H, weights, direction, 1.0);
          rates += band.share * so.rates;
          if (coordinated) result.max_ici = std::max(result.max_ici, so.ici);
          result.max_sum_power = std::max(result.max_sum_power, so.sum_power_usage);
        } catch (const Error&) {
          ++result.skipped;
        }
      }
      update_scheduler(state[cell], config, rates, arrival);
    }
  }
  result.slots = config.slots;
  for (const SchedulerState& s : state) result.long_term.push_back(s.served_total / static_cast<double>(s.slots));
  return result;
}

}  // namespace wsrm
