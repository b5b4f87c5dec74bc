#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wsrm/model.hpp"
#include "wsrm/zf_twostep.hpp"

namespace wsrm {

enum class Scheme { Coordinated, Ffr, Reuse1 };
enum class Scheduler { Pfs, Hfs };
enum class PrecoderKind { Dpc, Zfbf };

std::string_view to_string(Scheme s);
std::string_view to_string(Scheduler s);
std::string_view to_string(PrecoderKind p);
Scheme scheme_from_string(std::string_view name);
Scheduler scheduler_from_string(std::string_view name);
PrecoderKind precoder_from_string(std::string_view name);

double db_to_linear(double db);
double linear_to_db(double linear);

/// Two-cell downlink configuration. Distances in km, gains and powers in dB
/// relative to the receiver noise power.
struct SimConfig {
  double radius_km = 1.0;      // D
  Index users = 4;             // K per cell
  Index antennas = 4;          // M
  double pathloss_exponent = 3.504;
  double breakpoint_km = 0.036;
  double gain_db = -91.64;     // G0
  double power_db = 154.0;     // P
  double ici_threshold = 1.0;  // epsilon, linear, relative to the noise
  Scheme scheme = Scheme::Coordinated;
  double rho = 0.5;            // FFR power fraction
  Scheduler scheduler = Scheduler::Pfs;
  PrecoderKind precoder = PrecoderKind::Dpc;
  long slots = 2000;
  std::uint64_t seed = 1;
  bool random_positions = false;
  // Scheduler parameters.
  double ewma_window = 100.0;  // t_c
  double rate_floor = 1e-3;
  double hfs_v = 100.0;
  double hfs_arrival = 0.0;    // a_max; 0 selects twice the single-user edge rate

  void validate() const;
  double power() const { return db_to_linear(power_db); }
};

// G0 / (1 + (d / delta)^alpha) in linear units.
double pathgain(double distance_km, const SimConfig& config);

// Distances from the serving station, sorted so the last user is nearest
// the cell edge. Fixed positions are (k - 1/2) D / K.
std::vector<double> user_positions(const SimConfig& config, std::mt19937_64* rng = nullptr);

// Distance from the interfering station on the line between the two sites.
inline double cross_distance(double d, const SimConfig& config) { return 2.0 * config.radius_km - d; }

/// Noise plus interference N_k of user k (0-based) at distance d in a band
/// where the neighbouring station radiates interferer_power (linear). Under
/// coordination the edge user sees 1 + epsilon.
double equivalent_noise(const SimConfig& config, Index user, double d, double interferer_power);

struct SchedulerState {
  RVector average_rate;  // EWMA of served rates
  RVector queue;         // HFS virtual queues
  RVector served_total;  // long-term accumulators
  long slots = 0;
};

SchedulerState initial_scheduler_state(const SimConfig& config);

// PFS: 1 / max(avg, floor). HFS: the queue lengths.
RVector schedule_weights(const SchedulerState& state, const SimConfig& config);

// One slot of scheduler bookkeeping given the achieved rates; returns the
// rates credited to the long-term average (departures for HFS).
RVector update_scheduler(SchedulerState& state, const SimConfig& config, const RVector& rates, double arrival);

struct SelectionResult {
  std::vector<Index> users;  // indices into the instance
  double proxy_value = 0.0;
};

/// Greedy zero-forcing user selection: grow the set by the user that most
/// improves the pseudo-inverse power_step value, up to M users. Zero-weight
/// users are dropped by the caller since Instance requires positive weights.
SelectionResult greedy_user_selection(const Instance& instance, const PowerStepOptions& options = {});

struct SlotOutcome {
  RVector rates;            // per user, nats per channel use, zero if unscheduled
  double weighted_sum = 0.0;
  double ici = 0.0;         // realized interference at the neighbour's edge user
  double sum_power_usage = 0.0;
};

/// Solves one cell's weighted sum-rate problem for a slot. users_weights of
/// zero are dropped before the solve. An ICI constraint is added when
/// ici_direction is non-empty.
SlotOutcome solve_cell_slot(const SimConfig& config, const CMatrix& channels, const RVector& weights,
                            const CVector& ici_direction, double power);

struct SimResult {
  std::vector<double> positions;  // per user
  // long_term[n](k): long-term rate of user k in cell n
  std::vector<RVector> long_term;
  long slots = 0;
  long skipped = 0;          // cell-slot solves that failed
  double max_ici = 0.0;      // worst realized ICI over constrained solves
  double max_sum_power = 0.0;  // worst sum-power usage / P
  double hfs_arrival = 0.0;
};

SimResult run_simulation(const SimConfig& config);

// Twice the rate of the edge user served alone with full power and the
// beamforming gain M, under the scheme's edge noise level.
double default_hfs_arrival(const SimConfig& config);

}  // namespace wsrm
