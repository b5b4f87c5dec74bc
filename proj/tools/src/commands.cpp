#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "wsrm/cellsim.hpp"
#include "wsrm/dpc_dual.hpp"
#include "wsrm/dpc_newton.hpp"
#include "wsrm/error.hpp"
#include "wsrm/experiments.hpp"
#include "wsrm/instance_io.hpp"
#include "wsrm/zf_gradient.hpp"
#include "wsrm/zf_twostep.hpp"

namespace wsrm::cli {

namespace {

using nlohmann::json;

const double kBitsPerNat = 1.0 / std::log(2.0);

template <typename T>
T setting(const json& s, const std::string& key) {
  if (!s.contains(key)) throw InputError("setting '" + key + "' is missing");
  try {
    return s.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("setting '" + key + "' has the wrong type (" + s.at(key).dump() + ")");
  }
}

long positive_long(const json& s, const std::string& key, long minimum) {
  const long v = setting<long>(s, key);
  if (v < minimum) throw InputError("setting '" + key + "' must be >= " + std::to_string(minimum));
  return v;
}

json without_jobs(json s) {
  s.erase("jobs");
  return s;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write output file '" + path + "'");
  return f;
}

json to_bits(const RVector& nats) {
  json a = json::array();
  for (Index i = 0; i < nats.size(); ++i) a.push_back(nats(i) * kBitsPerNat);
  return a;
}

json to_list(const RVector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json precoder_json(const Precoder& p) {
  json cols = json::array();
  for (Index k = 0; k < p.users(); ++k) cols.push_back(complex_vector_to_json(p.columns().col(k)));
  return cols;
}

json report_json(const Instance& instance, const RateReport& r) {
  json j;
  j["rates_nats"] = to_list(r.rates);
  j["rates_bits"] = to_bits(r.rates);
  j["weighted_sum_nats"] = r.weighted_sum;
  j["weighted_sum_bits"] = r.weighted_sum * kBitsPerNat;
  j["usage"] = to_list(r.usage);
  j["slack"] = to_list(r.slack);
  RVector gamma(instance.constraint_count());
  for (Index l = 0; l < gamma.size(); ++l) gamma(l) = instance.constraint(l).gamma();
  j["gamma"] = to_list(gamma);
  if (r.zf_residual) j["zf_residual"] = *r.zf_residual;
  return j;
}

// Runs body(i) for i in [0, n) on up to `jobs` threads.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

unsigned default_jobs() {
  if (const char* env = std::getenv("WSRM_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

json solve_defaults() {
  return {{"instance", ""},       {"solver", "dpc-newton"}, {"tolerance", nullptr},
          {"warmstart_gradient_iters", 0}, {"out", ""},     {"trace", ""}};
}

json cdf_defaults() {
  return {{"trials", 200}, {"seed", 1},    {"M", 4},  {"K", 3},
          {"P", 10.0},     {"gamma", 5.0}, {"warmstart_gradient_iters", 10},
          {"jobs", default_jobs()}, {"out", ""}};
}

json cellsim_defaults() {
  const SimConfig c;
  return {{"scheme", std::string(to_string(c.scheme))},
          {"rho", c.rho},
          {"scheduler", std::string(to_string(c.scheduler))},
          {"precoder", std::string(to_string(c.precoder))},
          {"slots", c.slots},
          {"seed", c.seed},
          {"random_positions", c.random_positions},
          {"repetitions", 1},
          {"radius_km", c.radius_km},
          {"users", c.users},
          {"antennas", c.antennas},
          {"pathloss_exponent", c.pathloss_exponent},
          {"breakpoint_km", c.breakpoint_km},
          {"gain_db", c.gain_db},
          {"power_db", c.power_db},
          {"epsilon", c.ici_threshold},
          {"ewma_window", c.ewma_window},
          {"rate_floor", c.rate_floor},
          {"hfs_v", c.hfs_v},
          {"hfs_arrival", c.hfs_arrival},
          {"jobs", default_jobs()},
          {"out_csv", ""},
          {"out_json", ""}};
}

void overlay(json& base, const json& layer, const std::string& origin) {
  if (!layer.is_object()) throw InputError(origin + ": expected a JSON object");
  for (auto it = layer.begin(); it != layer.end(); ++it) {
    if (!base.contains(it.key())) throw InputError(origin + ": unknown setting '" + it.key() + "'");
    base[it.key()] = it.value();
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

json run_solve(const json& settings, std::ostream& out) {
  const auto path = setting<std::string>(settings, "instance");
  if (path.empty()) throw InputError("setting 'instance': an instance file is required");
  const auto solver = setting<std::string>(settings, "solver");
  const json& tol = settings.at("tolerance");
  if (!tol.is_null() && (!tol.is_number() || !(tol.get<double>() > 0.0))) {
    throw InputError("setting 'tolerance' must be a positive number");
  }
  const long warm_iters = positive_long(settings, "warmstart_gradient_iters", 0);
  const auto out_path = setting<std::string>(settings, "out");
  const auto trace_path = setting<std::string>(settings, "trace");

  const Instance instance = load_instance(path);
  RunManifest manifest;
  manifest.command = "solve";
  manifest.config = without_jobs(settings);
  manifest.instance_hash = git_blob_sha1_of_file(path);
  if (!out_path.empty()) manifest.outputs.push_back(out_path);
  if (!trace_path.empty()) manifest.outputs.push_back(trace_path);

  json result;
  ConvergenceTrace trace;
  if (solver == "dpc-newton") {
    NewtonOptions o;
    if (!tol.is_null()) o.tolerance = tol.get<double>();
    NewtonResult r = newton_solve(instance, o);
    result = report_json(instance, r.solution.report);
    result["powers"] = to_list(r.solution.powers);
    result["multipliers"] = to_list(r.solution.multipliers);
    result["coupling"] = r.solution.coupling;
    result["dual_objective"] = r.solution.objective;
    result["encoding_order"] = r.solution.encoding_order;
    result["precoder"] = precoder_json(r.solution.precoder);
    trace = std::move(r.trace);
  } else if (solver == "dpc-subgrad") {
    SubgradientOptions o;
    if (!tol.is_null()) o.tolerance = tol.get<double>();
    SubgradientResult r = outer_subgradient_solve(instance, o);
    result = report_json(instance, r.solution.report);
    result["powers"] = to_list(r.solution.powers);
    result["multipliers"] = to_list(r.solution.multipliers);
    result["dual_objective"] = r.solution.objective;
    result["encoding_order"] = r.solution.encoding_order;
    result["precoder"] = precoder_json(r.solution.precoder);
    result["outer_iterations"] = r.outer_iterations;
    trace = std::move(r.trace);
  } else if (solver == "zf-gradient") {
    GradientOptions o;
    if (!tol.is_null()) o.tolerance = tol.get<double>();
    GradientResult r = gradient_solve(instance, o);
    result = report_json(instance, r.report);
    result["relaxation_value_nats"] = r.relaxation.value;
    result["precoder"] = precoder_json(r.precoder);
    trace = std::move(r.trace);
  } else if (solver == "zf-twostep") {
    TwoStepOptions o;
    if (!tol.is_null()) o.tolerance = tol.get<double>();
    TwoStepResult r;
    if (warm_iters > 0) {
      GradientOptions g;
      g.max_iterations = warm_iters;
      g.throw_on_limit = false;
      const GradientResult warm = gradient_solve(instance, g);
      r = twostep_solve(instance, o, &warm.relaxation);
      result["warmstart_gradient_iters"] = warm_iters;
    } else {
      r = twostep_solve(instance, o);
    }
    const json report = report_json(instance, r.report);
    result.update(report);
    result["rounds"] = r.rounds;
    result["precoder"] = precoder_json(r.precoder);
    trace = std::move(r.trace);
  } else {
    throw InputError("setting 'solver': unknown solver '" + solver +
                     "' (dpc-newton, dpc-subgrad, zf-gradient, zf-twostep)");
  }
  result["solver"] = solver;
  result["iterations"] = trace.iterations;
  if (trace.work > 0.0) result["matmul_equivalents"] = trace.matmul_equivalents;

  json doc;
  doc["manifest"] = manifest.to_json();
  doc["result"] = result;
  if (out_path.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    open_output(out_path) << doc.dump(2) << '\n';
  }
  if (!trace_path.empty()) {
    std::ofstream f = open_output(trace_path);
    f << manifest.csv_comment() << '\n';
    trace.write_csv(f);
  }
  return doc;
}

json run_cdf(const json& settings, std::ostream& out) {
  const long trials = positive_long(settings, "trials", 1);
  const auto seed = setting<unsigned long long>(settings, "seed");
  CdfSettings cs;
  cs.antennas = positive_long(settings, "M", 1);
  cs.users = positive_long(settings, "K", 1);
  if (cs.users > cs.antennas) throw InputError("setting 'K' must not exceed 'M'");
  cs.power = setting<double>(settings, "P");
  cs.gamma = setting<double>(settings, "gamma");
  if (!(cs.power > 0.0)) throw InputError("setting 'P' must be positive");
  if (!(cs.gamma > 0.0)) throw InputError("setting 'gamma' must be positive");
  cs.warmstart_iterations = positive_long(settings, "warmstart_gradient_iters", 0);
  const auto jobs = static_cast<unsigned>(positive_long(settings, "jobs", 1));
  const auto out_path = setting<std::string>(settings, "out");

  std::vector<CdfTrial> rows(static_cast<std::size_t>(trials));
  parallel_for(rows.size(), jobs, [&](std::size_t i) { rows[i] = run_cdf_trial(seed + i, cs); });

  RunManifest manifest;
  manifest.command = "cdf";
  manifest.config = without_jobs(settings);
  for (const CdfTrial& r : rows) manifest.seeds.push_back(r.seed);
  if (!out_path.empty()) manifest.outputs.push_back(out_path);

  std::ostringstream csv;
  csv << manifest.csv_comment() << '\n';
  csv << "seed,gradient_value,twostep_value,ratio,warm_value,warm_ratio\n";
  csv << std::setprecision(12);
  long below = 0;
  long warm_below = 0;
  for (const CdfTrial& r : rows) {
    csv << r.seed << ',' << r.gradient_value * kBitsPerNat << ',' << r.twostep_value * kBitsPerNat << ','
        << r.ratio() << ',' << r.warm_value * kBitsPerNat << ',' << r.warm_ratio() << '\n';
    if (r.ratio() < 0.95) ++below;
    if (r.warm_ratio() < 0.95) ++warm_below;
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    open_output(out_path) << csv.str();
  }
  return {{"trials", trials},
          {"fraction_below_095", static_cast<double>(below) / static_cast<double>(trials)},
          {"warm_fraction_below_095", static_cast<double>(warm_below) / static_cast<double>(trials)}};
}

json run_cellsim(const json& settings, std::ostream& out) {
  SimConfig c;
  c.scheme = scheme_from_string(setting<std::string>(settings, "scheme"));
  c.rho = setting<double>(settings, "rho");
  c.scheduler = scheduler_from_string(setting<std::string>(settings, "scheduler"));
  c.precoder = precoder_from_string(setting<std::string>(settings, "precoder"));
  c.slots = positive_long(settings, "slots", 1);
  c.seed = setting<unsigned long long>(settings, "seed");
  c.random_positions = setting<bool>(settings, "random_positions");
  c.radius_km = setting<double>(settings, "radius_km");
  c.users = positive_long(settings, "users", 1);
  c.antennas = positive_long(settings, "antennas", 1);
  c.pathloss_exponent = setting<double>(settings, "pathloss_exponent");
  c.breakpoint_km = setting<double>(settings, "breakpoint_km");
  c.gain_db = setting<double>(settings, "gain_db");
  c.power_db = setting<double>(settings, "power_db");
  c.ici_threshold = setting<double>(settings, "epsilon");
  c.ewma_window = setting<double>(settings, "ewma_window");
  c.rate_floor = setting<double>(settings, "rate_floor");
  c.hfs_v = setting<double>(settings, "hfs_v");
  c.hfs_arrival = setting<double>(settings, "hfs_arrival");
  c.validate();
  const long reps = positive_long(settings, "repetitions", 1);
  const auto jobs = static_cast<unsigned>(positive_long(settings, "jobs", 1));
  const auto csv_path = setting<std::string>(settings, "out_csv");
  const auto json_path = setting<std::string>(settings, "out_json");

  std::vector<SimResult> runs(static_cast<std::size_t>(reps));
  parallel_for(runs.size(), jobs, [&](std::size_t r) {
    SimConfig local = c;
    local.seed = c.seed + r;
    runs[r] = run_simulation(local);
  });

  RunManifest manifest;
  manifest.command = "cellsim";
  manifest.config = without_jobs(settings);
  for (long r = 0; r < reps; ++r) manifest.seeds.push_back(c.seed + static_cast<unsigned long long>(r));
  if (!csv_path.empty()) manifest.outputs.push_back(csv_path);
  if (!json_path.empty()) manifest.outputs.push_back(json_path);

  std::vector<RVector> mean(2, RVector::Zero(c.users));
  std::vector<double> positions(static_cast<std::size_t>(c.users), 0.0);
  long skipped = 0;
  double max_ici = 0.0;
  for (const SimResult& run : runs) {
    for (std::size_t n = 0; n < 2; ++n) mean[n] += run.long_term[n] / static_cast<double>(reps);
    for (std::size_t k = 0; k < positions.size(); ++k) positions[k] += run.positions[k] / static_cast<double>(reps);
    skipped += run.skipped;
    max_ici = std::max(max_ici, run.max_ici);
  }

  std::ostringstream csv;
  csv << manifest.csv_comment() << '\n' << "user_index,position_km,cell,long_term_rate\n" << std::setprecision(12);
  for (std::size_t n = 0; n < 2; ++n) {
    for (Index k = 0; k < c.users; ++k) {
      csv << k + 1 << ',' << positions[static_cast<std::size_t>(k)] << ',' << n + 1 << ','
          << mean[n](k) * kBitsPerNat << '\n';
    }
  }
  if (csv_path.empty()) {
    out << csv.str();
  } else {
    open_output(csv_path) << csv.str();
  }

  json summary;
  summary["manifest"] = manifest.to_json();
  summary["scheme"] = std::string(to_string(c.scheme));
  summary["scheduler"] = std::string(to_string(c.scheduler));
  summary["precoder"] = std::string(to_string(c.precoder));
  summary["slots"] = c.slots;
  summary["repetitions"] = reps;
  summary["skipped_cell_slots"] = skipped;
  summary["max_realized_ici"] = max_ici;
  summary["hfs_arrival_nats"] = runs.front().hfs_arrival;
  summary["long_term_rate_bits"] = {to_bits(mean[0]), to_bits(mean[1])};
  if (!json_path.empty()) open_output(json_path) << summary.dump(2) << '\n';
  return summary;
}

}  // namespace wsrm::cli
