// wsrm command-line front end: solve, cdf and cellsim subcommands.
#include <deque>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "wsrm/error.hpp"

namespace {

using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

// A flag reaches the settings layer only when given on the command line.
template <typename T>
struct Flag {
  std::string key;
  T value{};
  CLI::Option* option = nullptr;
};

// Deques keep element addresses stable for CLI11's bound references.
struct FlagSet {
  std::deque<Flag<double>> reals;
  std::deque<Flag<long>> integers;
  std::deque<Flag<std::string>> strings;
  std::deque<Flag<bool>> switches;

  void real(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    reals.push_back({key, 0.0, nullptr});
    reals.back().option = app->add_option(name, reals.back().value, help);
  }
  void integer(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    integers.push_back({key, 0, nullptr});
    integers.back().option = app->add_option(name, integers.back().value, help);
  }
  void text(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    strings.push_back({key, {}, nullptr});
    strings.back().option = app->add_option(name, strings.back().value, help);
  }
  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    switches.push_back({key, false, nullptr});
    switches.back().option = app->add_flag(name, switches.back().value, help);
  }

  json layer() const {
    json j = json::object();
    for (const auto& f : reals) if (f.option->count() > 0) j[f.key] = f.value;
    for (const auto& f : integers) if (f.option->count() > 0) j[f.key] = f.value;
    for (const auto& f : strings) if (f.option->count() > 0) j[f.key] = f.value;
    for (const auto& f : switches) if (f.option->count() > 0) j[f.key] = f.value;
    return j;
  }
};

struct Command {
  CLI::App* app = nullptr;
  FlagSet flags;
  std::string config_path;
};

json resolve(json defaults, const Command& cmd) {
  if (!cmd.config_path.empty()) {
    wsrm::cli::overlay(defaults, wsrm::cli::load_config_file(cmd.config_path), "config file '" + cmd.config_path + "'");
  }
  wsrm::cli::overlay(defaults, cmd.flags.layer(), "command line");
  return defaults;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted sum-rate maximization under linear transmit constraints"};
  app.require_subcommand(1);

  Command solve;
  solve.app = app.add_subcommand("solve", "Solve one instance file");
  solve.app->add_option("--config", solve.config_path, "JSON settings file");
  solve.flags.text(solve.app, "instance,--instance", "instance", "Instance JSON file");
  solve.flags.text(solve.app, "--solver", "solver", "dpc-newton | dpc-subgrad | zf-gradient | zf-twostep");
  solve.flags.real(solve.app, "--tolerance", "tolerance", "Solver stopping tolerance");
  solve.flags.integer(solve.app, "--warmstart-gradient-iters", "warmstart_gradient_iters",
                      "Gradient iterations before the two-step solver (0 = cold start)");
  solve.flags.text(solve.app, "--out", "out", "Result JSON path (default stdout)");
  solve.flags.text(solve.app, "--trace", "trace", "Convergence trace CSV path");

  Command cdf;
  cdf.app = app.add_subcommand("cdf", "Two-step versus gradient ratio over random instances");
  cdf.app->add_option("--config", cdf.config_path, "JSON settings file");
  cdf.flags.integer(cdf.app, "--trials", "trials", "Number of random instances");
  cdf.flags.integer(cdf.app, "--seed", "seed", "Seed of the first instance");
  cdf.flags.integer(cdf.app, "--M", "M", "Antennas");
  cdf.flags.integer(cdf.app, "--K", "K", "Users");
  cdf.flags.real(cdf.app, "--P", "P", "Sum-power budget");
  cdf.flags.real(cdf.app, "--gamma", "gamma", "Interference budget");
  cdf.flags.integer(cdf.app, "--warmstart-gradient-iters", "warmstart_gradient_iters", "Warm-start iterations N");
  cdf.flags.integer(cdf.app, "--jobs", "jobs", "Worker threads");
  cdf.flags.text(cdf.app, "--out", "out", "CSV path (default stdout)");

  Command sim;
  sim.app = app.add_subcommand("cellsim", "Two-cell downlink simulation");
  sim.app->add_option("--config", sim.config_path, "JSON settings file");
  sim.flags.text(sim.app, "--scheme", "scheme", "coordinated | ffr | reuse1");
  sim.flags.real(sim.app, "--rho", "rho", "FFR power fraction");
  sim.flags.text(sim.app, "--scheduler", "scheduler", "pfs | hfs");
  sim.flags.text(sim.app, "--precoder", "precoder", "dpc | zfbf");
  sim.flags.integer(sim.app, "--slots", "slots", "Time slots");
  sim.flags.integer(sim.app, "--seed", "seed", "Random seed");
  sim.flags.flag(sim.app, "--random-positions", "random_positions", "Draw user positions uniformly");
  sim.flags.integer(sim.app, "--repetitions", "repetitions", "Independent runs averaged together");
  sim.flags.real(sim.app, "--epsilon", "epsilon", "ICI threshold (linear, relative to noise)");
  sim.flags.real(sim.app, "--power-db", "power_db", "Transmit power in dB over noise");
  sim.flags.integer(sim.app, "--users", "users", "Users per cell");
  sim.flags.integer(sim.app, "--antennas", "antennas", "Antennas per station");
  sim.flags.real(sim.app, "--hfs-v", "hfs_v", "HFS arrival threshold V");
  sim.flags.real(sim.app, "--hfs-arrival", "hfs_arrival", "HFS arrival a_max in nats (0 = default)");
  sim.flags.integer(sim.app, "--jobs", "jobs", "Worker threads");
  sim.flags.text(sim.app, "--out-csv", "out_csv", "Per-user CSV path (default stdout)");
  sim.flags.text(sim.app, "--out-json", "out_json", "Summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (solve.app->parsed()) {
      wsrm::cli::run_solve(resolve(wsrm::cli::solve_defaults(), solve), std::cout);
    } else if (cdf.app->parsed()) {
      const json summary = wsrm::cli::run_cdf(resolve(wsrm::cli::cdf_defaults(), cdf), std::cout);
      std::cerr << summary.dump() << '\n';
    } else if (sim.app->parsed()) {
      const json summary = wsrm::cli::run_cellsim(resolve(wsrm::cli::cellsim_defaults(), sim), std::cout);
      std::cerr << summary.dump() << '\n';
    }
  } catch (const wsrm::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const wsrm::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
