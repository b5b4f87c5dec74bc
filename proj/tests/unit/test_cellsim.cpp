#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wsrm/cellsim.hpp"
#include "wsrm/error.hpp"
#include "wsrm/zf_core.hpp"
#include "wsrm/zf_twostep.hpp"

using namespace wsrm;
using namespace wsrm::testing;

TEST_CASE("path gain") {
  const SimConfig c;
  CHECK(pathgain(0.0, c) == doctest::Approx(db_to_linear(c.gain_db)).epsilon(1e-15));
  CHECK(linear_to_db(pathgain(c.breakpoint_km, c)) - c.gain_db == doctest::Approx(-3.0103).epsilon(1e-4));
  CHECK(std::abs(linear_to_db(pathgain(1.0, c)) + 142.2) < 0.05);
  CHECK(pathgain(0.5, c) > pathgain(0.6, c));
}

TEST_CASE("equivalent noise") {
  SimConfig c;
  c.scheme = Scheme::Coordinated;
  CHECK(equivalent_noise(c, c.users - 1, 0.9, c.power()) == 2.0);
  const double d = 0.3;
  CHECK(equivalent_noise(c, 0, d, c.power()) == doctest::Approx(1.0 + pathgain(2.0 - d, c) * c.power()));
  c.scheme = Scheme::Ffr;
  c.rho = 0.0;
  CHECK(equivalent_noise(c, 0, d, 2.0 * c.power() * c.rho) == 1.0);
  c.scheme = Scheme::Reuse1;
  CHECK(equivalent_noise(c, c.users - 1, d, c.power()) == doctest::Approx(1.0 + pathgain(2.0 - d, c) * c.power()));
}

TEST_CASE("user positions") {
  SimConfig c;
  const std::vector<double> fixed = user_positions(c);
  REQUIRE(fixed.size() == 4);
  CHECK(fixed[0] == doctest::Approx(0.125));
  CHECK(fixed[3] == doctest::Approx(0.875));
  c.random_positions = true;
  CHECK_THROWS_AS(user_positions(c), InputError);
  std::mt19937_64 rng(5);
  const std::vector<double> random = user_positions(c, &rng);
  for (std::size_t i = 0; i < random.size(); ++i) {
    CHECK(random[i] >= 0.0);
    CHECK(random[i] <= c.radius_km);
    if (i > 0) CHECK(random[i] >= random[i - 1]);
  }
}

TEST_CASE("schedule weights") {
  SimConfig c;
  c.users = 3;
  SchedulerState s = initial_scheduler_state(c);
  s.average_rate = RVector{{1.0, 2.0, 4.0}};
  CHECK((schedule_weights(s, c) - RVector{{1.0, 0.5, 0.25}}).norm() < 1e-15);
  s.average_rate = RVector::Constant(3, 0.7);
  const RVector equal = schedule_weights(s, c);
  CHECK(equal.maxCoeff() == equal.minCoeff());
  s.average_rate.setZero();
  CHECK(schedule_weights(s, c).maxCoeff() == doctest::Approx(1.0 / c.rate_floor));
  c.scheduler = Scheduler::Hfs;
  s.queue = RVector{{0.0, 3.0, 1.0}};
  CHECK(schedule_weights(s, c) == RVector{{0.0, 3.0, 1.0}});
}

TEST_CASE("scheduler bookkeeping") {
  SimConfig c;
  c.users = 3;
  c.ewma_window = 10.0;
  SchedulerState s = initial_scheduler_state(c);
  const RVector rates{{1.0, 0.0, 2.0}};
  CHECK(update_scheduler(s, c, rates, 0.0) == rates);
  CHECK((s.average_rate - 0.1 * rates).norm() < 1e-15);
  CHECK(s.slots == 1);

  c.scheduler = Scheduler::Hfs;
  SchedulerState h = initial_scheduler_state(c);
  h.queue = RVector{{0.0, 3.0, 1.0}};
  // Departures are capped by the backlog.
  const RVector credited = update_scheduler(h, c, RVector{{2.0, 1.0, 0.5}}, 1.0);
  CHECK(credited == RVector{{1.0, 1.0, 0.5}});
  CHECK(h.queue == RVector{{0.0, 3.0, 1.5}});
  CHECK(h.served_total == credited);
}

TEST_CASE("greedy user selection") {
  std::mt19937_64 rng(91);
  SUBCASE("all users of a well-conditioned set are selected") {
    const Instance inst(random_cmatrix(rng, 4, 3), RVector::Ones(3), {LinearConstraint::sum_power(4, 100.0)});
    CHECK(greedy_user_selection(inst).users == std::vector<Index>{0, 1, 2});
  }
  SUBCASE("zero-weight users cannot reach selection") {
    CHECK_THROWS_AS(Instance(random_cmatrix(rng, 4, 4), RVector{{1.0, 0.0, 0.7, 1.2}},
                             {LinearConstraint::sum_power(4, 10.0)}),
                    InputError);
  }
  SUBCASE("selection beats every single-user set") {
    for (int trial = 0; trial < 10; ++trial) {
      const Instance inst = random_instance(rng, 4, 4, 1, 10.0, 1.0, true);
      const SelectionResult sel = greedy_user_selection(inst);
      const Instance chosen = inst.with_users(sel.users);
      const double chosen_value = power_step(chosen, zf_geometry(chosen).G).value;
      CHECK(std::abs(chosen_value - sel.proxy_value) < 1e-12 * std::max(1.0, chosen_value));
      for (Index k = 0; k < 4; ++k) {
        const std::vector<Index> one{k};
        const Instance single = inst.with_users(one);
        CHECK(sel.proxy_value >= power_step(single, zf_geometry(single).G).value - 1e-12);
      }
    }
  }
  SUBCASE("never more users than antennas") {
    const Instance inst(random_cmatrix(rng, 3, 6), RVector::Ones(6), {LinearConstraint::sum_power(3, 1000.0)});
    const SelectionResult sel = greedy_user_selection(inst);
    CHECK(sel.users.size() <= 3);
    CHECK(sel.users.size() >= 1);
  }
}

TEST_CASE("cell slot solves respect the constraints") {
  std::mt19937_64 rng(92);
  SimConfig c;
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix H = random_cmatrix(rng, 4, 4, 50.0);
    const CVector direction = random_cvector(rng, 4, 20.0);
    RVector W(4);
    for (Index k = 0; k < 4; ++k) W(k) = 0.5 + 0.25 * static_cast<double>(k);
    c.precoder = PrecoderKind::Dpc;
    const SlotOutcome dpc = solve_cell_slot(c, H, W, direction, 1.0);
    c.precoder = PrecoderKind::Zfbf;
    const SlotOutcome zf = solve_cell_slot(c, H, W, direction, 1.0);
    for (const SlotOutcome* o : {&dpc, &zf}) {
      CHECK(o->ici <= c.ici_threshold + 1e-6);
      CHECK(o->sum_power_usage <= 1.0 + 1e-9);
      CHECK(o->rates.minCoeff() >= 0.0);
      CHECK(std::abs(o->weighted_sum - W.dot(o->rates)) < 1e-12);
    }
    CHECK(dpc.weighted_sum >= zf.weighted_sum * (1.0 - 1e-6));
  }
  // Zero weights are unscheduled.
  const SlotOutcome idle = solve_cell_slot(c, random_cmatrix(rng, 4, 2), RVector{{0.0, 1.0}}, CVector(), 1.0);
  CHECK(idle.rates(0) == 0.0);
  CHECK(idle.rates(1) > 0.0);
}

TEST_CASE("short simulations") {
  SimConfig c;
  c.slots = 20;
  for (PrecoderKind precoder : {PrecoderKind::Dpc, PrecoderKind::Zfbf}) {
    for (Scheduler scheduler : {Scheduler::Pfs, Scheduler::Hfs}) {
      c.precoder = precoder;
      c.scheduler = scheduler;
      c.scheme = Scheme::Coordinated;
      const SimResult r = run_simulation(c);
      CHECK(r.skipped == 0);
      CHECK(r.max_ici <= c.ici_threshold + 1e-6);
      CHECK(r.max_sum_power <= 1.0 + 1e-9);
      REQUIRE(r.long_term.size() == 2);
      CHECK(r.long_term[0].size() == c.users);
      CHECK(r.long_term[0].minCoeff() >= 0.0);
      CHECK(r.hfs_arrival == doctest::Approx(default_hfs_arrival(c)));
    }
  }
}

TEST_CASE("half-power FFR coincides with reuse-1") {
  SimConfig c;
  c.slots = 20;
  c.scheme = Scheme::Reuse1;
  const SimResult reuse = run_simulation(c);
  c.scheme = Scheme::Ffr;
  c.rho = 0.5;
  const SimResult ffr = run_simulation(c);
  for (int n = 0; n < 2; ++n) {
    CHECK(relative_error(ffr.long_term[static_cast<std::size_t>(n)], reuse.long_term[static_cast<std::size_t>(n)]) <
          1e-9);
  }
}

TEST_CASE("simulations are reproducible") {
  SimConfig c;
  c.slots = 10;
  c.random_positions = true;
  c.seed = 17;
  const SimResult a = run_simulation(c);
  const SimResult b = run_simulation(c);
  CHECK(a.positions == b.positions);
  CHECK(a.long_term[0] == b.long_term[0]);
  CHECK(a.long_term[1] == b.long_term[1]);
}

TEST_CASE("configuration validation and names") {
  SimConfig c;
  c.rho = 1.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.rho = 0.5;
  c.ici_threshold = 0.0;
  CHECK_THROWS_AS(run_simulation(c), InputError);
  CHECK(scheme_from_string(to_string(Scheme::Ffr)) == Scheme::Ffr);
  CHECK(scheduler_from_string(to_string(Scheduler::Hfs)) == Scheduler::Hfs);
  CHECK(precoder_from_string(to_string(PrecoderKind::Zfbf)) == PrecoderKind::Zfbf);
  CHECK_THROWS_AS(scheme_from_string("reuse-3"), InputError);
}
