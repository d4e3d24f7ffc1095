#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "dsmc/analytic.hpp"
#include "dsmc/engine.hpp"

using namespace dsmc;

namespace {

NetworkConfig flat(int n, int k, int r) {
  NetworkConfig c;
  c.kind = TopologyKind::FlatCrossbar;
  c.n = n;
  c.k = k;
  c.r = r;
  return c;
}

NetworkConfig dsmc_cfg(int n) {
  NetworkConfig c;
  c.kind = TopologyKind::DsmcTwoBlock;
  c.n = n;
  c.r = 2;
  return c;
}

TrafficPattern silent() {
  TrafficPattern t;
  t.injection_rate = 0.0;
  return t;
}

// Latency of one transaction offered to an otherwise idle network.
std::int64_t lone_latency(const NetworkConfig& cfg, int master, int bank, AccessKind kind, int len = 1) {
  Simulation sim(cfg, {}, silent(), 0);
  std::int64_t done = -1;
  sim.set_beat_observer([&](const Beat& b) { done = std::max(done, *b.complete_cycle); });
  REQUIRE(sim.offer_transaction(master, {len, kind, bank}));
  sim.run_cycles(100);
  const auto s = sim.finish();
  const auto& h = s.latency.at({static_cast<int>(kind), len});
  REQUIRE(h.count() == 1);
  CHECK(h.min() == done);
  return h.min();
}

}  // namespace

TEST_CASE("arbitrate") {
  Rng rng(1);
  auto a = arbitrate(0, 2, rng);
  CHECK(a.granted.empty());
  CHECK(a.stalled.empty());
  a = arbitrate(1, 2, rng);
  CHECK(a.granted == std::vector<int>{0});
  a = arbitrate(5, 2, rng);
  CHECK(a.granted.size() == 2);
  CHECK(a.stalled.size() == 3);
  std::set<int> all(a.granted.begin(), a.granted.end());
  all.insert(a.stalled.begin(), a.stalled.end());
  CHECK(all.size() == 5);
  CHECK_THROWS_AS(arbitrate(3, 0, rng), std::invalid_argument);
}

TEST_CASE("arbitrate picks uniformly (chi-square)") {
  Rng rng(2024);
  std::array<double, 3> wins{};
  const int trials = 90000;
  for (int i = 0; i < trials; ++i) ++wins[arbitrate(3, 1, rng).granted[0]];
  double chi2 = 0;
  for (double w : wins) chi2 += (w - trials / 3.0) * (w - trials / 3.0) / (trials / 3.0);
  CHECK(chi2 < 13.8);  // 2 degrees of freedom, p = 0.001
}

TEST_CASE("slave port service reproduces f_r(q)") {
  Rng rng(5);
  for (int r : {1, 2, 4}) {
    for (int q : {1, 3, 6}) {
      const int trials = 100000;
      double served = 0, sq = 0;
      std::vector<int> banks(q);
      const std::vector<char> free(r, 1);
      for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < q; ++i) banks[i] = static_cast<int>(rng.uniform_index(r));
        const double x = static_cast<double>(serve_slave_port(banks, r, free, rng).size());
        served += x;
        sq += x * x;
      }
      const double mean = served / trials;
      const double sd = std::sqrt(std::max(sq / trials - mean * mean, 1e-12) / trials);
      CAPTURE(r);
      CAPTURE(q);
      CHECK(std::abs(mean - analytic::speedup_utilization(r, std::min(q, r))) < 4 * sd + 1e-12);
    }
  }
}

TEST_CASE("busy banks accept nothing") {
  Rng rng(3);
  const std::vector<int> banks{0, 1, 1};
  const std::vector<char> free{0, 1};
  for (int i = 0; i < 50; ++i) {
    const auto acc = serve_slave_port(banks, 2, free, rng);
    for (int a : acc) CHECK(banks[a] == 1);
    CHECK(acc.size() <= 1);
  }
}

TEST_CASE("directed randomization splits parity") {
  CHECK(apply_directed_randomization(4, 2) == std::vector<int>{0, 1, 0, 1});
  CHECK(apply_directed_randomization(4, 2, 1) == std::vector<int>{1, 0, 1, 0});
  CHECK(apply_directed_randomization(1, 2) == std::vector<int>{0});
  const auto s = apply_directed_randomization(16, 2);
  CHECK(std::count(s.begin(), s.end(), 0) == 8);
  CHECK_THROWS_AS(apply_directed_randomization(4, 3), std::invalid_argument);
}

TEST_CASE("fractal spreading") {
  FractalSpreader f(4, 32, 16, 9);
  const int start = f.counter_value(1);
  const auto a = f.assign(1, 4);
  CHECK(std::set<int>(a.begin(), a.end()).size() == 4);
  CHECK(f.counter_value(1) == (start + 4) % 32);
  // Consecutive positions first change the slave port, then the bank behind it.
  CHECK(f.spread(0) == 0);
  CHECK(f.spread(1) == 2);
  CHECK(f.spread(16) == 1);
  for (int p = 0; p < 32; ++p) CHECK(f.position_of(f.spread(p)) == p);
  const auto b = f.assign(1, 16);
  const auto c = f.assign(2, 16);
  CHECK(std::set<int>(b.begin(), b.end()).size() == 16);
  CHECK(std::set<int>(c.begin(), c.end()).size() == 16);
  CHECK_THROWS_AS(f.assign(0, 33), std::invalid_argument);
}

TEST_CASE("uncontended latency is hops + slices + bank latency") {
  // Flat: the master register is the only hop.
  CHECK(lone_latency(flat(4, 4, 1), 0, 3, AccessKind::Write) == 2);
  CHECK(lone_latency(flat(4, 4, 1), 0, 3, AccessKind::Read) == 3);
  // DSMC: master register plus four switch stages.
  NetworkConfig d = dsmc_cfg(16);
  CHECK(lone_latency(d, 0, 5, AccessKind::Write) == 6);
  CHECK(lone_latency(d, 0, 60, AccessKind::Write) == 6);
  CHECK(lone_latency(d, 0, 60, AccessKind::Read) == 11);
  d.bank_latency = 3;
  CHECK(lone_latency(d, 0, 60, AccessKind::Write) == 8);
  CHECK(lone_latency(d, 0, 60, AccessKind::Read) == 13);
  d.bank_latency = 1;
  d.slices.all = 1;  // five links on every path
  CHECK(lone_latency(d, 7, 12, AccessKind::Write) == 11);
  CHECK(lone_latency(d, 7, 12, AccessKind::Read) == 21);
  d.slices.all = 0;
  d.slices.speedup = 2;
  CHECK(lone_latency(d, 0, 60, AccessKind::Write) == 8);  // remote bank crosses one speed-up link
  CHECK(lone_latency(d, 0, 5, AccessKind::Write) == 6);
  // A burst streams one beat per cycle.
  CHECK(lone_latency(dsmc_cfg(16), 0, 5, AccessKind::Write, 4) == 9);
}

TEST_CASE("routing fault") {
  const Topology t = build_dsmc(8);
  Beat b;
  b.target_bank = 31;  // block 1
  const int stage2_block0 = t.stages()[1].switches[0];
  CHECK_THROWS_AS(route_beat(t, stage2_block0, b), RoutingFault);
  CHECK(route_beat(t, t.masters()[0], b) == 0);
}

TEST_CASE("conservation holds every cycle") {
  struct Case {
    NetworkConfig cfg;
    RandomizationPolicy pol;
    BurstKind kind;
  };
  NetworkConfig drop = flat(8, 8, 1);
  drop.source = SourcePolicy::Drop;
  NetworkConfig deep = dsmc_cfg(8);
  deep.buffer_depth = 3;
  deep.slices.speedup = 2;
  NetworkConfig windowed = dsmc_cfg(8);
  windowed.read_window = 16;
  NetworkConfig held = flat(8, 8, 1);
  held.hold_burst = true;
  NetworkConfig block;
  block.kind = TopologyKind::BuildingBlock;
  block.n = 8;
  block.r = 2;
  const Case cases[] = {
      {flat(8, 8, 2), {}, BurstKind::Mixed},         {drop, {}, BurstKind::Burst4},
      {dsmc_cfg(8), {true, true, 4}, BurstKind::Mixed}, {deep, {true, false, 4}, BurstKind::Burst8},
      {windowed, {false, true, 4}, BurstKind::Burst16}, {held, {}, BurstKind::Burst4},
      {block, {false, true, 4}, BurstKind::Burst8},
  };
  for (const auto& c : cases) {
    TrafficPattern t;
    t.kind = c.kind;
    t.injection_rate = 0.8;
    Simulation sim(c.cfg, c.pol, t, 100);
    sim.set_check_invariants(true);
    std::set<std::int64_t> retired;
    bool dup = false;
    sim.set_beat_observer([&](const Beat& b) { dup = dup || !retired.insert(b.id).second; });
    CHECK_NOTHROW(sim.run_cycles(3000));
    CHECK_FALSE(dup);
    const SimStats s = sim.finish();
    CHECK(s.beats_generated == s.beats_served_total + s.beats_in_flight + s.beats_dropped + s.beats_pending_at_source);
    CHECK(s.served_beats[0] + s.served_beats[1] > 0);
    std::uint64_t busy = 0;
    for (auto x : s.per_bank_busy) busy += x;
    CHECK(busy == (s.served_beats[0] + s.served_beats[1]) * static_cast<std::uint64_t>(c.cfg.bank_latency));
    for (const auto& [key, h] : s.latency) {
      if (!h.empty()) CHECK(h.min() >= s.min_path_latency);
    }
  }
}

TEST_CASE("identical seeds give identical stats") {
  TrafficPattern t;
  t.kind = BurstKind::Mixed;
  const auto a = run(dsmc_cfg(8), {true, true, 77}, t, 3000, 500);
  const auto b = run(dsmc_cfg(8), {true, true, 77}, t, 3000, 500);
  const auto c = run(dsmc_cfg(8), {true, true, 78}, t, 3000, 500);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("fractal bursts never share a bank") {
  TrafficPattern t;
  t.kind = BurstKind::Burst16;
  t.address = AddressDistribution::LinearSequential;
  const auto on = run(dsmc_cfg(16), {true, true, 3}, t, 4000, 0);
  CHECK(on.intra_burst_bank_conflicts == 0);
  const auto off = run(dsmc_cfg(16), {false, false, 3}, t, 4000, 0);
  CHECK(off.intra_burst_bank_conflicts > 0);
}

TEST_CASE("fractal needs enough banks") {
  TrafficPattern t;
  t.kind = BurstKind::Burst16;
  CHECK_THROWS_AS(Simulation(flat(4, 4, 2), {false, true, 1}, t, 0), std::invalid_argument);
  CHECK_NOTHROW(Simulation(flat(4, 8, 2), {false, true, 1}, t, 0));
  CHECK_THROWS_AS(Simulation(flat(4, 4, 1), {true, false, 1}, t, 0), std::invalid_argument);
}

TEST_CASE("config validation") {
  NetworkConfig c = dsmc_cfg(16);
  c.r = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = flat(4, 4, 1);
  c.read_window = 8;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.read_window = 0;
  c.hold_burst = true;
  c.source = SourcePolicy::Drop;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run(flat(4, 4, 1), {}, TrafficPattern{}, 100, 100), std::invalid_argument);
  CHECK_THROWS_AS(run(flat(4, 4, 1), {}, TrafficPattern{}, 0, 0), std::invalid_argument);
  CHECK(parse_source_policy("drop") == SourcePolicy::Drop);
  CHECK_THROWS_AS(parse_source_policy("x"), std::invalid_argument);
}

TEST_CASE("read window bounds outstanding reads") {
  NetworkConfig c = dsmc_cfg(8);
  c.read_window = 16;
  c.bank_latency = 4;
  TrafficPattern t;
  t.kind = BurstKind::Burst16;
  t.read_fraction = 1.0;
  Simulation sim(c, {true, true, 1}, t, 0);
  sim.run_cycles(2000);
  const auto limited = sim.finish();
  c.read_window = 0;
  const auto free = run(c, {true, true, 1}, t, 2000, 0);
  CHECK(throughput(limited) < throughput(free));
}

TEST_CASE("flat drop model tracks the closed form") {
  NetworkConfig c = flat(8, 8, 1);
  c.source = SourcePolicy::Drop;
  TrafficPattern t;
  t.injection_rate = 0.5;
  const auto s = run(c, {false, false, 12}, t, 21000, 1000);
  CHECK(std::abs(bank_utilization(s).mean - analytic::bank_utilization_flat({8, 8, 1, 0.5})) < 0.02);
}

TEST_CASE("trace lines") {
  std::ostringstream os;
  Simulation sim(flat(2, 2, 1), {}, silent(), 0);
  sim.set_trace(&os);
  sim.offer_transaction(0, {1, AccessKind::Write, 1});
  sim.run_cycles(3);
  CHECK(os.str() == "0 0 M0 inject\n1 0 B1 served\n");
}
