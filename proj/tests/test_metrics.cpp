#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dsmc/engine.hpp"
#include "dsmc/metrics.hpp"

using namespace dsmc;

TEST_CASE("histogram moments") {
  Histogram h;
  for (int v : {2, 4, 4, 4, 5, 5, 7, 9}) h.add(v);
  CHECK(h.count() == 8);
  CHECK(h.mean() == doctest::Approx(5.0));
  // sample sd = sqrt(32/7)
  CHECK(h.standard_error() == doctest::Approx(std::sqrt(32.0 / 7.0) / std::sqrt(8.0)));
  CHECK(h.min() == 2);
  CHECK(h.max() == 9);
  CHECK(h.percentile(0.5) == 4);
  CHECK(h.percentile(0.99) == 9);
  CHECK(h.percentile(0.0) == 2);
  Histogram one;
  one.add(3);
  CHECK(one.standard_error() == 0.0);
}

TEST_CASE("histogram merge is associative and commutative") {
  Histogram a, b, c;
  a.add(1, 3);
  b.add(10);
  b.add(2);
  c.add(7, 5);
  Histogram ab_c = a, a_bc = a, cb = c;
  ab_c.merge(b);
  ab_c.merge(c);
  Histogram bc = b;
  bc.merge(c);
  a_bc.merge(bc);
  CHECK(ab_c == a_bc);
  cb.merge(b);
  cb.merge(a);
  CHECK(cb == ab_c);
}

TEST_CASE("throughput and utilization") {
  SimStats s;
  s.measured_cycles = 100;
  s.master_count = 4;
  s.bank_count = 2;
  s.per_bank_busy = {0, 0};
  CHECK(throughput(s) == 0.0);
  s.served_beats = {300, 100};
  s.per_bank_busy = {100, 50};
  CHECK(throughput(s) == doctest::Approx(1.0));
  CHECK(throughput(s, AccessKind::Read) == doctest::Approx(0.75));
  const auto u = bank_utilization(s);
  CHECK(u.per_bank[1] == doctest::Approx(0.5));
  CHECK(u.mean == doctest::Approx(0.75));
  SimStats empty;
  CHECK_THROWS_AS(throughput(empty), MetricsError);
  CHECK_THROWS_AS(average_latency(s, AccessKind::Read), MetricsError);
}

TEST_CASE("comparison") {
  CHECK(relative_delta(0.9, 0.75) == doctest::Approx(0.2));
  CHECK(relative_delta(0.0, 0.0) == 0.0);
  TrafficPattern t;
  t.kind = BurstKind::Burst4;
  NetworkConfig c;
  c.kind = TopologyKind::FlatCrossbar;
  c.n = 8;
  c.k = 8;
  const SimStats a = run(c, {false, false, 1}, t, 2000, 100);
  const Comparison same = compare(a, a);
  REQUIRE_FALSE(same.rows.empty());
  for (const auto& r : same.rows) CHECK(r.relative_delta == 0.0);
  CHECK(same.header.find("WARNING") == std::string::npos);
  const SimStats b = run(c, {false, false, 1}, t, 3000, 100);
  CHECK(compare(a, b).header.find("WARNING") != std::string::npos);
}

TEST_CASE("stats merge sums counts") {
  TrafficPattern t;
  NetworkConfig c;
  c.n = 4;
  c.k = 4;
  const SimStats a = run(c, {false, false, 1}, t, 1000, 100);
  const SimStats b = run(c, {false, false, 2}, t, 1000, 100);
  SimStats ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab == ba);
  CHECK(ab.measured_cycles == 1800);
  CHECK(ab.served_beats[0] == a.served_beats[0] + b.served_beats[0]);
}

TEST_CASE("uniform traffic loads banks evenly") {
  NetworkConfig c;
  c.n = 16;
  c.k = 16;
  TrafficPattern t;
  const SimStats s = run(c, {false, false, 8}, t, 20000, 500);
  const auto u = bank_utilization(s);
  // Busy counts are roughly binomial per bank over the window.
  const double sigma = std::sqrt(u.mean * (1 - u.mean) / static_cast<double>(s.measured_cycles));
  for (double v : u.per_bank) CHECK(std::abs(v - u.mean) < 4 * sigma);
}
