#include <array>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dsmc/rng.hpp"
#include "dsmc/traffic.hpp"

using namespace dsmc;

TEST_CASE("injection rate extremes") {
  const TrafficContext ctx{7, 16, 32};
  TrafficPattern idle;
  idle.injection_rate = 0.0;
  TrafficPattern full;
  full.injection_rate = 1.0;
  for (int c = 0; c < 1000; ++c) {
    CHECK_FALSE(next_transaction(idle, ctx, c % 16, c).has_value());
    const auto t = next_transaction(full, ctx, c % 16, c);
    REQUIRE(t.has_value());
    CHECK(t->burst_len == 1);
    CHECK(t->base_bank >= 0);
    CHECK(t->base_bank < 32);
  }
}

TEST_CASE("emission probability follows the rate") {
  const TrafficContext ctx{11, 8, 8};
  TrafficPattern p;
  p.injection_rate = 0.3;
  int hits = 0;
  const int trials = 200000;
  for (int c = 0; c < trials; ++c) hits += next_transaction(p, ctx, c % 8, c / 8).has_value() ? 1 : 0;
  const double sigma = std::sqrt(0.3 * 0.7 / trials);
  CHECK(std::abs(hits / double(trials) - 0.3) < 4 * sigma);
}

TEST_CASE("mixed bursts are equally frequent") {
  const TrafficContext ctx{3, 32, 64};
  TrafficPattern p;
  p.kind = BurstKind::Mixed;
  std::array<int, 17> count{};
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) ++count[next_transaction(p, ctx, i % 32, i / 32)->burst_len];
  for (int len : kMixedBurstLengths) CHECK(std::abs(count[len] / double(draws) - 0.2) < 0.01);
  CHECK(count[1] + count[2] + count[4] + count[8] + count[16] == draws);
}

TEST_CASE("uniform banks pass a chi-square test") {
  const TrafficContext ctx{5, 16, 16};
  TrafficPattern p;
  std::array<double, 16> count{};
  const int draws = 160000;
  for (int i = 0; i < draws; ++i) ++count[next_transaction(p, ctx, i % 16, i / 16)->base_bank];
  double chi2 = 0;
  for (double c : count) chi2 += (c - draws / 16.0) * (c - draws / 16.0) / (draws / 16.0);
  CHECK(chi2 < 37.7);  // 15 degrees of freedom, p = 0.001
}

TEST_CASE("read fraction") {
  const TrafficContext ctx{9, 4, 4};
  TrafficPattern p;
  p.read_fraction = 1.0;
  for (int i = 0; i < 100; ++i) CHECK(next_transaction(p, ctx, 0, i)->kind == AccessKind::Read);
  p.read_fraction = 0.0;
  for (int i = 0; i < 100; ++i) CHECK(next_transaction(p, ctx, 0, i)->kind == AccessKind::Write);
}

TEST_CASE("sequential addresses walk the bank space") {
  const TrafficContext ctx{1, 4, 16};
  TrafficPattern p;
  p.address = AddressDistribution::LinearSequential;
  CHECK(next_transaction(p, ctx, 1, 0, 0)->base_bank == 4);
  CHECK(next_transaction(p, ctx, 1, 9, 1)->base_bank == 5);
  CHECK(next_transaction(p, ctx, 3, 0, 5)->base_bank == 1);
}

TEST_CASE("draws are counter based") {
  const TrafficContext ctx{42, 8, 8};
  TrafficPattern p;
  p.kind = BurstKind::Mixed;
  p.injection_rate = 0.5;
  for (int i = 0; i < 100; ++i) {
    const auto a = next_transaction(p, ctx, 3, 1000 + i);
    const auto b = next_transaction(p, ctx, 3, 1000 + i);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->burst_len == b->burst_len);
      CHECK(a->base_bank == b->base_bank);
      CHECK(a->kind == b->kind);
    }
  }
}

TEST_CASE("pattern parsing and validation") {
  CHECK(parse_burst_kind("burst8") == BurstKind::Burst8);
  CHECK(parse_burst_kind("16") == BurstKind::Burst16);
  CHECK(parse_burst_kind(to_string(BurstKind::Mixed)) == BurstKind::Mixed);
  CHECK_THROWS_AS(parse_burst_kind("burst3"), std::invalid_argument);
  TrafficPattern p;
  p.injection_rate = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.injection_rate = 0.5;
  p.read_fraction = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("injection sweep plan") {
  const auto plan = sweep_injection(TrafficPattern{}, {0.1, 0.5, 1.0}, 77);
  REQUIRE(plan.size() == 3);
  CHECK(plan[1].pattern.injection_rate == 0.5);
  CHECK(plan[2].index == 2);
  CHECK(plan[0].seed == 77);
  CHECK_THROWS_AS(sweep_injection(TrafficPattern{}, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sweep_injection(TrafficPattern{}, {1.2}, 1), std::invalid_argument);
}

TEST_CASE("rng streams") {
  Rng a(1, StreamDomain::Channel, 3), b(1, StreamDomain::Channel, 3), c(1, StreamDomain::Channel, 4);
  CHECK(a.next() == b.next());
  CHECK(a.next() != c.next());
  Rng u(99);
  std::array<int, 3> hist{};
  for (int i = 0; i < 30000; ++i) ++hist[u.uniform_index(3)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
}
