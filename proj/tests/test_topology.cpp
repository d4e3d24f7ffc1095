#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dsmc/topology.hpp"

using namespace dsmc;

namespace {

int count_speedup(const Topology& t, const std::vector<int>& links) {
  int c = 0;
  for (int l : links) c += t.links()[l].is_speedup ? 1 : 0;
  return c;
}

}  // namespace

TEST_CASE("flat crossbar") {
  const Topology t = build_flat_crossbar(4, 6, 2);
  CHECK(t.port_count() == 4);
  CHECK(t.slave_port_count() == 6);
  CHECK(t.bank_count() == 12);
  CHECK(t.links().size() == 24);
  CHECK(t.fully_connected());
  CHECK(t.slave_port_of_bank(5) == t.slave_ports()[2]);
  for (int m = 0; m < 4; ++m) {
    for (int b = 0; b < 12; ++b) {
      const auto p = t.path(m, b);
      CHECK(p.hops == 1);
      CHECK(p.slices == 0);
      CHECK(p.links.size() == 1);
    }
  }
}

TEST_CASE("building block routes on one destination bit per stage") {
  const int n = 16;
  const Topology t = build_building_block(n, 1);
  CHECK(t.switch_stages() == 4);
  CHECK(t.bank_count() == n);
  CHECK(t.fully_connected());
  for (const Stage& s : t.stages()) CHECK(s.switches.size() == 8);
  for (int m = 0; m < n; ++m) {
    for (int b = 0; b < n; ++b) {
      const auto p = t.path(m, b);
      CHECK(p.hops == 5);
      REQUIRE(p.links.size() == 5);
      // Link i + 1 leaves the stage-(i + 1) switch on output bit i of the slave position.
      for (int s = 1; s <= 4; ++s) {
        CHECK(t.links()[p.links[s]].src.port == ((b >> (s - 1)) & 1));
      }
    }
  }
}

TEST_CASE("building block with speed-up doubles the later stages") {
  const Topology t = build_building_block(8, 2);
  CHECK(t.bank_count() == 16);
  CHECK(t.stages()[0].switches.size() == 4);
  CHECK(t.stages()[1].switches.size() == 8);
  CHECK(t.stages()[2].switches.size() == 8);
  CHECK(t.fully_connected());
  // Every stage-1 switch reaches both streams.
  for (int sw : t.stages()[0].switches) CHECK(t.nodes()[sw].num_outputs == 4);
}

TEST_CASE("two-block dsmc") {
  const Topology t = build_dsmc(16);
  CHECK(t.port_count() == 32);
  CHECK(t.blocks() == 2);
  CHECK(t.bank_count() == 64);
  CHECK(t.banks_per_block() == 32);
  CHECK(t.fully_connected());
  int speedup_links = 0;
  for (const Link& l : t.links()) speedup_links += l.is_speedup ? 1 : 0;
  CHECK(speedup_links == 32);
  for (const int sp : t.slave_ports()) {
    CHECK(t.nodes()[sp].banks.size() == 2);
    CHECK(t.nodes()[sp].num_inputs == 2);
  }
  for (int m = 0; m < 32; ++m) {
    for (int b = 0; b < 64; ++b) {
      const auto p = t.path(m, b);
      CHECK(p.hops == 5);
      const bool remote = t.block_of_bank(b) != t.block_of_master(m);
      CHECK(count_speedup(t, p.links) == (remote ? 1 : 0));
    }
  }
}

TEST_CASE("builds are deterministic") {
  CHECK(build_dsmc(8) == build_dsmc(8));
  CHECK(build_dsmc(8).export_text() == build_dsmc(8).export_text());
  CHECK_FALSE(build_dsmc(8) == build_dsmc(16));
}

TEST_CASE("export text lists every link") {
  const Topology t = build_dsmc(8);
  std::istringstream in(t.export_text());
  std::string line;
  int links = 0, speed = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++links;
    if (line.find("speedup") != std::string::npos) ++speed;
  }
  CHECK(links == static_cast<int>(t.links().size()));
  CHECK(speed == 16);
}

TEST_CASE("register slices") {
  const Topology t = build_dsmc(8);
  const Topology same = insert_register_slices(t, std::vector<int>(t.links().size(), 0));
  CHECK(same == t);
  const Topology one = insert_register_slices(t, slice_plan_uniform(t, 1));
  for (int m = 0; m < 16; m += 5) {
    for (int b = 0; b < 32; b += 7) {
      const auto p = one.path(m, b);
      CHECK(p.slices == static_cast<int>(p.links.size()));
    }
  }
  const Topology sp = insert_register_slices(t, slice_plan_speedup(t, 2));
  CHECK(sp.path(0, 31).slices == 2);  // master 0 is in block 0, bank 31 in block 1
  CHECK(sp.path(0, 0).slices == 0);
  CHECK_THROWS_AS(insert_register_slices(t, {1, 2}), std::invalid_argument);
  std::vector<int> neg(t.links().size(), 0);
  neg[3] = -1;
  CHECK_THROWS_AS(insert_register_slices(t, neg), std::invalid_argument);
}

TEST_CASE("invalid shapes") {
  CHECK_THROWS_AS(build_building_block(12, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_building_block(16, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_dsmc(4), std::invalid_argument);
  CHECK_THROWS_AS(build_flat_crossbar(0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_topology_kind("mesh"), std::invalid_argument);
  CHECK(parse_topology_kind(to_string(TopologyKind::DsmcTwoBlock)) == TopologyKind::DsmcTwoBlock);
}
