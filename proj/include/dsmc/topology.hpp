#pragma once

// Explicit staged interconnect graphs: the flat crossbar baseline, a single
// 2-ary butterfly building block, and the two-block distributed shared memory
// controller with inter-block speed-up links.
//
// Node stages: masters are stage 0, radix-2 switches are stages 1..S, slave
// ports are stage S+1. A slave port feeds one or more banks. Banks are
// numbered globally.
//
// Butterfly wiring routes least significant bit first: at switch stage s the
// output is bit (s-1) of the destination slave-port position. Between stage s
// and s+1 the wiring only mixes ports inside groups of 2^(s+1) consecutive
// positions, so boundary s has n / 2^(s+1) independent blocks.

#include <cstdint>
#include <string>
#include <vector>

namespace dsmc {

enum class TopologyKind { FlatCrossbar, BuildingBlock, DsmcTwoBlock };

std::string to_string(TopologyKind kind);
TopologyKind parse_topology_kind(const std::string& text);

enum class NodeKind { Master, Switch, SlavePort };

struct Node {
  NodeKind kind = NodeKind::Master;
  int stage = 0;   // 0 masters, 1..S switches, S+1 slave ports
  int index = 0;   // position within its stage, across blocks and streams
  int block = 0;   // building block that owns the node
  int stream = 0;  // parallel stream for doubled stages (0 or 1)
  int num_inputs = 0;
  int num_outputs = 0;
  std::vector<int> banks;  // slave ports only

  bool operator==(const Node&) const = default;
};

struct PortRef {
  int node = -1;
  int port = -1;
  bool operator==(const PortRef&) const = default;
};

struct Link {
  PortRef src;
  PortRef dst;
  bool is_speedup = false;
  int stream = 0;
  int slice_count = 0;

  bool operator==(const Link&) const = default;
};

struct Stage {
  int index = 0;
  std::vector<int> switches;   // node ids
  std::vector<int> links_out;  // link ids leaving this stage

  bool operator==(const Stage&) const = default;
};

class Topology {
 public:
  TopologyKind kind() const { return kind_; }
  int port_count() const { return masters_; }     // master ports n
  int slave_port_count() const { return slaves_; }
  int speedup() const { return speedup_; }
  int blocks() const { return blocks_; }
  int bank_count() const { return static_cast<int>(bank_port_.size()); }
  int switch_stages() const { return switch_stages_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Stage>& stages() const { return stages_; }
  const std::vector<int>& masters() const { return master_nodes_; }
  const std::vector<int>& slave_ports() const { return slave_nodes_; }

  // Link id leaving (node, output port), -1 when unconnected.
  int out_link(int node, int port) const { return out_links_[node][port]; }
  int in_link(int node, int port) const { return in_links_[node][port]; }
  int slave_port_of_bank(int bank) const { return bank_port_[bank]; }
  int block_of_bank(int bank) const { return bank_block_[bank]; }
  int block_of_master(int master) const { return nodes_[master_nodes_[master]].block; }
  int banks_per_block() const { return bank_count() / blocks_; }

  // Output port of `node` on the unique path towards `bank`; -1 if the bank is
  // not reachable from that node.
  int route(int node, int bank) const;

  // Hop count (nodes traversed, master register included) and register slices
  // on the path from master m to bank b.
  struct PathInfo {
    int hops = 0;
    int slices = 0;
    std::vector<int> links;
  };
  PathInfo path(int master, int bank) const;

  // Every bank reachable from every master.
  bool fully_connected() const;

  // One line per link: "src_stage src_index src_port -> dst_stage dst_index dst_port [speedup] [slices=N]".
  std::string export_text() const;

  bool operator==(const Topology&) const = default;

  friend class TopologyBuilder;
  friend Topology insert_register_slices(const Topology& t, const std::vector<int>& plan);

 private:
  void finalize();

  TopologyKind kind_ = TopologyKind::FlatCrossbar;
  int masters_ = 0;
  int slaves_ = 0;
  int speedup_ = 1;
  int blocks_ = 1;
  int switch_stages_ = 0;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<Stage> stages_;
  std::vector<int> master_nodes_;
  std::vector<int> slave_nodes_;
  std::vector<std::vector<int>> out_links_;
  std::vector<std::vector<int>> in_links_;
  std::vector<int> bank_port_;
  std::vector<int> bank_block_;
  // route_[node * bank_count + bank]
  std::vector<std::int16_t> route_;
};

// Every master wired to every slave port; slave port p feeds banks p*r..p*r+r-1.
Topology build_flat_crossbar(int n, int k, int r);

// log2(n) stages of radix-2 switches. With r == 2 the stages after the first
// are duplicated as two independent streams; stream s delivers to its own n
// banks, so n*r banks are reachable.
Topology build_building_block(int n, int r);

// Two r=2 building blocks whose first-stage stream-1 outputs cross over to the
// sister block's second stage. Slave port p of a block takes one link from
// each stream and feeds 2 banks shared by both.
Topology build_dsmc(int n_per_block);

// Copy of t with slice counts replaced by plan (one entry per link).
Topology insert_register_slices(const Topology& t, const std::vector<int>& plan);

// Plan helpers.
std::vector<int> slice_plan_uniform(const Topology& t, int slices);
std::vector<int> slice_plan_speedup(const Topology& t, int slices);
std::vector<int> slice_plan_after_stage(const Topology& t, int stage, int slices);

}  // namespace dsmc
