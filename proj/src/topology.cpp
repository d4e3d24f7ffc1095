#include "dsmc/topology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dsmc/analytic.hpp"

namespace dsmc {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::FlatCrossbar: return "flat";
    case TopologyKind::BuildingBlock: return "block";
    case TopologyKind::DsmcTwoBlock: return "dsmc";
  }
  return "?";
}

TopologyKind parse_topology_kind(const std::string& text) {
  if (text == "flat") return TopologyKind::FlatCrossbar;
  if (text == "block") return TopologyKind::BuildingBlock;
  if (text == "dsmc") return TopologyKind::DsmcTwoBlock;
  throw std::invalid_argument("unknown topology kind '" + text + "' (expected flat, block or dsmc)");
}

namespace {

int insert_bit(int w, int pos, int bit) {
  const int low = w & ((1 << pos) - 1);
  return ((w >> pos) << (pos + 1)) | (bit << pos) | low;
}

int remove_bit(int x, int pos) {
  const int low = x & ((1 << pos) - 1);
  return ((x >> (pos + 1)) << pos) | low;
}

}  // namespace

class TopologyBuilder {
 public:
  explicit TopologyBuilder(TopologyKind kind) { t_.kind_ = kind; }

  int add_node(NodeKind kind, int stage, int index, int block, int stream, int inputs, int outputs) {
    Node n;
    n.kind = kind;
    n.stage = stage;
    n.index = index;
    n.block = block;
    n.stream = stream;
    n.num_inputs = inputs;
    n.num_outputs = outputs;
    t_.nodes_.push_back(std::move(n));
    return static_cast<int>(t_.nodes_.size()) - 1;
  }

  void add_link(int src, int src_port, int dst, int dst_port, bool speedup, int stream) {
    t_.links_.push_back(Link{{src, src_port}, {dst, dst_port}, speedup, stream, 0});
  }

  void set_shape(int masters, int slaves, int speedup, int blocks, int switch_stages) {
    t_.masters_ = masters;
    t_.slaves_ = slaves;
    t_.speedup_ = speedup;
    t_.blocks_ = blocks;
    t_.switch_stages_ = switch_stages;
  }
  void set_slaves(int slaves) { t_.slaves_ = slaves; }
  void add_bank(int node, int bank) { t_.nodes_[node].banks.push_back(bank); }
  void add_stage(Stage s) { t_.stages_.push_back(std::move(s)); }

  Topology finish() {
    t_.finalize();
    return std::move(t_);
  }

 private:
  Topology t_;
};

namespace {

Topology build_blocks(TopologyKind kind, int n, int r, int blocks, bool crossover) {
  if (!analytic::is_power_of_two(n) || n < 4) {
    throw std::invalid_argument("building block size must be a power of two >= 4, got " + std::to_string(n));
  }
  if (r != 1 && r != 2) throw std::invalid_argument("building block speed-up must be 1 or 2");
  const int levels = analytic::log2_exact(n);
  const int half = n / 2;

  TopologyBuilder b(kind);
  b.set_shape(n * blocks, 0, r, blocks, levels);

  std::vector<int> masters(n * blocks);
  for (int blk = 0; blk < blocks; ++blk) {
    for (int m = 0; m < n; ++m) masters[blk * n + m] = b.add_node(NodeKind::Master, 0, blk * n + m, blk, 0, 1, 1);
  }
  // sw[stage][(blk * r + stream) * half + w]; stage 1 only uses stream 0.
  std::vector<std::vector<int>> sw(levels + 1);
  sw[1].assign(blocks * r * half, -1);
  for (int blk = 0; blk < blocks; ++blk) {
    for (int w = 0; w < half; ++w) {
      sw[1][(blk * r) * half + w] = b.add_node(NodeKind::Switch, 1, blk * half + w, blk, 0, 2, 2 * r);
    }
  }
  for (int s = 2; s <= levels; ++s) {
    sw[s].assign(blocks * r * half, -1);
    for (int blk = 0; blk < blocks; ++blk) {
      for (int st = 0; st < r; ++st) {
        for (int w = 0; w < half; ++w) {
          const int slot = (blk * r + st) * half + w;
          sw[s][slot] = b.add_node(NodeKind::Switch, s, slot, blk, st, 2, 2);
        }
      }
    }
  }

  // Slave ports. Standalone: one port per (stream, position), one bank each.
  // Shared (dsmc): one port per (block, position) taking every stream, r banks.
  const bool shared = crossover;
  std::vector<int> slaves;
  auto slave_at = [&](int blk, int st, int p) {
    return shared ? slaves[blk * n + p] : slaves[(blk * r + st) * n + p];
  };
  if (shared) {
    for (int blk = 0; blk < blocks; ++blk) {
      for (int p = 0; p < n; ++p) {
        const int id = b.add_node(NodeKind::SlavePort, levels + 1, blk * n + p, blk, 0, r, 0);
        for (int j = 0; j < r; ++j) b.add_bank(id, (blk * n + p) * r + j);
        slaves.push_back(id);
      }
    }
  } else {
    for (int blk = 0; blk < blocks; ++blk) {
      for (int st = 0; st < r; ++st) {
        for (int p = 0; p < n; ++p) {
          const int idx = (blk * r + st) * n + p;
          const int id = b.add_node(NodeKind::SlavePort, levels + 1, idx, blk, st, 1, 0);
          b.add_bank(id, idx);
          slaves.push_back(id);
        }
      }
    }
  }
  b.set_slaves(static_cast<int>(slaves.size()));

  for (int blk = 0; blk < blocks; ++blk) {
    for (int m = 0; m < n; ++m) b.add_link(masters[blk * n + m], 0, sw[1][(blk * r) * half + (m >> 1)], m & 1, false, 0);
  }
  for (int blk = 0; blk < blocks; ++blk) {
    for (int w = 0; w < half; ++w) {
      const int src = sw[1][(blk * r) * half + w];
      for (int st = 0; st < r; ++st) {
        const bool speed = crossover && st == 1;
        const int target_blk = speed ? 1 - blk : blk;
        for (int o = 0; o < 2; ++o) {
          const int x = insert_bit(w, 0, o);
          if (levels == 1) continue;
          const int dst = sw[2][(target_blk * r + st) * half + remove_bit(x, 1)];
          b.add_link(src, st * 2 + o, dst, (x >> 1) & 1, speed, st);
        }
      }
    }
  }
  for (int s = 2; s <= levels; ++s) {
    for (int blk = 0; blk < blocks; ++blk) {
      for (int st = 0; st < r; ++st) {
        for (int w = 0; w < half; ++w) {
          const int src = sw[s][(blk * r + st) * half + w];
          for (int o = 0; o < 2; ++o) {
            const int x = insert_bit(w, s - 1, o);
            if (s < levels) {
              const int dst = sw[s + 1][(blk * r + st) * half + remove_bit(x, s)];
              b.add_link(src, o, dst, (x >> s) & 1, false, st);
            } else {
              b.add_link(src, o, slave_at(blk, st, x), shared ? st : 0, false, st);
            }
          }
        }
      }
    }
  }

  for (int s = 1; s <= levels; ++s) {
    Stage stage;
    stage.index = s;
    for (int id : sw[s]) {
      if (id >= 0) stage.switches.push_back(id);
    }
    b.add_stage(std::move(stage));
  }
  return b.finish();
}

}  // namespace

Topology build_flat_crossbar(int n, int k, int r) {
  if (n < 1 || k < 1 || r < 1) throw std::invalid_argument("flat crossbar needs n, k, r >= 1");
  TopologyBuilder b(TopologyKind::FlatCrossbar);
  b.set_shape(n, k, r, 1, 0);
  std::vector<int> masters, slaves;
  for (int m = 0; m < n; ++m) masters.push_back(b.add_node(NodeKind::Master, 0, m, 0, 0, 1, k));
  for (int p = 0; p < k; ++p) {
    const int id = b.add_node(NodeKind::SlavePort, 1, p, 0, 0, n, 0);
    for (int j = 0; j < r; ++j) b.add_bank(id, p * r + j);
    slaves.push_back(id);
  }
  for (int m = 0; m < n; ++m) {
    for (int p = 0; p < k; ++p) b.add_link(masters[m], p, slaves[p], m, false, 0);
  }
  b.add_stage(Stage{1, {}, {}});
  return b.finish();
}

Topology build_building_block(int n, int r) {
  return build_blocks(TopologyKind::BuildingBlock, n, r, 1, false);
}

Topology build_dsmc(int n_per_block) {
  if (!analytic::is_power_of_two(n_per_block) || n_per_block < 8) {
    throw std::invalid_argument("dsmc block size must be a power of two >= 8, got " + std::to_string(n_per_block));
  }
  return build_blocks(TopologyKind::DsmcTwoBlock, n_per_block, 2, 2, true);
}

void Topology::finalize() {
  const int nn = static_cast<int>(nodes_.size());
  master_nodes_.clear();
  slave_nodes_.clear();
  for (int i = 0; i < nn; ++i) {
    if (nodes_[i].kind == NodeKind::Master) master_nodes_.push_back(i);
    if (nodes_[i].kind == NodeKind::SlavePort) slave_nodes_.push_back(i);
  }
  out_links_.assign(nn, {});
  in_links_.assign(nn, {});
  for (int i = 0; i < nn; ++i) {
    out_links_[i].assign(nodes_[i].num_outputs, -1);
    in_links_[i].assign(nodes_[i].num_inputs, -1);
  }
  for (int l = 0; l < static_cast<int>(links_.size()); ++l) {
    const Link& lk = links_[l];
    if (out_links_[lk.src.node][lk.src.port] != -1 || in_links_[lk.dst.node][lk.dst.port] != -1) {
      throw std::logic_error("port wired twice");
    }
    out_links_[lk.src.node][lk.src.port] = l;
    in_links_[lk.dst.node][lk.dst.port] = l;
  }
  for (Stage& s : stages_) s.links_out.clear();
  for (int l = 0; l < static_cast<int>(links_.size()); ++l) {
    const Node& src = nodes_[links_[l].src.node];
    const int stage_idx = src.kind == NodeKind::Master ? (switch_stages_ == 0 ? 1 : 0) : src.stage;
    for (Stage& s : stages_) {
      if (s.index == stage_idx) s.links_out.push_back(l);
    }
  }

  int banks = 0;
  for (int id : slave_nodes_) banks += static_cast<int>(nodes_[id].banks.size());
  bank_port_.assign(banks, -1);
  bank_block_.assign(banks, 0);
  for (int id : slave_nodes_) {
    for (int bk : nodes_[id].banks) {
      bank_port_[bk] = id;
      bank_block_[bk] = nodes_[id].block;
    }
  }

  // Reachable banks per node, downstream first.
  std::vector<int> order(nn);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return nodes_[a].stage > nodes_[b].stage; });
  std::vector<std::vector<char>> reach(nn, std::vector<char>(banks, 0));
  route_.assign(static_cast<std::size_t>(nn) * banks, -1);
  for (int id : order) {
    const Node& nd = nodes_[id];
    if (nd.kind == NodeKind::SlavePort) {
      for (int bk : nd.banks) reach[id][bk] = 1;
      continue;
    }
    for (int p = 0; p < nd.num_outputs; ++p) {
      const int l = out_links_[id][p];
      if (l < 0) continue;
      const int dst = links_[l].dst.node;
      for (int bk = 0; bk < banks; ++bk) {
        if (!reach[dst][bk]) continue;
        auto& slot = route_[static_cast<std::size_t>(id) * banks + bk];
        if (slot != -1) throw std::logic_error("bank reachable through two outputs of one node");
        slot = static_cast<std::int16_t>(p);
        reach[id][bk] = 1;
      }
    }
  }
}

int Topology::route(int node, int bank) const {
  if (bank < 0 || bank >= bank_count()) return -1;
  return route_[static_cast<std::size_t>(node) * bank_count() + bank];
}

Topology::PathInfo Topology::path(int master, int bank) const {
  PathInfo info;
  int node = master_nodes_.at(master);
  while (nodes_[node].kind != NodeKind::SlavePort) {
    const int port = route(node, bank);
    if (port < 0) throw std::runtime_error("bank " + std::to_string(bank) + " unreachable");
    const int l = out_links_[node][port];
    info.links.push_back(l);
    info.hops += 1;
    info.slices += links_[l].slice_count;
    node = links_[l].dst.node;
  }
  return info;
}

bool Topology::fully_connected() const {
  for (int m : master_nodes_) {
    for (int bk = 0; bk < bank_count(); ++bk) {
      if (route(m, bk) < 0) return false;
    }
  }
  return !master_nodes_.empty() && bank_count() > 0;
}

std::string Topology::export_text() const {
  std::ostringstream os;
  os << "# kind=" << to_string(kind_) << " masters=" << masters_ << " slave_ports=" << slaves_
     << " speedup=" << speedup_ << " banks=" << bank_count() << "\n";
  for (const Link& l : links_) {
    const Node& s = nodes_[l.src.node];
    const Node& d = nodes_[l.dst.node];
    os << s.stage << ' ' << s.index << ' ' << l.src.port << " -> " << d.stage << ' ' << d.index << ' ' << l.dst.port;
    if (l.is_speedup) os << " speedup";
    if (l.slice_count > 0) os << " slices=" << l.slice_count;
    os << '\n';
  }
  return os.str();
}

Topology insert_register_slices(const Topology& t, const std::vector<int>& plan) {
  if (plan.size() != t.links_.size()) {
    throw std::invalid_argument("slice plan has " + std::to_string(plan.size()) + " entries for " +
                                std::to_string(t.links_.size()) + " links");
  }
  Topology out = t;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i] < 0) throw std::invalid_argument("negative slice count on link " + std::to_string(i));
    out.links_[i].slice_count = plan[i];
  }
  return out;
}

std::vector<int> slice_plan_uniform(const Topology& t, int slices) {
  return std::vector<int>(t.links().size(), slices);
}

std::vector<int> slice_plan_speedup(const Topology& t, int slices) {
  std::vector<int> plan(t.links().size(), 0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (t.links()[i].is_speedup) plan[i] = slices;
  }
  return plan;
}

std::vector<int> slice_plan_after_stage(const Topology& t, int stage, int slices) {
  std::vector<int> plan(t.links().size(), 0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Node& src = t.nodes()[t.links()[i].src.node];
    if (src.kind != NodeKind::Master && src.stage == stage) plan[i] = slices;
  }
  return plan;
}

}  // namespace dsmc
