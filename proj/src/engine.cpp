#include "dsmc/engine.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace dsmc {

std::string to_string(SourcePolicy p) { return p == SourcePolicy::Retry ? "retry" : "drop"; }

SourcePolicy parse_source_policy(const std::string& text) {
  if (text == "retry") return SourcePolicy::Retry;
  if (text == "drop") return SourcePolicy::Drop;
  throw std::invalid_argument("unknown source policy '" + text + "' (expected retry or drop)");
}

void NetworkConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (buffer_depth < 1) throw std::invalid_argument("buffer_depth must be >= 1");
  if (bank_latency < 1) throw std::invalid_argument("bank_latency must be >= 1");
  if (read_window < 0) throw std::invalid_argument("read_window must be >= 0");
  if (read_window > 0 && read_window < 16) {
    throw std::invalid_argument("read_window must be 0 (unlimited) or at least 16 beats, the longest burst");
  }
  if (slices.all < 0 || slices.speedup < 0) throw std::invalid_argument("slice counts must be >= 0");
  for (const auto& [stage, count] : slices.after_stage) {
    if (count < 0) throw std::invalid_argument("slice counts must be >= 0");
    if (stage < 0) throw std::invalid_argument("slice stage must be >= 0");
  }
  switch (kind) {
    case TopologyKind::FlatCrossbar:
      if (k < 1 || r < 1) throw std::invalid_argument("flat crossbar needs k >= 1 and r >= 1");
      break;
    case TopologyKind::BuildingBlock:
      if (r != 1 && r != 2) throw std::invalid_argument("building block speed-up r must be 1 or 2");
      break;
    case TopologyKind::DsmcTwoBlock:
      if (r != 2) throw std::invalid_argument("dsmc uses speed-up r = 2");
      break;
  }
  if (hold_burst && kind != TopologyKind::FlatCrossbar) {
    throw std::invalid_argument("hold_burst applies to the flat crossbar only");
  }
  if (hold_burst && source == SourcePolicy::Drop) {
    throw std::invalid_argument("hold_burst cannot be combined with the drop source policy");
  }
}

Topology make_topology(const NetworkConfig& cfg) {
  cfg.validate();
  Topology t = [&] {
    switch (cfg.kind) {
      case TopologyKind::FlatCrossbar: return build_flat_crossbar(cfg.n, cfg.k, cfg.r);
      case TopologyKind::BuildingBlock: return build_building_block(cfg.n, cfg.r);
      case TopologyKind::DsmcTwoBlock: return build_dsmc(cfg.n);
    }
    throw std::logic_error("bad kind");
  }();
  std::vector<int> plan(t.links().size(), 0);
  auto add = [&](const std::vector<int>& p) {
    for (std::size_t i = 0; i < plan.size(); ++i) plan[i] += p[i];
  };
  if (cfg.slices.all > 0) add(slice_plan_uniform(t, cfg.slices.all));
  if (cfg.slices.speedup > 0) add(slice_plan_speedup(t, cfg.slices.speedup));
  for (const auto& [stage, count] : cfg.slices.after_stage) {
    if (stage == 0) {
      for (std::size_t i = 0; i < plan.size(); ++i) {
        if (t.nodes()[t.links()[i].src.node].kind == NodeKind::Master) plan[i] += count;
      }
    } else {
      add(slice_plan_after_stage(t, stage, count));
    }
  }
  return insert_register_slices(t, plan);
}

Arbitration arbitrate(int contenders, int capacity, Rng& rng) {
  if (capacity < 1) throw std::invalid_argument("arbitration capacity must be >= 1");
  Arbitration a;
  if (contenders <= 0) return a;
  std::vector<int> idx(contenders);
  for (int i = 0; i < contenders; ++i) idx[i] = i;
  if (contenders <= capacity) {
    a.granted = std::move(idx);
    return a;
  }
  for (int i = 0; i < capacity; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(contenders - i)));
    std::swap(idx[i], idx[j]);
  }
  a.granted.assign(idx.begin(), idx.begin() + capacity);
  a.stalled.assign(idx.begin() + capacity, idx.end());
  std::sort(a.stalled.begin(), a.stalled.end());
  return a;
}

std::vector<int> serve_slave_port(std::span<const int> banks, int capacity, std::span<const char> bank_free, Rng& rng) {
  const Arbitration kept = arbitrate(static_cast<int>(banks.size()), capacity, rng);
  std::vector<int> accepted;
  std::vector<int> group;
  for (int j = 0; j < static_cast<int>(bank_free.size()); ++j) {
    if (!bank_free[j]) continue;
    group.clear();
    for (int i : kept.granted) {
      if (banks[i] == j) group.push_back(i);
    }
    if (group.empty()) continue;
    accepted.push_back(group.size() == 1 ? group[0] : group[rng.uniform_index(group.size())]);
  }
  return accepted;
}

std::vector<int> apply_directed_randomization(int burst_len, int num_blocks, int first_side) {
  if (num_blocks != 2) throw std::invalid_argument("directed randomization splits over exactly 2 blocks");
  if (burst_len < 1) throw std::invalid_argument("burst length must be >= 1");
  std::vector<int> side(burst_len);
  for (int i = 0; i < burst_len; ++i) side[i] = (first_side + i) & 1;
  return side;
}

FractalSpreader::FractalSpreader(int counters, int banks_per_block, int ports_per_block, std::uint64_t seed)
    : banks_(banks_per_block), ports_(ports_per_block), next_(counters, 0) {
  if (banks_ < 1 || ports_ < 1 || banks_ % ports_ != 0) throw std::invalid_argument("bad fractal geometry");
  for (int c = 0; c < counters; ++c) {
    Rng rng(seed, StreamDomain::Fractal, static_cast<std::uint64_t>(c));
    next_[c] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(banks_)));
  }
}

int FractalSpreader::spread(int position) const {
  const int p = position % banks_;
  const int per_port = banks_ / ports_;
  return (p % ports_) * per_port + (p / ports_) % per_port;
}

int FractalSpreader::position_of(int bank_in_block) const {
  const int per_port = banks_ / ports_;
  return (bank_in_block % per_port) * ports_ + bank_in_block / per_port;
}

std::vector<int> FractalSpreader::assign(int counter, int beats, int offset) {
  if (beats > banks_) {
    throw std::invalid_argument("burst of " + std::to_string(beats) + " beats exceeds " + std::to_string(banks_) +
                                " distinct banks in a block");
  }
  std::vector<int> out(beats);
  for (int i = 0; i < beats; ++i) out[i] = spread(offset + next_[counter] + i);
  next_[counter] = (next_[counter] + beats) % banks_;
  return out;
}

int route_beat(const Topology& t, int node, const Beat& beat) {
  const int port = t.route(node, beat.target_bank);
  if (port < 0) {
    throw RoutingFault("routing fault: bank " + std::to_string(beat.target_bank) + " unreachable from node " +
                       std::to_string(node) + " (stage " + std::to_string(t.nodes()[node].stage) + ", beat " +
                       std::to_string(beat.id) + ")");
  }
  return port;
}

// ---------------------------------------------------------------------------

namespace {

// Bank ids inside one block in round-robin order: slot c maps to slave-port
// position c % ports and bank c / ports behind it.
int in_block_bank(TopologyKind kind, int position, int ports, int per_port) {
  const int p = position % ports;
  const int j = (position / ports) % per_port;
  if (kind == TopologyKind::BuildingBlock) return j * ports + p;  // stream-major numbering
  return p * per_port + j;
}

}  // namespace

Simulation::Simulation(NetworkConfig cfg, RandomizationPolicy policy, TrafficPattern traffic, std::int64_t warmup)
    : cfg_(std::move(cfg)), policy_(policy), traffic_(traffic), warmup_(warmup), topo_(make_topology(cfg_)) {
  traffic_.validate();
  if (warmup_ < 0) throw std::invalid_argument("warmup must be >= 0");
  if (policy_.directed && topo_.blocks() != 2) {
    throw std::invalid_argument("directed randomization needs a two-block topology");
  }
  const int max_burst = traffic_.kind == BurstKind::Mixed ? 16 : burst_length(traffic_.kind);
  if (policy_.fractal) {
    const int per_block = policy_.directed ? (max_burst + 1) / 2 : max_burst;
    if (per_block > topo_.banks_per_block()) {
      throw std::invalid_argument("fractal randomization: bursts of " + std::to_string(max_burst) +
                                  " beats need more distinct banks than the " +
                                  std::to_string(topo_.banks_per_block()) + " per block");
    }
    if (cfg_.hold_burst) throw std::invalid_argument("hold_burst requires fractal randomization off");
  }

  traffic_ctx_.seed = policy_.rng_seed;
  traffic_ctx_.master_count = topo_.port_count();
  traffic_ctx_.bank_count = topo_.bank_count();

  build_buffers();

  const int nodes = static_cast<int>(topo_.nodes().size());
  node_rng_.reserve(nodes);
  for (int i = 0; i < nodes; ++i) node_rng_.emplace_back(policy_.rng_seed, StreamDomain::Channel, i);
  slave_index_.assign(nodes, -1);
  for (int s = 0; s < static_cast<int>(topo_.slave_ports().size()); ++s) {
    slave_index_[topo_.slave_ports()[s]] = s;
    slave_rng_.emplace_back(policy_.rng_seed, StreamDomain::SlavePort, s);
  }
  bank_busy_until_.assign(topo_.bank_count(), 0);
  bank_hold_.assign(topo_.slave_ports().size(), -1);

  const int masters = topo_.port_count();
  const int banks = topo_.bank_count();
  path_latency_.assign(static_cast<std::size_t>(masters) * banks, 0);
  int min_path = 1 << 30;
  for (int m = 0; m < masters; ++m) {
    for (int b = 0; b < banks; ++b) {
      const auto p = topo_.path(m, b);
      path_latency_[static_cast<std::size_t>(m) * banks + b] = p.hops + p.slices;
      min_path = std::min(min_path, p.hops + p.slices);
    }
  }

  // Fractal counters live at the first routing point a master's beats meet.
  origin_counter_.assign(masters, 0);
  int origins = masters;
  if (topo_.switch_stages() > 0) {
    origins = static_cast<int>(topo_.stages().front().switches.size());
    for (int m = 0; m < masters; ++m) {
      const int l = topo_.out_link(topo_.masters()[m], 0);
      origin_counter_[m] = topo_.nodes()[topo_.links()[l].dst.node].index;
    }
  } else {
    for (int m = 0; m < masters; ++m) origin_counter_[m] = m;
  }
  if (policy_.fractal) {
    const int bpb = topo_.banks_per_block();
    const int ports = topo_.kind() == TopologyKind::FlatCrossbar ? topo_.slave_port_count() : cfg_.n;
    fractal_.emplace(origins * topo_.blocks(), bpb, ports, policy_.rng_seed);
  }

  masters_.assign(masters, MasterState{});
  stats_.master_count = masters;
  stats_.bank_count = banks;
  stats_.bank_latency = cfg_.bank_latency;
  stats_.per_master_accepted.assign(masters, 0);
  stats_.per_bank_busy.assign(banks, 0);
  stats_.min_path_latency = min_path + cfg_.bank_latency;
}

void Simulation::build_buffers() {
  const auto& nodes = topo_.nodes();
  node_inputs_.assign(nodes.size(), {});
  std::vector<std::vector<int>> input_buffer(nodes.size());
  auto make = [&](int depth, int owner, int key, std::string name) {
    Buffer b;
    b.depth = depth;
    b.ring.resize(depth);
    b.owner = owner;
    b.order_key = key;
    b.name = std::move(name);
    buffers_.push_back(std::move(b));
    return static_cast<int>(buffers_.size()) - 1;
  };
  for (int m = 0; m < topo_.port_count(); ++m) {
    const int node = topo_.masters()[m];
    const int id = make(cfg_.buffer_depth, node, 0, "M" + std::to_string(m));
    master_buffer_.push_back(id);
    node_inputs_[node].push_back(id);
  }
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const Node& nd = nodes[i];
    if (nd.kind != NodeKind::Switch) continue;
    input_buffer[i].assign(nd.num_inputs, -1);
    for (int p = 0; p < nd.num_inputs; ++p) {
      const int id = make(cfg_.buffer_depth, i, nd.stage * 1000,
                          "S" + std::to_string(nd.stage) + "." + std::to_string(nd.index) + ".in" + std::to_string(p));
      input_buffer[i][p] = id;
      node_inputs_[i].push_back(id);
    }
  }
  link_slices_.assign(topo_.links().size(), {});
  for (int l = 0; l < static_cast<int>(topo_.links().size()); ++l) {
    const Link& lk = topo_.links()[l];
    const int src_stage = nodes[lk.src.node].stage;
    for (int s = 0; s < lk.slice_count; ++s) {
      const int id = make(1, -1, src_stage * 1000 + 1 + s, "L" + std::to_string(l) + ".s" + std::to_string(s));
      buffers_[id].link = l;
      buffers_[id].slice = s;
      link_slices_[l].push_back(id);
    }
  }
  // Destination of the last hop of each link.
  link_dst_buffer_.assign(topo_.links().size(), -1);
  for (int l = 0; l < static_cast<int>(topo_.links().size()); ++l) {
    const Link& lk = topo_.links()[l];
    if (nodes[lk.dst.node].kind == NodeKind::Switch) link_dst_buffer_[l] = input_buffer[lk.dst.node][lk.dst.port];
  }
  process_order_.resize(buffers_.size());
  for (std::size_t i = 0; i < buffers_.size(); ++i) process_order_[i] = static_cast<int>(i);
  std::stable_sort(process_order_.begin(), process_order_.end(),
                   [&](int a, int b) { return buffers_[a].order_key > buffers_[b].order_key; });
  want_.assign(buffers_.size(), {});
  winner_.assign(buffers_.size(), 0);
  vacate_.assign(buffers_.size(), 0);
}

Simulation::Target Simulation::after_link(int link, int from_slice) const {
  const auto& sl = link_slices_[link];
  if (from_slice + 1 < static_cast<int>(sl.size())) return {TargetKind::Buffer, sl[from_slice + 1]};
  if (link_dst_buffer_[link] >= 0) return {TargetKind::Buffer, link_dst_buffer_[link]};
  return {TargetKind::Slave, topo_.links()[link].dst.node};
}

void Simulation::push(int buf, const Beat& b) {
  Buffer& B = buffers_[buf];
  B.ring[(B.head + B.count) % B.depth] = b;
  ++B.count;
}

Beat Simulation::pop(int buf) {
  Buffer& B = buffers_[buf];
  Beat b = B.ring[B.head];
  B.head = (B.head + 1) % B.depth;
  --B.count;
  return b;
}

void Simulation::trace(std::int64_t beat, const std::string& where, const char* action) {
  if (trace_) *trace_ << now_ << ' ' << beat << ' ' << where << ' ' << action << '\n';
}

std::vector<int> Simulation::assign_banks(int m, const TransactionDescriptor& d) {
  const int len = d.burst_len;
  std::vector<int> banks(len, d.base_bank);
  const int bpb = topo_.banks_per_block();
  const int base_block = topo_.block_of_bank(d.base_bank);
  const int base_in = d.base_bank - base_block * bpb;

  std::vector<int> block(len, base_block);
  if (policy_.directed) {
    const int own = topo_.block_of_master(m);
    const auto side = apply_directed_randomization(len, 2, base_block == own ? 0 : 1);
    for (int i = 0; i < len; ++i) block[i] = side[i] == 0 ? own : 1 - own;
  }
  if (policy_.fractal) {
    for (int blk = 0; blk < topo_.blocks(); ++blk) {
      const int count = static_cast<int>(std::count(block.begin(), block.end(), blk));
      if (count == 0) continue;
      const int offset = fractal_->position_of(port_major_slot(base_in));
      const auto slots = fractal_->assign(origin_counter_[m] * topo_.blocks() + blk, count, offset);
      int used = 0;
      for (int i = 0; i < len; ++i) {
        if (block[i] == blk) banks[i] = blk * bpb + remap_in_block(slots[used++]);
      }
    }
  } else {
    for (int i = 0; i < len; ++i) banks[i] = block[i] * bpb + base_in;
  }
  for (int i = 0; i < len; ++i) {
    for (int j = i + 1; j < len; ++j) {
      if (banks[i] == banks[j]) ++stats_.intra_burst_bank_conflicts;
    }
  }
  return banks;
}

int Simulation::remap_in_block(int spread_slot) const {
  // FractalSpreader numbers slots port-major (port * per_port + j); convert to
  // the topology's in-block bank numbering.
  const int bpb = topo_.banks_per_block();
  const int ports = topo_.kind() == TopologyKind::FlatCrossbar ? topo_.slave_port_count() : cfg_.n;
  const int per_port = bpb / ports;
  const int p = spread_slot / per_port;
  const int j = spread_slot % per_port;
  return in_block_bank(topo_.kind(), p + j * ports, ports, per_port);
}

int Simulation::port_major_slot(int bank_in_block) const {
  const int bpb = topo_.banks_per_block();
  const int ports = topo_.kind() == TopologyKind::FlatCrossbar ? topo_.slave_port_count() : cfg_.n;
  const int per_port = bpb / ports;
  if (topo_.kind() == TopologyKind::BuildingBlock) {
    return (bank_in_block % ports) * per_port + bank_in_block / ports;
  }
  return bank_in_block;
}

void Simulation::start_transaction(int m, const TransactionDescriptor& d) {
  MasterState& ms = masters_[m];
  ms.active = true;
  ms.txn = d;
  ms.next_beat = 0;
  ms.burst_id = next_burst_id_++;
  ms.banks = assign_banks(m, d);
  ++ms.sequence;
  int slot;
  if (!free_txns_.empty()) {
    slot = free_txns_.back();
    free_txns_.pop_back();
  } else {
    slot = static_cast<int>(txns_.size());
    txns_.emplace_back();
  }
  Txn& t = txns_[slot];
  t = Txn{};
  t.burst_id = ms.burst_id;
  t.master = m;
  t.kind = d.kind;
  t.burst_len = d.burst_len;
  t.remaining = d.burst_len;
  ms.slot = slot;
  stats_.beats_generated += static_cast<std::uint64_t>(d.burst_len);
}

bool Simulation::offer_transaction(int master, const TransactionDescriptor& txn) {
  if (master < 0 || master >= topo_.port_count()) throw std::out_of_range("master index");
  if (txn.base_bank < 0 || txn.base_bank >= topo_.bank_count()) throw std::out_of_range("bank index");
  if (masters_[master].active) return false;
  start_transaction(master, txn);
  return true;
}

void Simulation::finish_beat(Beat& b) {
  Txn& t = txns_[b.txn_slot];
  --t.remaining;
  if (b.complete_cycle) t.last_complete = std::max(t.last_complete, *b.complete_cycle);
  if (t.remaining > 0) return;
  if (t.dropped == 0 && t.measured) {
    stats_.latency[{static_cast<int>(t.kind), t.burst_len}].add(t.last_complete - t.first_inject);
    ++stats_.completed_transactions[static_cast<int>(t.kind)];
  }
  free_txns_.push_back(b.txn_slot);
}

void Simulation::accept_at_bank(Beat& b, int bank) {
  const int lat = cfg_.bank_latency;
  bank_busy_until_[bank] = now_ + lat;
  std::int64_t complete = now_ + lat;
  if (b.kind == AccessKind::Read) {
    complete += path_latency_[static_cast<std::size_t>(b.master) * topo_.bank_count() + bank];
    read_returns_.push(ReadReturn{complete, b.master});
  }
  b.complete_cycle = complete;
  ++stats_.beats_served_total;
  if (now_ >= warmup_) {
    const int k = static_cast<int>(b.kind);
    ++stats_.served_beats[k];
    ++stats_.per_master_accepted[b.master];
    stats_.per_bank_busy[bank] += static_cast<std::uint64_t>(lat);
    stats_.beat_latency[k].add(complete - b.inject_cycle);
  }
  trace(b.id, "B" + std::to_string(bank), "served");
  if (observer_) observer_(b);
  finish_beat(b);
}

StepDelta Simulation::step() {
  StepDelta delta;
  const int nbuf = static_cast<int>(buffers_.size());

  while (!read_returns_.empty() && read_returns_.top().cycle <= now_) {
    --masters_[read_returns_.top().master].outstanding_reads;
    read_returns_.pop();
  }

  std::fill(winner_.begin(), winner_.end(), 0);
  std::fill(vacate_.begin(), vacate_.end(), 0);
  for (int i = 0; i < nbuf; ++i) want_[i] = Target{};

  // 1. Output arbitration at every routing node; slices just shift.
  for (int i = 0; i < nbuf; ++i) {
    Buffer& B = buffers_[i];
    if (B.empty() || B.owner >= 0) continue;
    want_[i] = after_link(B.link, B.slice);
    winner_[i] = 1;
  }
  std::vector<std::pair<int, int>> requests;  // (port, buffer)
  for (int node = 0; node < static_cast<int>(node_inputs_.size()); ++node) {
    const auto& ins = node_inputs_[node];
    if (ins.empty()) continue;
    requests.clear();
    for (int bid : ins) {
      if (buffers_[bid].empty()) continue;
      const int port = route_beat(topo_, node, buffers_[bid].front());
      requests.emplace_back(port, bid);
    }
    if (requests.empty()) continue;
    std::stable_sort(requests.begin(), requests.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t s = 0; s < requests.size();) {
      std::size_t e = s;
      while (e < requests.size() && requests[e].first == requests[s].first) ++e;
      const std::size_t pick = e - s == 1 ? s : s + node_rng_[node].uniform_index(e - s);
      const int bid = requests[pick].second;
      const int link = topo_.out_link(node, requests[s].first);
      winner_[bid] = 1;
      want_[bid] = link_slices_[link].empty() ? after_link(link, -1) : Target{TargetKind::Buffer, link_slices_[link][0]};
      s = e;
    }
  }

  // 2. Slave ports: keep-r, then one beat per free bank.
  std::vector<std::vector<int>> at_slave(topo_.slave_ports().size());
  for (int i = 0; i < nbuf; ++i) {
    if (winner_[i] && want_[i].kind == TargetKind::Slave) at_slave[slave_index_[want_[i].id]].push_back(i);
  }
  std::vector<std::pair<int, int>> accepted;  // (buffer, bank)
  for (std::size_t s = 0; s < at_slave.size(); ++s) {
    auto& cont = at_slave[s];
    if (cont.empty()) continue;
    const Node& port = topo_.nodes()[topo_.slave_ports()[s]];
    if (cfg_.hold_burst && bank_hold_[s] >= 0) {
      std::erase_if(cont, [&](int bid) { return buffers_[bid].front().burst_id != bank_hold_[s]; });
      if (cont.empty()) continue;
    }
    const int first_bank = port.banks.front();
    std::vector<int> slots(cont.size());
    for (std::size_t i = 0; i < cont.size(); ++i) slots[i] = buffers_[cont[i]].front().target_bank - first_bank;
    std::vector<char> free(port.banks.size());
    for (std::size_t j = 0; j < port.banks.size(); ++j) free[j] = bank_busy_until_[port.banks[j]] <= now_;
    const int capacity = static_cast<int>(port.banks.size());
    for (int idx : serve_slave_port(slots, capacity, free, slave_rng_[s])) {
      const int bid = cont[idx];
      vacate_[bid] = 1;
      accepted.emplace_back(bid, first_bank + slots[idx]);
      if (cfg_.hold_burst) {
        const Beat& b = buffers_[bid].front();
        bank_hold_[s] = b.beat_index + 1 < b.burst_len ? b.burst_id : -1;
      }
    }
  }

  // 3. Register-to-register moves, downstream first.
  std::vector<std::pair<int, int>> moves;  // (from, to)
  for (int bid : process_order_) {
    if (!winner_[bid] || want_[bid].kind != TargetKind::Buffer) continue;
    const int to = want_[bid].id;
    const Buffer& T = buffers_[to];
    if (T.count - vacate_[to] < T.depth) {
      vacate_[bid] = 1;
      moves.emplace_back(bid, to);
    }
  }

  // 4. Source policy.
  std::vector<int> dropped;
  if (cfg_.source == SourcePolicy::Drop) {
    for (int bid : master_buffer_) {
      if (!buffers_[bid].empty() && !vacate_[bid]) {
        vacate_[bid] = 1;
        dropped.push_back(bid);
      }
    }
  }

  // Commit: take every leaving head out before anything is written.
  std::vector<Beat> moving;
  moving.reserve(moves.size());
  for (const auto& [from, to] : moves) moving.push_back(pop(from));
  std::vector<Beat> served;
  served.reserve(accepted.size());
  for (const auto& [bid, bank] : accepted) served.push_back(pop(bid));
  std::vector<Beat> lost;
  lost.reserve(dropped.size());
  for (int bid : dropped) lost.push_back(pop(bid));

  for (std::size_t i = 0; i < moves.size(); ++i) {
    push(moves[i].second, moving[i]);
    trace(moving[i].id, buffers_[moves[i].second].name, "enter");
  }
  for (std::size_t i = 0; i < accepted.size(); ++i) accept_at_bank(served[i], accepted[i].second);
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    Beat& b = lost[i];
    ++stats_.beats_dropped;
    trace(b.id, buffers_[dropped[i]].name, "dropped");
    ++txns_[b.txn_slot].dropped;
    finish_beat(b);
  }
  delta.moved = moves.size();
  delta.served = accepted.size();
  delta.dropped = dropped.size();

  // 5. Injection.
  for (int m = 0; m < static_cast<int>(masters_.size()); ++m) {
    MasterState& ms = masters_[m];
    if (!ms.active) {
      if (const auto d = next_transaction(traffic_, traffic_ctx_, m, now_, ms.sequence)) start_transaction(m, *d);
    }
    if (!ms.active) continue;
    const int bid = master_buffer_[m];
    if (buffers_[bid].count >= buffers_[bid].depth) continue;
    if (ms.next_beat == 0 && ms.txn.kind == AccessKind::Read && cfg_.read_window > 0) {
      if (ms.outstanding_reads + ms.txn.burst_len > cfg_.read_window) continue;
      ms.outstanding_reads += ms.txn.burst_len;
    }
    Beat b;
    b.id = next_beat_id_++;
    b.master = m;
    b.burst_id = ms.burst_id;
    b.beat_index = ms.next_beat;
    b.burst_len = ms.txn.burst_len;
    b.kind = ms.txn.kind;
    b.target_bank = ms.banks[ms.next_beat];
    b.inject_cycle = now_;
    b.txn_slot = ms.slot;
    if (ms.next_beat == 0) {
      Txn& t = txns_[ms.slot];
      t.first_inject = now_;
      t.measured = now_ >= warmup_;
    }
    push(bid, b);
    trace(b.id, buffers_[bid].name, "inject");
    ++stats_.beats_admitted;
    if (now_ >= warmup_) ++stats_.injected_beats[static_cast<int>(b.kind)];
    ++delta.injected;
    if (++ms.next_beat == ms.txn.burst_len) ms.active = false;
  }

  if (now_ >= warmup_) ++stats_.measured_cycles;
  if (check_invariants_) check_conservation();
  ++now_;
  return delta;
}

void Simulation::run_cycles(std::int64_t cycles) {
  for (std::int64_t c = 0; c < cycles; ++c) step();
}

std::uint64_t Simulation::in_flight() const {
  std::uint64_t n = 0;
  for (const Buffer& b : buffers_) n += static_cast<std::uint64_t>(b.count);
  return n;
}

std::uint64_t Simulation::pending_at_source() const {
  std::uint64_t n = 0;
  for (const MasterState& m : masters_) {
    if (m.active) n += static_cast<std::uint64_t>(m.txn.burst_len - m.next_beat);
  }
  return n;
}

void Simulation::check_conservation() const {
  const std::uint64_t rhs = stats_.beats_served_total + in_flight() + stats_.beats_dropped + pending_at_source();
  if (stats_.beats_generated != rhs) {
    std::ostringstream os;
    os << "beat conservation violated at cycle " << now_ << ": generated " << stats_.beats_generated
       << " != served " << stats_.beats_served_total << " + in flight " << in_flight() << " + dropped "
       << stats_.beats_dropped << " + pending " << pending_at_source();
    throw std::logic_error(os.str());
  }
  if (stats_.beats_admitted != stats_.beats_served_total + in_flight() + stats_.beats_dropped) {
    throw std::logic_error("admitted beats not accounted for");
  }
}

SimStats Simulation::finish() {
  SimStats s = stats_;
  s.beats_in_flight = in_flight();
  s.beats_pending_at_source = pending_at_source();
  return s;
}

SimStats run(const NetworkConfig& cfg, const RandomizationPolicy& policy, const TrafficPattern& traffic,
             std::int64_t cycles, std::int64_t warmup) {
  if (cycles <= 0) throw std::invalid_argument("run needs a positive cycle count");
  if (cycles <= warmup) throw std::invalid_argument("cycles must exceed warmup");
  Simulation sim(cfg, policy, traffic, warmup);
  sim.run_cycles(cycles);
  return sim.finish();
}

}  // namespace dsmc
