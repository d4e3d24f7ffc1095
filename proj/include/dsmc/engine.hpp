#pragma once

// Synchronous cycle-level simulator of beats flowing through a Topology.
//
// Each cycle is evaluated from the state at the start of the cycle and then
// committed as a whole:
//   1. every node picks, per output, one winner among the input heads routed
//      to it (uniform random, per-node stream);
//   2. slave ports keep up to r of their arriving winners (uniform random) and
//      each bank accepts at most one of the kept beats when it is free;
//   3. remaining moves are resolved downstream first, so a register that is
//      being emptied this cycle can be refilled in the same cycle;
//   4. masters inject into their register when it has room.
// Back-pressured beats stay where they are and retry next cycle.
//
// Latency contract for an uncontended beat: bank acceptance happens `hops +
// slices` cycles after injection (the master register counts as one hop), a
// write completes bank_latency cycles later, and a read additionally travels a
// mirrored, uncontended return path of the same length.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsmc/metrics.hpp"
#include "dsmc/rng.hpp"
#include "dsmc/topology.hpp"
#include "dsmc/traffic.hpp"

namespace dsmc {

// What a master does with a beat its register could not forward.
enum class SourcePolicy {
  Retry,  // keep it and retry (back-pressure)
  Drop,   // discard it; matches the memoryless contention model
};

std::string to_string(SourcePolicy p);
SourcePolicy parse_source_policy(const std::string& text);

struct SlicePlanSpec {
  int all = 0;                     // on every link
  int speedup = 0;                 // on inter-block speed-up links
  std::map<int, int> after_stage;  // on links leaving switch stage s

  bool operator==(const SlicePlanSpec&) const = default;
};

struct NetworkConfig {
  TopologyKind kind = TopologyKind::FlatCrossbar;
  int n = 16;  // masters (flat) or masters per block (block, dsmc)
  int k = 16;  // slave ports, flat only
  int r = 1;   // banks per slave port (flat) or speed-up (block, dsmc)
  int buffer_depth = 1;
  int bank_latency = 1;
  SlicePlanSpec slices;
  SourcePolicy source = SourcePolicy::Retry;
  // Read beats a master may have outstanding; 0 means unlimited.
  int read_window = 0;
  // Flat crossbar only: a slave port serves one burst at a time.
  bool hold_burst = false;

  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

Topology make_topology(const NetworkConfig& cfg);

struct RandomizationPolicy {
  bool directed = false;  // even/odd beats to local/sister block
  bool fractal = false;   // round-robin spread of a burst's beats over banks
  std::uint64_t rng_seed = 1;

  bool operator==(const RandomizationPolicy&) const = default;
};

struct Beat {
  std::int64_t id = 0;
  int master = 0;
  std::int64_t burst_id = 0;
  int beat_index = 0;
  int burst_len = 1;
  AccessKind kind = AccessKind::Read;
  int target_bank = 0;
  std::int64_t inject_cycle = 0;
  std::optional<std::int64_t> complete_cycle;
  int txn_slot = -1;
};

// Uniform choice of min(|contenders|, capacity) of contenders without
// replacement. Returns indices into contenders; granted keeps draw order.
struct Arbitration {
  std::vector<int> granted;
  std::vector<int> stalled;
};
Arbitration arbitrate(int contenders, int capacity, Rng& rng);

// Keep-r slave port followed by one-per-bank service. `banks` holds the target
// bank slot (0..r-1) of each contender; `bank_free[j]` tells whether bank slot
// j can accept this cycle. Returns the accepted contender indices.
std::vector<int> serve_slave_port(std::span<const int> banks, int capacity, std::span<const char> bank_free, Rng& rng);

// Directed randomization: side (0 = local block, 1 = sister block) of each beat
// of a burst whose first beat lands on `first_side`.
std::vector<int> apply_directed_randomization(int burst_len, int num_blocks, int first_side = 0);

// Round-robin bank spreading inside one block. One counter per (origin
// switch, destination block); a burst reserves consecutive counter values so
// its beats land on pairwise distinct banks.
class FractalSpreader {
 public:
  FractalSpreader(int counters, int banks_per_block, int ports_per_block, std::uint64_t seed);

  // Banks (within the block, port-major) for `beats` beats entering through
  // `counter`, starting `offset` round-robin positions past the counter.
  std::vector<int> assign(int counter, int beats, int offset = 0);
  // Round-robin position of a port-major in-block bank.
  int position_of(int bank_in_block) const;
  int counter_value(int counter) const { return next_[counter]; }
  // In-block bank for a round-robin position: consecutive positions differ in
  // the lowest routing bit first.
  int spread(int position) const;

 private:
  int banks_;
  int ports_;
  std::vector<int> next_;
};

// Routing decision of one node for a beat; throws RoutingFault when the bank
// cannot be reached from that node.
class RoutingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
int route_beat(const Topology& t, int node, const Beat& beat);

struct StepDelta {
  std::uint64_t moved = 0;     // register-to-register transfers
  std::uint64_t served = 0;    // bank acceptances
  std::uint64_t injected = 0;  // beats entering master registers
  std::uint64_t dropped = 0;
};

class Simulation {
 public:
  Simulation(NetworkConfig cfg, RandomizationPolicy policy, TrafficPattern traffic, std::int64_t warmup);

  // With an injection rate of 0 beats only enter through offer_transaction.
  StepDelta step();
  void run_cycles(std::int64_t cycles);

  // Places a single beat transaction at master m, bypassing the generator.
  // Returns false when the master is busy.
  bool offer_transaction(int master, const TransactionDescriptor& txn);

  // Optional event trace: "cycle beat_id location action".
  void set_trace(std::ostream* os) { trace_ = os; }
  void set_check_invariants(bool on) { check_invariants_ = on; }

  std::int64_t now() const { return now_; }
  const Topology& topology() const { return topo_; }
  const SimStats& stats() const { return stats_; }
  SimStats finish();  // fills end-of-run bookkeeping
  std::uint64_t in_flight() const;
  std::uint64_t pending_at_source() const;
  // Called once per beat when a bank accepts it.
  void set_beat_observer(std::function<void(const Beat&)> f) { observer_ = std::move(f); }

 private:
  struct Buffer {
    std::vector<Beat> ring;
    int head = 0;
    int count = 0;
    int depth = 1;
    int owner = -1;      // node that routes the head (-1 for slices)
    int link = -1;       // slice buffers: link they sit on
    int slice = -1;      // slice index on that link
    int order_key = 0;   // larger is further downstream
    std::string name;
    Beat& front() { return ring[head]; }
    bool empty() const { return count == 0; }
  };
  enum class TargetKind { None, Buffer, Slave };
  struct Target {
    TargetKind kind = TargetKind::None;
    int id = -1;    // buffer id or slave-port node id
  };
  struct Txn {
    std::int64_t burst_id = 0;
    int master = 0;
    AccessKind kind = AccessKind::Read;
    int burst_len = 1;
    int remaining = 0;
    int dropped = 0;
    std::int64_t first_inject = -1;
    std::int64_t last_complete = 0;
    bool measured = false;
  };
  struct MasterState {
    bool active = false;
    TransactionDescriptor txn;
    std::vector<int> banks;
    int next_beat = 0;
    int slot = -1;
    std::int64_t burst_id = 0;
    std::uint64_t sequence = 0;
    int outstanding_reads = 0;
  };

  struct ReadReturn {
    std::int64_t cycle = 0;
    int master = 0;
    bool operator>(const ReadReturn& o) const { return cycle > o.cycle; }
  };

  void build_buffers();
  Target after_link(int link, int from_slice) const;
  void start_transaction(int m, const TransactionDescriptor& d);
  std::vector<int> assign_banks(int m, const TransactionDescriptor& d);
  int remap_in_block(int spread_slot) const;
  int port_major_slot(int bank_in_block) const;
  void accept_at_bank(Beat& b, int bank);
  void finish_beat(Beat& b);
  void push(int buf, const Beat& b);
  Beat pop(int buf);
  void check_conservation() const;
  void trace(std::int64_t beat, const std::string& where, const char* action);

  NetworkConfig cfg_;
  RandomizationPolicy policy_;
  TrafficPattern traffic_;
  TrafficContext traffic_ctx_;
  std::int64_t warmup_;
  Topology topo_;

  std::vector<Buffer> buffers_;
  std::vector<int> process_order_;            // buffer ids, downstream first
  std::vector<std::vector<int>> node_inputs_;  // node -> buffer ids
  std::vector<int> master_buffer_;            // master -> buffer id
  std::vector<std::vector<int>> link_slices_;  // link -> buffer ids
  std::vector<int> link_dst_buffer_;           // link -> input buffer at dst, -1 for slave ports
  std::vector<Rng> node_rng_;
  std::vector<Rng> slave_rng_;
  std::vector<int> slave_index_;  // node id -> slave port ordinal
  std::vector<std::int64_t> bank_busy_until_;
  std::vector<int> bank_hold_;     // hold_burst: burst slot owning each slave port, -1 free
  std::vector<int> path_latency_;  // master * banks + bank
  std::vector<int> origin_counter_;  // master -> fractal counter base
  std::optional<FractalSpreader> fractal_;

  std::vector<MasterState> masters_;
  std::vector<Txn> txns_;
  std::vector<int> free_txns_;
  std::priority_queue<ReadReturn, std::vector<ReadReturn>, std::greater<ReadReturn>> read_returns_;

  SimStats stats_;
  std::int64_t now_ = 0;
  std::int64_t next_beat_id_ = 0;
  std::int64_t next_burst_id_ = 0;
  std::ostream* trace_ = nullptr;
  bool check_invariants_ = false;
  std::function<void(const Beat&)> observer_;

  // scratch
  std::vector<Target> want_;
  std::vector<char> winner_;
  std::vector<char> vacate_;
};

// Runs `cycles` cycles (the first `warmup` are excluded from statistics).
// Throws std::invalid_argument when cycles <= warmup or cycles <= 0.
SimStats run(const NetworkConfig& cfg, const RandomizationPolicy& policy, const TrafficPattern& traffic,
             std::int64_t cycles, std::int64_t warmup = 1000);

}  // namespace dsmc
