#pragma once

// Stimulus generators. A master that is idle starts a new transaction with
// probability injection_rate per cycle. Draws are counter based: the outcome
// for (seed, master, cycle) does not depend on anything else, so a stimulus
// replays identically whatever the network does.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dsmc {

enum class AccessKind { Read = 0, Write = 1 };
enum class BurstKind { SingleBeat, Burst2, Burst4, Burst8, Burst16, Mixed };
enum class AddressDistribution { UniformRandomBank, LinearSequential };

std::string to_string(AccessKind k);
std::string to_string(BurstKind k);
std::string to_string(AddressDistribution a);
BurstKind parse_burst_kind(const std::string& text);
AddressDistribution parse_address_distribution(const std::string& text);

// Fixed burst length of a non-mixed pattern.
int burst_length(BurstKind k);
inline constexpr int kMixedBurstLengths[] = {1, 2, 4, 8, 16};

struct TrafficPattern {
  BurstKind kind = BurstKind::SingleBeat;
  double read_fraction = 0.5;
  double injection_rate = 1.0;
  AddressDistribution address = AddressDistribution::UniformRandomBank;

  void validate() const;
  bool operator==(const TrafficPattern&) const = default;
};

struct TransactionDescriptor {
  int burst_len = 1;
  AccessKind kind = AccessKind::Read;
  int base_bank = 0;
};

struct TrafficContext {
  std::uint64_t seed = 1;
  int master_count = 1;
  int bank_count = 1;
};

// `sequence` is the number of transactions this master has issued so far; it
// only matters for LinearSequential addressing.
std::optional<TransactionDescriptor> next_transaction(const TrafficPattern& pattern, const TrafficContext& ctx,
                                                      int master, std::int64_t cycle, std::uint64_t sequence = 0);

struct RunDescriptor {
  std::size_t index = 0;
  TrafficPattern pattern;
  std::uint64_t seed = 0;
};

// One run per rate, in the given order, all sharing the base seed so curves
// differ only in load.
std::vector<RunDescriptor> sweep_injection(const TrafficPattern& pattern, const std::vector<double>& rates,
                                           std::uint64_t seed);

}  // namespace dsmc
