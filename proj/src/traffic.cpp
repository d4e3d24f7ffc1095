#include "dsmc/traffic.hpp"

#include <stdexcept>

#include "dsmc/rng.hpp"

namespace dsmc {

std::string to_string(AccessKind k) { return k == AccessKind::Read ? "read" : "write"; }

std::string to_string(BurstKind k) {
  switch (k) {
    case BurstKind::SingleBeat: return "single";
    case BurstKind::Burst2: return "burst2";
    case BurstKind::Burst4: return "burst4";
    case BurstKind::Burst8: return "burst8";
    case BurstKind::Burst16: return "burst16";
    case BurstKind::Mixed: return "mixed";
  }
  return "?";
}

std::string to_string(AddressDistribution a) {
  return a == AddressDistribution::UniformRandomBank ? "uniform" : "sequential";
}

BurstKind parse_burst_kind(const std::string& text) {
  for (BurstKind k : {BurstKind::SingleBeat, BurstKind::Burst2, BurstKind::Burst4, BurstKind::Burst8,
                      BurstKind::Burst16, BurstKind::Mixed}) {
    if (to_string(k) == text) return k;
  }
  if (text == "1") return BurstKind::SingleBeat;
  if (text == "2") return BurstKind::Burst2;
  if (text == "4") return BurstKind::Burst4;
  if (text == "8") return BurstKind::Burst8;
  if (text == "16") return BurstKind::Burst16;
  throw std::invalid_argument("unknown traffic pattern '" + text +
                              "' (expected single, burst2, burst4, burst8, burst16 or mixed)");
}

AddressDistribution parse_address_distribution(const std::string& text) {
  if (text == "uniform") return AddressDistribution::UniformRandomBank;
  if (text == "sequential") return AddressDistribution::LinearSequential;
  throw std::invalid_argument("unknown address distribution '" + text + "' (expected uniform or sequential)");
}

int burst_length(BurstKind k) {
  switch (k) {
    case BurstKind::SingleBeat: return 1;
    case BurstKind::Burst2: return 2;
    case BurstKind::Burst4: return 4;
    case BurstKind::Burst8: return 8;
    case BurstKind::Burst16: return 16;
    case BurstKind::Mixed: break;
  }
  throw std::invalid_argument("mixed traffic has no fixed burst length");
}

void TrafficPattern::validate() const {
  if (!(read_fraction >= 0.0 && read_fraction <= 1.0)) throw std::invalid_argument("read_fraction must lie in [0,1]");
  if (!(injection_rate >= 0.0 && injection_rate <= 1.0)) {
    throw std::invalid_argument("injection_rate must lie in [0,1]");
  }
}

std::optional<TransactionDescriptor> next_transaction(const TrafficPattern& pattern, const TrafficContext& ctx,
                                                      int master, std::int64_t cycle, std::uint64_t sequence) {
  const std::uint64_t key = mix_key(ctx.seed, static_cast<std::uint64_t>(StreamDomain::Traffic),
                                    static_cast<std::uint64_t>(master), static_cast<std::uint64_t>(cycle));
  auto draw = [key](std::uint64_t i) { return splitmix64(key + 0x632be59bd9b4e019ULL * (i + 1)); };

  if (pattern.injection_rate <= 0.0) return std::nullopt;
  if (pattern.injection_rate < 1.0 && unit_from_bits(draw(0)) >= pattern.injection_rate) return std::nullopt;

  TransactionDescriptor t;
  t.burst_len = pattern.kind == BurstKind::Mixed ? kMixedBurstLengths[draw(1) % 5] : burst_length(pattern.kind);
  t.kind = unit_from_bits(draw(2)) < pattern.read_fraction ? AccessKind::Read : AccessKind::Write;
  const auto banks = static_cast<std::uint64_t>(ctx.bank_count);
  if (pattern.address == AddressDistribution::UniformRandomBank) {
    t.base_bank = static_cast<int>(draw(3) % banks);
  } else {
    const std::uint64_t start = static_cast<std::uint64_t>(master) * banks / static_cast<std::uint64_t>(ctx.master_count);
    t.base_bank = static_cast<int>((start + sequence) % banks);
  }
  return t;
}

std::vector<RunDescriptor> sweep_injection(const TrafficPattern& pattern, const std::vector<double>& rates,
                                           std::uint64_t seed) {
  if (rates.empty()) throw std::invalid_argument("injection sweep needs at least one rate");
  std::vector<RunDescriptor> plan;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    RunDescriptor d;
    d.index = i;
    d.pattern = pattern;
    d.pattern.injection_rate = rates[i];
    d.pattern.validate();
    d.seed = seed;
    plan.push_back(d);
  }
  return plan;
}

}  // namespace dsmc
