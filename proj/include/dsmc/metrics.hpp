#pragma once

// Run statistics and the reductions reported from them.

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsmc/traffic.hpp"

namespace dsmc {

// Exact integer histogram of latencies in cycles.
class Histogram {
 public:
  void add(std::int64_t value, std::uint64_t times = 1);
  void merge(const Histogram& other);

  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  double mean() const;
  // Standard error of the mean; 0 with fewer than two samples.
  double standard_error() const;
  std::int64_t min() const;
  std::int64_t max() const;
  // Smallest value v with at least q of the mass at or below v.
  std::int64_t percentile(double q) const;
  const std::map<std::int64_t, std::uint64_t>& bins() const { return bins_; }

  bool operator==(const Histogram&) const = default;

 private:
  std::map<std::int64_t, std::uint64_t> bins_;
  std::uint64_t count_ = 0;
  // Exact integer moments keep merge order-independent.
  __int128 sum_ = 0;
  __int128 sum_sq_ = 0;
};

struct SimStats {
  std::int64_t measured_cycles = 0;
  int master_count = 0;
  int bank_count = 0;
  int bank_latency = 1;

  // Indexed by AccessKind.
  std::array<std::uint64_t, 2> injected_beats{};
  std::array<std::uint64_t, 2> served_beats{};
  std::array<std::uint64_t, 2> completed_transactions{};
  std::vector<std::uint64_t> per_master_accepted;
  std::vector<std::uint64_t> per_bank_busy;

  // Transaction latency (complete of last beat - inject of first beat), keyed
  // by (kind, burst length).
  std::map<std::pair<int, int>, Histogram> latency;
  // Per-beat latency, diagnostics only.
  std::array<Histogram, 2> beat_latency;

  // Whole-run bookkeeping (not windowed).
  std::uint64_t beats_generated = 0;
  std::uint64_t beats_admitted = 0;
  std::uint64_t beats_served_total = 0;
  std::uint64_t beats_dropped = 0;
  std::uint64_t beats_in_flight = 0;
  std::uint64_t beats_pending_at_source = 0;
  std::uint64_t intra_burst_bank_conflicts = 0;
  std::int64_t min_path_latency = 0;

  // Associative and commutative.
  void merge(const SimStats& other);

  bool operator==(const SimStats&) const = default;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Served beats / (masters * measured cycles).
double throughput(const SimStats& s);
double throughput(const SimStats& s, AccessKind kind);

struct BankUtilization {
  std::vector<double> per_bank;
  double mean = 0.0;
};
BankUtilization bank_utilization(const SimStats& s);

// All transactions of `kind` pooled over burst lengths.
Histogram latency_histogram(const SimStats& s, AccessKind kind);
Histogram latency_histogram(const SimStats& s);

// Throws MetricsError when no transaction of that kind completed.
double average_latency(const SimStats& s, AccessKind kind);

struct ComparisonRow {
  std::string metric;
  double value_a = 0.0;
  double value_b = 0.0;
  double relative_delta = 0.0;  // (a - b) / b; 0 when both are 0
};

struct Comparison {
  std::string header;  // notes mismatched measurement setups
  std::vector<ComparisonRow> rows;
};

Comparison compare(const SimStats& a, const SimStats& b);
double relative_delta(double a, double b);

}  // namespace dsmc
