#include "dsmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dsmc {

void Histogram::add(std::int64_t value, std::uint64_t times) {
  if (times == 0) return;
  bins_[value] += times;
  count_ += times;
  sum_ += static_cast<__int128>(value) * times;
  sum_sq_ += static_cast<__int128>(value) * value * times;
}

void Histogram::merge(const Histogram& other) {
  for (const auto& [v, c] : other.bins_) bins_[v] += c;
  count_ += other.count_;
  sum_ += other.sum_;
  sum_sq_ += other.sum_sq_;
}

double Histogram::mean() const {
  if (count_ == 0) return 0.0;
  return static_cast<double>(sum_) / static_cast<double>(count_);
}

double Histogram::standard_error() const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double m = mean();
  const double var = (static_cast<double>(sum_sq_) - n * m * m) / (n - 1.0);
  return std::sqrt(std::max(var, 0.0) / n);
}

std::int64_t Histogram::min() const {
  if (bins_.empty()) throw std::logic_error("empty histogram");
  return bins_.begin()->first;
}

std::int64_t Histogram::max() const {
  if (bins_.empty()) throw std::logic_error("empty histogram");
  return bins_.rbegin()->first;
}

std::int64_t Histogram::percentile(double q) const {
  if (bins_.empty()) throw std::logic_error("empty histogram");
  const double target = std::ceil(q * static_cast<double>(count_));
  std::uint64_t seen = 0;
  for (const auto& [v, c] : bins_) {
    seen += c;
    if (static_cast<double>(seen) >= target) return v;
  }
  return bins_.rbegin()->first;
}

namespace {
void add_vectors(std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t i = 0; i < from.size(); ++i) into[i] += from[i];
}
}  // namespace

void SimStats::merge(const SimStats& o) {
  measured_cycles += o.measured_cycles;
  master_count = std::max(master_count, o.master_count);
  bank_count = std::max(bank_count, o.bank_count);
  bank_latency = std::max(bank_latency, o.bank_latency);
  for (int i = 0; i < 2; ++i) {
    injected_beats[i] += o.injected_beats[i];
    served_beats[i] += o.served_beats[i];
    completed_transactions[i] += o.completed_transactions[i];
    beat_latency[i].merge(o.beat_latency[i]);
  }
  add_vectors(per_master_accepted, o.per_master_accepted);
  add_vectors(per_bank_busy, o.per_bank_busy);
  for (const auto& [key, h] : o.latency) latency[key].merge(h);
  beats_generated += o.beats_generated;
  beats_admitted += o.beats_admitted;
  beats_served_total += o.beats_served_total;
  beats_dropped += o.beats_dropped;
  beats_in_flight += o.beats_in_flight;
  beats_pending_at_source += o.beats_pending_at_source;
  intra_burst_bank_conflicts += o.intra_burst_bank_conflicts;
  if (min_path_latency == 0 || (o.min_path_latency != 0 && o.min_path_latency < min_path_latency)) {
    min_path_latency = o.min_path_latency;
  }
}

double throughput(const SimStats& s) {
  if (s.measured_cycles <= 0 || s.master_count <= 0) throw MetricsError("throughput needs a positive measured window");
  return static_cast<double>(s.served_beats[0] + s.served_beats[1]) /
         (static_cast<double>(s.master_count) * static_cast<double>(s.measured_cycles));
}

double throughput(const SimStats& s, AccessKind kind) {
  if (s.measured_cycles <= 0 || s.master_count <= 0) throw MetricsError("throughput needs a positive measured window");
  return static_cast<double>(s.served_beats[static_cast<int>(kind)]) /
         (static_cast<double>(s.master_count) * static_cast<double>(s.measured_cycles));
}

BankUtilization bank_utilization(const SimStats& s) {
  if (s.measured_cycles <= 0) throw MetricsError("bank utilization needs a positive measured window");
  BankUtilization u;
  u.per_bank.reserve(s.per_bank_busy.size());
  double total = 0.0;
  for (std::uint64_t busy : s.per_bank_busy) {
    const double v = static_cast<double>(busy) / static_cast<double>(s.measured_cycles);
    u.per_bank.push_back(v);
    total += v;
  }
  u.mean = u.per_bank.empty() ? 0.0 : total / static_cast<double>(u.per_bank.size());
  return u;
}

Histogram latency_histogram(const SimStats& s, AccessKind kind) {
  Histogram h;
  for (const auto& [key, hist] : s.latency) {
    if (key.first == static_cast<int>(kind)) h.merge(hist);
  }
  return h;
}

Histogram latency_histogram(const SimStats& s) {
  Histogram h;
  for (const auto& [key, hist] : s.latency) h.merge(hist);
  return h;
}

double average_latency(const SimStats& s, AccessKind kind) {
  const Histogram h = latency_histogram(s, kind);
  if (h.empty()) throw MetricsError("no completed " + to_string(kind) + " transactions");
  return h.mean();
}

double relative_delta(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : std::copysign(INFINITY, a);
  return (a - b) / b;
}

Comparison compare(const SimStats& a, const SimStats& b) {
  Comparison c;
  std::ostringstream hdr;
  if (a.measured_cycles != b.measured_cycles || a.master_count != b.master_count || a.bank_count != b.bank_count) {
    hdr << "# WARNING mismatched setups: cycles " << a.measured_cycles << " vs " << b.measured_cycles << ", masters "
        << a.master_count << " vs " << b.master_count << ", banks " << a.bank_count << " vs " << b.bank_count;
  } else {
    hdr << "# cycles=" << a.measured_cycles << " masters=" << a.master_count << " banks=" << a.bank_count;
  }
  c.header = hdr.str();
  auto row = [&](std::string name, double va, double vb) {
    c.rows.push_back({std::move(name), va, vb, relative_delta(va, vb)});
  };
  const double ra = throughput(a, AccessKind::Read), rb = throughput(b, AccessKind::Read);
  const double wa = throughput(a, AccessKind::Write), wb = throughput(b, AccessKind::Write);
  row("read_throughput", ra, rb);
  row("write_throughput", wa, wb);
  row("combined_throughput", ra + wa, rb + wb);
  row("mean_bank_util", bank_utilization(a).mean, bank_utilization(b).mean);
  for (AccessKind k : {AccessKind::Read, AccessKind::Write}) {
    const Histogram ha = latency_histogram(a, k), hb = latency_histogram(b, k);
    if (!ha.empty() && !hb.empty()) row(to_string(k) + "_latency_mean", ha.mean(), hb.mean());
  }
  return c;
}

}  // namespace dsmc
