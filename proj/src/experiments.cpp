#include "dsmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "dsmc/engine.hpp"

namespace dsmc {

SimStats run_config(const RunConfig& c) {
  return run(c.network, c.policy, c.traffic, c.warmup + c.cycles, c.warmup);
}

std::vector<SimStats> run_all(const std::vector<RunConfig>& runs, int threads) {
  std::vector<SimStats> out(runs.size());
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(runs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) out[i] = run_config(runs[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        out[i] = run_config(runs[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<RunConfig> expand_sweep(const RunConfig& c) {
  if (c.rates.empty()) return {c};
  std::vector<RunConfig> out;
  for (double r : c.rates) {
    RunConfig x = c;
    x.rates.clear();
    x.traffic.injection_rate = r;
    out.push_back(std::move(x));
  }
  return out;
}

Comparison compare_split(const SplitRun& a, const SplitRun& b) {
  Comparison c;
  std::ostringstream hdr;
  const bool same = a.read.measured_cycles == b.read.measured_cycles && a.read.master_count == b.read.master_count &&
                    a.read.bank_count == b.read.bank_count;
  if (same) {
    hdr << "# cycles=" << a.read.measured_cycles << " masters=" << a.read.master_count
        << " banks=" << a.read.bank_count;
  } else {
    hdr << "# WARNING mismatched setups: cycles " << a.read.measured_cycles << " vs " << b.read.measured_cycles
        << ", masters " << a.read.master_count << " vs " << b.read.master_count << ", banks " << a.read.bank_count
        << " vs " << b.read.bank_count;
  }
  c.header = hdr.str();
  auto row = [&](const std::string& m, double va, double vb) {
    c.rows.push_back({m, va, vb, relative_delta(va, vb)});
  };
  const double ra = throughput(a.read, AccessKind::Read), rb = throughput(b.read, AccessKind::Read);
  const double wa = throughput(a.write, AccessKind::Write), wb = throughput(b.write, AccessKind::Write);
  row("read_throughput", ra, rb);
  row("write_throughput", wa, wb);
  row("combined_throughput", ra + wa, rb + wb);
  row("mean_bank_util", (bank_utilization(a.read).mean + bank_utilization(a.write).mean) / 2,
      (bank_utilization(b.read).mean + bank_utilization(b.write).mean) / 2);
  const Histogram lra = latency_histogram(a.read, AccessKind::Read), lrb = latency_histogram(b.read, AccessKind::Read);
  const Histogram lwa = latency_histogram(a.write, AccessKind::Write),
                  lwb = latency_histogram(b.write, AccessKind::Write);
  if (!lra.empty() && !lrb.empty()) row("read_latency_mean", lra.mean(), lrb.mean());
  if (!lwa.empty() && !lwb.empty()) row("write_latency_mean", lwa.mean(), lwb.mean());
  return c;
}

std::vector<PatternComparison> compare_patterns(const RunConfig& a, const RunConfig& b, int threads) {
  std::vector<RunConfig> runs;
  for (BurstKind k : kComparePatterns) {
    for (const RunConfig* base : {&a, &b}) {
      for (double rf : {1.0, 0.0}) {
        RunConfig x = *base;
        x.traffic.kind = k;
        x.traffic.read_fraction = rf;
        runs.push_back(x);
      }
    }
  }
  const auto stats = run_all(runs, threads);
  std::vector<PatternComparison> out;
  std::size_t i = 0;
  for (BurstKind k : kComparePatterns) {
    PatternComparison pc{k, {stats[i], stats[i + 1]}, {stats[i + 2], stats[i + 3]}, {}};
    pc.table = compare_split(pc.a, pc.b);
    out.push_back(std::move(pc));
    i += 4;
  }
  return out;
}

}  // namespace dsmc
