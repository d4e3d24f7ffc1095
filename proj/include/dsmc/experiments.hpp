#pragma once

// Batches of independent runs. Runs share nothing, may execute on several
// threads, and results always come back in input order.

#include <vector>

#include "dsmc/config.hpp"
#include "dsmc/metrics.hpp"

namespace dsmc {

// warmup + cycles simulated, the last `cycles` measured.
SimStats run_config(const RunConfig& c);

// threads <= 0 uses the hardware concurrency.
std::vector<SimStats> run_all(const std::vector<RunConfig>& runs, int threads);

// One config per sweep rate, in rate order; the config itself if it has none.
std::vector<RunConfig> expand_sweep(const RunConfig& c);

// Burst patterns of the throughput comparison, in report order.
inline constexpr BurstKind kComparePatterns[] = {BurstKind::SingleBeat, BurstKind::Burst2, BurstKind::Burst4,
                                                 BurstKind::Burst8,     BurstKind::Burst16, BurstKind::Mixed};

// Reads and writes measured in separate runs (read_fraction 1 and 0).
struct SplitRun {
  SimStats read;
  SimStats write;
};

// Rows: read/write/combined throughput, mean bank utilization (average of the
// two runs), read and write latency means.
Comparison compare_split(const SplitRun& a, const SplitRun& b);

struct PatternComparison {
  BurstKind pattern;
  SplitRun a;
  SplitRun b;
  Comparison table;
};

std::vector<PatternComparison> compare_patterns(const RunConfig& a, const RunConfig& b, int threads);

}  // namespace dsmc
