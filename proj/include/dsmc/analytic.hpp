#pragma once

// Closed-form contention, utilization and wire-crossing models for
// many-ported shared-memory interconnects.
//
// Symbols: n master ports, k slave ports, r banks per slave port (speed-up),
// p_a per-cycle request probability of a master. There are m = k*r banks.

#include <cstdint>
#include <vector>

namespace dsmc::analytic {

struct ContentionParams {
  int n = 1;
  int k = 1;
  int r = 1;
  double p_a = 1.0;

  // Throws std::domain_error when a field is out of range.
  void validate() const;
};

// P{q}: probability that exactly q of the n masters address one given slave port.
double prob_requests(const ContentionParams& p, int q);

// f_r(q) = r(1 - ((r-1)/r)^q): expected number of distinct banks hit when q
// requests are spread uniformly over r banks. Uses ((r-1)/r)^0 == 1.
double speedup_utilization(int r, int q);

// F(r,q) = (1 - ((r-1)/r)^r) - (1 - ((r-1)/r)^q), for 0 <= q < r.
double correction_term(int r, int q);

// E(k,n,r): expected beats leaving one slave port per cycle under keep-r
// arbitration. Evaluated through the F(r,q) form.
double expected_slave_utilization(const ContentionParams& p);

// Same quantity through the direct sum  sum_{q<r} f_r(q)P{q} + f_r(r)(1 - sum_{q<r} P{q}).
double expected_slave_utilization_direct(const ContentionParams& p);

// E_B(n,r) = E(k,n,r) / r.
double bank_utilization_single(const ContentionParams& p);

// U_B(n,r) = 1 - (((r-1)/r)^r + sum F(r,q)P{q})^r, i.e. 1 - (1 - E_B)^r.
double bank_utilization_dsmc(const ContentionParams& p);

// U_flat = 1 - (1 - p_a/(k r))^n.
double bank_utilization_flat(const ContentionParams& p);

// lim_{n=k->inf} U_flat = 1 - exp(-p_a/r).
double bank_utilization_flat_limit(double p_a, int r);

struct PortUtilizationPoint {
  int r = 1;
  double per_port = 0.0;
};

// Aggregated utilization per master port, E(k,n,r) * k / n, swept over r.
std::vector<PortUtilizationPoint> port_utilization_curve(ContentionParams p, int r_first, int r_last);

// --- wire crossings ------------------------------------------------------

struct BlockCrossings {
  std::int64_t type_a = 0;  // left/right exchange
  std::int64_t type_b = 0;  // master-side self crossings
  std::int64_t type_c = 0;  // slave-side self crossings
  std::int64_t total() const { return type_a + type_b + type_c; }
};

bool is_power_of_two(std::int64_t v);
int log2_exact(std::int64_t v);

// C(n,2) * C(k,2): crossings of a flat n x k crossbar drawn between two columns.
std::int64_t crossings_flat(std::int64_t n, std::int64_t k);

// Crossings inside one block of a stage whose two crossbars have g ports each.
BlockCrossings stage_block_crossings(std::int64_t g);

// Number of independent blocks at stage i of an n-port 2-ary network: n / 2^(i+1).
std::int64_t stage_block_count(std::int64_t n, int stage);

// n * sum_{i=1}^{log2 n - 1} (3*2^i - 4) / 8.
std::int64_t crossings_2ary(std::int64_t n);

// Same total, summed stage by stage from stage_block_crossings.
std::int64_t crossings_2ary_by_stage(std::int64_t n);

// n * sum_{i=1}^{log2 n - 1} (3*2^i - 4) / 2 - 3n/4, as printed; not rounded.
double crossings_2ary_speedup(std::int64_t n);

// 2 [2n + 4 sum_{i=1}^{n/8-1} (n - 8i)] + n/2, as printed; not rounded.
double crossings_between_blocks(std::int64_t n);

// R = n(2n-1)^2 / [sum (3*2^i - 4) + 8 sum (1 - 8i/n) + 3].
double crossing_reduction_ratio(std::int64_t n);

// R through the first form: crossings_flat(2n,2n) / (2 C_speedup + C_between).
double crossing_reduction_ratio_from_counts(std::int64_t n);

}  // namespace dsmc::analytic
