#include "dsmc/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsmc::analytic {

namespace {

// ((r-1)/r)^q with 0^0 == 1.
double keep_ratio_pow(int r, int q) {
  if (q == 0) return 1.0;
  return std::pow(static_cast<double>(r - 1) / static_cast<double>(r), q);
}

double log_choose(int n, int q) {
  return std::lgamma(n + 1.0) - std::lgamma(q + 1.0) - std::lgamma(n - q + 1.0);
}

void require_r(int r) {
  if (r < 1) throw std::domain_error("speed-up r must be >= 1, got " + std::to_string(r));
}

double sum_f_weighted(const ContentionParams& p) {
  double s = 0.0;
  const int top = std::min(p.r - 1, p.n);
  for (int q = 0; q <= top; ++q) s += correction_term(p.r, q) * prob_requests(p, q);
  return s;
}

}  // namespace

void ContentionParams::validate() const {
  if (n < 1) throw std::domain_error("n must be >= 1");
  if (k < 1) throw std::domain_error("k must be >= 1");
  if (r < 1) throw std::domain_error("r must be >= 1");
  if (!(p_a >= 0.0 && p_a <= 1.0)) throw std::domain_error("p_a must lie in [0,1]");
}

double prob_requests(const ContentionParams& p, int q) {
  p.validate();
  if (q < 0 || q > p.n) {
    throw std::domain_error("q=" + std::to_string(q) + " outside [0," + std::to_string(p.n) + "]");
  }
  const double a = p.p_a / p.k;
  // Degenerate endpoints, where the log form would hit log(0).
  if (a == 0.0) return q == 0 ? 1.0 : 0.0;
  if (a == 1.0) return q == p.n ? 1.0 : 0.0;
  const double lp = log_choose(p.n, q) + q * std::log(a) + (p.n - q) * std::log1p(-a);
  return std::exp(lp);
}

double speedup_utilization(int r, int q) {
  require_r(r);
  if (q < 0) throw std::domain_error("q must be >= 0");
  return r * (1.0 - keep_ratio_pow(r, q));
}

double correction_term(int r, int q) {
  require_r(r);
  if (q < 0 || q > r - 1) throw std::domain_error("correction_term needs 0 <= q < r");
  return (1.0 - keep_ratio_pow(r, r)) - (1.0 - keep_ratio_pow(r, q));
}

double expected_slave_utilization(const ContentionParams& p) {
  p.validate();
  return p.r * ((1.0 - keep_ratio_pow(p.r, p.r)) - sum_f_weighted(p));
}

double expected_slave_utilization_direct(const ContentionParams& p) {
  p.validate();
  double below = 0.0;
  double mass_below = 0.0;
  const int top = std::min(p.r - 1, p.n);
  for (int q = 0; q <= top; ++q) {
    const double pq = prob_requests(p, q);
    below += speedup_utilization(p.r, q) * pq;
    mass_below += pq;
  }
  return below + speedup_utilization(p.r, p.r) * (1.0 - mass_below);
}

double bank_utilization_single(const ContentionParams& p) {
  p.validate();
  return 1.0 - keep_ratio_pow(p.r, p.r) - sum_f_weighted(p);
}

double bank_utilization_dsmc(const ContentionParams& p) {
  p.validate();
  const double idle = keep_ratio_pow(p.r, p.r) + sum_f_weighted(p);
  return 1.0 - std::pow(idle, p.r);
}

double bank_utilization_flat(const ContentionParams& p) {
  p.validate();
  const double per_bank = p.p_a / (static_cast<double>(p.k) * p.r);
  // expm1/log1p keep precision for n in the millions.
  return -std::expm1(p.n * std::log1p(-per_bank));
}

double bank_utilization_flat_limit(double p_a, int r) {
  require_r(r);
  return -std::expm1(-p_a / r);
}

std::vector<PortUtilizationPoint> port_utilization_curve(ContentionParams p, int r_first, int r_last) {
  if (r_first < 1 || r_last < r_first) throw std::domain_error("bad r range");
  std::vector<PortUtilizationPoint> out;
  for (int r = r_first; r <= r_last; ++r) {
    p.r = r;
    const double e = expected_slave_utilization(p);
    out.push_back({r, e * p.k / p.n});
  }
  return out;
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::int64_t v) {
  if (!is_power_of_two(v)) throw std::domain_error(std::to_string(v) + " is not a power of two");
  int l = 0;
  while ((std::int64_t{1} << l) < v) ++l;
  return l;
}

std::int64_t crossings_flat(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::domain_error("crossings_flat needs n,k >= 1");
  return (n * (n - 1) / 2) * (k * (k - 1) / 2);
}

BlockCrossings stage_block_crossings(std::int64_t g) {
  if (g < 2 || g % 2 != 0) throw std::domain_error("stage block size g must be even and >= 2");
  return {g * g / 4, g * (g - 2) / 4, g * (g - 2) / 4};
}

std::int64_t stage_block_count(std::int64_t n, int stage) {
  const int l = log2_exact(n);
  if (stage < 1 || stage > l - 1) throw std::domain_error("stage index out of range");
  return n >> (stage + 1);
}

namespace {
void require_butterfly(std::int64_t n, std::int64_t min_n) {
  if (!is_power_of_two(n) || n < min_n) {
    throw std::domain_error("n must be a power of two >= " + std::to_string(min_n) + ", got " +
                            std::to_string(n));
  }
}
}  // namespace

std::int64_t crossings_2ary(std::int64_t n) {
  require_butterfly(n, 4);
  const int l = log2_exact(n);
  std::int64_t eighths = 0;  // n * sum(3*2^i - 4), divided by 8 at the end
  for (int i = 1; i <= l - 1; ++i) eighths += 3 * (std::int64_t{1} << i) - 4;
  return n * eighths / 8;
}

std::int64_t crossings_2ary_by_stage(std::int64_t n) {
  require_butterfly(n, 4);
  const int l = log2_exact(n);
  std::int64_t total = 0;
  for (int i = 1; i <= l - 1; ++i) {
    total += stage_block_count(n, i) * stage_block_crossings(std::int64_t{1} << i).total();
  }
  return total;
}

double crossings_2ary_speedup(std::int64_t n) {
  require_butterfly(n, 4);
  const int l = log2_exact(n);
  // Work in quarters so the -3n/4 term stays exact.
  std::int64_t quarters = 0;
  for (int i = 1; i <= l - 1; ++i) quarters += 2 * n * (3 * (std::int64_t{1} << i) - 4);
  quarters -= 3 * n;
  return static_cast<double>(quarters) / 4.0;
}

double crossings_between_blocks(std::int64_t n) {
  require_butterfly(n, 8);
  std::int64_t inner = 2 * n;
  for (std::int64_t i = 1; i <= n / 8 - 1; ++i) inner += 4 * (n - 8 * i);
  // halves: 2*inner + n/2
  return static_cast<double>(4 * inner + n) / 2.0;
}

double crossing_reduction_ratio(std::int64_t n) {
  require_butterfly(n, 8);
  const int l = log2_exact(n);
  double denom = 3.0;
  for (int i = 1; i <= l - 1; ++i) denom += 3.0 * static_cast<double>(std::int64_t{1} << i) - 4.0;
  for (std::int64_t i = 1; i <= n / 8 - 1; ++i) denom += 8.0 * (1.0 - 8.0 * static_cast<double>(i) / n);
  const double two_n_minus_1 = 2.0 * n - 1.0;
  return n * two_n_minus_1 * two_n_minus_1 / denom;
}

double crossing_reduction_ratio_from_counts(std::int64_t n) {
  require_butterfly(n, 8);
  return static_cast<double>(crossings_flat(2 * n, 2 * n)) /
         (2.0 * crossings_2ary_speedup(n) + crossings_between_blocks(n));
}

}  // namespace dsmc::analytic
