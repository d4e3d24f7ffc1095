#pragma once

// Run configuration files.
//
// Grammar (one item per line, '#' starts a comment):
//   [section]
//   key = value
// Sections and keys:
//   [topology]      kind = flat|block|dsmc, n, k, r, buffer_depth, bank_latency,
//                   source = retry|drop, read_window, hold_burst = true|false
//   [slices]        all, speedup, stage<S> (slices on links leaving stage S;
//                   stage0 means the master links)
//   [traffic]       pattern = single|burst2|burst4|burst8|burst16|mixed,
//                   read_fraction, injection_rate, address = uniform|sequential
//   [randomization] directed, fractal
//   [run]           cycles (measured), warmup, seed, threads
//   [sweep]         rates = comma separated list
//   [output]        label, csv, svg
// Mixed traffic draws each burst length with equal probability per
// transaction (equal transaction counts, not equal beat counts).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsmc/engine.hpp"
#include "dsmc/traffic.hpp"

namespace dsmc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  NetworkConfig network;
  RandomizationPolicy policy;
  TrafficPattern traffic;
  std::int64_t cycles = 100000;  // measured cycles, after warmup
  std::int64_t warmup = 1000;
  int threads = 0;  // 0: hardware concurrency
  std::vector<double> rates;
  std::string label;
  std::string csv_path;
  std::string svg_path;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Normalized text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

// FNV-1a over the normalized simulation settings (seed and output excluded).
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

}  // namespace dsmc
