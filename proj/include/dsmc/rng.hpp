#pragma once

// Seedable, reproducible random streams. Every structural element of a
// simulation (master, switch, slave port) draws from its own stream derived
// from the run seed, so adding an element does not perturb the others.

#include <cstdint>
#include <random>

namespace dsmc {

std::uint64_t splitmix64(std::uint64_t x);

// Hash of (seed, a, b, c) used both for stream derivation and for
// counter-based draws.
std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Uniform double in [0,1) from the top 53 bits of a 64-bit word.
double unit_from_bits(std::uint64_t bits);

enum class StreamDomain : std::uint64_t {
  Master = 1,
  Channel = 2,
  SlavePort = 3,
  Bank = 4,
  Fractal = 5,
  Traffic = 6,
  Test = 7,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t run_seed, StreamDomain domain, std::uint64_t element)
      : engine_(mix_key(run_seed, static_cast<std::uint64_t>(domain), element)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound); bound >= 1. Rejection sampling keeps it
  // unbiased and independent of the standard library's distributions.
  std::uint64_t uniform_index(std::uint64_t bound);

  double uniform() { return unit_from_bits(engine_()); }
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsmc
