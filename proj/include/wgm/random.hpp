#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace wgm {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Per-stage seed derived from a master seed: splitmix64(master ^ splitmix64(stage)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) noexcept;

// Distribution helpers are written out by hand so that the same seed gives the
// same stream with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t index(std::uint64_t bound);
  bool bernoulli(double p) { return uniform() < p; }
  /// Draws an index with probability proportional to weights (non-negative, positive total).
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wgm
