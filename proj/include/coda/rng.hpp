#pragma once

// Seeded, stream-indexed random source. A (seed, stream) pair fully
// determines the draw sequence; distinct streams are decorrelated by
// splitmix64 seeding. Gaussians come from a fixed Box-Muller recipe so the
// sequence does not depend on the standard library implementation.

#include <cstdint>
#include <random>

namespace coda {

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream = 0);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (no cached spare).
  double gaussian();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t master_seed_, stream_;
  std::mt19937_64 eng_;
};

}  // namespace coda
