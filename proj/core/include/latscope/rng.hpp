#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace latscope {

// Counter-based generator (Philox4x32-10). Streams are independent for
// distinct (seed, stream) pairs, so parallel trials can draw from
// substream(seed, trial) and results do not depend on the worker count.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 random bits.
  double uniform01();

  // Standard normal via Box-Muller.
  double normal();

  // Advance the counter without generating output.
  void skip(std::uint64_t blocks);

 private:
  void refill();

  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> out_;
  int out_pos_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

inline Philox substream(std::uint64_t seed, std::uint64_t index) {
  return Philox(seed, index);
}

// Halton point, radical-inverse bases 2,3,5,...,19. dim must be <= 8.
std::vector<double> halton_point(std::uint64_t index, int dim);

// Seed resolution: explicit value wins, then the LATSCOPE_SEED environment
// variable, then the fallback.
std::uint64_t resolve_seed(const std::uint64_t* explicit_seed,
                           std::uint64_t fallback = 0);

}  // namespace latscope
