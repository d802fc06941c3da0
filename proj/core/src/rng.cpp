#include "latscope/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace latscope {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream) {
  key_ = {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32)};
  counter_ = {0, 0, static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32)};
  out_pos_ = 4;
}

void Philox::refill() {
  std::array<std::uint32_t, 4> c = counter_;
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  out_ = c;
  out_pos_ = 0;
  if (++counter_[0] == 0 && ++counter_[1] == 0) {
    ++counter_[2];  // never reached in practice; keeps the counter total
  }
}

std::uint32_t Philox::next_u32() {
  if (out_pos_ >= 4) refill();
  return out_[out_pos_++];
}

std::uint64_t Philox::next_u64() {
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Philox::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1-u1 in (0,1]
  double t = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(t);
  have_cached_normal_ = true;
  return r * std::cos(t);
}

void Philox::skip(std::uint64_t blocks) {
  std::uint64_t lo = counter_[0] + static_cast<std::uint32_t>(blocks);
  bool carry_lo = lo < counter_[0];
  counter_[0] = static_cast<std::uint32_t>(lo);
  std::uint64_t hi = counter_[1] + static_cast<std::uint32_t>(blocks >> 32) +
                     (carry_lo ? 1 : 0);
  counter_[1] = static_cast<std::uint32_t>(hi);
  out_pos_ = 4;
  have_cached_normal_ = false;
}

std::vector<double> halton_point(std::uint64_t index, int dim) {
  static constexpr int kPrimes[8] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (dim < 1 || dim > 8)
    throw std::invalid_argument("halton_point: dim must be in [1,8]");
  std::vector<double> x(dim);
  for (int d = 0; d < dim; ++d) {
    const int b = kPrimes[d];
    double f = 1.0, r = 0.0;
    std::uint64_t i = index + 1;  // skip the origin
    while (i > 0) {
      f /= b;
      r += f * static_cast<double>(i % b);
      i /= b;
    }
    x[d] = r;
  }
  return x;
}

std::uint64_t resolve_seed(const std::uint64_t* explicit_seed,
                           std::uint64_t fallback) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("LATSCOPE_SEED")) {
    try {
      return std::stoull(std::string(env));
    } catch (const std::exception&) {
      return fallback;
    }
  }
  return fallback;
}

}  // namespace latscope
