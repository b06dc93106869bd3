#pragma once

#include <cmath>
#include <cstdint>

namespace smallcells::rng {

// Philox 4x32-10 counter-based generator. A 128-bit block is a pure
// function of (key, counter), so any sample index can be generated on any
// worker without carrying generator state around. That is what makes the
// sampling streams worker-count invariant and byte-reproducible.

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Block {
  std::uint64_t lo;
  std::uint64_t hi;
};

inline Block philox4x32(std::uint64_t key, std::uint64_t ctr_lo,
                        std::uint64_t ctr_hi) {
  std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
  std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
  std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c0;
    std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c2;
    std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
    std::uint32_t n1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
    std::uint32_t n3 = static_cast<std::uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
  }
  return Block{c0 | (std::uint64_t{c1} << 32), c2 | (std::uint64_t{c3} << 32)};
}

// Counter-space layout. ctr_lo carries the 64-bit sample index; ctr_hi is
// split into a stream tag (which consumer owns the stream), a retry lane
// (resampling of exact zeros at a reserved sub-index), and a block index
// within the sample.
constexpr std::uint64_t counter_hi(std::uint16_t stream_tag,
                                   std::uint32_t retry,
                                   std::uint32_t block) {
  return (std::uint64_t{stream_tag} << 48) |
         (std::uint64_t{retry & 0xFFFFFFu} << 24) | std::uint64_t{block};
}

constexpr std::uint16_t kStreamCells = 0;
constexpr std::uint16_t kStreamWindow = 1;

// 53-bit mantissa uniform in [0, 1).
inline double u01(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Inversion: X = -ln(1-U)/lambda with U in [0,1). log1p keeps precision
// for small U; U can be 0 (maps to 0), which callers resample.
inline double exp_from_u01(double u, double inv_rate) {
  return -std::log1p(-u) * inv_rate;
}

// Sequential stream over Philox blocks, for consumers whose draw count is
// data-dependent (Poisson counts, offsets of window tessellations).
// Deterministic in (seed, stream_id, tag).
class SequenceRng {
 public:
  SequenceRng(std::uint64_t seed, std::uint64_t stream_id, std::uint16_t tag)
      : key_(seed), ctr_lo_(stream_id), tag_(tag) {}

  std::uint64_t next_u64() {
    if (half_) {
      half_ = false;
      return cached_.hi;
    }
    cached_ = philox4x32(key_, ctr_lo_, counter_hi(tag_, 0, block_++));
    half_ = true;
    return cached_.lo;
  }

  double next_u01() { return u01(next_u64()); }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_lo_;
  std::uint16_t tag_;
  std::uint32_t block_ = 0;
  Block cached_{0, 0};
  bool half_ = false;
};

// Knuth's product-of-uniforms Poisson sampler, chunked so the running
// product stays well away from underflow for large means. Exact for any
// finite mean and byte-stable across platforms (std::poisson_distribution
// is not).
inline std::uint64_t poisson(SequenceRng& gen, double mean) {
  std::uint64_t total = 0;
  while (mean > 0) {
    double chunk = mean > 30.0 ? 30.0 : mean;
    mean -= chunk;
    double floor = std::exp(-chunk);
    double prod = 1.0;
    std::uint64_t k = 0;
    for (;;) {
      prod *= gen.next_u01();
      if (prod <= floor) break;
      ++k;
    }
    total += k;
  }
  return total;
}

}  // namespace smallcells::rng
