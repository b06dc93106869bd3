#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace smallcells {

// Fixed-range histogram: bins are left-closed right-open, except the last
// bin which also includes the upper edge. Out-of-range values land in
// underflow/overflow, so total() always equals the observation count.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  Histogram() = default;
  Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_) {
    if (!(lo < hi))
      throw std::invalid_argument("histogram: requires lo < hi");
    if (bins < 1) throw std::invalid_argument("histogram: requires bins >= 1");
    counts.assign(static_cast<std::size_t>(bins), 0);
  }

  void add(double v) {
    if (std::isnan(v))
      throw std::invalid_argument("histogram: NaN observation");
    if (v < lo) {
      ++underflow;
    } else if (v > hi) {
      ++overflow;
    } else {
      auto bin = static_cast<std::size_t>((v - lo) / (hi - lo) *
                                          static_cast<double>(counts.size()));
      if (bin >= counts.size()) bin = counts.size() - 1;  // v == hi
      ++counts[bin];
    }
  }

  std::uint64_t total() const {
    std::uint64_t t = underflow + overflow;
    for (std::uint64_t c : counts) t += c;
    return t;
  }
};

inline Histogram histogram(std::span<const double> values, double lo,
                           double hi, int bins) {
  Histogram h(lo, hi, bins);
  for (double v : values) h.add(v);
  return h;
}

}  // namespace smallcells
