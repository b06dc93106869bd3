#pragma once

// Shared test oracles: deliberately straightforward implementations the
// production code is checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "smallcells/functionals.hpp"
#include "smallcells/model.hpp"
#include "smallcells/sampler.hpp"
#include "smallcells/topk.hpp"

namespace testing_oracles {

using namespace smallcells;

// Materialize-everything-and-sort reference for select_k_smallest.
inline std::vector<TopKEntry> topk_by_sorting(const TessellationModel& model,
                                              std::uint64_t seed,
                                              std::uint64_t n,
                                              SizeFunctional functional,
                                              std::uint32_t k) {
  const CellSampler sampler(edge_rates(model), seed);
  const int d = model.dimension;
  const double geometry = functional == SizeFunctional::GeometricArea
                              ? direction_sine(model)
                              : 0.0;
  std::vector<TopKEntry> all;
  all.reserve(n);
  std::vector<double> edges(static_cast<std::size_t>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    sampler.sample_into(i, edges.data());
    all.push_back({cell_size(edges.data(), d, functional, geometry), i,
                   edges});
  }
  std::sort(all.begin(), all.end(), topk_entry_less);
  if (all.size() > k) all.resize(k);
  return all;
}

inline std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) out.push_back(lo * std::exp(step * i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

// Proper segment intersection (shared endpoints count as crossing; good
// enough for measure-zero-free random configurations).
inline bool segments_cross(double ax0, double ay0, double ax1, double ay1,
                           double bx0, double by0, double bx1, double by1) {
  auto orient = [](double ox, double oy, double px, double py, double qx,
                   double qy) {
    const double v = (px - ox) * (qy - oy) - (py - oy) * (qx - ox);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  };
  const int o1 = orient(ax0, ay0, ax1, ay1, bx0, by0);
  const int o2 = orient(ax0, ay0, ax1, ay1, bx1, by1);
  const int o3 = orient(bx0, by0, bx1, by1, ax0, ay0);
  const int o4 = orient(bx0, by0, bx1, by1, ax1, ay1);
  return o1 * o2 <= 0 && o3 * o4 <= 0 && !(o1 == 0 && o2 == 0);
}

}  // namespace testing_oracles
