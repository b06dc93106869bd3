#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "smallcells/model.hpp"
#include "smallcells/rng.hpp"

namespace smallcells {

struct TypicalCell {
  std::vector<double> edge_lengths;
};

struct SampleStreamSpec {
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  // Parallelism hint only; sample i is a pure function of (seed, i, model),
  // so the hint can never change any output value.
  std::uint32_t worker_hint = 1;
};

// Draws the d independent exponential edge lengths of the typical cell.
// Every sample is addressed by (seed, index): two uniforms per Philox
// block, inversion per coordinate, and a reserved retry lane in the
// counter for the measure-zero event of an exact 0.
class CellSampler {
 public:
  CellSampler(const EdgeRates& rates, std::uint64_t seed) : seed_(seed) {
    inv_rates_.reserve(rates.rates.size());
    for (double r : rates.rates) inv_rates_.push_back(1.0 / r);
  }

  int dimension() const { return static_cast<int>(inv_rates_.size()); }

  void sample_into(std::uint64_t index, double* out) const {
    int d = dimension();
    for (int block = 0; 2 * block < d; ++block) {
      rng::Block b = rng::philox4x32(
          seed_, index, rng::counter_hi(rng::kStreamCells, 0,
                                        static_cast<std::uint32_t>(block)));
      int i = 2 * block;
      out[i] = rng::exp_from_u01(rng::u01(b.lo), inv_rates_[i]);
      if (out[i] == 0.0) out[i] = resample_zero(index, i);
      if (i + 1 < d) {
        out[i + 1] = rng::exp_from_u01(rng::u01(b.hi), inv_rates_[i + 1]);
        if (out[i + 1] == 0.0) out[i + 1] = resample_zero(index, i + 1);
      }
    }
  }

  TypicalCell sample(std::uint64_t index) const {
    TypicalCell cell;
    cell.edge_lengths.resize(inv_rates_.size());
    sample_into(index, cell.edge_lengths.data());
    return cell;
  }

 private:
  // Probability 2^-53 per draw; walks the retry lane until nonzero so the
  // all-positive invariant of TypicalCell holds unconditionally.
  double resample_zero(std::uint64_t index, int coordinate) const;

  std::vector<double> inv_rates_;
  std::uint64_t seed_;
};

TypicalCell sample_typical_cell(const EdgeRates& rates, std::uint64_t seed,
                                std::uint64_t index);

std::vector<TypicalCell> sample_stream(const TessellationModel& model,
                                       const SampleStreamSpec& spec);

// Runs fn(worker, begin, end) over [0, count) split into `workers`
// contiguous ranges on std::threads. The split is load-balanced and
// deterministic, and since all our per-index work is pure, the worker
// count never affects results. The first exception thrown by any worker
// is rethrown on the calling thread.
template <class Fn>
void for_each_index_range(std::uint64_t count, std::uint32_t workers, Fn&& fn) {
  workers = std::max<std::uint32_t>(1, workers);
  if (count == 0) return;
  if (workers == 1 || count < 2 * workers) {
    fn(0u, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::uint64_t chunk = count / workers, extra = count % workers, begin = 0;
  for (std::uint32_t w = 0; w < workers; ++w) {
    std::uint64_t end = begin + chunk + (w < extra ? 1 : 0);
    pool.emplace_back([&fn, &first_error, &error_mutex, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// One line of a 2D realization clipped to the window: runs along direction
// `family`'s atom, at signed offset t along that family's unit normal.
struct Segment {
  int family;
  double offset;
  double x0, y0, x1, y1;
};

struct WindowTessellation {
  double win_x0, win_y0, win_x1, win_y1;
  std::vector<Segment> segments;  // sorted by (family, offset)
};

// Realizes the line process inside an axis-aligned window: per family a
// Poisson(gamma * weight * projection length) number of lines, offsets
// uniform over the window's projection onto the family normal. 2D only.
WindowTessellation sample_window_tessellation(const TessellationModel& model,
                                              std::uint64_t seed, double x0,
                                              double y0, double x1, double y1);

}  // namespace smallcells
