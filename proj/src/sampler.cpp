#include "smallcells/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smallcells {

double CellSampler::resample_zero(std::uint64_t index, int coordinate) const {
  for (std::uint32_t retry = 1; retry < (1u << 24); ++retry) {
    rng::Block b = rng::philox4x32(
        seed_, index,
        rng::counter_hi(rng::kStreamCells, retry,
                        static_cast<std::uint32_t>(coordinate / 2)));
    std::uint64_t word = (coordinate % 2 == 0) ? b.lo : b.hi;
    double x = rng::exp_from_u01(rng::u01(word), inv_rates_[coordinate]);
    if (x != 0.0) return x;
  }
  // 2^24 consecutive zero draws: not reachable with a working generator.
  throw std::logic_error("sampler: retry lane exhausted");
}

TypicalCell sample_typical_cell(const EdgeRates& rates, std::uint64_t seed,
                                std::uint64_t index) {
  return CellSampler(rates, seed).sample(index);
}

std::vector<TypicalCell> sample_stream(const TessellationModel& model,
                                       const SampleStreamSpec& spec) {
  EdgeRates rates = edge_rates(model);
  std::vector<TypicalCell> cells(spec.count);
  CellSampler sampler(rates, spec.seed);
  for_each_index_range(
      spec.count, spec.worker_hint,
      [&](std::uint32_t, std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) cells[i] = sampler.sample(i);
      });
  return cells;
}

namespace {

struct Clip {
  bool hit;
  double x0, y0, x1, y1;
};

// Liang-Barsky clip of the infinite line p + s*u to [x0,x1]x[y0,y1].
Clip clip_line(double px, double py, double ux, double uy, double x0,
               double y0, double x1, double y1) {
  double smin = -1e300, smax = 1e300;
  const double tiny = 1e-14;
  auto axis = [&](double p, double u, double lo, double hi) {
    if (std::fabs(u) < tiny) return p >= lo - 1e-12 && p <= hi + 1e-12;
    double a = (lo - p) / u, b = (hi - p) / u;
    if (a > b) std::swap(a, b);
    smin = std::max(smin, a);
    smax = std::min(smax, b);
    return true;
  };
  if (!axis(px, ux, x0, x1) || !axis(py, uy, y0, y1) || smin > smax)
    return {false, 0, 0, 0, 0};
  return {true, px + smin * ux, py + smin * uy, px + smax * ux,
          py + smax * uy};
}

}  // namespace

WindowTessellation sample_window_tessellation(const TessellationModel& model,
                                              std::uint64_t seed, double x0,
                                              double y0, double x1,
                                              double y1) {
  model.validate();
  if (model.dimension != 2)
    throw std::invalid_argument(
        "window tessellation: only implemented for dimension 2");
  if (!(x1 >= x0) || !(y1 >= y0))
    throw std::invalid_argument("window tessellation: inverted window");

  WindowTessellation out;
  out.win_x0 = x0;
  out.win_y0 = y0;
  out.win_x1 = x1;
  out.win_y1 = y1;

  for (int family = 0; family < 2; ++family) {
    const auto& u = model.atoms[static_cast<std::size_t>(family)].direction;
    double nx = -u[1], ny = u[0];  // unit normal: offsets live on this axis
    // Offsets whose line meets the window = projection of the window onto
    // the normal.
    double lo = 1e300, hi = -1e300;
    for (double cx : {x0, x1})
      for (double cy : {y0, y1}) {
        double t = cx * nx + cy * ny;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    double mean = model.gamma *
                  model.atoms[static_cast<std::size_t>(family)].weight *
                  (hi - lo);
    rng::SequenceRng gen(seed, static_cast<std::uint64_t>(family),
                         rng::kStreamWindow);
    std::uint64_t count = rng::poisson(gen, mean);
    std::vector<double> offsets;
    offsets.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
      offsets.push_back(lo + gen.next_u01() * (hi - lo));
    std::sort(offsets.begin(), offsets.end());
    // Coincident offsets have probability 0; re-draw to keep the
    // pairwise-distinct invariant unconditional.
    for (std::size_t i = 1; i < offsets.size();) {
      if (offsets[i] == offsets[i - 1]) {
        offsets[i] = lo + gen.next_u01() * (hi - lo);
        std::sort(offsets.begin(), offsets.end());
        i = 1;
      } else {
        ++i;
      }
    }
    for (double t : offsets) {
      Clip c = clip_line(t * nx, t * ny, u[0], u[1], x0, y0, x1, y1);
      if (c.hit) out.segments.push_back({family, t, c.x0, c.y0, c.x1, c.y1});
    }
  }
  return out;
}

}  // namespace smallcells
