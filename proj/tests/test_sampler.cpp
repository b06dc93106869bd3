#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "smallcells/experiments.hpp"
#include "smallcells/model.hpp"
#include "smallcells/rng.hpp"
#include "smallcells/sampler.hpp"

using namespace smallcells;

namespace {

TessellationModel model_60deg() {
  TessellationModel m;
  m.dimension = 2;
  m.gamma = 2.0;
  m.atoms = {{{1.0, 0.0}, 0.3}, {{0.5, std::sqrt(3.0) / 2.0}, 0.7}};
  return m;
}

std::vector<double> coordinate_samples(const TessellationModel& model,
                                       std::uint64_t seed, std::uint64_t n,
                                       int coordinate) {
  const CellSampler sampler(edge_rates(model), seed);
  std::vector<double> edges(static_cast<std::size_t>(model.dimension));
  std::vector<double> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    sampler.sample_into(i, edges.data());
    out.push_back(edges[static_cast<std::size_t>(coordinate)]);
  }
  return out;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("Philox 4x32-10 reproduces the published reference vectors") {
  // Counter/key word order follows the reference implementation: the three
  // canonical vectors (zero, all-ones, pi-digits) pin every round constant.
  rng::Block b = rng::philox4x32(0, 0, 0);
  CHECK(b.lo == 0xe169c58d6627e8d5ull);
  CHECK(b.hi == 0x9b00dbd8bc57ac4cull);

  b = rng::philox4x32(0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull,
                      0xFFFFFFFFFFFFFFFFull);
  CHECK(b.lo == 0x41c83b0e408f276dull);
  CHECK(b.hi == 0x6d5451fda20bc7c6ull);

  b = rng::philox4x32(0x299f31d0a4093822ull, 0x85a308d3243f6a88ull,
                      0x0370734413198a2eull);
  CHECK(b.lo == 0x94fdccebd16cfe09ull);
  CHECK(b.hi == 0x24126ea15001e420ull);
}

TEST_CASE("u01 stays inside [0, 1) even at the extremes") {
  CHECK(rng::u01(0) == 0.0);
  CHECK(rng::u01(0xFFFFFFFFFFFFFFFFull) < 1.0);
  CHECK(rng::u01(0xFFFFFFFFFFFFFFFFull) > 0.9999999999999998);
  // A zero uniform maps to a zero exponential; the sampler's retry lane
  // exists exactly for that case.
  CHECK(rng::exp_from_u01(rng::u01(0), 1.0) == 0.0);
}

TEST_CASE("stream values are pinned: (seed, index) addresses a fixed cell") {
  // Values computed with an independent transcription of the generator and
  // inversion formula.
  const CellSampler s2(edge_rates(standard_model_2d()), 42);
  TypicalCell c = s2.sample(0);
  CHECK(c.edge_lengths[0] == 0.6322148758975181);
  CHECK(c.edge_lengths[1] == 0.4168216745658574);
  c = s2.sample(1);
  CHECK(c.edge_lengths[0] == 0.39610413089476704);
  CHECK(c.edge_lengths[1] == 0.6057144955136484);
  c = s2.sample(2);
  CHECK(c.edge_lengths[0] == 1.0738675619595348);
  CHECK(c.edge_lengths[1] == 1.4853842879897134);

  const CellSampler s3(edge_rates(standard_model_3d()), 7);
  c = s3.sample(5);
  CHECK(c.edge_lengths[0] == 0.40983379516372304);
  CHECK(c.edge_lengths[1] == 1.2705656327019874);
  CHECK(c.edge_lengths[2] == 0.29388808088115537);

  // Non-unit rates: the oracle derives the family normals in closed form
  // while edge_rates orthonormalizes, so the rates (and hence the samples)
  // may differ in the last bit. A few ulps of slack, nothing more.
  const CellSampler s60(edge_rates(model_60deg()), 9);
  c = s60.sample(0);
  CHECK(c.edge_lengths[0] ==
        doctest::Approx(0.6301805212135629).epsilon(1e-15));
  CHECK(c.edge_lengths[1] ==
        doctest::Approx(2.853749671203051).epsilon(1e-15));
}

TEST_CASE("worker hint never changes the stream") {
  const TessellationModel m = standard_model_2d();
  const std::vector<TypicalCell> one = sample_stream(m, {123, 1000, 1});
  for (std::uint32_t workers : {3u, 8u}) {
    const std::vector<TypicalCell> many = sample_stream(m, {123, 1000, workers});
    REQUIRE(many.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i)
      CHECK(many[i].edge_lengths == one[i].edge_lengths);
  }
  // and the random-access sampler agrees with the stream
  CHECK(sample_typical_cell(edge_rates(m), 123, 577).edge_lengths ==
        one[577].edge_lengths);
}

TEST_CASE("different seeds give different streams") {
  const TessellationModel m = standard_model_2d();
  const auto a = sample_stream(m, {1, 64, 1});
  const auto b = sample_stream(m, {2, 64, 1});
  int differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].edge_lengths != b[i].edge_lengths) ++differing;
  CHECK(differing == 64);
}

TEST_CASE("each coordinate is Exp(rate_i): KS below the 99% DKW band") {
  const std::uint64_t n = 1000000;
  const double bound = dkw_bound_99(n);

  for (const TessellationModel& m : {standard_model_2d(), model_60deg()}) {
    const EdgeRates rates = edge_rates(m);
    for (int coord = 0; coord < 2; ++coord) {
      std::vector<double> xs = coordinate_samples(m, 2024 + coord, n, coord);
      for (double x : xs) REQUIRE(x > 0.0);  // all-positive invariant
      const double rate = rates.rates[static_cast<std::size_t>(coord)];
      const double d = ks_statistic(
          std::move(xs), [rate](double x) { return -std::expm1(-rate * x); });
      CHECK(d < bound);
    }
  }
}

TEST_CASE("2D coordinates are independent on a 3x3 tail grid") {
  const std::uint64_t n = 1000000;
  const CellSampler sampler(edge_rates(standard_model_2d()), 5150);
  const double qs[3] = {0.2876820724517809, 0.6931471805599453,
                        1.3862943611198906};  // Exp(1) quartiles
  std::uint64_t joint[3][3] = {};
  double edges[2];
  for (std::uint64_t i = 0; i < n; ++i) {
    sampler.sample_into(i, edges);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (edges[0] > qs[a] && edges[1] > qs[b]) ++joint[a][b];
  }
  const double tails[3] = {0.75, 0.5, 0.25};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double p = tails[a] * tails[b];
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      const double got =
          static_cast<double>(joint[a][b]) / static_cast<double>(n);
      CHECK(std::fabs(got - p) <= 4.0 * se);
    }
}

TEST_CASE("memorylessness: X-s given X>s is again Exp(rate) at s=1/rate") {
  const std::uint64_t n = 1000000;
  std::vector<double> xs =
      coordinate_samples(standard_model_2d(), 31337, n, 0);
  std::vector<double> shifted;
  for (double x : xs)
    if (x > 1.0) shifted.push_back(x - 1.0);
  REQUIRE(shifted.size() > 300000);
  const double bound = dkw_bound_99(shifted.size());
  const double d = ks_statistic(std::move(shifted),
                                [](double x) { return -std::expm1(-x); });
  CHECK(d < bound);
}

TEST_CASE("window tessellation: deterministic, clipped, sorted, no dupes") {
  const TessellationModel m = model_60deg();
  const WindowTessellation t =
      sample_window_tessellation(m, 77, 0.0, 0.0, 50.0, 30.0);
  const WindowTessellation again =
      sample_window_tessellation(m, 77, 0.0, 0.0, 50.0, 30.0);
  REQUIRE(t.segments.size() == again.segments.size());
  CHECK(t.segments.size() > 0);

  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const Segment& s = t.segments[i];
    const Segment& s2 = again.segments[i];
    CHECK(s.family == s2.family);
    CHECK(s.offset == s2.offset);

    for (double v : {s.x0, s.x1}) CHECK((-1e-9 <= v && v <= 50.0 + 1e-9));
    for (double v : {s.y0, s.y1}) CHECK((-1e-9 <= v && v <= 30.0 + 1e-9));

    // endpoints sit on the line <x, n_family> = offset
    const auto& u = m.atoms[static_cast<std::size_t>(s.family)].direction;
    const double nx = -u[1], ny = u[0];
    CHECK(std::fabs(nx * s.x0 + ny * s.y0 - s.offset) < 1e-9);
    CHECK(std::fabs(nx * s.x1 + ny * s.y1 - s.offset) < 1e-9);

    if (i > 0) {
      const Segment& prev = t.segments[i - 1];
      const bool ordered = prev.family < s.family ||
                           (prev.family == s.family && prev.offset < s.offset);
      CHECK(ordered);  // strict: duplicate offsets are redrawn
    }
  }
}

TEST_CASE("window line counts match the intensity measure") {
  // Family j hits the window with Poisson(gamma * w_j * projection length)
  // lines. Averaging over seeds pins the mean to a few standard errors.
  const TessellationModel m = standard_model_2d();
  const int reps = 60;
  const double width = 100.0, height = 40.0;
  double count0 = 0.0, count1 = 0.0;
  for (int seed = 0; seed < reps; ++seed) {
    const WindowTessellation t =
        sample_window_tessellation(m, 1000 + seed, 0.0, 0.0, width, height);
    for (const Segment& s : t.segments) (s.family == 0 ? count0 : count1) += 1.0;
  }
  // family 0 runs along the x-axis: projection interval has length =
  // height; mean = 2 * 0.5 * height (and symmetrically for family 1)
  const double mean0 = m.gamma * 0.5 * height;
  const double mean1 = m.gamma * 0.5 * width;
  const double se0 = std::sqrt(mean0 / reps);
  const double se1 = std::sqrt(mean1 / reps);
  CHECK(std::fabs(count0 / reps - mean0) <= 4.0 * se0);
  CHECK(std::fabs(count1 / reps - mean1) <= 4.0 * se1);
}

TEST_CASE("window offsets are uniform over the projection interval") {
  const TessellationModel m = standard_model_2d();
  std::vector<double> offsets;
  for (int seed = 0; seed < 40; ++seed) {
    const WindowTessellation t =
        sample_window_tessellation(m, 7000 + seed, 0.0, 0.0, 80.0, 80.0);
    for (const Segment& s : t.segments)
      if (s.family == 1) offsets.push_back(s.offset);
  }
  REQUIRE(offsets.size() > 2000);
  const double bound = dkw_bound_99(offsets.size());
  // Family 1 runs along u=(0,1), so its left-hand normal is (-1,0) and the
  // window [0,80]^2 projects to offsets in [-80, 0].
  const double d = ks_statistic(
      std::move(offsets), [](double t) {
        return std::clamp((t + 80.0) / 80.0, 0.0, 1.0);
      });
  CHECK(d < bound);
}

TEST_CASE("window tessellation rejects bad input") {
  CHECK_THROWS_AS((void)sample_window_tessellation(standard_model_3d(), 1,
                                                   0.0, 0.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sample_window_tessellation(standard_model_2d(), 1,
                                                   5.0, 0.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("chunked Poisson sampler: deterministic with correct moments") {
  rng::SequenceRng gen(99, 0, rng::kStreamWindow);
  rng::SequenceRng gen2(99, 0, rng::kStreamWindow);
  for (int i = 0; i < 50; ++i)
    CHECK(rng::poisson(gen, 72.5) == rng::poisson(gen2, 72.5));

  // moment check across independent substreams, mean large enough to
  // exercise the 30-per-chunk splitting
  const double mean = 72.5;
  const int reps = 4000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < reps; ++i) {
    rng::SequenceRng g(1234, static_cast<std::uint64_t>(i),
                       rng::kStreamWindow);
    const double v = static_cast<double>(rng::poisson(g, mean));
    sum += v;
    sumsq += v * v;
  }
  const double avg = sum / reps;
  const double var = sumsq / reps - avg * avg;
  CHECK(std::fabs(avg - mean) <= 4.0 * std::sqrt(mean / reps));
  CHECK(std::fabs(var - mean) <= 0.15 * mean);

  CHECK(rng::poisson(gen, 0.0) == 0);
}

}  // TEST_SUITE
