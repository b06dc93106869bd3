#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <doctest.h>

#include "smallcells/analytic.hpp"
#include "smallcells/common.hpp"
#include "smallcells/experiments.hpp"
#include "smallcells/model.hpp"
#include "oracles.hpp"

using namespace smallcells;

namespace {

TessellationModel skewed_2d() {
  // Distinct edge rates and a non-orthogonal second direction.
  TessellationModel m;
  m.dimension = 2;
  m.gamma = 2.0;
  m.atoms = {{{1.0, 0.0}, 0.3},
             {{0.5, std::sqrt(3.0) / 2.0}, 0.7}};
  return m;
}

bool same_entries(const std::vector<TopKEntry>& a,
                  const std::vector<TopKEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size != b[i].size) return false;
    if (a[i].sample_index != b[i].sample_index) return false;
    if (a[i].edge_lengths != b[i].edge_lengths) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("dkw band reference values") {
  CHECK(std::fabs(dkw_bound_99(150) - 0.132894912952) < 1e-11);
  CHECK(std::fabs(dkw_bound_99(2000) - 0.036394770800720935) < 1e-15);
  CHECK(std::fabs(dkw_bound_99(1000000) - 0.00162762363072) < 1e-13);
  CHECK(std::fabs(dkw_bound_99(10000000) - 0.000514699784658) < 1e-14);
  CHECK_THROWS_AS(dkw_bound_99(0), std::invalid_argument);
}

TEST_CASE("ks statistic on hand-checkable samples") {
  auto uniform = [](double x) { return x; };
  CHECK(ks_statistic({0.5}, uniform) == 0.5);
  CHECK(ks_statistic({0.25, 0.75}, uniform) == 0.25);
  // Order of the input must not matter.
  CHECK(ks_statistic({0.75, 0.25}, uniform) == 0.25);
  // A sample that *is* the quantile sequence: D = 1/(2n) at n=5... not
  // quite; use the exact value max over the staircase.
  std::vector<double> s = {0.1, 0.3, 0.5, 0.7, 0.9};
  CHECK(std::fabs(ks_statistic(std::move(s), uniform) - 0.1) < 1e-15);

  CHECK_THROWS_AS(ks_statistic({}, uniform), std::invalid_argument);
  CHECK_THROWS_AS(ks_statistic({std::nan("")}, uniform),
                  std::invalid_argument);
  auto bad_cdf = [](double x) { return 2.0 * x; };
  CHECK_THROWS_AS(ks_statistic({0.9}, bad_cdf), std::invalid_argument);
}

TEST_CASE("conditional estimates track the product law on perimeter slabs") {
  // For equal rates the shape is independent of the half-perimeter, so
  // P(sigma > eps | X+Y < p) = 1-eps for every p. The estimator has to
  // land within its own 4-sigma band, with a healthy accepted count even
  // at the smallest slab.
  const TessellationModel model = standard_model_2d();
  for (double eps : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (double p : {0.05, 0.2, 1.0}) {
      CAPTURE(eps);
      CAPTURE(p);
      SampleStreamSpec spec;
      spec.seed = 90210;
      spec.count = p == 0.05 ? 10000000 : 1000000;
      CondEstimate est = conditional_estimate(
          model, spec, ShapeEvent{ShapeKind::Sigma, eps},
          SizeEvent{SizeFunctional::HalfPerimeter, p});
      CHECK(est.accepted >= 10000);
      CHECK(est.total == spec.count);
      CHECK(est.std_error > 0.0);
      CHECK(std::fabs(est.estimate - (1.0 - eps)) <= 4.0 * est.std_error);
    }
  }
}

TEST_CASE("conditional estimate validation and starvation") {
  const TessellationModel model = standard_model_2d();
  SampleStreamSpec spec;
  spec.seed = 7;
  spec.count = 20000;

  CHECK_THROWS_AS(conditional_estimate(model, spec, ShapeEvent{},
                                       SizeEvent{SizeFunctional::HalfPerimeter,
                                                 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      conditional_estimate(model, spec, ShapeEvent{ShapeKind::Sigma,
                                                   std::nan("")},
                           SizeEvent{SizeFunctional::HalfPerimeter, 1.0}),
      std::invalid_argument);
  // 3D-only functional against a 2D model.
  CHECK_THROWS_AS(
      conditional_estimate(model, spec, ShapeEvent{},
                           SizeEvent{SizeFunctional::SurfaceArea, 1.0}),
      std::invalid_argument);

  // Impossible conditioning event: starved, and the error reports how many
  // samples were scanned.
  try {
    conditional_estimate(model, spec, ShapeEvent{},
                         SizeEvent{SizeFunctional::EdgeProductArea, 1e-300});
    FAIL("expected starvation");
  } catch (const StarvationError& e) {
    CHECK(e.total_samples == spec.count);
  }

  // Empty stream starves too (never divides by zero).
  spec.count = 0;
  CHECK_THROWS_AS(conditional_estimate(model, spec, ShapeEvent{},
                                       SizeEvent{SizeFunctional::HalfPerimeter,
                                                 1.0}),
                  StarvationError);
}

TEST_CASE("top-k selection equals the materialize-and-sort oracle") {
  const std::uint64_t n = 100000;
  const std::uint32_t k = 37;
  struct Case {
    TessellationModel model;
    std::vector<SizeFunctional> fns;
  };
  const std::vector<Case> cases = {
      {standard_model_2d(), applicable_functionals(2)},
      {standard_model_3d(), applicable_functionals(3)},
      {skewed_2d(), applicable_functionals(2)},
  };
  for (const Case& c : cases) {
    for (SizeFunctional f : c.fns) {
      for (std::uint64_t seed : {1ull, 92ull}) {
        CAPTURE(functional_token(f));
        CAPTURE(seed);
        SampleStreamSpec spec;
        spec.seed = seed;
        spec.count = n;
        spec.worker_hint = 3;
        TopKSelection got = select_k_smallest(c.model, spec, f, k);
        std::vector<TopKEntry> want =
            testing_oracles::topk_by_sorting(c.model, seed, n, f, k);
        REQUIRE(got.entries.size() == want.size());
        CHECK(same_entries(got.entries, want));
        CHECK(!got.short_of_k);
        CHECK(std::is_sorted(got.entries.begin(), got.entries.end(),
                             topk_entry_less));
      }
    }
  }
}

TEST_CASE("top-k merge is order independent") {
  const TessellationModel model = standard_model_2d();
  const CellSampler sampler(edge_rates(model), 555);
  const std::uint32_t k = 25;
  const std::uint64_t n = 40000;

  // Four disjoint chunks of the same stream.
  std::vector<TopKCollector> parts;
  for (int c = 0; c < 4; ++c) {
    parts.emplace_back(k);
    double edges[2];
    for (std::uint64_t i = c * (n / 4); i < (c + 1) * (n / 4); ++i) {
      sampler.sample_into(i, edges);
      parts[static_cast<std::size_t>(c)].offer(edges[0] * edges[1], i, edges,
                                               2);
    }
  }

  TopKCollector left(k);
  for (int c = 0; c < 4; ++c) left.merge(parts[static_cast<std::size_t>(c)]);
  TopKCollector right(k);
  for (int c = 3; c >= 0; --c)
    right.merge(parts[static_cast<std::size_t>(c)]);
  TopKCollector nested(k);
  nested.merge(parts[2]);
  nested.merge(parts[0]);
  nested.merge(parts[3]);
  nested.merge(parts[1]);

  CHECK(same_entries(left.sorted_entries(), right.sorted_entries()));
  CHECK(same_entries(left.sorted_entries(), nested.sorted_entries()));
}

TEST_CASE("top-k boundary ties keep the smaller sample index") {
  TopKCollector c(2);
  const double edges_a[2] = {0.5, 2.0};
  c.offer(1.0, 7, edges_a, 2);
  c.offer(1.0, 3, edges_a, 2);
  CHECK(!c.would_accept(1.0, 9));  // full, ties resolve toward lower index
  CHECK(c.would_accept(1.0, 5));
  c.offer(1.0, 5, edges_a, 2);
  auto entries = c.sorted_entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].sample_index == 3);
  CHECK(entries[1].sample_index == 5);
  CHECK(entries[0].edge_lengths == std::vector<double>{0.5, 2.0});
}

TEST_CASE("short streams are flagged") {
  SampleStreamSpec spec;
  spec.seed = 4;
  spec.count = 10;
  TopKSelection sel = select_k_smallest(standard_model_2d(), spec,
                                        SizeFunctional::EdgeProductArea, 20);
  CHECK(sel.short_of_k);
  CHECK(sel.entries.size() == 10);
  CHECK_THROWS_AS(select_k_smallest(standard_model_2d(), spec,
                                    SizeFunctional::EdgeProductArea, 0),
                  std::invalid_argument);
}

TEST_CASE("small-cell study: one pass, every functional, stable histograms") {
  const TessellationModel model = standard_model_2d();
  StudyReport rep = run_small_cell_study(model, 5000, 100, 31);
  REQUIRE(rep.functionals.size() == 3);
  CHECK(rep.functionals[0].selection.functional ==
        SizeFunctional::EdgeProductArea);
  CHECK(rep.functionals[1].selection.functional ==
        SizeFunctional::GeometricArea);
  CHECK(rep.functionals[2].selection.functional ==
        SizeFunctional::HalfPerimeter);

  for (const FunctionalStudy& fs : rep.functionals) {
    CAPTURE(functional_token(fs.selection.functional));
    REQUIRE(fs.selection.entries.size() == 100);
    CHECK(!fs.selection.short_of_k);
    CHECK(fs.min_size == fs.selection.entries.front().size);
    CHECK(fs.max_size == fs.selection.entries.back().size);
    CHECK(fs.min_size <= fs.max_size);
    // Every retained cell lands in the histograms: nothing leaks out of
    // range regardless of worker split.
    CHECK(fs.sigma_hist.total() == 100);
    CHECK(fs.sigma_hist.underflow == 0);
    CHECK(fs.sigma_hist.overflow == 0);
    CHECK(fs.tau_hist.total() == 100);
    CHECK(fs.tau_hist.overflow == 0);
    CHECK(fs.tau_hist.hi > 0.0);
  }

  // The deviation statistics must not depend on how the pass was split.
  StudyReport rep4 = run_small_cell_study(model, 5000, 100, 31, 4);
  for (std::size_t f = 0; f < rep.functionals.size(); ++f) {
    CHECK(same_entries(rep.functionals[f].selection.entries,
                       rep4.functionals[f].selection.entries));
    CHECK(rep.functionals[f].sigma_hist.counts ==
          rep4.functionals[f].sigma_hist.counts);
    CHECK(rep.functionals[f].tau_hist.counts ==
          rep4.functionals[f].tau_hist.counts);
    CHECK(rep.functionals[f].tau_hist.hi == rep4.functionals[f].tau_hist.hi);
  }

  StudyReport rep3d = run_small_cell_study(standard_model_3d(), 3000, 50, 8);
  REQUIRE(rep3d.functionals.size() == 3);
  CHECK(rep3d.functionals[0].selection.functional == SizeFunctional::Volume);
  CHECK(rep3d.functionals[1].selection.functional ==
        SizeFunctional::SurfaceArea);
  CHECK(rep3d.functionals[2].selection.functional ==
        SizeFunctional::TotalEdgeLength);
  for (const FunctionalStudy& fs : rep3d.functionals)
    CHECK(fs.sigma_hist.total() == 50);

  CHECK_THROWS_AS(run_small_cell_study(model, 99, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_small_cell_study(model, 100, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("study edge case: n == k retains the whole stream") {
  const TessellationModel model = standard_model_2d();
  StudyReport rep = run_small_cell_study(model, 100, 100, 99);
  for (const FunctionalStudy& fs : rep.functionals) {
    REQUIRE(fs.selection.entries.size() == 100);
    // All indices 0..99 present exactly once.
    std::vector<bool> seen(100, false);
    for (const TopKEntry& e : fs.selection.entries) {
      REQUIRE(e.sample_index < 100);
      CHECK(!seen[static_cast<std::size_t>(e.sample_index)]);
      seen[static_cast<std::size_t>(e.sample_index)] = true;
    }
  }
}

TEST_CASE("convergence study against the unit-rate area laws") {
  const TessellationModel model = standard_model_2d();
  const std::vector<double> eps = {0.25, 0.5};
  const std::vector<double> thr = {0.05, 0.2, 1.0};
  ConvergenceReport rep =
      run_convergence_study(model, eps, thr, 200000, 2718);

  // sigma series first, then tau; eps-major, threshold-minor.
  REQUIRE(rep.rows.size() == 12);
  std::size_t r = 0;
  for (ShapeKind kind : {ShapeKind::Sigma, ShapeKind::Tau}) {
    for (double e : eps) {
      for (double t : thr) {
        const ConvergenceRow& row = rep.rows[r++];
        CAPTURE(r);
        CHECK(row.kind == kind);
        CHECK(row.eps == e);
        CHECK(row.threshold == t);
        CHECK(row.total == 200000);
        CHECK(!row.starved);
        CHECK(row.accepted > 5000);
        CHECK(row.quad > 0.0);
        CHECK(row.quad < 1.0);
        // The quadrature is the exact law here, so the MC z-score follows
        // a half-normal; 5 is far out in that tail.
        CHECK(row.z <= 5.0);
        CHECK(row.z ==
              doctest::Approx(std::fabs(row.mc - row.quad) / row.se));
      }
    }
  }

  // Rows must match the standalone conditionals (same rescale): the tau
  // block starts after the 6 sigma rows, eps-major within each block.
  CHECK(rep.rows[0].quad == cond_sigma_given_area(0.25, 0.05));
  CHECK(rep.rows[9].quad == cond_tau_given_area(0.5, 0.05));

  // One decay summary per (kind, eps) series.
  REQUIRE(rep.fits.size() == 4);
  for (const ConvergenceFit& f : rep.fits) {
    CHECK(std::isfinite(f.fit.exponent));
    CHECK(f.fit.exponent > 0.0);  // probabilities shrink with the threshold
  }
  CHECK(rep.fits[0].kind == ShapeKind::Sigma);
  CHECK(rep.fits[0].eps == 0.25);
  CHECK(rep.fits[3].kind == ShapeKind::Tau);
  CHECK(rep.fits[3].eps == 0.5);

  // Worker split cannot change a single counter.
  ConvergenceReport rep3 =
      run_convergence_study(model, eps, thr, 200000, 2718, 3);
  REQUIRE(rep3.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep3.rows[i].accepted == rep.rows[i].accepted);
    CHECK(rep3.rows[i].mc == rep.rows[i].mc);
    CHECK(rep3.rows[i].se == rep.rows[i].se);
  }
}

TEST_CASE("convergence study: starved thresholds keep their analytic value") {
  const TessellationModel model = standard_model_2d();
  ConvergenceReport rep =
      run_convergence_study(model, {0.5}, {1e-12, 0.2}, 200000, 99);
  REQUIRE(rep.rows.size() == 4);

  const ConvergenceRow& starved = rep.rows[0];
  CHECK(starved.threshold == 1e-12);
  CHECK(starved.starved);
  CHECK(starved.accepted == 0);
  CHECK(std::isnan(starved.mc));
  CHECK(std::isnan(starved.se));
  CHECK(std::isnan(starved.z));
  CHECK(starved.quad > 0.0);

  const ConvergenceRow& live = rep.rows[1];
  CHECK(live.threshold == 0.2);
  CHECK(!live.starved);
  CHECK(live.z <= 5.0);

  // Two usable thresholds only: not enough for a decay fit.
  CHECK(rep.fits.empty());
}

TEST_CASE("convergence study validation") {
  const TessellationModel model = standard_model_2d();
  CHECK_THROWS_AS(run_convergence_study(standard_model_3d(), {0.5}, {0.1},
                                        1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_convergence_study(model, {}, {0.1}, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_convergence_study(model, {1.5}, {0.1}, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_convergence_study(model, {0.5}, {-0.1}, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_convergence_study(model, {0.5}, {0.1}, 0, 1),
                  std::invalid_argument);
  // Area conditioning needs equal rates; the skewed model must be pushed
  // toward half-perimeter conditioning instead.
  CHECK_THROWS_AS(run_convergence_study(skewed_2d(), {0.5}, {0.1}, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_convergence_study(model, {0.5}, {0.1}, 1000, 1, 1,
                                        SizeFunctional::GeometricArea),
                  std::invalid_argument);
}

TEST_CASE("convergence study with half-perimeter conditioning "
          "handles distinct rates") {
  const TessellationModel model = skewed_2d();
  const RatePair pair = RatePair::from_edge_rates(edge_rates(model));
  ConvergenceReport rep = run_convergence_study(
      model, {0.5}, {0.5, 1.0, 2.0}, 100000, 17, 1,
      SizeFunctional::HalfPerimeter);

  // No tau series under perimeter conditioning.
  REQUIRE(rep.rows.size() == 3);
  for (const ConvergenceRow& row : rep.rows) {
    CHECK(row.kind == ShapeKind::Sigma);
    CHECK(!row.starved);
    CHECK(row.z <= 5.0);
  }
  CHECK(rep.rows[0].quad ==
        doctest::Approx(cond_sigma_given_perimeter(pair, 0.5, 0.5))
            .epsilon(1e-12));
  REQUIRE(rep.fits.size() == 1);
  CHECK(rep.fits[0].kind == ShapeKind::Sigma);
}

}  // TEST_SUITE("experiments")

TEST_SUITE("mc_heavy") {

TEST_CASE("deep stream pins the area-conditioned laws at 4 sigma") {
  // One large pass; both shape laws checked against quadrature through the
  // built-in z columns.
  const TessellationModel model = standard_model_2d();
  ConvergenceReport rep = run_convergence_study(model, {0.5}, {1e-3},
                                                300000000, 20260814, 1);
  REQUIRE(rep.rows.size() == 2);
  for (const ConvergenceRow& row : rep.rows) {
    CAPTURE(row.kind == ShapeKind::Sigma ? "sigma" : "tau");
    CHECK(row.accepted > 1000000);
    CHECK(!row.starved);
    CHECK(row.z <= 4.0);
  }
  // And the quadrature side of those comparisons against frozen values.
  CHECK(std::fabs(rep.rows[0].quad - 0.15554983886512346654) < 1e-9);
  CHECK(std::fabs(rep.rows[1].quad - 0.16557931921128442101) < 1e-9);
}

}  // TEST_SUITE("mc_heavy")
