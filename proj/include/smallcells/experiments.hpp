#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smallcells/analytic.hpp"
#include "smallcells/functionals.hpp"
#include "smallcells/histogram.hpp"
#include "smallcells/sampler.hpp"
#include "smallcells/topk.hpp"

namespace smallcells {

enum class ShapeKind { Sigma, Tau };

// Shape event {sigma > eps} or {tau > eps}.
struct ShapeEvent {
  ShapeKind kind = ShapeKind::Sigma;
  double eps = 0.5;
};

// Size event {functional < threshold}.
struct SizeEvent {
  SizeFunctional functional = SizeFunctional::EdgeProductArea;
  double threshold = 1.0;
};

struct CondEstimate {
  double estimate = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t total = 0;
  double std_error = 0.0;  // binomial, conditional on the accepted count
};

// Rejection estimate of P(shape event | size event) over the deterministic
// stream. Throws StarvationError when nothing satisfies the conditioning
// event.
CondEstimate conditional_estimate(const TessellationModel& model,
                                  const SampleStreamSpec& spec,
                                  const ShapeEvent& shape,
                                  const SizeEvent& size);

// Kolmogorov-Smirnov distance between the sample and a distribution given
// by its CDF: D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n).
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// 99% Dvoretzky-Kiefer-Wolfowitz band: sqrt(ln(2/0.01) / (2n)). An
// empirical CDF of n true samples exceeds this KS distance with
// probability at most 1%.
double dkw_bound_99(std::uint64_t n);

struct FunctionalStudy {
  TopKSelection selection;
  double min_size = 0.0;  // size of the smallest retained cell
  double max_size = 0.0;  // size of the largest retained cell
  Histogram sigma_hist;   // 10 bins on [0, 1] over the retained cells
  Histogram tau_hist;     // 10 bins on [0, max retained tau]
};

struct StudyReport {
  TessellationModel model;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint32_t k = 0;
  std::uint32_t worker_hint = 1;
  std::vector<FunctionalStudy> functionals;
};

// Single pass over the stream: top-k selection for every applicable size
// functional simultaneously, then deviation histograms and min/max tables
// over each retained set.
StudyReport run_small_cell_study(const TessellationModel& model,
                                 std::uint64_t n, std::uint32_t k,
                                 std::uint64_t seed,
                                 std::uint32_t worker_hint = 1);

struct ConvergenceRow {
  ShapeKind kind = ShapeKind::Sigma;
  double eps = 0.0;
  double threshold = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t total = 0;
  double mc = 0.0;    // NaN when starved
  double se = 0.0;    // NaN when starved
  double quad = 0.0;  // always present
  double z = 0.0;     // |mc - quad| / se; NaN when starved
  bool starved = false;
};

struct ConvergenceFit {
  ShapeKind kind = ShapeKind::Sigma;
  double eps = 0.0;
  DecayFit fit;  // over the quadrature values of this (kind, eps) series
};

struct ConvergenceReport {
  TessellationModel model;
  SizeFunctional conditioning = SizeFunctional::EdgeProductArea;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint32_t worker_hint = 1;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceFit> fits;
};

// MC-vs-quadrature comparison of the conditional shape laws on an
// (eps, threshold) grid, one stream pass for all cells of the grid.
// Conditioning on EdgeProductArea requires an equal-rate 2D model (the
// unit-rate laws apply after rescaling) and also produces tau rows;
// conditioning on HalfPerimeter works for any 2D model and produces sigma
// rows only. Starved rows keep their quadrature value.
ConvergenceReport run_convergence_study(
    const TessellationModel& model, const std::vector<double>& eps_grid,
    const std::vector<double>& thresholds, std::uint64_t n,
    std::uint64_t seed, std::uint32_t worker_hint = 1,
    SizeFunctional conditioning = SizeFunctional::EdgeProductArea,
    const QuadratureConfig& cfg = {});

}  // namespace smallcells
