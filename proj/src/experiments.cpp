#include "smallcells/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "smallcells/common.hpp"

namespace smallcells {

namespace {

void check_shape_event(const ShapeEvent& shape) {
  if (!std::isfinite(shape.eps) || shape.eps < 0.0)
    throw std::invalid_argument("shape event: eps must be finite and >= 0");
}

void check_functional(SizeFunctional f, const TessellationModel& model) {
  if (f != SizeFunctional::Volume &&
      functional_dimension(f) != model.dimension)
    throw std::invalid_argument(std::string("functional '") +
                                functional_token(f) +
                                "' does not apply to dimension " +
                                std::to_string(model.dimension));
}

void check_size_event(const SizeEvent& size, const TessellationModel& model) {
  if (!std::isfinite(size.threshold) || !(size.threshold > 0.0))
    throw std::invalid_argument("size event: threshold must be finite and > 0");
  check_functional(size.functional, model);
}

}  // namespace

CondEstimate conditional_estimate(const TessellationModel& model,
                                  const SampleStreamSpec& spec,
                                  const ShapeEvent& shape,
                                  const SizeEvent& size) {
  model.validate();
  check_shape_event(shape);
  check_size_event(size, model);

  const EdgeRates rates = edge_rates(model);
  const CellSampler sampler(rates, spec.seed);
  const int d = model.dimension;
  const double geometry = size.functional == SizeFunctional::GeometricArea
                              ? direction_sine(model)
                              : 0.0;
  const std::uint32_t workers = std::max<std::uint32_t>(1, spec.worker_hint);

  std::vector<std::uint64_t> accepted(workers, 0), hits(workers, 0);
  for_each_index_range(
      spec.count, workers,
      [&](std::uint32_t w, std::uint64_t begin, std::uint64_t end) {
        std::vector<double> edges(static_cast<std::size_t>(d));
        std::uint64_t acc = 0, hit = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
          sampler.sample_into(i, edges.data());
          if (cell_size(edges.data(), d, size.functional, geometry) >=
              size.threshold)
            continue;
          ++acc;
          const double s =
              shape.kind == ShapeKind::Sigma ? sigma(edges) : tau(edges);
          if (s > shape.eps) ++hit;
        }
        accepted[w] = acc;
        hits[w] = hit;
      });

  CondEstimate out;
  out.total = spec.count;
  std::uint64_t hit_total = 0;
  for (std::uint32_t w = 0; w < workers; ++w) {
    out.accepted += accepted[w];
    hit_total += hits[w];
  }
  if (out.accepted == 0) throw StarvationError(spec.count);
  out.estimate =
      static_cast<double>(hit_total) / static_cast<double>(out.accepted);
  out.std_error = std::sqrt(std::max(0.0, out.estimate * (1.0 - out.estimate) /
                                              static_cast<double>(out.accepted)));
  return out;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks: empty sample");
  for (double v : samples)
    if (std::isnan(v)) throw std::invalid_argument("ks: NaN sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    if (!(f >= -1e-12 && f <= 1.0 + 1e-12))
      throw std::invalid_argument("ks: cdf value outside [0, 1]");
    f = std::clamp(f, 0.0, 1.0);
    dist = std::max(dist, (static_cast<double>(i) + 1.0) / n - f);
    dist = std::max(dist, f - static_cast<double>(i) / n);
  }
  return dist;
}

double dkw_bound_99(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("dkw bound: n must be >= 1");
  return std::sqrt(std::log(200.0) / (2.0 * static_cast<double>(n)));
}

TopKSelection select_k_smallest(const TessellationModel& model,
                                const SampleStreamSpec& spec,
                                SizeFunctional functional, std::uint32_t k) {
  model.validate();
  if (k == 0) throw std::invalid_argument("top-k: k must be >= 1");
  check_functional(functional, model);

  const EdgeRates rates = edge_rates(model);
  const CellSampler sampler(rates, spec.seed);
  const int d = model.dimension;
  const double geometry = functional == SizeFunctional::GeometricArea
                              ? direction_sine(model)
                              : 0.0;
  const std::uint32_t workers = std::max<std::uint32_t>(1, spec.worker_hint);

  std::vector<TopKCollector> collectors;
  collectors.reserve(workers);
  for (std::uint32_t w = 0; w < workers; ++w) collectors.emplace_back(k);

  for_each_index_range(
      spec.count, workers,
      [&](std::uint32_t w, std::uint64_t begin, std::uint64_t end) {
        TopKCollector& mine = collectors[w];
        std::vector<double> edges(static_cast<std::size_t>(d));
        for (std::uint64_t i = begin; i < end; ++i) {
          sampler.sample_into(i, edges.data());
          const double s = cell_size(edges.data(), d, functional, geometry);
          if (mine.would_accept(s, i)) mine.offer(s, i, edges.data(), d);
        }
      });

  TopKCollector merged = std::move(collectors[0]);
  for (std::uint32_t w = 1; w < workers; ++w) merged.merge(collectors[w]);

  TopKSelection sel;
  sel.functional = functional;
  sel.k = k;
  sel.entries = merged.sorted_entries();
  sel.short_of_k = sel.entries.size() < k;
  return sel;
}

StudyReport run_small_cell_study(const TessellationModel& model,
                                 std::uint64_t n, std::uint32_t k,
                                 std::uint64_t seed,
                                 std::uint32_t worker_hint) {
  model.validate();
  const std::vector<SizeFunctional> fns =
      applicable_functionals(model.dimension);
  if (fns.empty())
    throw std::invalid_argument("study: no size functionals for dimension " +
                                std::to_string(model.dimension));
  if (k == 0) throw std::invalid_argument("study: k must be >= 1");
  if (n < k)
    throw std::invalid_argument("study: need at least k samples (n >= k)");

  const EdgeRates rates = edge_rates(model);
  const CellSampler sampler(rates, seed);
  const int d = model.dimension;
  std::vector<double> geom(fns.size(), 0.0);
  for (std::size_t f = 0; f < fns.size(); ++f)
    if (fns[f] == SizeFunctional::GeometricArea)
      geom[f] = direction_sine(model);

  const std::uint32_t workers = std::max<std::uint32_t>(1, worker_hint);
  std::vector<std::vector<TopKCollector>> collectors(workers);
  for (auto& per_worker : collectors) {
    per_worker.reserve(fns.size());
    for (std::size_t f = 0; f < fns.size(); ++f) per_worker.emplace_back(k);
  }

  // One pass over the stream drives every functional's selection at once.
  for_each_index_range(
      n, workers,
      [&](std::uint32_t w, std::uint64_t begin, std::uint64_t end) {
        auto& mine = collectors[w];
        std::vector<double> edges(static_cast<std::size_t>(d));
        for (std::uint64_t i = begin; i < end; ++i) {
          sampler.sample_into(i, edges.data());
          for (std::size_t f = 0; f < fns.size(); ++f) {
            const double s = cell_size(edges.data(), d, fns[f], geom[f]);
            if (mine[f].would_accept(s, i))
              mine[f].offer(s, i, edges.data(), d);
          }
        }
      });

  StudyReport rep;
  rep.model = model;
  rep.n = n;
  rep.seed = seed;
  rep.k = k;
  rep.worker_hint = worker_hint;
  rep.functionals.reserve(fns.size());
  for (std::size_t f = 0; f < fns.size(); ++f) {
    TopKCollector merged = std::move(collectors[0][f]);
    for (std::uint32_t w = 1; w < workers; ++w) merged.merge(collectors[w][f]);

    FunctionalStudy fs;
    fs.selection.functional = fns[f];
    fs.selection.k = k;
    fs.selection.entries = merged.sorted_entries();
    fs.selection.short_of_k = fs.selection.entries.size() < k;
    const auto& entries = fs.selection.entries;
    fs.min_size = entries.front().size;
    fs.max_size = entries.back().size;

    fs.sigma_hist = Histogram(0.0, 1.0, 10);
    double max_tau = 0.0;
    for (const TopKEntry& e : entries) {
      fs.sigma_hist.add(sigma(e.edge_lengths));
      max_tau = std::max(max_tau, tau(e.edge_lengths));
    }
    fs.tau_hist = Histogram(0.0, max_tau, 10);  // edges > 0, so max_tau > 0
    for (const TopKEntry& e : entries) fs.tau_hist.add(tau(e.edge_lengths));

    rep.functionals.push_back(std::move(fs));
  }
  return rep;
}

ConvergenceReport run_convergence_study(const TessellationModel& model,
                                        const std::vector<double>& eps_grid,
                                        const std::vector<double>& thresholds,
                                        std::uint64_t n, std::uint64_t seed,
                                        std::uint32_t worker_hint,
                                        SizeFunctional conditioning,
                                        const QuadratureConfig& cfg) {
  model.validate();
  if (model.dimension != 2)
    throw std::invalid_argument("convergence study: 2D models only");
  const bool area = conditioning == SizeFunctional::EdgeProductArea;
  if (!area && conditioning != SizeFunctional::HalfPerimeter)
    throw std::invalid_argument(
        "convergence study: conditioning must be area or half-perimeter");
  if (eps_grid.empty() || thresholds.empty())
    throw std::invalid_argument("convergence study: empty eps/threshold grid");
  for (double e : eps_grid)
    if (!std::isfinite(e) || !(e > 0.0) || !(e < 1.0))
      throw std::invalid_argument(
          "convergence study: eps values must lie in (0, 1)");
  for (double t : thresholds)
    if (!std::isfinite(t) || !(t > 0.0))
      throw std::invalid_argument(
          "convergence study: thresholds must be positive");
  if (n == 0) throw std::invalid_argument("convergence study: n must be >= 1");

  const EdgeRates rates = edge_rates(model);
  std::optional<double> g;
  if (area) {
    g = equal_rate(rates);
    if (!g)
      throw std::invalid_argument(
          "convergence study: area conditioning needs equal edge rates (the "
          "analytic area law rescales only then); use half-perimeter "
          "conditioning for this model");
  }
  const RatePair pair = RatePair::from_edge_rates(rates);

  const std::size_t ne = eps_grid.size(), nt = thresholds.size();
  const std::uint32_t workers = std::max<std::uint32_t>(1, worker_hint);

  struct Counters {
    std::vector<std::uint64_t> accepted;    // per threshold
    std::vector<std::uint64_t> sigma_hits;  // eps-major, threshold-minor
    std::vector<std::uint64_t> tau_hits;    // same layout; area runs only
  };
  std::vector<Counters> counters(workers);
  for (auto& c : counters) {
    c.accepted.assign(nt, 0);
    c.sigma_hits.assign(ne * nt, 0);
    if (area) c.tau_hits.assign(ne * nt, 0);
  }

  const CellSampler sampler(rates, seed);
  for_each_index_range(
      n, workers,
      [&](std::uint32_t w, std::uint64_t begin, std::uint64_t end) {
        Counters& c = counters[w];
        double edges[2];
        for (std::uint64_t i = begin; i < end; ++i) {
          sampler.sample_into(i, edges);
          const double size =
              area ? edges[0] * edges[1] : edges[0] + edges[1];
          const double hi = std::max(edges[0], edges[1]);
          const double sg =
              2.0 * std::min(edges[0], edges[1]) / (edges[0] + edges[1]);
          for (std::size_t t = 0; t < nt; ++t) {
            if (!(size < thresholds[t])) continue;
            ++c.accepted[t];
            for (std::size_t e = 0; e < ne; ++e) {
              if (sg > eps_grid[e]) ++c.sigma_hits[e * nt + t];
              if (area && hi > eps_grid[e]) ++c.tau_hits[e * nt + t];
            }
          }
        }
      });

  Counters total = std::move(counters[0]);
  for (std::uint32_t w = 1; w < workers; ++w) {
    for (std::size_t t = 0; t < nt; ++t)
      total.accepted[t] += counters[w].accepted[t];
    for (std::size_t i = 0; i < ne * nt; ++i) {
      total.sigma_hits[i] += counters[w].sigma_hits[i];
      if (area) total.tau_hits[i] += counters[w].tau_hits[i];
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto make_row = [&](ShapeKind kind, std::size_t e, std::size_t t,
                      std::uint64_t hit, double quad) {
    ConvergenceRow r;
    r.kind = kind;
    r.eps = eps_grid[e];
    r.threshold = thresholds[t];
    r.accepted = total.accepted[t];
    r.total = n;
    r.quad = quad;
    if (r.accepted == 0) {
      r.starved = true;
      r.mc = r.se = r.z = nan;
    } else {
      r.mc = static_cast<double>(hit) / static_cast<double>(r.accepted);
      r.se = std::sqrt(std::max(0.0, r.mc * (1.0 - r.mc) /
                                         static_cast<double>(r.accepted)));
      r.z = r.se > 0.0 ? std::fabs(r.mc - quad) / r.se
                       : (r.mc == quad
                              ? 0.0
                              : std::numeric_limits<double>::infinity());
    }
    return r;
  };

  ConvergenceReport rep;
  rep.model = model;
  rep.conditioning = conditioning;
  rep.n = n;
  rep.seed = seed;
  rep.worker_hint = worker_hint;

  auto add_series = [&](ShapeKind kind) {
    const auto& hits =
        kind == ShapeKind::Sigma ? total.sigma_hits : total.tau_hits;
    for (std::size_t e = 0; e < ne; ++e) {
      std::vector<std::pair<double, double>> quad_by_threshold;
      for (std::size_t t = 0; t < nt; ++t) {
        double quad;
        if (!area) {
          quad = cond_sigma_given_perimeter_detail(pair, eps_grid[e],
                                                   thresholds[t], cfg)
                     .value;
        } else if (kind == ShapeKind::Sigma) {
          quad = cond_sigma_given_area(eps_grid[e], *g * *g * thresholds[t],
                                       cfg);
        } else {
          quad = cond_tau_given_area(*g * eps_grid[e],
                                     *g * *g * thresholds[t], cfg);
        }
        rep.rows.push_back(make_row(kind, e, t, hits[e * nt + t], quad));
        if (quad > 0.0) quad_by_threshold.emplace_back(thresholds[t], quad);
      }
      // Decay summary of the analytic values; needs three usable points.
      if (quad_by_threshold.size() >= 3) {
        ConvergenceFit cf;
        cf.kind = kind;
        cf.eps = eps_grid[e];
        cf.fit = fit_decay_exponent(quad_by_threshold);
        rep.fits.push_back(cf);
      }
    }
  };

  add_series(ShapeKind::Sigma);
  if (area) add_series(ShapeKind::Tau);
  return rep;
}

}  // namespace smallcells
