#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smallcells/model.hpp"
#include "smallcells/quadrature.hpp"
#include "smallcells/special.hpp"

namespace smallcells {

// Edge-length rates (gamma1, gamma2) of a 2D typical cell; the analytic
// distributions below are all expressed in terms of these.
struct RatePair {
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  void validate() const;  // both positive and finite

  static RatePair from_edge_rates(const EdgeRates& rates);
};

// P(X + Y < p) for independent X ~ Exp(gamma1), Y ~ Exp(gamma2): Erlang CDF
// when the rates (numerically) coincide, hypoexponential CDF otherwise.
// The equal branch engages at |g1-g2| <= 1e-9 (g1+g2), where the distinct
// form loses too many digits to cancellation.
double cdf_half_perimeter(const RatePair& rates, double p);

// P(sigma > eps, X+Y < p). Closed form on the two-piece region
// {y/x in [eps/(2-eps), 1], x+y < p} plus its mirror image; near-equal
// rates (relative gap <= 1e-7) use the equal-rate product form
// (1-eps) * Erlang CDF, which the closed form approaches quadratically.
double joint_sigma_perimeter(const RatePair& rates, double eps, double p);

// Independent evaluation of the same probability by adaptive quadrature
// over the region; this is the authority the closed candidates are checked
// against.
QuadResult joint_sigma_perimeter_quadrature(const RatePair& rates, double eps,
                                            double p,
                                            const QuadratureConfig& cfg = {});

struct PerimeterConditional {
  double value = 0.0;              // what cond_sigma_given_perimeter returns
  double formula_value = 0.0;      // transcribed closed-form candidate
  double quadrature_value = 0.0;   // region quadrature / CDF
  bool used_quadrature = false;    // candidate rejected by the cross-check
};

// P(sigma > eps | X+Y < p). Exactly 1-eps for (numerically) equal rates.
// For distinct rates the transcribed closed-form candidate is evaluated
// and cross-checked against the region quadrature; if they disagree by
// more than 1e-8 the quadrature value is returned and a diagnostic line is
// written to stderr (see sigma_perimeter_fallback_count()).
double cond_sigma_given_perimeter(const RatePair& rates, double eps, double p);
PerimeterConditional cond_sigma_given_perimeter_detail(
    const RatePair& rates, double eps, double p,
    const QuadratureConfig& cfg = {});

// Times the closed-form candidate lost against the quadrature since
// process start.
std::uint64_t sigma_perimeter_fallback_count();

// P(XY < a) for unit-rate independent exponentials, by three independent
// routes that must agree within 1e-8 (else NumericError):
//   direct:     int_0^inf e^-x (1 - e^{-a/x}) dx
//   transform:  1 - a int_2^inf e^{-sqrt(a) s} sqrt(s^2-4) ds
//               (evaluated after s = 2 + t^2, which removes the sqrt kink)
//   bessel:     1 - 2 sqrt(a) K1(2 sqrt(a))
struct AreaProbMethods {
  double direct = 0.0;
  double transform = 0.0;
  double bessel = 0.0;
  double max_spread = 0.0;  // largest pairwise deviation
};
AreaProbMethods prob_area_less_methods(double a,
                                       const QuadratureConfig& cfg = {});
double prob_area_less(double a, const QuadratureConfig& cfg = {});

// P(sigma > eps, XY < a) for the unit-rate cell. The public eps follows
// the [0,1]-normalized sigma; internally the wedge condition uses
// eps_hat = eps/2:
//   2 int_0^sqrt(a(1-e)/e) int_{e x/(1-e)}^{min(x, a/x)} e^{-x-y} dy dx,
// with e = eps_hat. err_out (optional) receives the quadrature error
// estimate.
double numerator_sigma_area(double eps, double a,
                            const QuadratureConfig& cfg = {},
                            double* err_out = nullptr);

// numerator_sigma_area / prob_area_less, clamped to [0,1].
double cond_sigma_given_area(double eps, double a,
                             const QuadratureConfig& cfg = {});

// P(max(X,Y) > eps | XY < a) via inclusion-exclusion:
// 2 P(X>eps, XY<a) - P(X>eps, Y>eps, XY<a), divided by P(XY<a).
double cond_tau_given_area(double eps, double a,
                           const QuadratureConfig& cfg = {});

// Least-squares fits of conditional-probability decay against the
// threshold: a power law p ~ exp(c) * a^exponent on log-log scale, and the
// alternative p ~ coeff / ln(1/a). Residuals are compared on the original
// scale; prefer_log_recip says which model wins.
struct DecayFit {
  double exponent = 0.0;
  double r_squared = 0.0;
  double power_ssr = 0.0;
  double log_recip_coeff = 0.0;
  double log_recip_ssr = 0.0;
  bool prefer_log_recip = false;
};
DecayFit fit_decay_exponent(
    const std::vector<std::pair<double, double>>& prob_by_threshold);

// The common rate when all edge rates agree to relative 1e-9, otherwise
// nullopt. The unit-rate area laws apply to an equal-rate model after
// rescaling: P(XY < a) = prob_area_less(g^2 a), tau thresholds scale by g.
std::optional<double> equal_rate(const EdgeRates& rates);

}  // namespace smallcells
