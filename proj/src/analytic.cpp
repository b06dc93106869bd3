#include "smallcells/analytic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "smallcells/common.hpp"

namespace smallcells {

namespace {

// Branch cut below which the distinct-rate CDF form is abandoned: the
// hypoexponential expression loses ~|g1-g2|^-1 digits to cancellation as
// the rates merge.
constexpr double kEqualRateCut = 1e-9;
// The closed joint form carries a 1/(g1^2-g2^2) prefactor; below this gap
// the equal-rate product form is the more accurate of the two (their
// difference is O(gap^2)).
constexpr double kJointEqualCut = 1e-7;

bool rates_equal(double g1, double g2, double cut) {
  return std::fabs(g1 - g2) <= cut * (g1 + g2);
}

// Erlang(rate, 2) CDF at rate*p = x: 1 - (1+x) e^-x, in the
// cancellation-free form (1 - e^-x) - x e^-x.
double erlang2_cdf(double x) {
  return -std::expm1(-x) - x * std::exp(-x);
}

// (1 - e^-x)/x, continuous at 0.
double one_minus_exp_over(double x) {
  return x == 0.0 ? 1.0 : -std::expm1(-x) / x;
}

std::atomic<std::uint64_t> g_sigma_perimeter_fallbacks{0};

// Transcribed closed-form candidate for P(sigma>eps | P<p) at distinct
// rates. Kept byte-for-byte faithful to its source expression on purpose:
// cond_sigma_given_perimeter_detail cross-checks it against the region
// quadrature and the quadrature wins any disagreement.
double sigma_perimeter_formula(double g1, double g2, double eps, double p) {
  double num =
      4.0 * g1 * g2 *
      ((g1 - g2) * eps + g1 - g2 -
       (eps * (g1 - g2) - 2.0 * g1) * std::exp(-0.5 * (g1 + g2) * p) -
       (g1 + g2) * std::exp(-0.5 * (2.0 * g1 - eps * (g1 - g2)) * p));
  double den = (g1 + g2) *
               (g1 * (1.0 - std::exp(-g2 * p)) -
                g2 * (1.0 - std::exp(-g1 * p))) *
               (eps * (g1 - g2) - 2.0 * g1);
  return num / den;
}

// Exact integral of alpha*beta*e^{-alpha x - beta y} over the wedge
// {x > y >= c x, x + y < p} with c = eps/(2-eps):
//   c1 * A * p * (g(A p) - g(B p)),
// c1 = 2 alpha beta / (alpha^2 - beta^2), A = (alpha+beta)/2,
// B = alpha - eps (alpha - beta)/2, g = one_minus_exp_over. g is evaluated
// via expm1 and the g-difference is the only subtraction, so the form
// stays accurate for any well-separated rates; the near-equal regime
// (where c1 blows up) is routed to the equal-rate branch instead.
double joint_wedge_piece(double alpha, double beta, double eps, double p) {
  double c1 = 2.0 * alpha * beta / ((alpha - beta) * (alpha + beta));
  double big_a = 0.5 * (alpha + beta);
  double big_b = alpha - 0.5 * eps * (alpha - beta);
  return c1 * big_a * p *
         (one_minus_exp_over(big_a * p) - one_minus_exp_over(big_b * p));
}

// The joint probabilities are defined (and zero) at p == 0; conditioning
// on {X+Y < 0} is not, so the conditional keeps p > 0.
void check_eps_p(double eps, double p, const char* who,
                 bool allow_zero_p = false) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument(std::string(who) +
                                ": eps must lie strictly in (0, 1)");
  const bool ok = allow_zero_p ? p >= 0.0 : p > 0.0;
  if (!ok || !std::isfinite(p))
    throw std::invalid_argument(
        std::string(who) + (allow_zero_p ? ": p must be >= 0 and finite"
                                         : ": p must be positive and finite"));
}

}  // namespace

void RatePair::validate() const {
  if (!(gamma1 > 0.0) || !std::isfinite(gamma1) || !(gamma2 > 0.0) ||
      !std::isfinite(gamma2))
    throw std::invalid_argument("rates: both must be positive and finite");
}

RatePair RatePair::from_edge_rates(const EdgeRates& rates) {
  if (rates.rates.size() != 2)
    throw std::invalid_argument("rates: expected a 2D rate vector");
  RatePair r{rates.rates[0], rates.rates[1]};
  r.validate();
  return r;
}

double cdf_half_perimeter(const RatePair& rates, double p) {
  rates.validate();
  if (p < 0.0 || !std::isfinite(p))
    throw std::invalid_argument("cdf_half_perimeter: p must be >= 0");
  if (p == 0.0) return 0.0;
  double g1 = rates.gamma1, g2 = rates.gamma2;
  if (rates_equal(g1, g2, kEqualRateCut))
    return erlang2_cdf(0.5 * (g1 + g2) * p);
  return (g2 * std::expm1(-g1 * p) - g1 * std::expm1(-g2 * p)) / (g1 - g2);
}

double joint_sigma_perimeter(const RatePair& rates, double eps, double p) {
  rates.validate();
  check_eps_p(eps, p, "joint_sigma_perimeter", /*allow_zero_p=*/true);
  if (p == 0.0) return 0.0;
  double g1 = rates.gamma1, g2 = rates.gamma2;
  if (rates_equal(g1, g2, kJointEqualCut))
    return (1.0 - eps) * erlang2_cdf(0.5 * (g1 + g2) * p);
  return joint_wedge_piece(g1, g2, eps, p) + joint_wedge_piece(g2, g1, eps, p);
}

QuadResult joint_sigma_perimeter_quadrature(const RatePair& rates, double eps,
                                            double p,
                                            const QuadratureConfig& cfg) {
  rates.validate();
  check_eps_p(eps, p, "joint_sigma_perimeter_quadrature",
              /*allow_zero_p=*/true);
  if (p == 0.0) return QuadResult{0.0, 0.0};
  double g1 = rates.gamma1, g2 = rates.gamma2;
  double c = eps / (2.0 - eps);

  // Integrate out y exactly on [c x, min(x, p-x)] for both orderings of
  // the rates (the region is the {x > y} half of the symmetric event), and
  // run the adaptive rule on the two smooth x-pieces split at the kink
  // p/2.
  auto inner = [&](double x, double yhi) {
    double ylo = c * x;
    double span = yhi - ylo;
    if (span <= 0.0) return 0.0;
    double t1 = g1 * std::exp(-g1 * x) * std::exp(-g2 * ylo) *
                -std::expm1(-g2 * span);
    double t2 = g2 * std::exp(-g2 * x) * std::exp(-g1 * ylo) *
                -std::expm1(-g1 * span);
    return t1 + t2;
  };

  // Keep the absolute tolerance meaningful relative to the result scale,
  // which is bounded by P(P<p).
  QuadratureConfig local = cfg;
  double scale = cdf_half_perimeter(rates, p);
  if (scale > 0.0)
    local.abs_tol = std::max(1e-290, std::min(cfg.abs_tol, 0.5 * cfg.rel_tol * scale));

  QuadResult left = integrate([&](double x) { return inner(x, x); }, 0.0,
                              0.5 * p, local);
  QuadResult right = integrate([&](double x) { return inner(x, p - x); },
                               0.5 * p, p * (1.0 - 0.5 * eps), local);
  return {left.value + right.value, left.error + right.error,
          left.subdivisions + right.subdivisions};
}

PerimeterConditional cond_sigma_given_perimeter_detail(
    const RatePair& rates, double eps, double p, const QuadratureConfig& cfg) {
  rates.validate();
  check_eps_p(eps, p, "cond_sigma_given_perimeter");
  double g1 = rates.gamma1, g2 = rates.gamma2;
  PerimeterConditional out;
  if (rates_equal(g1, g2, kEqualRateCut)) {
    out.value = out.formula_value = out.quadrature_value = 1.0 - eps;
    return out;
  }
  double denom = cdf_half_perimeter(rates, p);
  out.formula_value = sigma_perimeter_formula(g1, g2, eps, p);
  out.quadrature_value =
      joint_sigma_perimeter_quadrature(rates, eps, p, cfg).value / denom;
  out.used_quadrature =
      !(std::fabs(out.formula_value - out.quadrature_value) <= 1e-8);
  if (out.used_quadrature) {
    g_sigma_perimeter_fallbacks.fetch_add(1, std::memory_order_relaxed);
    std::fprintf(stderr,
                 "cond_sigma_given_perimeter: closed-form candidate %.17g "
                 "disagrees with region quadrature %.17g at (gamma1=%.17g, "
                 "gamma2=%.17g, eps=%.17g, p=%.17g); using the quadrature "
                 "value\n",
                 out.formula_value, out.quadrature_value, g1, g2, eps, p);
  }
  out.value = out.used_quadrature ? out.quadrature_value : out.formula_value;
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

double cond_sigma_given_perimeter(const RatePair& rates, double eps,
                                  double p) {
  return cond_sigma_given_perimeter_detail(rates, eps, p).value;
}

std::uint64_t sigma_perimeter_fallback_count() {
  return g_sigma_perimeter_fallbacks.load(std::memory_order_relaxed);
}

AreaProbMethods prob_area_less_methods(double a, const QuadratureConfig& cfg) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("prob_area_less: requires a > 0");
  cfg.validate();
  AreaProbMethods out;

  // (i) direct: the integrand tends to 1 at 0+ and decays like e^-x.
  {
    auto f = [a](double x) {
      return x <= 0.0 ? 1.0 : std::exp(-x) * -std::expm1(-a / x);
    };
    out.direct = integrate(f, 0.0, cfg.tail_cutoff_exponent, cfg).value;
  }

  // (ii) transform: s = 2 + t^2 turns sqrt(s^2-4) into t*sqrt(t^2+4), so
  // the integrand is smooth at the lower endpoint:
  //   int_2^inf e^{-sqrt(a) s} sqrt(s^2-4) ds
  //     = 2 e^{-2 sqrt(a)} int_0^inf e^{-sqrt(a) t^2} t^2 sqrt(t^2+4) dt.
  {
    double sa = std::sqrt(a);
    double upper = std::sqrt((cfg.tail_cutoff_exponent + 14.0) / sa);
    auto f = [sa](double t) {
      return std::exp(-sa * t * t) * t * t * std::sqrt(t * t + 4.0);
    };
    double inner = integrate(f, 0.0, upper, cfg).value;
    out.transform = 1.0 - a * 2.0 * std::exp(-2.0 * sa) * inner;
  }

  // (iii) local Bessel K1.
  {
    double z = 2.0 * std::sqrt(a);
    out.bessel = 1.0 - z * bessel_k1(z);
  }

  out.max_spread = std::max({std::fabs(out.direct - out.transform),
                             std::fabs(out.direct - out.bessel),
                             std::fabs(out.transform - out.bessel)});
  if (!(out.max_spread <= 1e-8))
    throw NumericError(
        "prob_area_less: the three evaluation routes disagree at a=" +
        fmt17(a) + ": direct=" + fmt17(out.direct) + " transform=" +
        fmt17(out.transform) + " bessel=" + fmt17(out.bessel));
  return out;
}

double prob_area_less(double a, const QuadratureConfig& cfg) {
  return prob_area_less_methods(a, cfg).direct;
}

double numerator_sigma_area(double eps, double a, const QuadratureConfig& cfg,
                            double* err_out) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument(
        "numerator_sigma_area: eps must lie strictly in (0, 1)");
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("numerator_sigma_area: requires a > 0");
  cfg.validate();
  double ehat = 0.5 * eps;
  double k = ehat / (1.0 - ehat);  // lower wedge slope, in (0, 1)

  // On x in (0, sqrt(a)) the inner upper bound is x; beyond it, a/x. The
  // integrand under both bounds decays at least like e^{-(1+k)x}, so the
  // exponential tail cutoff applies unchanged.
  double split = std::min(std::sqrt(a), cfg.tail_cutoff_exponent);
  double upper = std::min(std::sqrt(a / k), cfg.tail_cutoff_exponent);
  auto near_piece = [k](double x) {
    return std::exp(-(1.0 + k) * x) * -std::expm1(-(1.0 - k) * x);
  };
  auto far_piece = [k, a](double x) {
    return std::exp(-(1.0 + k) * x) * -std::expm1(-(a / x - k * x));
  };
  QuadResult near = integrate(near_piece, 0.0, split, cfg);
  QuadResult far = split < upper
                       ? integrate(far_piece, split, upper, cfg)
                       : QuadResult{};
  if (err_out) *err_out = 2.0 * (near.error + far.error);
  return 2.0 * (near.value + far.value);
}

double cond_sigma_given_area(double eps, double a,
                             const QuadratureConfig& cfg) {
  double num = numerator_sigma_area(eps, a, cfg);
  double den = prob_area_less(a, cfg);
  return std::clamp(num / den, 0.0, 1.0);
}

double cond_tau_given_area(double eps, double a, const QuadratureConfig& cfg) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("cond_tau_given_area: requires eps > 0");
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("cond_tau_given_area: requires a > 0");
  cfg.validate();
  double tail = eps + cfg.tail_cutoff_exponent;

  // P(X > eps, XY < a)
  auto one_sided = [a](double x) {
    return std::exp(-x) * -std::expm1(-a / x);
  };
  double p1 = integrate(one_sided, eps, tail, cfg).value;

  // P(X > eps, Y > eps, XY < a): requires a > eps^2, and then
  // eps < x < a/eps with eps < y < a/x.
  double p2 = 0.0;
  if (a > eps * eps) {
    auto both = [a, eps](double x) {
      return std::exp(-x) * std::exp(-eps) * -std::expm1(-(a / x - eps));
    };
    p2 = integrate(both, eps, std::min(a / eps, tail), cfg).value;
  }
  double num = 2.0 * p1 - p2;
  double den = prob_area_less(a, cfg);
  return std::clamp(num / den, 0.0, 1.0);
}

DecayFit fit_decay_exponent(
    const std::vector<std::pair<double, double>>& prob_by_threshold) {
  if (prob_by_threshold.size() < 3)
    throw std::invalid_argument("fit_decay_exponent: need at least 3 pairs");
  for (const auto& [a, p] : prob_by_threshold)
    if (!(a > 0.0) || !(p > 0.0) || !std::isfinite(a) || !std::isfinite(p))
      throw std::invalid_argument(
          "fit_decay_exponent: thresholds and probabilities must be "
          "positive");
  double a_min = prob_by_threshold[0].first, a_max = a_min;
  for (const auto& [a, p] : prob_by_threshold) {
    a_min = std::min(a_min, a);
    a_max = std::max(a_max, a);
  }
  if (a_min == a_max)
    throw std::invalid_argument(
        "fit_decay_exponent: degenerate input (all thresholds equal)");

  DecayFit fit;
  double n = static_cast<double>(prob_by_threshold.size());

  // Power law: least squares of ln p against ln a.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [a, p] : prob_by_threshold) {
    double x = std::log(a), y = std::log(p);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double vxx = sxx - sx * sx / n;
  double vxy = sxy - sx * sy / n;
  double vyy = syy - sy * sy / n;
  fit.exponent = vxy / vxx;
  double intercept = (sy - fit.exponent * sx) / n;
  fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  for (const auto& [a, p] : prob_by_threshold) {
    double model = std::exp(intercept + fit.exponent * std::log(a));
    fit.power_ssr += (model - p) * (model - p);
  }

  // Alternative: p = coeff / ln(1/a), meaningful only below threshold 1.
  if (a_max < 1.0) {
    double szz = 0, szp = 0;
    for (const auto& [a, p] : prob_by_threshold) {
      double z = 1.0 / std::log(1.0 / a);
      szz += z * z;
      szp += z * p;
    }
    fit.log_recip_coeff = szp / szz;
    for (const auto& [a, p] : prob_by_threshold) {
      double model = fit.log_recip_coeff / std::log(1.0 / a);
      fit.log_recip_ssr += (model - p) * (model - p);
    }
    fit.prefer_log_recip = fit.log_recip_ssr < fit.power_ssr;
  } else {
    fit.log_recip_coeff = std::nan("");
    fit.log_recip_ssr = std::nan("");
    fit.prefer_log_recip = false;
  }
  return fit;
}

std::optional<double> equal_rate(const EdgeRates& rates) {
  if (rates.rates.empty()) return std::nullopt;
  double lo = rates.rates[0], hi = lo, sum = 0.0;
  for (double r : rates.rates) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
  }
  if (hi - lo <= 1e-9 * sum) return sum / static_cast<double>(rates.rates.size());
  return std::nullopt;
}

}  // namespace smallcells
