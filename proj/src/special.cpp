#include "smallcells/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "smallcells/common.hpp"

namespace smallcells {

namespace detail {

double e1_series(double x) {
  // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
  double sum = 0.0, p = 1.0;
  for (int k = 1; k <= 80; ++k) {
    p *= -x / k;                 // (-x)^k / k!
    double term = -p / k;
    sum += term;
    if (std::fabs(term) < 1e-18 * (std::fabs(sum) + 1e-300))
      return -std::numbers::egamma - std::log(x) + sum;
  }
  throw NumericError("exp_integral_e1: series did not converge");
}

double e1_continued_fraction(double x) {
  // E1(x) = e^-x * 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...)))), evaluated by
  // the modified Lentz scheme.
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 200; ++i) {
    double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    double delta = c * d;
    h *= delta;
    // 4 ulp-ish stop: delta can stall a couple of ulps away from 1.
    if (std::fabs(delta - 1.0) < 4e-16) return h * std::exp(-x);
  }
  throw NumericError("exp_integral_e1: continued fraction did not converge");
}

double bessel_k1_series(double z) {
  // K1(z) = ln(z/2) I1(z) + 1/z - (z/4) sum_k [psi(k+1)+psi(k+2)] t_k,
  // t_k = (z^2/4)^k / (k! (k+1)!), with I1(z) = (z/2) sum_k t_k.
  double q = 0.25 * z * z;
  double t = 1.0;                         // t_0
  double psi1 = -std::numbers::egamma;    // psi(1)
  double psi2 = psi1 + 1.0;               // psi(2)
  double sum_i = t;
  double sum_k = (psi1 + psi2) * t;
  for (int k = 1; k <= 120; ++k) {
    t *= q / (static_cast<double>(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    double di = t;
    double dk = (psi1 + psi2) * t;
    sum_i += di;
    sum_k += dk;
    if (std::fabs(dk) < 1e-18 * std::fabs(sum_k) &&
        std::fabs(di) < 1e-18 * std::fabs(sum_i)) {
      double i1 = 0.5 * z * sum_i;
      return std::log(0.5 * z) * i1 + 1.0 / z - 0.25 * z * sum_k;
    }
  }
  throw NumericError("bessel_k1: ascending series did not converge");
}

double bessel_k1_asymptotic(double z) {
  // K1(z) ~ sqrt(pi/(2z)) e^-z [1 + 3/(8z) - 15/(128 z^2) + ...], summed to
  // its smallest term (the expansion is divergent; optimal truncation
  // leaves an error of the order of that term, ~e^{-2z} relative).
  double sum = 1.0, term = 1.0;
  for (int k = 0; k < 60; ++k) {
    double next = term * (4.0 - (2.0 * k + 1.0) * (2.0 * k + 1.0)) /
                  (8.0 * z * (k + 1));
    if (std::fabs(next) >= std::fabs(term)) break;  // past optimal truncation
    sum += next;
    term = next;
    if (std::fabs(next) < 1e-18 * std::fabs(sum)) break;
  }
  return std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z) * sum;
}

}  // namespace detail

double exp_integral_e1(double x) {
  if (!(x > 0.0))
    throw std::invalid_argument("exp_integral_e1: requires x > 0");
  return x <= 1.0 ? detail::e1_series(x) : detail::e1_continued_fraction(x);
}

double bessel_k1(double z) {
  if (!(z > 0.0)) throw std::invalid_argument("bessel_k1: requires z > 0");
  return z <= detail::kBesselK1Seam ? detail::bessel_k1_series(z)
                                    : detail::bessel_k1_asymptotic(z);
}

}  // namespace smallcells
