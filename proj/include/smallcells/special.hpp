#pragma once

namespace smallcells {

// Exponential integral E1(x) = int_x^inf e^-t / t dt, x > 0.
// Power series with the Euler-Mascheroni constant for x <= 1, modified
// Lentz continued fraction for x > 1; relative error <= 1e-12 across the
// positive axis.
double exp_integral_e1(double x);

// Modified Bessel function K1(z), z > 0. Ascending series for z below the
// seam, optimally truncated asymptotic expansion above it. Used as a
// cross-check oracle (P(XY<a) = 1 - 2 sqrt(a) K1(2 sqrt(a))), never as a
// primary evaluation path.
double bessel_k1(double z);

namespace detail {
// Both branches exposed so tests can probe agreement at the seam.
double bessel_k1_series(double z);
double bessel_k1_asymptotic(double z);
double e1_series(double x);
double e1_continued_fraction(double x);
constexpr double kBesselK1Seam = 9.5;
}  // namespace detail

}  // namespace smallcells
