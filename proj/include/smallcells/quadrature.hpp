#pragma once

#include <functional>

namespace smallcells {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
  // Exponential integrands over [0, inf) are truncated at
  // tail_cutoff_exponent / rate; e^-46 ~ 1e-20 leaves the tail far below
  // the tolerances above.
  double tail_cutoff_exponent = 46.0;

  void validate() const;  // throws std::invalid_argument
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated, from the embedded lower-order rule
  int subdivisions = 0;
};

// Globally adaptive Gauss-Legendre integration on [a, b]: each interval is
// scored by the difference between a 12- and a 25-point rule, and the
// worst interval is bisected until the summed error estimate meets
// max(abs_tol, rel_tol * |integral|). Throws NumericError if the budget of
// max_subdivisions is exhausted or the integrand returns a non-finite
// value.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadratureConfig& cfg = {});

}  // namespace smallcells
