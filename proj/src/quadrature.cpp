#include "smallcells/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

#include "smallcells/common.hpp"

namespace smallcells {

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || rel_tol > 1e-3)
    throw std::invalid_argument("quadrature: rel_tol must be in (0, 1e-3]");
  if (!(abs_tol > 0.0) || abs_tol > 1e-3)
    throw std::invalid_argument("quadrature: abs_tol must be in (0, 1e-3]");
  if (max_subdivisions < 1)
    throw std::invalid_argument("quadrature: max_subdivisions must be >= 1");
  if (!(tail_cutoff_exponent > 0.0))
    throw std::invalid_argument(
        "quadrature: tail_cutoff_exponent must be positive");
}

namespace {

struct Rule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Legendre nodes by Newton iteration from the Chebyshev-like initial
// guesses; generated at runtime once per order instead of shipping tables.
Rule gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const Rule& low_rule() {
  static const Rule r = gauss_legendre(12);
  return r;
}
const Rule& high_rule() {
  static const Rule r = gauss_legendre(25);
  return r;
}

struct Interval {
  double a, b;
  double value;   // high-order estimate
  double error;   // |high - low|
};

struct ByError {
  bool operator()(const Interval& x, const Interval& y) const {
    return x.error < y.error;
  }
};

Interval evaluate(const std::function<double(double)>& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double lo = 0.0, hi = 0.0;
  const Rule& rl = low_rule();
  const Rule& rh = high_rule();
  for (std::size_t i = 0; i < rh.nodes.size(); ++i) {
    double v = f(mid + half * rh.nodes[i]);
    if (!std::isfinite(v))
      throw NumericError("quadrature: integrand returned a non-finite value");
    hi += rh.weights[i] * v;
  }
  for (std::size_t i = 0; i < rl.nodes.size(); ++i) {
    double v = f(mid + half * rl.nodes[i]);
    if (!std::isfinite(v))
      throw NumericError("quadrature: integrand returned a non-finite value");
    lo += rl.weights[i] * v;
  }
  hi *= half;
  lo *= half;
  return Interval{a, b, hi, std::fabs(hi - lo)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw std::invalid_argument("quadrature: non-finite interval endpoint");
  if (a == b) return {0.0, 0.0, 0};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<Interval, std::vector<Interval>, ByError> queue;
  Interval whole = evaluate(f, a, b);
  double total = whole.value, total_error = whole.error;
  queue.push(whole);
  int splits = 0;
  while (total_error > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total))) {
    if (splits >= cfg.max_subdivisions)
      throw NumericError(
          "quadrature: did not converge within " +
          std::to_string(cfg.max_subdivisions) + " subdivisions (error " +
          fmt17(total_error) + ")");
    Interval worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at floating-point resolution; its error can shrink no
      // further. Retire its error estimate and keep refining the rest.
      total_error -= worst.error;
      if (queue.empty()) break;
      continue;
    }
    Interval left = evaluate(f, worst.a, mid);
    Interval right = evaluate(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++splits;
  }
  return {sign * total, total_error, splits};
}

}  // namespace smallcells
