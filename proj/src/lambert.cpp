#include "crn/lambert.hpp"

#include <cmath>
#include <cstdio>

#include "crn/errors.hpp"

namespace crn {
namespace {

constexpr double kInvE = 0.36787944117144233;  // exp(-1) rounded to double

double initial_guess(double x) {
  if (x < -0.32) {
    // Series around the branch point in p = sqrt(2*(1 + e*x)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + M_E * x)));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  if (x < 0.5) {
    // Taylor series of W0 at 0.
    return x * (1.0 + x * (-1.0 + x * (1.5 - 8.0 / 3.0 * x)));
  }
  if (x < 3.0) {
    return 0.4 + 0.3 * x;  // crude but inside Halley's basin
  }
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
}

}  // namespace

double lambert_w0(double x) {
  if (x < -kInvE) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "lambert_w0: x = %.17g is below -1/e", x);
    throw DomainError(buf);
  }
  if (x == -kInvE) return -1.0;
  if (x == 0.0) return 0.0;

  double w = initial_guess(x);
  const double tol = 1e-13 * std::max(1.0, std::abs(x));
  double best_w = w;
  double best_res = std::abs(w * std::exp(w) - x);
  for (int i = 0; i < 60; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) < best_res) {
      best_res = std::abs(f);
      best_w = w;
    }
    if (std::abs(f) <= tol) return w;
    // Halley step for f(w) = w*e^w - x.
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    double w_next = w - step;
    if (w_next < -1.0) w_next = -1.0 + 0.5 * (w + 1.0);  // stay on W0
    if (w_next == w) break;
    w = w_next;
  }
  // Near the branch point the residual stalls at rounding level, which is
  // well inside the contract; anywhere else this is a genuine failure.
  if (best_res <= 1e-12 * std::max(1.0, std::abs(x))) return best_w;
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "lambert_w0: no convergence at x = %.17g (residual %.3e)", x,
                best_res);
  throw NumericError(buf);
}

double solve_x_ln_x(double a, double b) {
  if (b == 0.0) return std::exp(a);  // x*ln(x) = a*x with x > 0
  const double arg = b * std::exp(-a);
  double w;
  try {
    w = lambert_w0(arg);
  } catch (const DomainError&) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "solve_x_ln_x: no real solution for a = %.17g, b = %.17g "
                  "(b*e^-a < -1/e)",
                  a, b);
    throw DomainError(buf);
  }
  const double x = b / w;
  const double residual = std::abs(x * std::log(x) - a * x - b);
  if (!(residual <= 1e-9 * std::max(1.0, std::abs(b)))) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "solve_x_ln_x: residual %.3e exceeds tolerance for "
                  "a = %.17g, b = %.17g",
                  residual, a, b);
    throw NumericError(buf);
  }
  return x;
}

}  // namespace crn
