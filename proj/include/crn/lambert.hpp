#pragma once

namespace crn {

// Principal branch W0 of the Lambert W function (inverse of w -> w*e^w on
// [-1, inf)). Halley iteration from a branch-aware initial guess; the result
// satisfies |W*e^W - x| <= 1e-12 * max(1, |x|). Throws DomainError for
// x < -1/e.
double lambert_w0(double x);

// Positive solution of x*ln(x) = a*x + b, i.e. x = b / W0(b*e^-a), with the
// b = 0 special case x = e^a. The returned value satisfies
// |x*ln(x) - a*x - b| <= 1e-9 * max(1, |b|). Throws DomainError when
// b*e^-a < -1/e (no real solution on the principal branch).
double solve_x_ln_x(double a, double b);

}  // namespace crn
