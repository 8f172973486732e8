#include "crn/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "crn/errors.hpp"

namespace crn {
namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  double scale;  // reference magnitude for the relative test
  double rel_tol;
  std::int64_t intervals_left;
};

double simpson(double fa, double fm, double fb, double h) {
  return (fa + 4.0 * fm + fb) * (h / 6.0);
}

double refine(SimpsonState& st, double a, double m, double b, double fa,
              double fm, double fb, double whole) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * st.rel_tol * st.scale) {
    return left + right + err / 15.0;
  }
  if ((st.intervals_left -= 2) <= 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "adaptive Simpson did not converge: interval [%g, %g], "
                  "local error %.3e, scale %.3e",
                  a, b, std::abs(err) / 15.0, st.scale);
    throw NumericError(buf);
  }
  return refine(st, a, lm, m, fa, flm, fm, left) +
         refine(st, m, rm, b, fm, frm, fb, right);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = simpson(fa, fm, fb, b - a);
  // |whole| can be ~0 between lobes; fall back to an amplitude-based scale.
  const double amp = (std::abs(fa) + 4.0 * std::abs(fm) + std::abs(fb)) *
                     (std::abs(b - a) / 6.0);
  SimpsonState st{f, std::max({std::abs(whole), amp, 1e-300}), opts.rel_tol,
                  opts.max_intervals};
  return refine(st, a, m, b, fa, fm, fb, whole);
}

}  // namespace crn
