#pragma once
#include <cstdint>
#include <functional>

namespace crn {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  // Hard cap on the number of leaf intervals the adaptive refinement may
  // produce (2^20 by default). Exceeding it raises NumericError.
  std::int64_t max_intervals = 1 << 20;
};

// Adaptive Simpson integration of f over [a, b]. The local acceptance test is
// |S_fine - S_coarse| <= 15 * rel_tol * reference_scale, with the scale taken
// from the first whole-interval estimate so that near-zero lobes of an
// oscillatory integrand do not force unbounded refinement.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts = {});

}  // namespace crn
