#pragma once
#include <functional>
#include <vector>

#include "crn/structopt.hpp"
#include "crn/types.hpp"

// Brute-force reference solvers used for validation. The rate/power
// arithmetic here is written independently of the model module (log1p route)
// so agreement between solver and oracle is meaningful.
namespace crn::oracle {

struct GridSpec {
  int points = 10001;
  int refine_iterations = 80;  // golden-section refinement
};

struct GridOptimum {
  double theta;
  double value;
  bool flat;  // objective constant on the grid; theta is the midpoint
};

// Independent evaluation of Eq. (5)/(6) used by every oracle below.
double rate(const SecondaryUser& su, int subchannel, double theta,
            const SystemParams& params);
double sum_rate(const SecondaryUser& su, const std::vector<int>& subchannels,
                double theta, const SystemParams& params);

// Dense-grid + golden-section maximization of an arbitrary objective on
// [lo, hi]; exposed so tests can probe synthetic objectives.
GridOptimum grid_maximize(const std::function<double(double)>& objective,
                          double lo, double hi, const GridSpec& grid = {});

// Per-SU unconstrained optimum over the guarded feasible interval; accuracy
// well below 1e-10 of the interval width with the default spec.
GridOptimum grid_theta_optimum(const SecondaryUser& su,
                               const std::vector<int>& subchannels,
                               const SystemParams& params,
                               const GridSpec& grid = {});

struct ExhaustiveResult {
  Allocation allocation;
  double objective = 0.0;
  bool feasible_found = false;
};

// Enumerates every assignment of the available sub-channels to SUs (K^M
// bounded at 1e7, SizeError beyond), optimizes theta per SU by grid search,
// filters by C3/C4/C5 and returns the best. `reverse_order` flips the
// enumeration order; the result is identical because ties break
// lexicographically.
ExhaustiveResult exhaustive_allocation(const Scenario& scenario,
                                       const GridSpec& grid = {},
                                       bool reverse_order = false);

// Best feasible theta vector for a fixed allocation. Per-SU independent
// grids when C3 is inactive at the unconstrained optima (then exact up to
// grid accuracy); otherwise a refined product grid over at most 6 allocated
// SUs (SizeError beyond). The report's `accuracy` field records the final
// per-dimension spacing.
SolveReport constrained_grid_solve(const Scenario& scenario,
                                   const Allocation& allocation,
                                   const GridSpec& grid = {});

}  // namespace crn::oracle
