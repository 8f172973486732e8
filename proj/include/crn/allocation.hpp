#pragma once
#include <vector>

#include "crn/types.hpp"

namespace crn {

// Eq. (10): the midpoint of the open feasible interval
// (eps/(chi*T), (T - tau)/T). Throws InfeasibleError on an empty interval.
double initial_theta(const SecondaryUser& su, const SystemParams& params);

// Convenience: initial_theta for every SU of a scenario.
std::vector<double> initial_thetas(const Scenario& scenario);

// Energy figure of merit alpha = chi / eps; eps = 0 maps to +infinity
// (such an SU always wins the priority comparison).
double efm_factor(const SecondaryUser& su);

// Running state of the EFM allocation loop; exposed for step-level tests.
struct EfmState {
  std::vector<int> remaining;            // M_t, sorted
  std::vector<double> rates;             // R_i accumulated at theta_init
  std::vector<std::vector<int>> sets;    // D_i
  std::vector<int> allocated_rt;         // K_R^Al
  std::vector<int> allocated_nrt;        // K_N^Al
};

// One Phase-1/Phase-2 decision, for trace-based properties.
struct EfmStep {
  int su;
  int subchannel;
  double efm;
  bool phase1;
};

// Energy-figure-of-merit sub-channel allocation: Phase 1 serves RT SUs
// below their required rate in decreasing EFM order, Phase 2 hands every
// remaining sub-channel to the NRT pool (or back to the RT pool when there
// are no NRT SUs) by the same preference. Ties break toward the lower SU id
// and lower sub-channel index. Never fails; unmet rate requirements surface
// through evaluate_constraints.
Allocation allocate_efm(const Scenario& scenario,
                        const std::vector<double>& theta_init,
                        std::vector<EfmStep>* trace = nullptr);

// Comparison baseline: repeatedly assigns the globally best (SU, sub-channel)
// rate pair among RT SUs still below requirement, then drains the remainder
// to the NRT pool by the same global max-rate rule.
Allocation allocate_baseline(const Scenario& scenario,
                             const std::vector<double>& theta_init);

// Deterministic fixed-count allocation: the first f still-unassigned
// available sub-channels to SU 0, the next f to SU 1, ... Used by the
// structure-optimization experiments where every SU holds exactly f
// sub-channels.
Allocation allocate_fixed_count(const Scenario& scenario, int per_su);

// Number of RT SUs whose total rate at the given ratios meets R^req.
int satisfied_rt_count(const Scenario& scenario, const Allocation& allocation,
                       const std::vector<double>& theta);

}  // namespace crn
