#include "crn/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "crn/errors.hpp"
#include "crn/model.hpp"

namespace crn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Highest-EFM SU among `pool`, ties toward the lower id; -1 if pool empty.
int best_efm(const Scenario& scenario, const std::vector<int>& pool) {
  int best = -1;
  double best_alpha = -kInf;
  for (int i : pool) {
    const double a = efm_factor(scenario.sus[i]);
    if (a > best_alpha) {
      best_alpha = a;
      best = i;
    }
  }
  return best;
}

// Best remaining sub-channel for SU i at theta_init, ties toward the lower
// index (`remaining` is kept sorted).
int best_subchannel(const Scenario& scenario, int su,
                    const std::vector<int>& remaining, double theta) {
  int best = -1;
  double best_rate = -kInf;
  for (int j : remaining) {
    const double r =
        rate_per_subchannel_guarded(scenario.sus[su], j, theta, scenario.params);
    if (r > best_rate) {
      best_rate = r;
      best = j;
    }
  }
  return best;
}

void take(EfmState& state, int su, int chan) {
  state.remaining.erase(
      std::find(state.remaining.begin(), state.remaining.end(), chan));
  auto& set = state.sets[su];
  set.insert(std::upper_bound(set.begin(), set.end(), chan), chan);
}

}  // namespace

double initial_theta(const SecondaryUser& su, const SystemParams& params) {
  const ThetaBounds b = theta_bounds(su, params);
  if (b.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "initial_theta: SU %d has an empty feasible interval "
                  "[%.17g, %.17g]",
                  su.id, b.lo, b.hi);
    throw InfeasibleError(buf);
  }
  const double T = params.slot_duration_s;
  return su.sensing_energy_j / (2.0 * su.harvest_rate_w * T) +
         0.5 * (1.0 - su.sensing_time_s / T);
}

std::vector<double> initial_thetas(const Scenario& scenario) {
  std::vector<double> out;
  out.reserve(scenario.sus.size());
  for (const auto& su : scenario.sus)
    out.push_back(initial_theta(su, scenario.params));
  return out;
}

double efm_factor(const SecondaryUser& su) {
  if (su.sensing_energy_j == 0.0) return kInf;
  return su.harvest_rate_w / su.sensing_energy_j;
}

Allocation allocate_efm(const Scenario& scenario,
                        const std::vector<double>& theta_init,
                        std::vector<EfmStep>* trace) {
  const int k = scenario.num_sus();
  EfmState state;
  state.remaining = scenario.sensing.available_set;
  state.rates.assign(k, 0.0);
  state.sets.assign(k, {});

  std::vector<int> rt_pool, nrt_pool;
  for (int i = 0; i < k; ++i)
    (scenario.sus[i].is_rt() ? rt_pool : nrt_pool).push_back(i);

  // Phase 1: RT SUs below requirement, highest EFM first. Restricting the
  // argmax to unsatisfied SUs is what lets the loop guard clear.
  while (!state.remaining.empty()) {
    std::vector<int> unsatisfied;
    for (int i : rt_pool)
      if (state.rates[i] < scenario.sus[i].rate_requirement)
        unsatisfied.push_back(i);
    if (unsatisfied.empty()) break;
    const int su = best_efm(scenario, unsatisfied);
    const int chan =
        best_subchannel(scenario, su, state.remaining, theta_init[su]);
    take(state, su, chan);
    state.rates[su] += rate_per_subchannel_guarded(scenario.sus[su], chan,
                                                   theta_init[su],
                                                   scenario.params);
    if (trace)
      trace->push_back({su, chan, efm_factor(scenario.sus[su]), true});
  }

  // Phase 2: drain everything that is left. C6 requires every available
  // sub-channel assigned, so an all-RT scenario falls back to the RT pool.
  const std::vector<int>& pool = nrt_pool.empty() ? rt_pool : nrt_pool;
  while (!state.remaining.empty() && !pool.empty()) {
    const int su = best_efm(scenario, pool);
    const int chan =
        best_subchannel(scenario, su, state.remaining, theta_init[su]);
    take(state, su, chan);
    state.rates[su] += rate_per_subchannel_guarded(scenario.sus[su], chan,
                                                   theta_init[su],
                                                   scenario.params);
    if (trace)
      trace->push_back({su, chan, efm_factor(scenario.sus[su]), false});
  }

  for (int i = 0; i < k; ++i) {
    if (state.sets[i].empty()) continue;
    (scenario.sus[i].is_rt() ? state.allocated_rt : state.allocated_nrt)
        .push_back(i);
  }
  return Allocation{std::move(state.sets)};
}

Allocation allocate_baseline(const Scenario& scenario,
                             const std::vector<double>& theta_init) {
  const int k = scenario.num_sus();
  EfmState state;
  state.remaining = scenario.sensing.available_set;
  state.rates.assign(k, 0.0);
  state.sets.assign(k, {});

  std::vector<int> rt_pool, nrt_pool;
  for (int i = 0; i < k; ++i)
    (scenario.sus[i].is_rt() ? rt_pool : nrt_pool).push_back(i);

  const auto best_pair = [&](const std::vector<int>& pool, int* su_out,
                             int* chan_out) {
    double best_rate = -kInf;
    *su_out = -1;
    for (int i : pool) {
      for (int j : state.remaining) {
        const double r = rate_per_subchannel_guarded(scenario.sus[i], j,
                                                     theta_init[i],
                                                     scenario.params);
        if (r > best_rate) {
          best_rate = r;
          *su_out = i;
          *chan_out = j;
        }
      }
    }
  };

  while (!state.remaining.empty()) {
    std::vector<int> unsatisfied;
    for (int i : rt_pool)
      if (state.rates[i] < scenario.sus[i].rate_requirement)
        unsatisfied.push_back(i);
    if (unsatisfied.empty()) break;
    int su = -1, chan = -1;
    best_pair(unsatisfied, &su, &chan);
    if (su < 0) break;
    take(state, su, chan);
    state.rates[su] += rate_per_subchannel_guarded(scenario.sus[su], chan,
                                                   theta_init[su],
                                                   scenario.params);
  }

  const std::vector<int>& pool = nrt_pool.empty() ? rt_pool : nrt_pool;
  while (!state.remaining.empty() && !pool.empty()) {
    int su = -1, chan = -1;
    best_pair(pool, &su, &chan);
    if (su < 0) break;
    take(state, su, chan);
    state.rates[su] += rate_per_subchannel_guarded(scenario.sus[su], chan,
                                                   theta_init[su],
                                                   scenario.params);
  }
  return Allocation{std::move(state.sets)};
}

Allocation allocate_fixed_count(const Scenario& scenario, int per_su) {
  if (per_su < 1) throw ConfigError("allocate_fixed_count: per_su must be >= 1");
  const auto& avail = scenario.sensing.available_set;
  const int k = scenario.num_sus();
  if (static_cast<int>(avail.size()) < per_su * k)
    throw ConfigError(
        "allocate_fixed_count: not enough available sub-channels");
  Allocation alloc;
  alloc.sets.assign(k, {});
  int next = 0;
  for (int i = 0; i < k; ++i)
    for (int f = 0; f < per_su; ++f) alloc.sets[i].push_back(avail[next++]);
  return alloc;
}

int satisfied_rt_count(const Scenario& scenario, const Allocation& allocation,
                       const std::vector<double>& theta) {
  int count = 0;
  for (int i = 0; i < scenario.num_sus(); ++i) {
    const SecondaryUser& su = scenario.sus[i];
    if (!su.is_rt()) continue;
    double rate = 0.0;
    if (i < static_cast<int>(allocation.sets.size()) &&
        i < static_cast<int>(theta.size()) && !std::isnan(theta[i])) {
      for (int j : allocation.sets[i])
        rate += rate_per_subchannel_guarded(su, j, theta[i], scenario.params);
    }
    if (rate >= su.rate_requirement) ++count;
  }
  return count;
}

}  // namespace crn
