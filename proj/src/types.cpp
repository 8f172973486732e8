#include "crn/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "crn/errors.hpp"

namespace crn {
namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

void check_probability(double p, const std::string& what) {
  require(p >= 0.0 && p <= 1.0, what + " must be in [0, 1]");
}

void check_channel_indices(const std::vector<int>& v, int n,
                           const std::string& what) {
  for (int j : v)
    require(j >= 0 && j < n, what + ": sub-channel index out of range");
  require(std::is_sorted(v.begin(), v.end()), what + ": indices not sorted");
  require(std::adjacent_find(v.begin(), v.end()) == v.end(),
          what + ": duplicate indices");
}

}  // namespace

void SystemParams::validate() const {
  require(slot_duration_s > 0, "slot_duration must be positive");
  require(subchannel_bandwidth_hz > 0, "subchannel_bandwidth must be positive");
  require(noise_psd_w_per_hz > 0, "noise_psd must be positive");
  require(snr_gap > 0, "snr_gap must be positive");
  require(symbol_duration_s > 0, "symbol_duration must be positive");
  require(start_frequency_hz > 0, "start_frequency must be positive");
  require(num_subchannels >= 1, "num_subchannels must be >= 1");
}

void SecondaryUser::validate(const SystemParams& params) const {
  const std::string who = "SU " + std::to_string(id);
  require(harvest_rate_w > 0, who + ": harvest_rate must be positive");
  require(sensing_energy_j >= 0, who + ": sensing_energy must be >= 0");
  require(sensing_time_s > 0 && sensing_time_s < params.slot_duration_s,
          who + ": sensing_time must be in (0, T)");
  require(rate_requirement >= 0, who + ": rate_requirement must be >= 0");
  require(pu_interference_w >= 0, who + ": pu_interference must be >= 0");
  require(static_cast<int>(gains.size()) == params.num_subchannels,
          who + ": gains size must equal num_subchannels");
  for (double g : gains) require(g >= 0, who + ": gains must be >= 0");
  for (const auto& row : cross_gains) {
    require(static_cast<int>(row.size()) == params.num_subchannels,
            who + ": cross_gains row size must equal num_subchannels");
    for (double g : row) require(g >= 0, who + ": cross_gains must be >= 0");
  }
}

void PrimaryUser::validate(const SystemParams& params) const {
  const std::string who = "PU " + std::to_string(id);
  require(interference_threshold_w > 0,
          who + ": interference_threshold must be positive");
  check_channel_indices(available_subchannels, params.num_subchannels,
                        who + " available set");
  check_channel_indices(unavailable_subchannels, params.num_subchannels,
                        who + " unavailable set");
  std::set<int> avail(available_subchannels.begin(),
                      available_subchannels.end());
  for (int j : unavailable_subchannels)
    require(!avail.count(j), who + ": available/unavailable sets overlap");
}

void SensingModel::validate(const SystemParams& params) const {
  const auto n = static_cast<size_t>(params.num_subchannels);
  require(prior_ql.size() == n && miss_qm.size() == n && false_qf.size() == n,
          "sensing vectors must have one entry per sub-channel");
  for (size_t l = 0; l < n; ++l) {
    check_probability(prior_ql[l], "prior Q^L");
    check_probability(miss_qm[l], "miss Q^m");
    check_probability(false_qf[l], "false alarm Q^f");
  }
  check_channel_indices(available_set, params.num_subchannels,
                        "available set M");
}

bool Allocation::assigned(int su, int chan) const {
  if (su < 0 || su >= static_cast<int>(sets.size())) return false;
  return std::binary_search(sets[su].begin(), sets[su].end(), chan);
}

void Allocation::validate(const SensingModel& sensing) const {
  std::set<int> seen;
  std::set<int> avail(sensing.available_set.begin(),
                      sensing.available_set.end());
  for (size_t i = 0; i < sets.size(); ++i) {
    require(std::is_sorted(sets[i].begin(), sets[i].end()),
            "allocation sets must be sorted");
    for (int j : sets[i]) {
      require(avail.count(j), "allocated sub-channel not in available set");
      require(seen.insert(j).second,
              "sub-channel allocated to more than one SU");
    }
  }
}

double ConstraintReport::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) m = std::min(m, e.slack);
  return m;
}

double ConstraintReport::max_violation() const {
  double v = 0.0;
  for (const auto& e : entries) v = std::max(v, -e.slack);
  return v;
}

void Scenario::validate() const {
  params.validate();
  for (const auto& su : sus) {
    su.validate(params);
    if (!su.cross_gains.empty())
      require(su.cross_gains.size() == pus.size(),
              "cross_gains must have one row per PU");
  }
  for (const auto& pu : pus) pu.validate(params);
  sensing.validate(params);
}

}  // namespace crn
