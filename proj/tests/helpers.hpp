#pragma once
#include <cmath>
#include <vector>

#include "crn/model.hpp"
#include "crn/types.hpp"

namespace crn::test {

inline SystemParams make_params() {
  SystemParams p;
  p.slot_duration_s = 1e-3;
  p.subchannel_bandwidth_hz = 62.5e3;
  p.noise_psd_w_per_hz = 1.6e-18;  // omega*N0 = 1e-13 W
  p.snr_gap = 1.0;
  p.symbol_duration_s = 1.6e-5;    // 1/omega
  p.start_frequency_hz = 900e6;
  p.num_subchannels = 4;
  return p;
}

// An SU whose SNR coefficient on every sub-channel equals `coeff` under
// make_params(): H = |h|^2 / (Gamma w N0) with w N0 = 1e-13.
inline SecondaryUser make_su(double chi, double eps, double tau, double coeff,
                             int num_subchannels = 4, int id = 0) {
  SecondaryUser su;
  su.id = id;
  su.harvest_rate_w = chi;
  su.sensing_energy_j = eps;
  su.sensing_time_s = tau;
  su.gains.assign(num_subchannels, std::sqrt(coeff * 1e-13));
  return su;
}

// Minimal two-PU scenario wrapper around explicit SUs; all sub-channels
// available, benign sensing, unit-free cross gains of the given scale.
inline Scenario make_scenario(std::vector<SecondaryUser> sus,
                              int num_subchannels, double i_threshold = 1.0,
                              double cross_gain = 0.0) {
  Scenario sc;
  sc.params = make_params();
  sc.params.num_subchannels = num_subchannels;
  const int half = num_subchannels / 2;
  for (int m = 0; m < 2; ++m) {
    PrimaryUser pu;
    pu.id = m;
    pu.interference_threshold_w = i_threshold;
    for (int j = m == 0 ? 0 : half; j < (m == 0 ? half : num_subchannels); ++j)
      pu.available_subchannels.push_back(j);
    sc.pus.push_back(pu);
  }
  for (size_t i = 0; i < sus.size(); ++i) {
    sus[i].id = static_cast<int>(i);
    if (static_cast<int>(sus[i].gains.size()) != num_subchannels)
      sus[i].gains.resize(num_subchannels,
                          sus[i].gains.empty() ? 0.0 : sus[i].gains.front());
    sus[i].cross_gains.assign(2,
                              std::vector<double>(num_subchannels, cross_gain));
    sc.sus.push_back(sus[i]);
  }
  sc.sensing.prior_ql.assign(num_subchannels, 0.2);
  sc.sensing.miss_qm.assign(num_subchannels, 0.03);
  sc.sensing.false_qf.assign(num_subchannels, 0.07);
  for (int j = 0; j < num_subchannels; ++j)
    sc.sensing.available_set.push_back(j);
  prepare_scenario(sc);
  return sc;
}

}  // namespace crn::test
