#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace crn {

enum class TrafficClass { kRealTime, kNonRealTime };

// Global constants of the slotted OFDM system. SI base units throughout.
struct SystemParams {
  double slot_duration_s = 1e-3;            // T
  double subchannel_bandwidth_hz = 62.5e3;  // omega
  double noise_psd_w_per_hz = 1.6e-18;      // N0 (omega*N0 = 1e-13 W)
  double snr_gap = 1.0;                     // Gamma
  double symbol_duration_s = 1.6e-5;        // OFDM symbol duration t
  double start_frequency_hz = 900e6;        // f_s
  int num_subchannels = 16;                 // N

  void validate() const;  // throws ConfigError on violated invariants
};

// One SU's energy/sensing/traffic profile and channel gains.
struct SecondaryUser {
  int id = 0;
  TrafficClass traffic = TrafficClass::kRealTime;
  double harvest_rate_w = 0.0;     // chi_i [J/s]
  double sensing_energy_j = 0.0;   // eps_{s_i}
  double sensing_time_s = 0.0;     // tau_{s_i}
  double rate_requirement = 0.0;   // R_i^req (RT) / zeta_i (NRT) [bps/Hz]
  double pu_interference_w = 0.0;  // I_i, configured input
  // h_{i,j} as drawn from the channel model; |h|^2 enters the SNR.
  std::vector<double> gains;
  // g_{i,l,m} power gain toward PU m when transmitting on sub-channel l,
  // indexed [m][l].
  std::vector<std::vector<double>> cross_gains;

  bool is_rt() const { return traffic == TrafficClass::kRealTime; }
  void validate(const SystemParams& params) const;
};

struct PrimaryUser {
  int id = 0;
  double interference_threshold_w = 0.0;    // I_m^th
  std::vector<int> available_subchannels;   // M_{A,m}, sorted
  std::vector<int> unavailable_subchannels; // M_{U,m}, sorted

  void validate(const SystemParams& params) const;
};

// Per-sub-channel priors and fused error probabilities plus the FC decision.
struct SensingModel {
  std::vector<double> prior_ql;      // Q_l^L
  std::vector<double> miss_qm;       // Q_l^m (fused)
  std::vector<double> false_qf;      // Q_l^f (fused)
  std::vector<int> available_set;    // M, sorted

  void validate(const SystemParams& params) const;
};

// Binary assignment f_{i,j} realized as per-SU sub-channel sets D_i.
struct Allocation {
  std::vector<std::vector<int>> sets;  // sets[i] = D_i, sorted

  bool assigned(int su, int chan) const;
  // Disjointness (C6/C7) and containment in the available set.
  void validate(const SensingModel& sensing) const;
};

struct ConstraintSlack {
  enum class Kind { kC1, kC2, kC3, kC4, kC5, kC8 };
  Kind kind;
  int index;     // SU id for C1/C2/C4/C5/C8, PU id for C3
  double slack;  // positive = satisfied
};

struct ConstraintReport {
  std::vector<ConstraintSlack> entries;

  double min_slack() const;
  // Largest violation magnitude (0 when everything is satisfied).
  double max_violation() const;
};

// Per-SU harvesting ratios with the resulting objective and slacks.
struct SlotSolution {
  std::vector<double> theta;  // size K; NaN for SUs without sub-channels
  double objective_sum_rate = 0.0;
  ConstraintReport slacks;
};

// A fully drawn problem instance plus caches derived from it.
struct Scenario {
  SystemParams params;
  std::vector<SecondaryUser> sus;
  std::vector<PrimaryUser> pus;
  SensingModel sensing;
  std::uint64_t seed = 0;
  std::string config_hash;

  // Caches filled by prepare_scenario(): spectral overlap of the OFDM PSD
  // with victim band at integer sub-channel offset k (index k + N), and the
  // posteriors of Eqs. (2)-(3) per sub-channel.
  std::vector<double> psd_overlap;
  std::vector<double> posterior_p1;
  std::vector<double> posterior_p2;

  int num_sus() const { return static_cast<int>(sus.size()); }
  int num_pus() const { return static_cast<int>(pus.size()); }
  void validate() const;
};

}  // namespace crn
