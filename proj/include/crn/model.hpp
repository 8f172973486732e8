#pragma once
#include <utility>
#include <vector>

#include "crn/types.hpp"

namespace crn {

// SNR gap of un-coded MQAM at the given bit error rate: -ln(5*BER)/1.5.
// Requires 0 < ber < 0.2.
double snr_gap(double ber);

// Power spectral density of one OFDM sub-carrier at frequency offset f:
// t * (sin(pi f t) / (pi f t))^2, with the f -> 0 limit equal to t.
double ofdm_psd(double f, double t_sym);

// Interference per unit transmit power introduced to victim sub-channel j by
// a transmission on sub-channel l: the PSD integrated over j's band relative
// to l's center, scaled by the cross power gain. Adaptive Simpson quadrature
// at relative tolerance 1e-8. Indices are 0-based.
double interference_factor(const SystemParams& params, double cross_gain,
                           int tx_subchannel, int victim_subchannel);

// PSD normalization probe: integral of ofdm_psd over [-width, width],
// computed as a composite of per-lobe adaptive panels so oscillation cannot
// defeat the refinement. Converges to 1 as width grows.
double psd_window_integral(double t_sym, double width);

// Posterior that a sub-channel judged occupied is truly occupied (Eq. 2).
double posterior_occupied(double ql, double qm, double qf);
// Posterior that a sub-channel judged available is truly occupied (Eq. 3).
double posterior_missed(double ql, double qm, double qf);

// Fused k-out-of-n miss / false-alarm probabilities from per-detector
// detection and false-alarm probabilities (exact Poisson-binomial sums).
struct FusedSensing {
  double miss_qm;
  double false_qf;
};
FusedSensing fuse_k_out_of_n(const std::vector<double>& per_su_pd,
                             const std::vector<double>& per_su_pf, int k);

// Feasible open interval for the harvesting ratio of one SU:
// (eps/(chi*T), (T - tau)/T).
struct ThetaBounds {
  double lo;
  double hi;
  bool empty() const { return !(lo < hi); }
  double width() const { return hi - lo; }
};
ThetaBounds theta_bounds(const SecondaryUser& su, const SystemParams& params);

// Transmit power (chi*theta*T - eps)/(T - theta*T - tau); defined on
// [lo, hi), zero at the lower bound, strictly increasing.
double transmit_power(const SecondaryUser& su, double theta,
                      const SystemParams& params);

// H_{i,j} = |h_{i,j}|^2 / (Gamma * (omega*N0 + I_i)).
double snr_coefficient(const SecondaryUser& su, int subchannel,
                       const SystemParams& params);

// Eq. (5) rate of SU i on one sub-channel at harvesting ratio theta, in
// bps/Hz. Zero at both feasible endpoints; throws DomainError when the SNR
// coefficient is <= 0 and InfeasibleError outside [lo, hi].
double rate_per_subchannel(const SecondaryUser& su, int subchannel,
                           double theta, const SystemParams& params);

// Same quantity, but H <= 0 yields 0 instead of throwing. Allocation and
// constraint reporting need a total function over arbitrary gains.
double rate_per_subchannel_guarded(const SecondaryUser& su, int subchannel,
                                   double theta, const SystemParams& params);

// Eq. (6): sum of per-sub-channel rates over an index set; empty set -> 0.
double total_rate(const SecondaryUser& su, const std::vector<int>& subchannels,
                  double theta, const SystemParams& params);

// Eq. (4): posterior-weighted unit-power interference from SU i transmitting
// on `tx_subchannel` into PU m's band.
double weighted_interference(const SecondaryUser& su, int tx_subchannel,
                             const PrimaryUser& pu, const SensingModel& sensing,
                             const SystemParams& params);

// Builds the Scenario caches (overlap table and posteriors). Must be called
// after the scenario fields are populated.
void prepare_scenario(Scenario& scenario);

// Cache-backed Eq. (4) aggregate: sum of weighted_interference over all of SU
// i's allocated sub-channels, toward PU m. Matches the quadrature route.
double unit_interference(const Scenario& scenario, int su, int pu,
                         const std::vector<int>& tx_subchannels);

// Signed slack for every constraint of P1 at a fixed allocation and
// harvesting ratios (positive = satisfied). Reports, never throws.
ConstraintReport evaluate_constraints(const Scenario& scenario,
                                      const Allocation& allocation,
                                      const std::vector<double>& theta);

}  // namespace crn
