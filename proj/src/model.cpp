#include "crn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "crn/errors.hpp"
#include "crn/quadrature.hpp"

namespace crn {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void domain_fail(const char* fmt, double v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, v);
  throw DomainError(buf);
}

}  // namespace

double snr_gap(double ber) {
  if (!(ber > 0.0 && ber <= 0.2))
    domain_fail("snr_gap: BER %.17g outside (0, 0.2]", ber);
  return -std::log(5.0 * ber) / 1.5;
}

double ofdm_psd(double f, double t_sym) {
  if (!(t_sym > 0.0))
    domain_fail("ofdm_psd: symbol duration %.17g must be positive", t_sym);
  const double u = M_PI * f * t_sym;
  if (u == 0.0) return t_sym;
  const double s = std::sin(u) / u;
  return t_sym * s * s;
}

double interference_factor(const SystemParams& params, double cross_gain,
                           int tx_subchannel, int victim_subchannel) {
  const int n = params.num_subchannels;
  if (tx_subchannel < 0 || tx_subchannel >= n || victim_subchannel < 0 ||
      victim_subchannel >= n)
    throw DomainError("interference_factor: sub-channel index out of range");
  if (cross_gain == 0.0) return 0.0;
  const double w = params.subchannel_bandwidth_hz;
  const double t = params.symbol_duration_s;
  // Victim band relative to the transmit sub-channel center.
  const double k = victim_subchannel - tx_subchannel;
  const double lo = (k - 0.5) * w;
  const double hi = (k + 0.5) * w;
  const double integral =
      adaptive_simpson([t](double f) { return ofdm_psd(f, t); }, lo, hi);
  return cross_gain * integral;
}

double psd_window_integral(double t_sym, double width) {
  if (!(t_sym > 0.0 && width > 0.0))
    throw DomainError("psd_window_integral: t_sym and width must be positive");
  // One panel per sinc lobe: [k/t, (k+1)/t]. Kahan-summed from the main lobe
  // outward; the integrand is even.
  const double lobe = 1.0 / t_sym;
  const auto f = [t_sym](double x) { return ofdm_psd(x, t_sym); };
  QuadratureOptions opts;
  opts.rel_tol = 1e-10;
  double sum = adaptive_simpson(f, -std::min(lobe, width),
                                std::min(lobe, width), opts);
  double comp = 0.0;
  for (double a = lobe; a < width; a += lobe) {
    const double b = std::min(a + lobe, width);
    const double term = 2.0 * adaptive_simpson(f, a, b, opts);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double posterior_occupied(double ql, double qm, double qf) {
  if (!(ql >= 0 && ql <= 1 && qm >= 0 && qm <= 1 && qf >= 0 && qf <= 1))
    throw DomainError("posterior_occupied: probabilities must be in [0, 1]");
  const double num = ql * (1.0 - qm);
  const double den = num + (1.0 - ql) * qf;
  if (den <= 0.0)
    throw DomainError(
        "posterior_occupied: degenerate inputs (zero probability of a "
        "'busy' verdict)");
  return num / den;
}

double posterior_missed(double ql, double qm, double qf) {
  if (!(ql >= 0 && ql <= 1 && qm >= 0 && qm <= 1 && qf >= 0 && qf <= 1))
    throw DomainError("posterior_missed: probabilities must be in [0, 1]");
  const double num = ql * qm;
  const double den = num + (1.0 - ql) * (1.0 - qf);
  if (den <= 0.0)
    throw DomainError(
        "posterior_missed: degenerate inputs (zero probability of an "
        "'idle' verdict)");
  return num / den;
}

FusedSensing fuse_k_out_of_n(const std::vector<double>& per_su_pd,
                             const std::vector<double>& per_su_pf, int k) {
  const int n = static_cast<int>(per_su_pd.size());
  if (n == 0) throw DomainError("fuse_k_out_of_n: empty detector list");
  if (per_su_pf.size() != per_su_pd.size())
    throw DomainError("fuse_k_out_of_n: pd/pf lists differ in length");
  if (k < 1 || k > n)
    throw DomainError("fuse_k_out_of_n: k must be in [1, n]");
  for (double p : per_su_pd)
    if (!(p >= 0 && p <= 1))
      throw DomainError("fuse_k_out_of_n: pd outside [0, 1]");
  for (double p : per_su_pf)
    if (!(p >= 0 && p <= 1))
      throw DomainError("fuse_k_out_of_n: pf outside [0, 1]");

  // Poisson-binomial tail P(#fires >= k) by the count-distribution recursion.
  const auto tail_at_least_k = [n, k](const std::vector<double>& p) {
    std::vector<double> dist(static_cast<size_t>(n) + 1, 0.0);
    dist[0] = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int c = i + 1; c >= 1; --c)
        dist[c] = dist[c] * (1.0 - p[i]) + dist[c - 1] * p[i];
      dist[0] *= 1.0 - p[i];
    }
    double tail = 0.0;
    for (int c = n; c >= k; --c) tail += dist[c];
    return std::min(1.0, tail);
  };

  return FusedSensing{1.0 - tail_at_least_k(per_su_pd),
                      tail_at_least_k(per_su_pf)};
}

ThetaBounds theta_bounds(const SecondaryUser& su, const SystemParams& params) {
  const double T = params.slot_duration_s;
  return ThetaBounds{su.sensing_energy_j / (su.harvest_rate_w * T),
                     (T - su.sensing_time_s) / T};
}

double transmit_power(const SecondaryUser& su, double theta,
                      const SystemParams& params) {
  const ThetaBounds b = theta_bounds(su, params);
  if (!(theta >= b.lo && theta < b.hi)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "transmit_power: theta %.17g outside [%.17g, %.17g)", theta,
                  b.lo, b.hi);
    throw InfeasibleError(buf);
  }
  const double T = params.slot_duration_s;
  const double energy = su.harvest_rate_w * theta * T - su.sensing_energy_j;
  const double tx_time = T - theta * T - su.sensing_time_s;
  return std::max(0.0, energy) / tx_time;
}

double snr_coefficient(const SecondaryUser& su, int subchannel,
                       const SystemParams& params) {
  const double h = su.gains.at(static_cast<size_t>(subchannel));
  const double noise = params.subchannel_bandwidth_hz *
                           params.noise_psd_w_per_hz +
                       su.pu_interference_w;
  return h * h / (params.snr_gap * noise);
}

namespace {

double rate_impl(const SecondaryUser& su, double coeff, double theta,
                 const SystemParams& params) {
  const ThetaBounds bounds = theta_bounds(su, params);
  if (!(theta >= bounds.lo && theta <= bounds.hi)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "rate_per_subchannel: theta %.17g outside [%.17g, %.17g]",
                  theta, bounds.lo, bounds.hi);
    throw InfeasibleError(buf);
  }
  // Both endpoints are 0 by definition: at the lower bound the stored energy
  // is zero, at the upper bound the time factor dominates the log divergence.
  if (theta == bounds.lo || theta == bounds.hi) return 0.0;
  const double T = params.slot_duration_s;
  const double a = T - theta * T - su.sensing_time_s;  // transmission time
  const double b = su.harvest_rate_w * theta * T - su.sensing_energy_j;
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return (a / T) * std::log2(1.0 + coeff * b / a);
}

}  // namespace

double rate_per_subchannel(const SecondaryUser& su, int subchannel,
                           double theta, const SystemParams& params) {
  const double coeff = snr_coefficient(su, subchannel, params);
  if (!(coeff > 0.0))
    domain_fail("rate_per_subchannel: SNR coefficient %.17g must be positive",
                coeff);
  return rate_impl(su, coeff, theta, params);
}

double rate_per_subchannel_guarded(const SecondaryUser& su, int subchannel,
                                   double theta, const SystemParams& params) {
  const double coeff = snr_coefficient(su, subchannel, params);
  if (!(coeff > 0.0)) return 0.0;
  return rate_impl(su, coeff, theta, params);
}

double total_rate(const SecondaryUser& su, const std::vector<int>& subchannels,
                  double theta, const SystemParams& params) {
  double sum = 0.0;
  for (int j : subchannels) sum += rate_per_subchannel(su, j, theta, params);
  return sum;
}

double weighted_interference(const SecondaryUser& su, int tx_subchannel,
                             const PrimaryUser& pu, const SensingModel& sensing,
                             const SystemParams& params) {
  if (!std::binary_search(sensing.available_set.begin(),
                          sensing.available_set.end(), tx_subchannel))
    throw DomainError(
        "weighted_interference: transmit sub-channel not in the available "
        "set");
  const auto& g = su.cross_gains.at(static_cast<size_t>(pu.id));
  double sum = 0.0;
  for (int j : pu.available_subchannels) {
    const double p1 = posterior_occupied(sensing.prior_ql[j], sensing.miss_qm[j],
                                         sensing.false_qf[j]);
    sum += p1 * interference_factor(params, g[j], tx_subchannel, j);
  }
  for (int j : pu.unavailable_subchannels) {
    const double p2 = posterior_missed(sensing.prior_ql[j], sensing.miss_qm[j],
                                       sensing.false_qf[j]);
    sum += p2 * interference_factor(params, g[j], tx_subchannel, j);
  }
  return sum;
}

void prepare_scenario(Scenario& scenario) {
  scenario.validate();
  const int n = scenario.params.num_subchannels;
  const double w = scenario.params.subchannel_bandwidth_hz;
  const double t = scenario.params.symbol_duration_s;
  scenario.psd_overlap.assign(static_cast<size_t>(2 * n) + 1, 0.0);
  for (int k = -n; k <= n; ++k) {
    scenario.psd_overlap[static_cast<size_t>(k + n)] = adaptive_simpson(
        [t](double f) { return ofdm_psd(f, t); }, (k - 0.5) * w, (k + 0.5) * w);
  }
  scenario.posterior_p1.assign(static_cast<size_t>(n), 0.0);
  scenario.posterior_p2.assign(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const auto& s = scenario.sensing;
    scenario.posterior_p1[j] =
        posterior_occupied(s.prior_ql[j], s.miss_qm[j], s.false_qf[j]);
    scenario.posterior_p2[j] =
        posterior_missed(s.prior_ql[j], s.miss_qm[j], s.false_qf[j]);
  }
}

double unit_interference(const Scenario& scenario, int su, int pu,
                         const std::vector<int>& tx_subchannels) {
  const int n = scenario.params.num_subchannels;
  const SecondaryUser& s = scenario.sus.at(static_cast<size_t>(su));
  const PrimaryUser& p = scenario.pus.at(static_cast<size_t>(pu));
  const auto& g = s.cross_gains.at(static_cast<size_t>(pu));
  double sum = 0.0;
  for (int l : tx_subchannels) {
    for (int j : p.available_subchannels)
      sum += scenario.posterior_p1[j] * g[j] *
             scenario.psd_overlap[static_cast<size_t>(j - l + n)];
    for (int j : p.unavailable_subchannels)
      sum += scenario.posterior_p2[j] * g[j] *
             scenario.psd_overlap[static_cast<size_t>(j - l + n)];
  }
  return sum;
}

ConstraintReport evaluate_constraints(const Scenario& scenario,
                                      const Allocation& allocation,
                                      const std::vector<double>& theta) {
  ConstraintReport report;
  const SystemParams& params = scenario.params;
  const double T = params.slot_duration_s;
  const int k = scenario.num_sus();

  const auto theta_of = [&](int i) {
    return i < static_cast<int>(theta.size()) ? theta[i] : kNan;
  };
  const auto sets_of = [&](int i) -> const std::vector<int>& {
    static const std::vector<int> empty;
    return i < static_cast<int>(allocation.sets.size()) ? allocation.sets[i]
                                                        : empty;
  };

  // C1 / C2 for every SU with a harvesting ratio.
  for (int i = 0; i < k; ++i) {
    const double th = theta_of(i);
    if (std::isnan(th)) continue;
    const SecondaryUser& su = scenario.sus[i];
    report.entries.push_back(
        {ConstraintSlack::Kind::kC1, i,
         su.harvest_rate_w * th * T - su.sensing_energy_j});
    report.entries.push_back(
        {ConstraintSlack::Kind::kC2, i, T - th * T - su.sensing_time_s});
  }

  // C3 per PU; the raw power expression is used so infeasible ratios still
  // produce a (diagnostic) number.
  for (int m = 0; m < scenario.num_pus(); ++m) {
    double load = 0.0;
    for (int i = 0; i < k; ++i) {
      const double th = theta_of(i);
      const auto& d = sets_of(i);
      if (std::isnan(th) || d.empty()) continue;
      const SecondaryUser& su = scenario.sus[i];
      const double energy = su.harvest_rate_w * th * T - su.sensing_energy_j;
      const double tx_time = T - th * T - su.sensing_time_s;
      load += energy / tx_time * unit_interference(scenario, i, m, d);
    }
    report.entries.push_back({ConstraintSlack::Kind::kC3, m,
                              scenario.pus[m].interference_threshold_w - load});
  }

  // C4 (RT) / C5 (NRT) rate surplus.
  for (int i = 0; i < k; ++i) {
    const SecondaryUser& su = scenario.sus[i];
    const double th = theta_of(i);
    double rate = 0.0;
    if (!std::isnan(th)) {
      const ThetaBounds b = theta_bounds(su, params);
      if (th >= b.lo && th <= b.hi)
        for (int j : sets_of(i))
          rate += rate_per_subchannel_guarded(su, j, th, params);
    }
    report.entries.push_back({su.is_rt() ? ConstraintSlack::Kind::kC4
                                         : ConstraintSlack::Kind::kC5,
                              i, rate - su.rate_requirement});
  }

  // C8 bounds 0 < theta < 1.
  for (int i = 0; i < k; ++i) {
    const double th = theta_of(i);
    if (std::isnan(th)) continue;
    report.entries.push_back(
        {ConstraintSlack::Kind::kC8, i, std::min(th, 1.0 - th)});
  }
  return report;
}

}  // namespace crn
