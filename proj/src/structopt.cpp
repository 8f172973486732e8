#include "crn/structopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "crn/errors.hpp"
#include "crn/lambert.hpp"
#include "crn/model.hpp"

namespace crn {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kGuardFraction = 1e-9;  // strict C1/C2 need numeric guarding

struct Guarded {
  double lo;
  double hi;
  double width;
};

Guarded guarded_interval(const SecondaryUser& su, const SystemParams& params) {
  const ThetaBounds b = theta_bounds(su, params);
  if (b.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "SU %d has an empty feasible theta interval [%.17g, %.17g]",
                  su.id, b.lo, b.hi);
    throw InfeasibleError(buf);
  }
  const double delta = kGuardFraction * b.width();
  return Guarded{b.lo + delta, b.hi - delta, b.width()};
}

// d/dtheta of (a/T)*ln(1 + H b/a): -ln(1 + H b/a) + H c / (a + H b), with
// a = T - theta T - tau, b = chi theta T - eps, c = chi(T - tau) - eps.
double rate_foc_nat(const SecondaryUser& su, double h, double theta,
                    const SystemParams& params) {
  const double T = params.slot_duration_s;
  const double a = T - theta * T - su.sensing_time_s;
  const double b = su.harvest_rate_w * theta * T - su.sensing_energy_j;
  const double c = su.harvest_rate_w * (T - su.sensing_time_s) -
                   su.sensing_energy_j;
  return -std::log1p(h * b / a) + h * c / (a + h * b);
}

double rate_foc_nat_deriv(const SecondaryUser& su, double h, double theta,
                          const SystemParams& params) {
  const double T = params.slot_duration_s;
  const double a = T - theta * T - su.sensing_time_s;
  const double b = su.harvest_rate_w * theta * T - su.sensing_energy_j;
  const double c = su.harvest_rate_w * (T - su.sensing_time_s) -
                   su.sensing_energy_j;
  const double denom = a + h * b;
  return -h * T * c / (a * denom) -
         h * c * T * (h * su.harvest_rate_w - 1.0) / (denom * denom);
}

double transmit_power_deriv(const SecondaryUser& su, double theta,
                            const SystemParams& params) {
  const double T = params.slot_duration_s;
  const double a = T - theta * T - su.sensing_time_s;
  const double c = su.harvest_rate_w * (T - su.sensing_time_s) -
                   su.sensing_energy_j;
  return T * c / (a * a);
}

double transmit_power_raw(const SecondaryUser& su, double theta,
                          const SystemParams& params) {
  const double T = params.slot_duration_s;
  return (su.harvest_rate_w * theta * T - su.sensing_energy_j) /
         (T - theta * T - su.sensing_time_s);
}

// Safeguarded Newton/bisection root of a decreasing derivative on [lo, hi],
// given deriv(lo) > 0 > deriv(hi).
template <typename F, typename DF>
double foc_root(F deriv, DF deriv_prime, double lo, double hi, double init) {
  double l = lo, r = hi;
  double x = std::clamp(init, lo, hi);
  for (int it = 0; it < 200 && (r - l) > 1e-15 * (hi - lo); ++it) {
    const double g = deriv(x);
    if (g > 0.0)
      l = x;
    else
      r = x;
    const double gp = deriv_prime(x);
    double next = gp < 0.0 ? x - g / gp : 0.5 * (l + r);
    if (!(next > l && next < r)) next = 0.5 * (l + r);
    if (next == x) break;
    x = next;
  }
  return x;
}

}  // namespace

ThetaResult closed_form_theta(const SecondaryUser& su, double snr_coeff,
                              const SystemParams& params) {
  const Guarded g = guarded_interval(su, params);
  const double hchi = snr_coeff * su.harvest_rate_w;
  if (!(hchi > 1.0)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "closed_form_theta: H*chi = %.17g is not > 1 (SU %d)", hchi,
                  su.id);
    throw DomainError(buf);
  }
  const double T = params.slot_duration_s;
  const double c = su.harvest_rate_w * (T - su.sensing_time_s) -
                   su.sensing_energy_j;
  const double w = lambert_w0((hchi - 1.0) / M_E);
  const double theta = (T - su.sensing_time_s) / T -
                       w * snr_coeff * c / (T * (hchi - 1.0) * (1.0 + w));
  if (theta > g.lo && theta < g.hi) return {theta, true};
  return {std::clamp(theta, g.lo, g.hi), false};
}

double stationarity_residual(const SecondaryUser& su, double snr_coeff,
                             double theta, const SystemParams& params) {
  return rate_foc_nat(su, snr_coeff, theta, params);
}

ThetaResult per_su_theta_optimize(const SecondaryUser& su,
                                  const std::vector<int>& subchannels,
                                  const SystemParams& params) {
  if (subchannels.empty())
    throw DomainError("per_su_theta_optimize: empty sub-channel set");
  const Guarded g = guarded_interval(su, params);
  std::vector<double> coeffs;
  coeffs.reserve(subchannels.size());
  double mean_h = 0.0;
  bool any_concave = false;
  for (int j : subchannels) {
    const double h = snr_coefficient(su, j, params);
    mean_h += h;
    if (h > 0.0) coeffs.push_back(h);
    if (h * su.harvest_rate_w > 1.0) any_concave = true;
  }
  mean_h /= static_cast<double>(subchannels.size());
  if (!any_concave) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "per_su_theta_optimize: H*chi <= 1 on every sub-channel of "
                  "SU %d",
                  su.id);
    throw DomainError(buf);
  }

  const auto deriv = [&](double theta) {
    double s = 0.0;
    for (double h : coeffs) s += rate_foc_nat(su, h, theta, params);
    return s;
  };
  const auto deriv_prime = [&](double theta) {
    double s = 0.0;
    for (double h : coeffs) s += rate_foc_nat_deriv(su, h, theta, params);
    return s;
  };

  if (deriv(g.lo) <= 0.0) return {g.lo, false};
  if (deriv(g.hi) >= 0.0) return {g.hi, false};

  double init = 0.5 * (g.lo + g.hi);
  if (mean_h * su.harvest_rate_w > 1.0)
    init = closed_form_theta(su, mean_h, params).theta;
  return {foc_root(deriv, deriv_prime, g.lo, g.hi, init), true};
}

ThetaResult closed_form_theta_mean_h(const SecondaryUser& su,
                                     const std::vector<int>& subchannels,
                                     const SystemParams& params) {
  if (subchannels.empty())
    throw DomainError("closed_form_theta_mean_h: empty sub-channel set");
  double mean_h = 0.0;
  for (int j : subchannels) mean_h += snr_coefficient(su, j, params);
  mean_h /= static_cast<double>(subchannels.size());
  return closed_form_theta(su, mean_h, params);
}

bool concavity_certificate(const SecondaryUser& su, double snr_coeff,
                           const SystemParams& params, int grid_size) {
  if (grid_size < 3) return true;  // no interior points to test
  const Guarded g = guarded_interval(su, params);
  const double T = params.slot_duration_s;
  const auto objective = [&](double theta) {
    const double a = T - theta * T - su.sensing_time_s;
    const double b = su.harvest_rate_w * theta * T - su.sensing_energy_j;
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return (a / T) * std::log2(1.0 + snr_coeff * b / a);
  };
  const double h = (g.hi - g.lo) / (grid_size - 1);
  double prev = objective(g.lo);
  double curr = objective(g.lo + h);
  for (int i = 1; i + 1 < grid_size; ++i) {
    const double next = objective(g.lo + (i + 1) * h);
    if (prev - 2.0 * curr + next >= 0.0) return false;
    prev = curr;
    curr = next;
  }
  return true;
}

bool constraint_convexity_probe(const SecondaryUser& su,
                                const SystemParams& params, int grid_size) {
  if (grid_size < 3) return true;
  const Guarded g = guarded_interval(su, params);
  const double h = (g.hi - g.lo) / (grid_size - 1);
  double prev = transmit_power_raw(su, g.lo, params);
  double curr = transmit_power_raw(su, g.lo + h, params);
  for (int i = 1; i + 1 < grid_size; ++i) {
    const double next = transmit_power_raw(su, g.lo + (i + 1) * h, params);
    if (prev - 2.0 * curr + next <= 0.0) return false;
    prev = curr;
    curr = next;
  }
  return true;
}

// --------------------------- dual decomposition ----------------------------

DualState DualState::zeros(int num_sus, int num_pus) {
  DualState d;
  d.lambda.assign(num_sus, 0.0);
  d.mu.assign(num_sus, 0.0);
  d.nu.assign(num_pus, 0.0);
  d.rho_rt.assign(num_sus, 0.0);
  d.rho_nrt.assign(num_sus, 0.0);
  return d;
}

const char* to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::kClosedForm:
      return "closed-form";
    case SolveMethod::kDualSubgradient:
      return "dual-subgradient";
    case SolveMethod::kGridOracle:
      return "grid-oracle";
  }
  return "unknown";
}

namespace {

struct Subgradients {
  std::vector<double> c1;  // eps - chi theta T, per SU (0 if unallocated)
  std::vector<double> c2;  // theta T + tau - T
  std::vector<double> c3;  // sum p I - I_th, per PU
  std::vector<double> c4;  // req - rate, RT SUs
  std::vector<double> c5;  // zeta - rate, NRT SUs
};

// Natural scale of each constraint. The ascent runs on the scaled system
// (constraint / scale) so the dual prices are O(1) whether a threshold sits
// at 1e-13 W or at 1 W; the stored multipliers stay in raw Eq.-(12) units.
struct ConstraintScales {
  std::vector<double> c1;  // chi*T: harvested energy over a full slot
  double c2;               // T
  std::vector<double> c3;  // I_th per PU
  std::vector<double> c45; // max(1, requirement) per SU
};

ConstraintScales constraint_scales(const Scenario& scenario) {
  ConstraintScales s;
  const double T = scenario.params.slot_duration_s;
  for (const auto& su : scenario.sus)
    s.c1.push_back(su.harvest_rate_w * T);
  s.c2 = T;
  for (const auto& pu : scenario.pus)
    s.c3.push_back(pu.interference_threshold_w);
  for (const auto& su : scenario.sus)
    s.c45.push_back(std::max(1.0, su.rate_requirement));
  return s;
}

Subgradients compute_subgradients(const Scenario& scenario,
                                  const Allocation& allocation,
                                  const std::vector<double>& theta) {
  const int k = scenario.num_sus();
  const int l = scenario.num_pus();
  const double T = scenario.params.slot_duration_s;
  Subgradients g;
  g.c1.assign(k, 0.0);
  g.c2.assign(k, 0.0);
  g.c3.assign(l, 0.0);
  g.c4.assign(k, 0.0);
  g.c5.assign(k, 0.0);
  for (int m = 0; m < l; ++m)
    g.c3[m] = -scenario.pus[m].interference_threshold_w;
  for (int i = 0; i < k; ++i) {
    if (i >= static_cast<int>(allocation.sets.size()) ||
        allocation.sets[i].empty() || std::isnan(theta[i]))
      continue;
    const SecondaryUser& su = scenario.sus[i];
    g.c1[i] = su.sensing_energy_j - su.harvest_rate_w * theta[i] * T;
    g.c2[i] = theta[i] * T + su.sensing_time_s - T;
    const double p = transmit_power_raw(su, theta[i], scenario.params);
    for (int m = 0; m < l; ++m)
      g.c3[m] += p * unit_interference(scenario, i, m, allocation.sets[i]);
    double rate = 0.0;
    for (int j : allocation.sets[i])
      rate += rate_per_subchannel_guarded(su, j, theta[i], scenario.params);
    (su.is_rt() ? g.c4[i] : g.c5[i]) = su.rate_requirement - rate;
  }
  return g;
}

double scaled_magnitude(const std::vector<double>& g,
                        const std::vector<double>& scale) {
  double m = 0.0;
  for (size_t i = 0; i < g.size(); ++i)
    m = std::max(m, std::abs(g[i]) / scale[i]);
  return std::max(m, 1e-12);
}

double scaled_magnitude(const std::vector<double>& g, double scale) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v) / scale);
  return std::max(m, 1e-12);
}

// Scale-free primal violation: C3 relative to each PU's threshold (which can
// sit at 1e-13 W), rate constraints relative to max(1, requirement).
double relative_violation(const Scenario& scenario, const Subgradients& g) {
  double v = 0.0;
  for (int m = 0; m < scenario.num_pus(); ++m)
    v = std::max(v, g.c3[m] / scenario.pus[m].interference_threshold_w);
  for (int i = 0; i < scenario.num_sus(); ++i) {
    const double scale = std::max(1.0, scenario.sus[i].rate_requirement);
    v = std::max(v, g.c4[i] / scale);
    v = std::max(v, g.c5[i] / scale);
  }
  return std::max(0.0, v);
}

}  // namespace

double lagrangian_value(const Scenario& scenario, const Allocation& allocation,
                        const std::vector<double>& theta,
                        const DualState& duals) {
  const double T = scenario.params.slot_duration_s;
  double value = 0.0;
  std::vector<double> pu_load(scenario.num_pus(), 0.0);
  for (int i = 0; i < scenario.num_sus(); ++i) {
    if (i >= static_cast<int>(allocation.sets.size()) ||
        allocation.sets[i].empty())
      continue;
    const SecondaryUser& su = scenario.sus[i];
    double rate = 0.0;
    for (int j : allocation.sets[i])
      rate += rate_per_subchannel_guarded(su, j, theta[i], scenario.params);
    value -= rate;
    value += duals.lambda[i] *
             (su.sensing_energy_j - su.harvest_rate_w * theta[i] * T);
    value += duals.mu[i] * (theta[i] * T + su.sensing_time_s - T);
    const double rho = su.is_rt() ? duals.rho_rt[i] : duals.rho_nrt[i];
    value += rho * (su.rate_requirement - rate);
    const double p = transmit_power_raw(su, theta[i], scenario.params);
    for (int m = 0; m < scenario.num_pus(); ++m)
      pu_load[m] += p * unit_interference(scenario, i, m, allocation.sets[i]);
  }
  for (int m = 0; m < scenario.num_pus(); ++m)
    value += duals.nu[m] *
             (pu_load[m] - scenario.pus[m].interference_threshold_w);
  return value;
}

DualState dual_update(const Scenario& scenario, const Allocation& allocation,
                      const std::vector<double>& theta,
                      const DualState& duals) {
  const Subgradients g = compute_subgradients(scenario, allocation, theta);
  const ConstraintScales s = constraint_scales(scenario);
  DualState next = duals;
  if (!next.schedule.resolved) {
    // A c/t schedule only accumulates c*ln(T) of total movement, so the base
    // must let the first updates cross the active price region; 1/|g| alone
    // stalls on binding constraints.
    constexpr double kBoost = 16.0;
    next.schedule.alpha0 = kBoost / scaled_magnitude(g.c1, s.c1);
    next.schedule.beta0 = kBoost / scaled_magnitude(g.c2, s.c2);
    next.schedule.pi0 = kBoost / scaled_magnitude(g.c3, s.c3);
    next.schedule.psi0 = kBoost / scaled_magnitude(g.c4, s.c45);
    next.schedule.eta0 = kBoost / scaled_magnitude(g.c5, s.c45);
    next.schedule.resolved = true;
  }
  const double t = static_cast<double>(duals.iteration_t);
  // [m + step * g]+ on the scaled system, written back in raw units: the
  // scaled multiplier is m*scale, the scaled violation g/scale.
  const auto ascend = [t](std::vector<double>& m, const std::vector<double>& sg,
                          double base, const auto& scale_of) {
    for (size_t i = 0; i < m.size(); ++i) {
      const double scale = scale_of(i);
      m[i] = std::max(0.0, m[i] + base / t * sg[i] / (scale * scale));
    }
  };
  ascend(next.lambda, g.c1, next.schedule.alpha0,
         [&](size_t i) { return s.c1[i]; });
  ascend(next.mu, g.c2, next.schedule.beta0, [&](size_t) { return s.c2; });
  ascend(next.nu, g.c3, next.schedule.pi0, [&](size_t m) { return s.c3[m]; });
  ascend(next.rho_rt, g.c4, next.schedule.psi0,
         [&](size_t i) { return s.c45[i]; });
  ascend(next.rho_nrt, g.c5, next.schedule.eta0,
         [&](size_t i) { return s.c45[i]; });
  next.iteration_t = duals.iteration_t + 1;
  return next;
}

SolveReport dual_subgradient_solve(const Scenario& scenario,
                                   const Allocation& allocation,
                                   const DualSolveOptions& options) {
  const int k = scenario.num_sus();
  const int l = scenario.num_pus();
  std::vector<int> allocated;
  for (int i = 0; i < k; ++i)
    if (i < static_cast<int>(allocation.sets.size()) &&
        !allocation.sets[i].empty())
      allocated.push_back(i);

  SolveReport report;
  report.method = SolveMethod::kDualSubgradient;
  report.theta.assign(k, kNan);
  if (allocated.empty()) {
    report.converged = true;
    return report;
  }

  struct SuContext {
    Guarded interval;
    std::vector<double> coeffs;          // positive H_{i,j}
    std::vector<double> unit_interf;     // per PU
  };
  std::vector<SuContext> ctx(k);
  for (int i : allocated) {
    const SecondaryUser& su = scenario.sus[i];
    ctx[i].interval = guarded_interval(su, scenario.params);
    for (int j : allocation.sets[i]) {
      const double h = snr_coefficient(su, j, scenario.params);
      if (h > 0.0) ctx[i].coeffs.push_back(h);
    }
    ctx[i].unit_interf.resize(l);
    for (int m = 0; m < l; ++m)
      ctx[i].unit_interf[m] =
          unit_interference(scenario, i, m, allocation.sets[i]);
  }

  DualState duals = DualState::zeros(k, l);
  std::vector<double> theta(k, kNan);
  std::vector<double> best_theta;
  double best_objective = -std::numeric_limits<double>::infinity();
  double best_violation = 0.0;
  constexpr double kLn2 = 0.6931471805599453;

  int t = 0;
  bool converged = false;
  while (t < options.max_iterations) {
    ++t;
    // Per-SU concave maximization of the partial Lagrangian.
    for (int i : allocated) {
      const SecondaryUser& su = scenario.sus[i];
      const SuContext& c = ctx[i];
      const double rho = su.is_rt() ? duals.rho_rt[i] : duals.rho_nrt[i];
      double nu_w = 0.0;
      for (int m = 0; m < l; ++m) nu_w += duals.nu[m] * c.unit_interf[m];
      const double T = scenario.params.slot_duration_s;
      const auto deriv = [&](double th) {
        double s = 0.0;
        for (double h : c.coeffs)
          s += rate_foc_nat(su, h, th, scenario.params);
        s *= (1.0 + rho) / kLn2;
        s += duals.lambda[i] * su.harvest_rate_w * T - duals.mu[i] * T;
        s -= nu_w * transmit_power_deriv(su, th, scenario.params);
        return s;
      };
      if (deriv(c.interval.lo) <= 0.0) {
        theta[i] = c.interval.lo;
      } else if (deriv(c.interval.hi) >= 0.0) {
        theta[i] = c.interval.hi;
      } else {
        double lo = c.interval.lo, hi = c.interval.hi;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          (deriv(mid) > 0.0 ? lo : hi) = mid;
        }
        theta[i] = 0.5 * (lo + hi);
      }
    }

    // Primal bookkeeping at the current iterate.
    const Subgradients g = compute_subgradients(scenario, allocation, theta);
    const double violation = relative_violation(scenario, g);
    double objective = 0.0;
    for (int i : allocated) {
      const SecondaryUser& su = scenario.sus[i];
      for (int j : allocation.sets[i])
        objective +=
            rate_per_subchannel_guarded(su, j, theta[i], scenario.params);
    }
    if (violation <= options.tol_primal && objective > best_objective) {
      best_objective = objective;
      best_theta = theta;
      best_violation = violation;
    }

    const DualState next = dual_update(scenario, allocation, theta, duals);
    // Movement is measured on the scaled multipliers so the stop test is
    // unit-free.
    const ConstraintScales sc = constraint_scales(scenario);
    double movement = 0.0;
    const auto track = [&movement](const std::vector<double>& a,
                                   const std::vector<double>& b,
                                   const auto& scale_of) {
      for (size_t i = 0; i < a.size(); ++i)
        movement = std::max(movement, std::abs(a[i] - b[i]) * scale_of(i));
    };
    track(next.lambda, duals.lambda, [&](size_t i) { return sc.c1[i]; });
    track(next.mu, duals.mu, [&](size_t) { return sc.c2; });
    track(next.nu, duals.nu, [&](size_t m) { return sc.c3[m]; });
    track(next.rho_rt, duals.rho_rt, [&](size_t i) { return sc.c45[i]; });
    track(next.rho_nrt, duals.rho_nrt, [&](size_t i) { return sc.c45[i]; });
    duals = next;

    if (movement < options.tol_dual && violation <= options.tol_primal) {
      converged = true;
      break;
    }
  }

  report.iterations = t;
  report.converged = converged;
  if (!best_theta.empty()) {
    report.theta = best_theta;
    report.objective = best_objective;
    report.max_constraint_violation = best_violation;
  } else {
    // No feasible iterate: report the last one with its violation.
    report.theta = theta;
    double objective = 0.0;
    for (int i : allocated)
      for (int j : allocation.sets[i])
        objective += rate_per_subchannel_guarded(scenario.sus[i], j, theta[i],
                                                 scenario.params);
    report.objective = objective;
    const Subgradients g = compute_subgradients(scenario, allocation, theta);
    report.max_constraint_violation = relative_violation(scenario, g);
    report.converged = false;
    report.flags.push_back("no feasible iterate found");
  }
  return report;
}

// --------------------------- production chain ------------------------------

namespace {

// Dense grid + golden refinement over the guarded interval; the production
// fallback for SUs whose objective is not certified concave. Intentionally
// separate from the oracle module's grid solver.
double fallback_grid_theta(const SecondaryUser& su,
                           const std::vector<int>& subchannels,
                           const SystemParams& params) {
  const Guarded g = guarded_interval(su, params);
  const auto objective = [&](double th) {
    double s = 0.0;
    for (int j : subchannels)
      s += rate_per_subchannel_guarded(su, j, th, params);
    return s;
  };
  const int n = 1001;
  double best_x = g.lo, best_v = objective(g.lo);
  const double h = (g.hi - g.lo) / (n - 1);
  for (int i = 1; i < n; ++i) {
    const double x = g.lo + i * h;
    const double v = objective(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double lo = std::max(g.lo, best_x - h), hi = std::min(g.hi, best_x + h);
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SolveReport solve_structure(const Scenario& scenario,
                            const Allocation& allocation,
                            const SolveOptions& options) {
  if (options.method == SolveMethod::kDualSubgradient)
    return dual_subgradient_solve(scenario, allocation, options.dual);

  const int k = scenario.num_sus();
  SolveReport report;
  report.method = SolveMethod::kClosedForm;
  report.theta.assign(k, kNan);
  for (int i = 0; i < k; ++i) {
    if (i >= static_cast<int>(allocation.sets.size()) ||
        allocation.sets[i].empty())
      continue;
    try {
      report.theta[i] =
          per_su_theta_optimize(scenario.sus[i], allocation.sets[i],
                                scenario.params)
              .theta;
    } catch (const DomainError&) {
      report.theta[i] =
          fallback_grid_theta(scenario.sus[i], allocation.sets[i],
                              scenario.params);
      report.flags.push_back("SU " + std::to_string(i) +
                             ": H*chi <= 1 on all sub-channels; grid "
                             "fallback, no optimality claim");
    }
  }

  const ConstraintReport slacks =
      evaluate_constraints(scenario, allocation, report.theta);
  double c3_violation = 0.0, rate_violation = 0.0;
  for (const auto& e : slacks.entries) {
    if (e.slack >= 0.0) continue;
    if (e.kind == ConstraintSlack::Kind::kC3) {
      const double scale =
          scenario.pus[e.index].interference_threshold_w;
      c3_violation = std::max(c3_violation, -e.slack / scale);
    } else if (e.kind == ConstraintSlack::Kind::kC4 ||
               e.kind == ConstraintSlack::Kind::kC5) {
      const double scale =
          std::max(1.0, scenario.sus[e.index].rate_requirement);
      rate_violation = std::max(rate_violation, -e.slack / scale);
    }
  }

  if (c3_violation > options.primal_tol) {
    // The analytic solution ignores the interference coupling; hand the
    // instance to the dual solver.
    SolveReport dual = dual_subgradient_solve(scenario, allocation,
                                              options.dual);
    dual.flags.insert(dual.flags.begin(),
                      "closed-form solution violates C3; dual fallback");
    return dual;
  }

  double objective = 0.0;
  for (int i = 0; i < k; ++i) {
    if (std::isnan(report.theta[i])) continue;
    for (int j : allocation.sets[i])
      objective += rate_per_subchannel_guarded(scenario.sus[i], j,
                                               report.theta[i],
                                               scenario.params);
  }
  report.objective = objective;
  report.max_constraint_violation = std::max(c3_violation, rate_violation);
  report.converged = report.max_constraint_violation <= options.primal_tol;
  if (rate_violation > options.primal_tol)
    report.flags.push_back(
        "rate requirement unmeetable at the per-SU optimum");
  return report;
}

}  // namespace crn
