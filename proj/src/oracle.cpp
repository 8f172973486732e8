#include "crn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "crn/errors.hpp"
#include "crn/model.hpp"

namespace crn::oracle {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kGuard = 1e-9;

struct Interval {
  double lo, hi;
};

Interval guarded(const SecondaryUser& su, const SystemParams& params) {
  const double T = params.slot_duration_s;
  const double lo = su.sensing_energy_j / (su.harvest_rate_w * T);
  const double hi = (T - su.sensing_time_s) / T;
  if (!(lo < hi))
    throw InfeasibleError("oracle: empty feasible interval for SU " +
                          std::to_string(su.id));
  const double d = kGuard * (hi - lo);
  return {lo + d, hi - d};
}

double power(const SecondaryUser& su, double theta,
             const SystemParams& params) {
  const double T = params.slot_duration_s;
  return (su.harvest_rate_w * theta * T - su.sensing_energy_j) /
         (T - theta * T - su.sensing_time_s);
}

}  // namespace

double rate(const SecondaryUser& su, int subchannel, double theta,
            const SystemParams& params) {
  const double h = su.gains.at(static_cast<size_t>(subchannel));
  const double coeff =
      h * h / (params.snr_gap * (params.subchannel_bandwidth_hz *
                                     params.noise_psd_w_per_hz +
                                 su.pu_interference_w));
  if (coeff <= 0.0) return 0.0;
  const double T = params.slot_duration_s;
  const double tx_time = T - theta * T - su.sensing_time_s;
  const double energy = su.harvest_rate_w * theta * T - su.sensing_energy_j;
  if (tx_time <= 0.0 || energy <= 0.0) return 0.0;
  constexpr double kLn2 = 0.6931471805599453;
  return (tx_time / T) * std::log1p(coeff * energy / tx_time) / kLn2;
}

double sum_rate(const SecondaryUser& su, const std::vector<int>& subchannels,
                double theta, const SystemParams& params) {
  double s = 0.0;
  for (int j : subchannels) s += rate(su, j, theta, params);
  return s;
}

GridOptimum grid_maximize(const std::function<double(double)>& objective,
                          double lo, double hi, const GridSpec& grid) {
  if (grid.points < 3) throw DomainError("GridSpec.points must be >= 3");
  const double h = (hi - lo) / (grid.points - 1);
  double best_x = lo, best_v = objective(lo), min_v = best_v;
  for (int i = 1; i < grid.points; ++i) {
    const double x = lo + i * h;
    const double v = objective(x);
    min_v = std::min(min_v, v);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  if (best_v == min_v)
    return {0.5 * (lo + hi), best_v, true};

  double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < grid.refine_iterations; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, objective(x), false};
}

GridOptimum grid_theta_optimum(const SecondaryUser& su,
                               const std::vector<int>& subchannels,
                               const SystemParams& params,
                               const GridSpec& grid) {
  const Interval iv = guarded(su, params);
  return grid_maximize(
      [&](double th) { return sum_rate(su, subchannels, th, params); }, iv.lo,
      iv.hi, grid);
}

ExhaustiveResult exhaustive_allocation(const Scenario& scenario,
                                       const GridSpec& grid,
                                       bool reverse_order) {
  const auto& avail = scenario.sensing.available_set;
  const int m = static_cast<int>(avail.size());
  const int k = scenario.num_sus();
  if (m > 62 || m * std::log(static_cast<double>(k)) > std::log(1e7))
    throw SizeError("exhaustive_allocation: K^M exceeds 1e7");

  // Per-SU cache over channel-subset bitmasks.
  struct SuOpt {
    double theta;
    double rate;
    std::vector<double> load;  // per-PU interference at theta
  };
  std::vector<std::unordered_map<std::uint64_t, SuOpt>> cache(k);
  const auto solve_su = [&](int i, std::uint64_t mask) -> const SuOpt& {
    auto it = cache[i].find(mask);
    if (it != cache[i].end()) return it->second;
    SuOpt opt;
    opt.load.assign(scenario.num_pus(), 0.0);
    if (mask == 0) {
      opt.theta = kNan;
      opt.rate = 0.0;
    } else {
      std::vector<int> set;
      for (int q = 0; q < m; ++q)
        if (mask >> q & 1) set.push_back(avail[q]);
      const GridOptimum g = grid_theta_optimum(scenario.sus[i], set,
                                               scenario.params, grid);
      opt.theta = g.theta;
      opt.rate = g.value;
      const double p = power(scenario.sus[i], g.theta, scenario.params);
      for (int pu = 0; pu < scenario.num_pus(); ++pu)
        opt.load[pu] = p * unit_interference(scenario, i, pu, set);
    }
    return cache[i].emplace(mask, std::move(opt)).first->second;
  };

  std::int64_t total = 1;
  for (int q = 0; q < m; ++q) total *= k;

  std::vector<int> best_code;
  double best_obj = -std::numeric_limits<double>::infinity();
  bool feasible_found = false;
  std::vector<int> best_any_code;
  double best_any = -std::numeric_limits<double>::infinity();

  std::vector<int> code(m, 0);
  for (std::int64_t step = 0; step < total; ++step) {
    // Decode `step` in enumeration order (optionally reversed).
    std::int64_t v = reverse_order ? total - 1 - step : step;
    for (int q = 0; q < m; ++q) {
      code[q] = static_cast<int>(v % k);
      v /= k;
    }
    std::vector<std::uint64_t> masks(k, 0);
    for (int q = 0; q < m; ++q) masks[code[q]] |= 1ULL << q;

    double obj = 0.0;
    std::vector<double> load(scenario.num_pus(), 0.0);
    bool rate_ok = true;
    for (int i = 0; i < k; ++i) {
      const SuOpt& s = solve_su(i, masks[i]);
      obj += s.rate;
      for (int pu = 0; pu < scenario.num_pus(); ++pu) load[pu] += s.load[pu];
      if (s.rate < scenario.sus[i].rate_requirement) rate_ok = false;
    }
    bool c3_ok = true;
    for (int pu = 0; pu < scenario.num_pus(); ++pu)
      if (load[pu] > scenario.pus[pu].interference_threshold_w) c3_ok = false;

    if (obj > best_any ||
        (obj == best_any &&
         (best_any_code.empty() || code < best_any_code))) {
      best_any = obj;
      best_any_code = code;
    }
    if (rate_ok && c3_ok) {
      if (obj > best_obj ||
          (obj == best_obj && (best_code.empty() || code < best_code))) {
        best_obj = obj;
        best_code = code;
        feasible_found = true;
      }
    }
  }

  const std::vector<int>& winner =
      feasible_found ? best_code : best_any_code;
  ExhaustiveResult result;
  result.feasible_found = feasible_found;
  result.objective = feasible_found ? best_obj : best_any;
  result.allocation.sets.assign(k, {});
  for (int q = 0; q < m; ++q)
    result.allocation.sets[winner[q]].push_back(avail[q]);
  return result;
}

SolveReport constrained_grid_solve(const Scenario& scenario,
                                   const Allocation& allocation,
                                   const GridSpec& grid) {
  const int k = scenario.num_sus();
  const int l = scenario.num_pus();
  std::vector<int> allocated;
  for (int i = 0; i < k; ++i)
    if (i < static_cast<int>(allocation.sets.size()) &&
        !allocation.sets[i].empty())
      allocated.push_back(i);

  SolveReport report;
  report.method = SolveMethod::kGridOracle;
  report.theta.assign(k, kNan);
  if (allocated.empty()) {
    report.converged = true;
    return report;
  }

  std::vector<std::vector<double>> unit(k);            // per SU, per PU
  std::vector<Interval> iv(k);
  for (int i : allocated) {
    iv[i] = guarded(scenario.sus[i], scenario.params);
    unit[i].resize(l);
    for (int m = 0; m < l; ++m)
      unit[i][m] = unit_interference(scenario, i, m, allocation.sets[i]);
  }

  // Stage 1: per-SU unconstrained optima.
  double spacing = 0.0;
  for (int i : allocated) {
    const GridOptimum g = grid_theta_optimum(scenario.sus[i],
                                             allocation.sets[i],
                                             scenario.params, grid);
    report.theta[i] = g.theta;
    spacing = std::max(spacing, (iv[i].hi - iv[i].lo) / (grid.points - 1));
  }

  const auto pu_loads = [&](const std::vector<double>& theta) {
    std::vector<double> load(l, 0.0);
    for (int i : allocated) {
      const double p = power(scenario.sus[i], theta[i], scenario.params);
      for (int m = 0; m < l; ++m) load[m] += p * unit[i][m];
    }
    return load;
  };
  const auto rate_violation = [&](const std::vector<double>& theta) {
    double v = 0.0;
    for (int i : allocated)
      v = std::max(v, scenario.sus[i].rate_requirement -
                          sum_rate(scenario.sus[i], allocation.sets[i],
                                   theta[i], scenario.params));
    return std::max(0.0, v);
  };

  bool decoupled = true;
  {
    const std::vector<double> load = pu_loads(report.theta);
    for (int m = 0; m < l; ++m)
      if (load[m] > scenario.pus[m].interference_threshold_w)
        decoupled = false;
  }

  if (decoupled) {
    // C3 inactive at the separable optimum: exact up to grid accuracy. C4/C5
    // cannot move a per-SU argmax, so a shortfall means infeasibility.
    double obj = 0.0;
    for (int i : allocated)
      obj += sum_rate(scenario.sus[i], allocation.sets[i], report.theta[i],
                      scenario.params);
    report.objective = obj;
    report.max_constraint_violation = rate_violation(report.theta);
    report.converged = report.max_constraint_violation == 0.0;
    report.accuracy = spacing * std::pow(0.6180339887498949,
                                         grid.refine_iterations);
    report.flags.push_back("decoupled: C3 inactive at per-SU optima");
    if (!report.converged)
      report.flags.push_back("rate requirement infeasible for this allocation");
    return report;
  }

  // Stage 2: refined product grid over the allocated SUs.
  const int ka = static_cast<int>(allocated.size());
  if (ka > 6)
    throw SizeError(
        "constrained_grid_solve: joint grid limited to 6 allocated SUs");
  int pts = static_cast<int>(std::floor(std::pow(2e6, 1.0 / ka)));
  pts = std::clamp(pts, 7, grid.points);

  std::vector<double> lo(ka), hi(ka);
  for (int q = 0; q < ka; ++q) {
    lo[q] = iv[allocated[q]].lo;
    hi[q] = iv[allocated[q]].hi;
  }

  std::vector<double> best_theta;
  double best_obj = -std::numeric_limits<double>::infinity();
  bool any_feasible = false;
  double h_final = 0.0;

  for (int round = 0; round < 12; ++round) {
    // Tabulate rates and loads per SU along its own axis.
    std::vector<std::vector<double>> rate_tab(ka), load_tab(ka);
    std::vector<double> step(ka);
    for (int q = 0; q < ka; ++q) {
      const int i = allocated[q];
      step[q] = (hi[q] - lo[q]) / (pts - 1);
      rate_tab[q].resize(pts);
      load_tab[q].resize(static_cast<size_t>(pts) * l);
      for (int n = 0; n < pts; ++n) {
        const double th = lo[q] + n * step[q];
        rate_tab[q][n] = sum_rate(scenario.sus[i], allocation.sets[i], th,
                                  scenario.params);
        const double p = power(scenario.sus[i], th, scenario.params);
        for (int m = 0; m < l; ++m)
          load_tab[q][static_cast<size_t>(n) * l + m] = p * unit[i][m];
      }
    }

    std::vector<int> idx(ka, 0);
    std::vector<int> round_best_idx;
    double round_best = -std::numeric_limits<double>::infinity();
    while (true) {
      double obj = 0.0;
      for (int q = 0; q < ka; ++q) obj += rate_tab[q][idx[q]];
      if (obj > round_best) {
        bool ok = true;
        for (int q = 0; q < ka && ok; ++q)
          if (rate_tab[q][idx[q]] <
              scenario.sus[allocated[q]].rate_requirement)
            ok = false;
        for (int m = 0; m < l && ok; ++m) {
          double load = 0.0;
          for (int q = 0; q < ka; ++q)
            load += load_tab[q][static_cast<size_t>(idx[q]) * l + m];
          if (load > scenario.pus[m].interference_threshold_w) ok = false;
        }
        if (ok) {
          round_best = obj;
          round_best_idx = idx;
        }
      }
      int q = 0;
      while (q < ka && ++idx[q] == pts) idx[q++] = 0;
      if (q == ka) break;
    }

    if (round_best_idx.empty()) break;  // nothing feasible on this lattice
    any_feasible = true;
    if (round_best > best_obj) {
      best_obj = round_best;
      best_theta.assign(ka, 0.0);
      for (int q = 0; q < ka; ++q)
        best_theta[q] = lo[q] + round_best_idx[q] * step[q];
    }
    h_final = 0.0;
    for (int q = 0; q < ka; ++q) h_final = std::max(h_final, step[q]);
    // Shrink each axis to +-2 spacings around the incumbent.
    for (int q = 0; q < ka; ++q) {
      const double c = lo[q] + round_best_idx[q] * step[q];
      const double a = std::max(iv[allocated[q]].lo, c - 2.0 * step[q]);
      const double b = std::min(iv[allocated[q]].hi, c + 2.0 * step[q]);
      lo[q] = a;
      hi[q] = b;
    }
    report.iterations = round + 1;
  }

  if (!any_feasible) {
    report.converged = false;
    report.max_constraint_violation = rate_violation(report.theta);
    double obj = 0.0;
    for (int i : allocated)
      obj += sum_rate(scenario.sus[i], allocation.sets[i], report.theta[i],
                      scenario.params);
    report.objective = obj;
    report.flags.push_back("empty feasible set on the product grid");
    return report;
  }

  for (int q = 0; q < ka; ++q) report.theta[allocated[q]] = best_theta[q];
  report.objective = best_obj;
  report.converged = true;
  report.max_constraint_violation = 0.0;
  report.accuracy = h_final;
  report.flags.push_back("joint product grid (C3 active)");
  return report;
}

}  // namespace crn::oracle
