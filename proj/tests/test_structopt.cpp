#include <doctest.h>

#include <cmath>

#include "crn/errors.hpp"
#include "crn/lambert.hpp"
#include "crn/model.hpp"
#include "crn/oracle.hpp"
#include "crn/rng.hpp"
#include "crn/structopt.hpp"
#include "helpers.hpp"

using namespace crn;
using test::make_params;
using test::make_scenario;
using test::make_su;

namespace {

// Independent golden-section argmax of the single-channel objective,
// evaluated through its own log-space arithmetic.
double golden_theta(const SecondaryUser& su, double coeff,
                    const SystemParams& p, double tol = 1e-12) {
  const double T = p.slot_duration_s;
  const auto objective = [&](double th) {
    const double a = T - th * T - su.sensing_time_s;
    const double b = su.harvest_rate_w * th * T - su.sensing_energy_j;
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return (a / T) * std::log1p(coeff * b / a);
  };
  const ThetaBounds bounds = theta_bounds(su, p);
  double lo = bounds.lo + 1e-12, hi = bounds.hi - 1e-12;
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > tol) {
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

TEST_SUITE("structopt") {

TEST_CASE("closed form matches the golden-section oracle") {
  const SystemParams p = make_params();
  const SecondaryUser su = make_su(5.0, 1e-3, 1e-5, 10.0);
  const ThetaResult r = closed_form_theta(su, 10.0, p);
  CHECK(r.interior);
  CHECK(r.theta == doctest::Approx(golden_theta(su, 10.0, p)).epsilon(1e-8));
}

TEST_CASE("closed form near the H*chi -> 1 branch point stays interior") {
  const SystemParams p = make_params();
  const SecondaryUser su = make_su(5.0, 1e-4, 1e-5, 1.0);
  for (double hchi : {1.0 + 1e-12, 1.0 + 1e-9, 1.0 + 1e-6, 1.0 + 1e-3}) {
    const ThetaResult r = closed_form_theta(su, hchi / 5.0, p);
    CHECK(std::isfinite(r.theta));
    CHECK(r.interior);
    // Limit value (T-tau)/T - c/(chi T e).
    const double T = p.slot_duration_s;
    const double c = 5.0 * (T - su.sensing_time_s) - su.sensing_energy_j;
    const double limit = (T - su.sensing_time_s) / T - c / (5.0 * T * M_E);
    if (hchi - 1.0 <= 1e-9)
      CHECK(r.theta == doctest::Approx(limit).epsilon(1e-6));
  }
  CHECK_THROWS_AS(closed_form_theta(su, 0.19, p), DomainError);
  CHECK_THROWS_AS(closed_form_theta(make_su(1.0, 2e-3, 1e-5, 1.0), 5.0, p),
                  InfeasibleError);
}

TEST_CASE("closed form vs grid oracle on random feasible instances") {
  const SystemParams p = make_params();
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    const double chi = rng.uniform(0.5, 40.0);
    const double tau = rng.uniform(1e-6, 2e-4);
    const double eps = rng.uniform(0.01, 0.7) * chi * (1e-3 - tau);
    const double hchi = std::pow(10.0, rng.uniform(0.0015, 4.0));
    const SecondaryUser su = make_su(chi, eps, tau, hchi / chi, 1);
    const ThetaResult closed = closed_form_theta(su, hchi / chi, p);
    const auto grid = oracle::grid_theta_optimum(su, {0}, p);
    CHECK(std::abs(closed.theta - grid.theta) / grid.theta <= 1e-4);
  }
}

TEST_CASE("stationarity residual behaves like the objective derivative") {
  const SystemParams p = make_params();
  const SecondaryUser su = make_su(5.0, 1e-4, 1e-5, 10.0);
  const double h = 10.0;
  const ThetaResult star = closed_form_theta(su, h, p);
  CHECK(std::abs(stationarity_residual(su, h, star.theta, p)) <= 1e-8);

  // Sign matches a central finite difference of the objective.
  const ThetaBounds b = theta_bounds(su, p);
  for (double frac : {0.05, 0.2, 0.5, 0.8, 0.95}) {
    const double th = b.lo + frac * (b.hi - b.lo);
    const double d = 1e-7 * (b.hi - b.lo);
    const double fd = (rate_per_subchannel(su, 0, th + d, p) -
                       rate_per_subchannel(su, 0, th - d, p)) /
                      (2.0 * d);
    const double res = stationarity_residual(su, h, th, p);
    if (std::abs(fd) > 1e-6) CHECK(res * fd > 0.0);
  }

  // Monotone decreasing residual (concavity).
  double prev = stationarity_residual(su, h, b.lo + 0.01 * b.width(), p);
  for (int i = 2; i <= 60; ++i) {
    const double th = b.lo + i / 62.0 * b.width();
    const double cur = stationarity_residual(su, h, th, p);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("per_su_theta_optimize reductions") {
  const SystemParams p = make_params();
  SecondaryUser su = make_su(5.0, 1e-4, 1e-5, 10.0);

  // Singleton reduces to the closed form.
  const double closed = closed_form_theta(su, 10.0, p).theta;
  CHECK(per_su_theta_optimize(su, {0}, p).theta ==
        doctest::Approx(closed).epsilon(1e-8));

  // Equal coefficients over three sub-channels: argmax unchanged.
  CHECK(per_su_theta_optimize(su, {0, 1, 2}, p).theta ==
        doctest::Approx(closed).epsilon(1e-8));

  // Heterogeneous coefficients vs a dense grid of the summed objective.
  su.gains = {2e-7, 8e-7, 3.5e-7, 1e-6};
  const double got = per_su_theta_optimize(su, {0, 1, 2, 3}, p).theta;
  oracle::GridSpec dense;
  dense.points = 100001;
  const auto grid = oracle::grid_theta_optimum(su, {0, 1, 2, 3}, p, dense);
  CHECK(std::abs(got - grid.theta) <= 1e-6 * grid.theta);

  SecondaryUser weak = make_su(5.0, 1e-4, 1e-5, 0.05);  // H*chi = 0.25
  CHECK_THROWS_AS(per_su_theta_optimize(weak, {0}, p), DomainError);
  CHECK_THROWS_AS(per_su_theta_optimize(su, {}, p), DomainError);
}

TEST_CASE("argmax is invariant to positive scaling of the objective") {
  // Scaling every coefficient set by replicating sub-channels multiplies the
  // objective; the argmax must not move.
  const SystemParams p = make_params();
  const SecondaryUser su = make_su(5.0, 1e-4, 1e-5, 15.0);
  const double one = per_su_theta_optimize(su, {0}, p).theta;
  const double four = per_su_theta_optimize(su, {0, 1, 2, 3}, p).theta;
  CHECK(std::abs(one - four) <= 1e-8);
}

TEST_CASE("lagrangian_value term checks") {
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4, 1.0,
      1e-7);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};
  const std::vector<double> theta = {0.5, 0.55};
  DualState duals = DualState::zeros(2, 2);

  const double sum_rate = total_rate(sc.sus[0], {0, 1}, 0.5, sc.params) +
                          total_rate(sc.sus[1], {2, 3}, 0.55, sc.params);
  CHECK(lagrangian_value(sc, alloc, theta, duals) ==
        doctest::Approx(-sum_rate).epsilon(1e-12));

  duals.lambda[0] = 2.0;
  const double T = sc.params.slot_duration_s;
  const double c1_term =
      2.0 * (sc.sus[0].sensing_energy_j - sc.sus[0].harvest_rate_w * 0.5 * T);
  CHECK(lagrangian_value(sc, alloc, theta, duals) ==
        doctest::Approx(-sum_rate + c1_term).epsilon(1e-12));

  // Random multipliers: match an independent term-by-term sum (the I_th
  // term appears once per PU).
  Rng rng(77);
  duals.lambda = {rng.uniform01(), rng.uniform01()};
  duals.mu = {rng.uniform01(), rng.uniform01()};
  duals.nu = {rng.uniform01(), rng.uniform01()};
  duals.rho_rt = {rng.uniform01(), rng.uniform01()};
  double expected = 0.0;
  std::vector<double> load(2, 0.0);
  for (int i = 0; i < 2; ++i) {
    const auto& su = sc.sus[i];
    const double rate = total_rate(su, alloc.sets[i], theta[i], sc.params);
    expected -= rate;
    expected += duals.lambda[i] *
                (su.sensing_energy_j - su.harvest_rate_w * theta[i] * T);
    expected += duals.mu[i] * (theta[i] * T + su.sensing_time_s - T);
    expected += duals.rho_rt[i] * (su.rate_requirement - rate);
    const double power = transmit_power(su, theta[i], sc.params);
    for (int m = 0; m < 2; ++m)
      load[m] += power * unit_interference(sc, i, m, alloc.sets[i]);
  }
  for (int m = 0; m < 2; ++m)
    expected += duals.nu[m] * (load[m] - sc.pus[m].interference_threshold_w);
  CHECK(lagrangian_value(sc, alloc, theta, duals) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dual_update projection and hand-computed step") {
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4, 1.0,
      1e-7);
  sc.sus[0].rate_requirement = 3.0;
  sc.sus[1].rate_requirement = 100.0;  // violated at any theta
  prepare_scenario(sc);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};
  const std::vector<double> theta = {0.5, 0.55};

  DualState duals = DualState::zeros(2, 2);
  const DualState next = dual_update(sc, alloc, theta, duals);

  // C1 satisfied (eps - chi theta T < 0) with lambda = 0: stays clamped.
  CHECK(next.lambda[0] == 0.0);
  CHECK(next.lambda[1] == 0.0);
  CHECK(next.mu[0] == 0.0);
  CHECK(next.iteration_t == 2);

  // Hand-compute the violated C4 update for SU 1 on the scaled system:
  // rho <- [rho + psi0/t * g / scale^2]+ with scale = max(1, requirement)
  // and psi0 = 1/max|g/scale| over the family.
  const double T = sc.params.slot_duration_s;
  const double rate0 = total_rate(sc.sus[0], {0, 1}, 0.5, sc.params);
  const double rate1 = total_rate(sc.sus[1], {2, 3}, 0.55, sc.params);
  const double g0 = 3.0 - rate0;
  const double g1 = 100.0 - rate1;
  const double psi0 =
      16.0 / std::max(std::abs(g0) / 3.0, std::abs(g1) / 100.0);
  CHECK(next.rho_rt[1] ==
        doctest::Approx(std::max(0.0, psi0 * g1 / (100.0 * 100.0)))
            .epsilon(1e-12));
  CHECK(next.rho_rt[0] ==
        doctest::Approx(std::max(0.0, psi0 * g0 / 9.0)).epsilon(1e-12));

  // Fixed point on zero subgradients: rerun from the returned state with a
  // satisfied instance and unchanged theta.
  Scenario relaxed = sc;
  relaxed.sus[0].rate_requirement = 0.0;
  relaxed.sus[1].rate_requirement = 0.0;
  prepare_scenario(relaxed);
  DualState zero = DualState::zeros(2, 2);
  const DualState after = dual_update(relaxed, alloc, theta, zero);
  CHECK(after.lambda == zero.lambda);
  CHECK(after.mu == zero.mu);
  CHECK(after.nu == zero.nu);
  CHECK(after.rho_rt == zero.rho_rt);
  CHECK(after.rho_nrt == zero.rho_nrt);

  // lambda update on a hand-built state: Eq. (15)'s violation term with the
  // chi*T energy scale.
  DualState active = DualState::zeros(2, 2);
  active.lambda = {0.4, 0.1};
  active.schedule.alpha0 = 2.0;
  active.schedule.beta0 = 1.0;
  active.schedule.pi0 = 1.0;
  active.schedule.psi0 = 1.0;
  active.schedule.eta0 = 1.0;
  active.schedule.resolved = true;
  active.iteration_t = 4;
  const DualState stepped = dual_update(sc, alloc, theta, active);
  const double g_lambda0 =
      sc.sus[0].sensing_energy_j - sc.sus[0].harvest_rate_w * 0.5 * T;
  const double scale0 = sc.sus[0].harvest_rate_w * T;
  CHECK(stepped.lambda[0] ==
        doctest::Approx(
            std::max(0.0, 0.4 + 2.0 / 4.0 * g_lambda0 / (scale0 * scale0)))
            .epsilon(1e-12));
}

TEST_CASE("dual solve without active constraints matches per-SU optima") {
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4,
      1e6, 1e-9);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};
  const SolveReport report = dual_subgradient_solve(sc, alloc);
  CHECK(report.converged);
  for (int i = 0; i < 2; ++i) {
    const double want =
        per_su_theta_optimize(sc.sus[i], alloc.sets[i], sc.params).theta;
    CHECK(std::abs(report.theta[i] - want) <= 1e-4);
  }
}

TEST_CASE("dual solve reports infeasible rate requirements") {
  Scenario sc = make_scenario({make_su(5.0, 1e-4, 1e-5, 12.0)}, 2, 1e6, 1e-9);
  sc.sus[0].rate_requirement = 1e4;
  prepare_scenario(sc);
  Allocation alloc;
  alloc.sets = {{0, 1}};
  DualSolveOptions opts;
  opts.max_iterations = 500;
  const SolveReport report = dual_subgradient_solve(sc, alloc, opts);
  CHECK(!report.converged);
  CHECK(report.max_constraint_violation > 0.0);
}

TEST_CASE("dual solve handles a binding interference constraint") {
  // Two SUs, strong cross gains, tight thresholds: C3 binds and the dual
  // solver must match the joint grid oracle.
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4,
      1e-7, 3e-7);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};

  const SolveReport grid = oracle::constrained_grid_solve(sc, alloc);
  REQUIRE(grid.converged);
  // The cap must actually bind: the constrained optimum sits below the
  // unconstrained one.
  const double unconstrained =
      per_su_theta_optimize(sc.sus[0], alloc.sets[0], sc.params).theta;
  CHECK(grid.theta[0] < unconstrained);

  // The 1/t tail is slow on a binding cap; give the solver headroom.
  DualSolveOptions opts;
  opts.max_iterations = 200000;
  const SolveReport dual = dual_subgradient_solve(sc, alloc, opts);
  CHECK(dual.max_constraint_violation <= 1e-6);
  CHECK(dual.objective >= grid.objective * 0.99);
  CHECK(dual.objective <= grid.objective * (1.0 + 1e-9));
}

TEST_CASE("analytic first-order condition matches finite differences") {
  const SystemParams p = make_params();
  Rng rng(909);
  constexpr double kLn2 = 0.6931471805599453;
  for (int trial = 0; trial < 100; ++trial) {
    const double chi = rng.uniform(0.5, 40.0);
    const double tau = rng.uniform(1e-6, 2e-4);
    const double eps = rng.uniform(0.01, 0.7) * chi * (1e-3 - tau);
    const double hchi = std::pow(10.0, rng.uniform(0.1, 3.0));
    const SecondaryUser su = make_su(chi, eps, tau, hchi / chi, 1);
    const ThetaBounds b = theta_bounds(su, p);
    const double th = b.lo + rng.uniform(0.05, 0.95) * b.width();
    const double d = 6e-6 * b.width();
    const double fd = (rate_per_subchannel(su, 0, th + d, p) -
                       rate_per_subchannel(su, 0, th - d, p)) /
                      (2.0 * d);
    // The residual is T-normalized and in natural-log units.
    const double analytic =
        stationarity_residual(su, hchi / chi, th, p) / kLn2;
    const double scale = std::max(std::abs(fd), std::abs(analytic));
    if (scale > 1e-3)
      CHECK(std::abs(analytic - fd) <= 1e-6 * scale);
  }
}

TEST_CASE("multipliers stay nonnegative across repeated updates") {
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4,
      1e-7, 3e-7);
  sc.sus[0].rate_requirement = 50.0;  // violated
  prepare_scenario(sc);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};
  const std::vector<double> theta = {0.5, 0.55};
  DualState duals = DualState::zeros(2, 2);
  for (int t = 0; t < 50; ++t) {
    duals = dual_update(sc, alloc, theta, duals);
    for (double v : duals.lambda) CHECK(v >= 0.0);
    for (double v : duals.mu) CHECK(v >= 0.0);
    for (double v : duals.nu) CHECK(v >= 0.0);
    for (double v : duals.rho_rt) CHECK(v >= 0.0);
    for (double v : duals.rho_nrt) CHECK(v >= 0.0);
  }
  CHECK(duals.iteration_t == 51);
}

TEST_CASE("concavity certificate and constraint convexity probe") {
  const SystemParams p = make_params();
  const SecondaryUser su = make_su(5.0, 1e-4, 1e-5, 1.0);
  CHECK(concavity_certificate(su, 1.0, p));        // H*chi = 5
  CHECK(constraint_convexity_probe(su, p));
  CHECK(constraint_convexity_probe(make_su(5.0, 1e-9, 1e-9, 1.0), p));

  // Out-of-condition probe (H*chi = 0.5): evaluates without error; the
  // certificate's outcome is not asserted.
  (void)concavity_certificate(su, 0.1, p);

  // Degenerate grids evaluate without error.
  CHECK(concavity_certificate(su, 1.0, p, 3));
  CHECK(constraint_convexity_probe(su, p, 1));
}

TEST_CASE("solve_structure falls back to the dual solver when C3 binds") {
  Scenario sc = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4,
      1e-7, 3e-7);
  Allocation alloc;
  alloc.sets = {{0, 1}, {2, 3}};
  const SolveReport report = solve_structure(sc, alloc);
  CHECK(report.method == SolveMethod::kDualSubgradient);
  CHECK(report.max_constraint_violation <= 1e-6);

  Scenario loose = make_scenario(
      {make_su(5.0, 1e-4, 1e-5, 12.0), make_su(6.0, 2e-4, 2e-5, 18.0)}, 4, 1.0,
      1e-9);
  const SolveReport closed = solve_structure(loose, alloc);
  CHECK(closed.method == SolveMethod::kClosedForm);
  CHECK(closed.converged);
}

}  // TEST_SUITE
