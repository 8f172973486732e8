#pragma once
#include <string>
#include <vector>

#include "crn/types.hpp"

namespace crn {

// -------- Theorem 1 closed form and the per-SU stationarity machinery ------

struct ThetaResult {
  double theta;
  // False when the analytic value had to be projected to the guarded
  // boundary (or when no interior stationary point exists).
  bool interior;
};

// Theorem 1: optimal harvesting ratio for a single SNR coefficient H,
//   theta* = (T - tau)/T - W((H*chi - 1)/e) * H * (chi*T - chi*tau - eps)
//            / (T * (H*chi - 1) * (1 + W((H*chi - 1)/e))).
// Requires H*chi > 1 (DomainError otherwise) and a nonempty feasible
// interval (InfeasibleError).
ThetaResult closed_form_theta(const SecondaryUser& su, double snr_coeff,
                              const SystemParams& params);

// First-order condition of the per-sub-channel objective (natural-log
// units), oriented as the objective derivative: positive below theta*, zero
// at theta*, monotone decreasing on the feasible interval when H*chi > 1.
double stationarity_residual(const SecondaryUser& su, double snr_coeff,
                             double theta, const SystemParams& params);

// Maximizes the summed Eq. (5) rate of one SU over its sub-channels by
// safeguarded Newton/bisection on the summed first-order condition, with the
// mean-H closed form as initializer. Equals closed_form_theta (to 1e-8) for
// a single sub-channel or equal coefficients. Requires a nonempty set and
// H_{i,j}*chi > 1 for at least one j (DomainError otherwise).
ThetaResult per_su_theta_optimize(const SecondaryUser& su,
                                  const std::vector<int>& subchannels,
                                  const SystemParams& params);

// Theorem-1 value with the arithmetic mean of the per-sub-channel SNR
// coefficients; the paper's figure-level approximation for multi-channel SUs.
ThetaResult closed_form_theta_mean_h(const SecondaryUser& su,
                                     const std::vector<int>& subchannels,
                                     const SystemParams& params);

// Finite-difference concavity certificate for the per-sub-channel objective
// (Lemma 1 premise H*chi > 1): true iff the centered second difference is
// negative at every interior point of a uniform grid over the guarded
// feasible interval.
bool concavity_certificate(const SecondaryUser& su, double snr_coeff,
                           const SystemParams& params, int grid_size = 1000);

// Certifies that the C3 slack I_th - sum p*I is concave in theta, i.e. that
// the transmit power has positive second difference on the interior grid.
// (That convexity of p is what makes the C3 feasible set convex.)
bool constraint_convexity_probe(const SecondaryUser& su,
                                const SystemParams& params,
                                int grid_size = 1000);

// ------------------------- dual decomposition ------------------------------

// Diminishing step schedule c/t per multiplier family; bases are self-scaled
// to 1/|subgradient| at the first update unless provided.
struct StepSchedule {
  double alpha0 = 0.0;  // C1
  double beta0 = 0.0;   // C2
  double pi0 = 0.0;     // C3
  double psi0 = 0.0;    // C4
  double eta0 = 0.0;    // C5
  bool resolved = false;
};

struct DualState {
  std::vector<double> lambda;   // C1, per SU
  std::vector<double> mu;       // C2, per SU
  std::vector<double> nu;       // C3, per PU
  std::vector<double> rho_rt;   // C4, nonzero only for RT SUs
  std::vector<double> rho_nrt;  // C5, nonzero only for NRT SUs
  int iteration_t = 1;
  StepSchedule schedule;

  static DualState zeros(int num_sus, int num_pus);
};

enum class SolveMethod { kClosedForm, kDualSubgradient, kGridOracle };
const char* to_string(SolveMethod method);

struct SolveReport {
  std::vector<double> theta;  // size K, NaN for SUs without sub-channels
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Scale-free: C3 violations are measured relative to each PU's threshold,
  // rate shortfalls relative to max(1, requirement).
  double max_constraint_violation = 0.0;
  SolveMethod method = SolveMethod::kClosedForm;
  // Oracle results record the final per-dimension grid spacing here.
  double accuracy = 0.0;
  std::vector<std::string> flags;
};

// Eq. (12) exactly: negated sum rate plus multiplier-weighted constraint
// terms, over the allocated SUs.
double lagrangian_value(const Scenario& scenario, const Allocation& allocation,
                        const std::vector<double>& theta,
                        const DualState& duals);

// One projected-subgradient pass over all five multiplier families with
// steps base/t; multipliers stay >= 0 and iteration_t advances. The base
// step sizes are fixed on the first call from the observed subgradient
// magnitudes when not set explicitly.
DualState dual_update(const Scenario& scenario, const Allocation& allocation,
                      const std::vector<double>& theta, const DualState& duals);

struct DualSolveOptions {
  double tol_dual = 1e-7;
  double tol_primal = 1e-6;
  int max_iterations = 50000;
};

// Algorithm 2: alternate per-SU concave maximization of the Lagrangian in
// theta_i with projected dual ascent until the multipliers stop moving and
// the primal violations are within tolerance. Never throws on
// non-convergence; the report says so instead.
SolveReport dual_subgradient_solve(const Scenario& scenario,
                                   const Allocation& allocation,
                                   const DualSolveOptions& options = {});

// ------------------------- production solve chain --------------------------

struct SolveOptions {
  SolveMethod method = SolveMethod::kClosedForm;
  DualSolveOptions dual;
  // Constraint violation beyond which the closed-form solution is rejected.
  double primal_tol = 1e-6;
};

// The two-stage pipeline's structure-optimization step: per-SU analytic
// optimum (grid fallback for SUs with every H*chi <= 1), then a dual-solver
// fallback when the result violates C3. Unmeetable rate requirements are
// reported, not "fixed": the per-SU optimum already maximizes each rate.
SolveReport solve_structure(const Scenario& scenario,
                            const Allocation& allocation,
                            const SolveOptions& options = {});

}  // namespace crn
