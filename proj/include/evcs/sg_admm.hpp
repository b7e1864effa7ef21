// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_SG_ADMM_HPP
#define EVCS_SG_ADMM_HPP

#include <optional>
#include <vector>

#include "evcs/config.hpp"
#include "evcs/follower.hpp"
#include "evcs/types.hpp"

namespace evcs {

// Inner-loop state: primal powers, coupling dual, per-column cap duals
// (ordered as Fleet::unique_columns()), and the adaptive penalty.
struct AdmmState {
    std::vector<double> p_kw;
    double lambda = 0.0;
    std::vector<double> mu_cc;
    double rho = 10.0;
    int iterations = 0;
    double r_norm = 0.0;
    double s_norm = 0.0;
    bool converged = false;
};

// Sequential (Gauss-Seidel) ADMM over the followers with dual ascent on the
// coupling equality sum p_i/eta_cp = c_eff and the per-column caps, plus
// residual balancing on rho. Stops on the combined absolute/relative
// primal-dual criterion or at hp.max_admm_iters (flagged non-converged).
AdmmState admm_solve(const Fleet& fleet, double c_eff_kw, const Hyperparams& hp,
                     const AdmmState* warm = nullptr);

// theta_i = min(d_cap, |delta * grad f_i(p_i)|), gradient taken with theta=0.
std::vector<double> compute_incentives(const std::vector<double>& p_kw,
                                       const Fleet& fleet, double d_cap,
                                       double delta);

// True iff the incentive cap never binds at p and the coordination that
// produced p converged.
bool incentive_feasible(const std::vector<double>& p_kw, const Fleet& fleet,
                        double d_cap, double delta, bool admm_converged);

struct SgResult {
    std::vector<double> p_kw;
    std::vector<double> theta;
    double s_kw = 0.0;
    int sg_iterations = 0;
    int admm_iterations_total = 0;
    bool feasible = false;
    bool used_fallback = false;
    AdmmState admm;  // state of the returned probe, reusable as warm start
};

// Outer Stackelberg loop: finds the smallest-|s| slack whose ADMM solution
// admits a feasible incentive. Probes s = 0 first, then the (shortfall-
// clamped) extreme of the side indicated by the fleet's ideal demand, then
// bisects |s| keeping an (infeasible, feasible) bracket until the width
// drops below eps_bisect * (s_max - s_min). Every probe is one warm-started
// admm_solve and counts one SG iteration.
SgResult sg_equilibrium(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp, const AdmmState* warm = nullptr);

// Guarded fallback and reference path: walks the slack grid (step =
// eps_bisect * (s_max - s_min)) from |s| = 0 outward and returns the first
// feasible probe.
SgResult sg_linear_scan(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp);

Allocation to_allocation(const SgResult& sg);

}  // namespace evcs

#endif
