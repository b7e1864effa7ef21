// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_BENCHMARKS_HPP
#define EVCS_BENCHMARKS_HPP

#include <span>

#include "evcs/config.hpp"
#include "evcs/follower.hpp"
#include "evcs/sg_admm.hpp"
#include "evcs/types.hpp"

namespace evcs {

// Centralized reference problem: full information, powers discretized to a
// quantum. Exact at the grid resolution by construction.
struct CentralizedProblem {
    Fleet fleet;
    ScheduleSlice slice;
    Hyperparams hp;
    double quantum_kw = 0.5;
    double slack_grid_kw = 0.5;  // retained knob; the coupling equality pins
                                 // s per total level, so no slack grid is
                                 // actually searched
};

// Minimizes sum_i [f*_i + f_hat_i + theta_i(P_i) P_i dt] + alpha |s| dt over
// quantized allocations, subject to the coupling equality with bounded
// complementary slack and the per-column caps. Solved by a per-column DP
// over EV power quanta followed by a DP across columns; the slack for each
// achievable total is pinned by the equality. Ties break on lowest total
// power, then the lexicographically smallest per-EV assignment in column
// order. If no total admits in-bound slack, the closest boundary total is
// returned flagged infeasible.
Allocation centralized_solve(const CentralizedProblem& cp);

// Plain distributed ADMM: one admm_solve with theta = 0 and s = 0. The
// final solver state is exposed for warm-starting the next control step.
Allocation distributed_solve(const Fleet& fleet, double c_budget_kw,
                             const Hyperparams& hp,
                             const AdmmState* warm = nullptr,
                             AdmmState* final_state = nullptr);

// Greedy baseline: every EV gets its request (curve-capped); the coupling
// is not enforced and violations surface downstream in the dispatch.
Allocation uncontrolled_step(const Fleet& fleet);

// Per-EV term of the centralized objective at power p: charging revenue
// loss, follower cost, and the substituted incentive payment.
double centralized_ev_cost(const FollowerProblem& follower,
                           const ScheduleSlice& slice, const Hyperparams& hp,
                           double p_kw);

// Leader objective used by the centralized solver, exposed so controller
// outputs can be compared on identical footing: per-EV charging revenue
// loss, follower cost, incentive payment, plus the slack cost.
double leader_objective(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp, std::span<const double> p_kw,
                        double s_kw);

}  // namespace evcs

#endif
