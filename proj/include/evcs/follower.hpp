// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_FOLLOWER_HPP
#define EVCS_FOLLOWER_HPP

#include <vector>

#include "evcs/charging_curve.hpp"

namespace evcs {

// One EV's local problem for a single control step. The cost penalizes
// falling short of the requested power quadratically and exceeding it
// through the stress-function ratio; an active incentive theta enters as
// linear revenue on the delivered energy.
struct FollowerProblem {
    double p_req_kw = 0.0;
    double p_max_kw = 0.0;  // curve cap at the current SoC
    StressFunction sf;
    double beta = 0.01;
    double gamma = 10.0;
    double theta = 0.0;  // $/kWh, 0 when no incentive is in force
    int dt_min = 1;
};

// Coordination terms seen by one follower during a Gauss-Seidel sweep.
// residual_others = sum_{j != i} p_j / eta_cp - c_eff (current values);
// cc_residual_others = sum of the other EVs on the same column.
struct CouplingContext {
    double lambda = 0.0;
    double mu_cc = 0.0;  // column-cap dual, >= 0
    double rho = 1.0;
    double residual_others_kw = 0.0;
    double cc_residual_others_kw = 0.0;
    double eta_cp = 0.95;
    double p_cc_kw = 172.5;
};

// Cost in $ of charging at p for one step; 0 at p = p_req with theta = 0.
double follower_objective(const FollowerProblem& fp, double p_kw);

// One-sided derivative of the objective; the subgradient 0 is selected at
// the p_req kink (plus the incentive term when active).
double follower_gradient(const FollowerProblem& fp, double p_kw);

// Best response: argmin over [0, p_max] of the objective plus the augmented
// Lagrangian coupling terms. The kink at p_req is handled by minimizing each
// side separately (golden section, 1e-4 kW) and returning the best.
double follower_update(const FollowerProblem& fp, const CouplingContext& ctx);

// A connected fleet for one control step: followers plus their column
// assignment and the shared coupling constants.
struct Fleet {
    std::vector<FollowerProblem> followers;
    std::vector<int> column;  // cc index per follower
    double eta_cp = 0.95;
    double p_cc_kw = 172.5;

    size_t size() const { return followers.size(); }
    std::vector<int> unique_columns() const;

    // EV-side totals with each column clipped at its cap: what the fleet
    // would ideally draw, and the most it can physically draw.
    double capped_demand_kw() const;
    double capped_reach_kw() const;
};

}  // namespace evcs

#endif
