// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_TYPES_HPP
#define EVCS_TYPES_HPP

#include <vector>

namespace evcs {

// Leader-side inputs for one control step, produced by the scheduling layers
// (or a schedule file). Prices are $/kWh, powers kW at the coupling point.
struct ScheduleSlice {
    double c_budget_kw = 0.0;        // grid power budget C
    double p_bess_setpoint_kw = 0.0; // BESS setpoint, charge > 0
    double d_cap = 0.10;             // incentive cap D, $/kWh
    double s_min_kw = 0.0;           // slack lower bound, <= 0
    double s_max_kw = 0.0;           // slack upper bound, >= 0
    double tariff_ev = 0.50;         // EV charging tariff
    double price_dam = 0.10;         // day-ahead price
    double price_short = 0.12;       // imbalance price, deficit
    double price_long = 0.08;        // imbalance price, surplus
};

void validate(const ScheduleSlice& s);

// One vehicle's booking. Times are minute indices from simulation midnight.
struct EvSession {
    int id = 0;
    int arrival_min = 0;
    int departure_min = 0;
    double capacity_kwh = 0.0;
    double soc_arrival = 0.0;
    double energy_request_kwh = 0.0;
    int cc_index = -1;  // column assignment, -1 = unassigned
    int cp_index = -1;  // plug on the column
    double rated_kw = 0.0;  // curve peak power; 0 = derive from capacity
};

void validate(const EvSession& s);

// Live state of a connected vehicle inside the simulation loop.
struct EvState {
    int session_index = -1;  // into the scenario's session list
    double soc = 0.0;
    double p_req_kw = 0.0;    // requested power at current SoC
    double p_alloc_kw = 0.0;  // delivered power this step
    double theta = 0.0;       // incentive in force, $/kWh
    double energy_delivered_kwh = 0.0;
};

// One control step's solution, common to every controller.
struct Allocation {
    std::vector<double> p_kw;     // per connected EV
    std::vector<double> theta;    // per connected EV, $/kWh
    double slack_kw = 0.0;        // signed leader slack s
    double lambda = 0.0;          // coupling dual
    std::vector<double> mu_cc;    // column-cap duals (per fleet column)
    int admm_iterations = 0;
    int sg_iterations = 0;
    bool converged = true;
    bool feasible = true;
};

}  // namespace evcs

#endif
