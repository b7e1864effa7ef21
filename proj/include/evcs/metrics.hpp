// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_METRICS_HPP
#define EVCS_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "evcs/scenario.hpp"
#include "evcs/simulator.hpp"

namespace evcs {

// Gini index over non-negative values, sorted ascending internally:
//   G = 2 sum_i i*x_i / (n sum_i x_i) - (n+1)/n        (1-based i)
// Defined as 0 when the sum is zero. Throws on negative entries.
double gini(std::vector<double> x);

struct FairnessReport {
    std::vector<std::pair<int, double>> per_ev;  // (session id, score)
    double gini_index = 0.0;
};

// Per EV: mean over its connected minutes of |p_alloc - p_req| / max(p_req,
// floor_kw); the floor guards vanishing requests. Gini over the scores.
FairnessReport fairness(const SimulationTrace& trace, double floor_kw = 1.0);

struct ProfitBreakdown {
    double dam_cost = 0.0;
    double bm_cost = 0.0;  // negative = balancing revenue
    double potential_profit = 0.0;
    double incentives_paid = 0.0;
    double net_profit = 0.0;
};

// Settlement over one run. The dispatch-plan grid profile is derived from
// the schedule as (c_budget + bess_setpoint) / eta_tr; imbalances against it
// settle at the short/long prices in force.
ProfitBreakdown profit_breakdown(const SimulationTrace& trace,
                                 const ScheduleSeries& schedule, const Config& cfg);

// Equivalent-full-cycle throughput wear: cycles = sum |P_B| dt / (2 C_B),
// wear = cycles * (1 - d_b_eol) / n_cycles_rated. A rainflow model can be
// swapped in behind the same signature. dt_min is the record spacing.
double battery_wear(const SimulationTrace& trace, const StationParams& params,
                    double n_cycles_rated = 5000.0, int dt_min = 1);

// Per-session completion-time delta (minutes, method minus reference) to
// reach min(energy_request, final delivered of both runs); sessions that
// never complete use their departure time.
std::map<int, int> extra_charging_time(const SimulationTrace& method_trace,
                                       const SimulationTrace& reference_trace,
                                       const Scenario& sc, const Config& cfg);

struct TimingCell {
    std::string method;
    int n_ev = 0;
    double mean_s = 0.0;
    int count = 0;
};

// Mean controller wall-clock per (method, connected-EV count).
std::vector<TimingCell> timing_report(
    const std::vector<std::pair<std::string, std::vector<TimingSample>>>& runs);

void write_timing_csv(const std::vector<TimingCell>& cells, const std::string& path);

}  // namespace evcs

#endif
