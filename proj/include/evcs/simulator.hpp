// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_SIMULATOR_HPP
#define EVCS_SIMULATOR_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "evcs/config.hpp"
#include "evcs/scenario.hpp"
#include "evcs/types.hpp"

namespace evcs {

enum class Method { SgAdmm, Admm, Centralized, Uncontrolled };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct EvMinute {
    int session_id = 0;
    double p_req_kw = 0.0;
    double p_alloc_kw = 0.0;  // delivered power
    double theta = 0.0;
    double soc = 0.0;
};

struct TraceRecord {
    int minute = 0;
    double c_budget_kw = 0.0;
    double slack_kw = 0.0;
    double c_req_kw = 0.0;    // sum of EV requests, EV side
    double c_alloc_kw = 0.0;  // sum of delivered powers, EV side
    double p_g_kw = 0.0;
    double p_b_kw = 0.0;
    double pv_kw = 0.0;
    double soe_kwh = 0.0;
    double gcp_violation_kw = 0.0;
    double clip_residual_kw = 0.0;
    double coupling_gap_kw = 0.0;  // |solver coupling - (C + s)|
    double coupling_tol_kw = 0.0;  // stopping-bound tolerance at this step
    double pv_fc_kw = 0.0;         // robust-persistence forecast in force
    double pv_fc_lo_kw = 0.0;      // 1-minute persistence band
    double pv_fc_hi_kw = 0.0;
    double tariff = 0.0;
    double price_dam = 0.0;
    double price_short = 0.0;
    double price_long = 0.0;
    double d_cap = 0.0;
    double lambda = 0.0;
    int sg_iterations = 0;
    int admm_iterations = 0;
    bool feasible = true;
    bool converged = true;
    std::vector<EvMinute> evs;
};

struct TimingSample {
    int n_ev = 0;
    double seconds = 0.0;
};

struct SimulationTrace {
    Method method = Method::Uncontrolled;
    std::vector<TraceRecord> records;
    std::vector<TimingSample> timing;  // wall clock, excluded from the CSV
};

struct SimOptions {
    double quantum_kw = 0.5;  // centralized power discretization
};

// Runs one controller over a scenario at real-time granularity: per minute
// it refreshes requests from the charging curves, holds the schedule slice
// from the 5-minute grid, solves the step, applies the physical dispatch and
// battery bookkeeping, and records everything. Wall-clock is measured around
// the controller call only.
SimulationTrace simulate(const Scenario& sc, const ScheduleSeries& schedule,
                         Method method, const Config& cfg,
                         const SimOptions& opt = {});

void write_trace_csv(const SimulationTrace& trace, const std::string& path);
SimulationTrace read_trace_csv(const std::string& path);

nlohmann::json run_summary(const SimulationTrace& trace, const Config& cfg);

}  // namespace evcs

#endif
