// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_CONFIG_HPP
#define EVCS_CONFIG_HPP

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace evcs {

// Station hardware and market-side constants. Defaults are the reference
// Lausanne L3 charging station (grid + PV + BESS, 10 columns x 2 plugs).
struct StationParams {
    double eta_pv = 0.98;         // PV converter efficiency
    double eta_inv = 0.98;        // BESS inverter efficiency
    double eta_tr = 0.99;         // transformer efficiency
    double eta_cp = 0.95;         // charging point efficiency
    double eta_ch = 0.95;         // BESS charge efficiency
    double eta_dh = 0.95;         // BESS discharge efficiency
    double c_rate = 1.0;          // BESS max C-rate, 1/h
    double cap_bess_kwh = 506.7;  // BESS capacity C_B
    double soc_min = 0.10;        // BESS SoC band
    double soc_max = 0.90;
    double p_gc_kw = 954.5;       // grid connection limit P_GC
    double p_cc_kw = 172.5;       // per-column limit P_CC
    int n_cc = 10;                // charging columns
    int n_cp = 2;                 // plugs per column
    double p_pv_peak_kw = 500.0;
    double price_kwh_bess = 115.0;  // BESS capital cost, $/kWh
    double d_b_eol = 0.80;          // end-of-life capacity fraction
};

// Solver and objective hyperparameters. The ADMM stopping/penalty constants
// (rho0, eps_abs, eps_rel, tau_rho, mu) follow the usual recommendations.
struct Hyperparams {
    double f_s = 0.8;      // reserved for the scheduling layers
    double b = 1.0;        // stress function offset, SF(0) = b
    double c = 0.01;       // stress function scale
    double tau = 0.2;      // reserved for the scheduling layers
    double a = 0.04;       // stress function exponent rate
    double alpha = 10.0;   // leader slack cost, $/kWh
    double beta = 0.01;    // follower shortfall weight
    double gamma = 10.0;   // follower overcharge (stress) weight
    double rho0 = 10.0;    // initial ADMM penalty
    double delta = 0.04;   // gradient-to-incentive scale
    double eps_abs = 1e-4;
    double eps_rel = 1e-2;
    double eps_bisect = 1e-3;  // slack bisection width, relative to the slack span
    double tau_rho = 2.0;      // residual-balancing factor
    double mu = 10.0;          // residual-balancing trigger ratio
    int max_admm_iters = 500;
    int max_sg_iters = 32;
};

// Simulation time frames, all in minutes except the hour-denominated horizons.
struct TimeGrid {
    int horizon_da_h = 24;  // day-ahead horizon
    int horizon_bm_h = 4;   // balancing-market horizon
    int dt_da_min = 15;     // day-ahead granularity
    int dt_id_min = 5;      // intra-day granularity (schedule refresh)
    int dt_rt_min = 1;      // real-time control step
};

struct Config {
    StationParams station;
    Hyperparams hyper;
    TimeGrid time;
};

// Checks every invariant and returns the assembled config. Throws
// std::invalid_argument naming the first violated constraint.
Config validate_config(const StationParams& station, const Hyperparams& hyper,
                       const TimeGrid& time);

void validate(const StationParams& p);
void validate(const Hyperparams& h);
void validate(const TimeGrid& t);

// JSON form: {"station": {...}, "hyper": {...}, "time": {...}}. Every field
// is optional and defaults to the values above; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& cfg);
Config load_config(const std::string& path);

}  // namespace evcs

#endif
