// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_DISPATCH_HPP
#define EVCS_DISPATCH_HPP

#include <array>
#include <vector>

#include "evcs/config.hpp"

namespace evcs {

struct DispatchResult {
    double p_g_kw = 0.0;      // grid power, import > 0
    double p_b_kw = 0.0;      // BESS power, charge > 0
    double pv_used_kw = 0.0;  // PV after converter efficiency
    double gcp_violation_kw = 0.0;     // |p_g| excess over P_GC, >= 0
    bool crate_clipped = false;        // |p_b| hit C_B * c_rate
    double clip_residual_kw = 0.0;     // coupling-point residual left by the
                                       // literal C-rate correction terms
};

// Real-time dispatch for one step. c_total is the delivered EV total at the
// coupling point (slack included); the BESS setpoint folds into the grid
// target and the BESS absorbs what the grid cap refuses. C-rate clipping
// reroutes the surplus through the grid via the converter chains, which can
// push |p_g| past P_GC; that excess is reported as data, not an error.
DispatchResult dispatch(double c_total_kw, double p_b_setpoint_kw, double pv_kw,
                        const StationParams& params);

struct BessState {
    double soe_kwh = 0.0;
};

struct SoeStepResult {
    BessState state;
    // Battery-side energy refused by the SoC band this step; > 0 when a
    // charge saturated at soc_max, < 0 when a discharge hit soc_min. The
    // caller reroutes it to the grid.
    double rerouted_kwh = 0.0;
};

SoeStepResult soe_step(BessState state, double p_b_kw, int dt_min,
                       const StationParams& params);

// Robust-persistence PV forecast for the next 15 minutes: previous
// measurement scaled by the sun-elevation ratio, floored at zero. Night
// (elev_prev <= 0) forecasts zero.
std::array<double, 15> rp_forecast(double p_prev_kw, double elev_now_deg,
                                   double elev_prev_deg);

struct PersistenceBand {
    double lo = 0.0;
    double mid = 0.0;
    double hi = 0.0;
};

// 1-minute persistence with signed historical error quantiles (q05 <= 0 <=
// q95); the lower bound never goes negative.
PersistenceBand persistence_bounds(double p_prev_kw, double q05_kw, double q95_kw);

// Naive 1-day persistence for imbalance prices: each step repeats the value
// one day earlier; the first day, lacking history, repeats itself.
std::vector<double> price_persistence_1d(const std::vector<double>& series,
                                         int steps_per_day);

// Sun elevation in degrees from a standard declination / hour-angle
// approximation; minute_of_day is local solar time.
double solar_elevation_deg(int day_of_year, double minute_of_day, double lat_deg);

// Day of year (1-based) for an ISO date "YYYY-MM-DD".
int day_of_year(const char* iso_date);

}  // namespace evcs

#endif
