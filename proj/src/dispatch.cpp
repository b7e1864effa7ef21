// SPDX-License-Identifier: Apache-2.0
#include "evcs/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evcs {

DispatchResult dispatch(double c_total_kw, double p_b_setpoint_kw, double pv_kw,
                        const StationParams& params) {
    if (c_total_kw < 0.0) throw std::invalid_argument("dispatch: c_total < 0");
    if (pv_kw < 0.0) throw std::invalid_argument("dispatch: pv < 0");

    DispatchResult out;
    out.pv_used_kw = pv_kw * params.eta_pv;

    out.p_g_kw = std::min(params.p_gc_kw,
                          (c_total_kw + p_b_setpoint_kw - out.pv_used_kw) / params.eta_tr);
    out.p_b_kw = out.p_g_kw * params.eta_tr + out.pv_used_kw - c_total_kw;

    const double p_b_limit = params.cap_bess_kwh * params.c_rate;
    if (out.p_b_kw > p_b_limit) {
        const double excess = out.p_b_kw - p_b_limit;
        out.p_b_kw = p_b_limit;
        out.p_g_kw -= excess / (params.eta_inv * params.eta_ch * params.eta_tr);
        out.crate_clipped = true;
    } else if (out.p_b_kw < -p_b_limit) {
        const double excess = -p_b_limit - out.p_b_kw;
        out.p_b_kw = -p_b_limit;
        out.p_g_kw += excess * params.eta_inv * params.eta_dh * params.eta_tr;
        out.crate_clipped = true;
    }

    if (out.crate_clipped) {
        out.clip_residual_kw =
            out.p_g_kw * params.eta_tr + out.pv_used_kw - out.p_b_kw - c_total_kw;
    }
    out.gcp_violation_kw = std::max(0.0, std::abs(out.p_g_kw) - params.p_gc_kw);
    return out;
}

SoeStepResult soe_step(BessState state, double p_b_kw, int dt_min,
                       const StationParams& params) {
    if (dt_min <= 0) throw std::invalid_argument("soe_step: dt <= 0");
    const double h = dt_min / 60.0;
    const double delta_kwh =
        p_b_kw >= 0.0 ? p_b_kw * params.eta_ch * h : p_b_kw / params.eta_dh * h;

    const double lo = params.soc_min * params.cap_bess_kwh;
    const double hi = params.soc_max * params.cap_bess_kwh;
    const double raw = state.soe_kwh + delta_kwh;

    SoeStepResult out;
    out.state.soe_kwh = std::clamp(raw, lo, hi);
    out.rerouted_kwh = raw - out.state.soe_kwh;
    return out;
}

std::array<double, 15> rp_forecast(double p_prev_kw, double elev_now_deg,
                                   double elev_prev_deg) {
    std::array<double, 15> out{};
    if (elev_prev_deg <= 0.0) return out;  // night
    const double ratio = std::max(0.0, elev_now_deg) / elev_prev_deg;
    out.fill(std::max(0.0, p_prev_kw * ratio));
    return out;
}

PersistenceBand persistence_bounds(double p_prev_kw, double q05_kw, double q95_kw) {
    if (!(q05_kw <= 0.0 && q95_kw >= 0.0))
        throw std::invalid_argument("persistence_bounds: need q05 <= 0 <= q95");
    PersistenceBand b;
    b.lo = std::max(0.0, p_prev_kw + q05_kw);
    b.mid = p_prev_kw;
    b.hi = p_prev_kw + q95_kw;
    return b;
}

std::vector<double> price_persistence_1d(const std::vector<double>& series,
                                         int steps_per_day) {
    if (steps_per_day <= 0)
        throw std::invalid_argument("price_persistence_1d: steps_per_day <= 0");
    if (series.size() % steps_per_day != 0)
        throw std::invalid_argument("price_persistence_1d: series not whole days");
    std::vector<double> out = series;
    for (size_t k = steps_per_day; k < series.size(); ++k)
        out[k] = series[k - steps_per_day];
    return out;
}

double solar_elevation_deg(int day_of_year, double minute_of_day, double lat_deg) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double g = 2.0 * std::numbers::pi / 365.0 * (day_of_year - 1);
    // Spencer's Fourier series for the solar declination.
    const double decl = 0.006918 - 0.399912 * std::cos(g) + 0.070257 * std::sin(g) -
                        0.006758 * std::cos(2 * g) + 0.000907 * std::sin(2 * g) -
                        0.002697 * std::cos(3 * g) + 0.00148 * std::sin(3 * g);
    const double hour_angle = (minute_of_day / 4.0 - 180.0) * deg;  // 15 deg/h
    const double lat = lat_deg * deg;
    const double sin_elev = std::sin(lat) * std::sin(decl) +
                            std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
    return std::asin(std::clamp(sin_elev, -1.0, 1.0)) / deg;
}

int day_of_year(const char* iso_date) {
    const std::string s(iso_date);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw std::invalid_argument("day_of_year: expected YYYY-MM-DD, got " + s);
    const int year = std::stoi(s.substr(0, 4));
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw std::invalid_argument("day_of_year: bad date " + s);
    static const int cum[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return cum[month - 1] + day + (leap && month > 2 ? 1 : 0);
}

}  // namespace evcs
