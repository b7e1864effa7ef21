// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "evcs/dispatch.hpp"

using namespace evcs;

namespace {
const StationParams kSt;  // reference station
}

TEST_CASE("dispatch nominal: grid follows the EV total net of PV") {
    const DispatchResult d = dispatch(200.0, 0.0, 100.0, kSt);
    // (200 - 100*0.98) / 0.99
    CHECK(d.p_g_kw == doctest::Approx(103.0303030303).epsilon(1e-9));
    CHECK(d.p_b_kw == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(d.pv_used_kw == doctest::Approx(98.0));
    CHECK(d.gcp_violation_kw == 0.0);
    CHECK_FALSE(d.crate_clipped);
    CHECK(d.clip_residual_kw == 0.0);
}

TEST_CASE("dispatch idle station") {
    const DispatchResult d = dispatch(0.0, 0.0, 0.0, kSt);
    CHECK(d.p_g_kw == 0.0);
    CHECK(d.p_b_kw == 0.0);
    CHECK(d.gcp_violation_kw == 0.0);
}

TEST_CASE("dispatch charge clip: BESS saturates, surplus exported") {
    // Setpoint asks to store all PV; 1200 kW of PV exceeds the C-rate.
    const double pv = 1200.0;
    const double setpoint = pv * kSt.eta_pv;  // 1176
    const DispatchResult d = dispatch(0.0, setpoint, pv, kSt);

    CHECK(d.crate_clipped);
    CHECK(d.p_b_kw == doctest::Approx(506.7));  // C_B * c_rate
    const double excess = 1176.0 - 506.7;
    const double expected_pg = 0.0 - excess / (0.98 * 0.95 * 0.99);
    CHECK(d.p_g_kw == doctest::Approx(expected_pg).epsilon(1e-9));
    CHECK(d.gcp_violation_kw == 0.0);  // still inside the GCP
    // The literal correction leaves a residual at the coupling point.
    CHECK(d.clip_residual_kw ==
          doctest::Approx(excess * (1.0 - 1.0 / (0.98 * 0.95))).epsilon(1e-9));
    CHECK(d.p_g_kw * kSt.eta_tr + d.pv_used_kw - d.p_b_kw - 0.0 ==
          doctest::Approx(d.clip_residual_kw).epsilon(1e-9));
}

TEST_CASE("dispatch discharge clip pushes the grid past its limit") {
    const DispatchResult d = dispatch(1800.0, 0.0, 0.0, kSt);
    CHECK(d.crate_clipped);
    CHECK(d.p_b_kw == doctest::Approx(-506.7));
    const double pre_pb = 954.5 * 0.99 - 1800.0;  // -855.045
    const double excess = -506.7 - pre_pb;        // 348.345
    const double expected_pg = 954.5 + excess * 0.98 * 0.95 * 0.99;
    CHECK(d.p_g_kw == doctest::Approx(expected_pg).epsilon(1e-9));
    CHECK(d.gcp_violation_kw == doctest::Approx(expected_pg - 954.5).epsilon(1e-9));
}

TEST_CASE("dispatch rejects negative inputs") {
    CHECK_THROWS_AS(dispatch(-1.0, 0.0, 0.0, kSt), std::invalid_argument);
    CHECK_THROWS_AS(dispatch(0.0, 0.0, -1.0, kSt), std::invalid_argument);
}

TEST_CASE("soe_step: identity at zero power, clamp at the band") {
    BessState b{253.35};
    const auto same = soe_step(b, 0.0, 1, kSt);
    CHECK(same.state.soe_kwh == 253.35);
    CHECK(same.rerouted_kwh == 0.0);

    // Full-rate charge for an hour overshoots the 90% band.
    const auto clamped = soe_step(b, 506.7, 60, kSt);
    CHECK(clamped.state.soe_kwh == doctest::Approx(0.9 * 506.7));
    CHECK(clamped.rerouted_kwh ==
          doctest::Approx(253.35 + 506.7 * 0.95 - 456.03).epsilon(1e-9));
}

TEST_CASE("soe round trip loses (1 - eta_ch*eta_dh) of the energy") {
    BessState b{253.35};
    const double charge_kwh = 100.0;  // coupling side, one hour at 100 kW
    const auto up = soe_step(b, charge_kwh, 60, kSt);
    CHECK(up.state.soe_kwh == doctest::Approx(253.35 + 95.0));

    // Discharging the stored content delivers eta_ch*eta_dh of the input.
    const double deliverable = charge_kwh * kSt.eta_ch * kSt.eta_dh;
    const auto down = soe_step(up.state, -deliverable, 60, kSt);
    CHECK(down.state.soe_kwh == doctest::Approx(253.35).epsilon(1e-12));
    CHECK(charge_kwh - deliverable ==
          doctest::Approx(charge_kwh * (1.0 - kSt.eta_ch * kSt.eta_dh)));
}

TEST_CASE("robust persistence forecast") {
    const auto flat = rp_forecast(100.0, 30.0, 30.0);
    for (double v : flat) CHECK(v == doctest::Approx(100.0));

    const auto rising = rp_forecast(100.0, 31.5, 30.0);
    for (double v : rising) CHECK(v == doctest::Approx(105.0));

    const auto night = rp_forecast(100.0, 10.0, 0.0);
    for (double v : night) CHECK(v == 0.0);

    const auto sunset = rp_forecast(100.0, -1.0, 2.0);
    for (double v : sunset) CHECK(v == 0.0);
}

TEST_CASE("persistence bounds") {
    const auto exact = persistence_bounds(50.0, 0.0, 0.0);
    CHECK(exact.lo == 50.0);
    CHECK(exact.mid == 50.0);
    CHECK(exact.hi == 50.0);

    const auto floored = persistence_bounds(10.0, -15.0, 5.0);
    CHECK(floored.lo == 0.0);

    for (double p : {0.0, 5.0, 80.0}) {
        const auto b = persistence_bounds(p, -12.0, 9.0);
        CHECK(b.lo <= b.mid);
        CHECK(b.mid <= b.hi);
    }
    CHECK_THROWS_AS(persistence_bounds(10.0, 1.0, 5.0), std::invalid_argument);
}

TEST_CASE("1-day price persistence repeats the previous day") {
    std::vector<double> series(192);
    for (size_t k = 0; k < series.size(); ++k) series[k] = 0.1 + 0.001 * k;
    const auto fc = price_persistence_1d(series, 96);
    for (int k = 0; k < 96; ++k) CHECK(fc[k] == series[k]);  // no history yet
    for (int k = 96; k < 192; ++k) CHECK(fc[k] == series[k - 96]);
    CHECK_THROWS_AS(price_persistence_1d(std::vector<double>(100, 1.0), 96),
                    std::invalid_argument);
}

TEST_CASE("solar elevation has the right shape for the site") {
    const int doy = day_of_year("2024-11-29");
    CHECK(doy == 334);
    CHECK(day_of_year("2024-03-01") == 61);  // leap year
    CHECK(day_of_year("2023-03-01") == 60);
    CHECK_THROWS_AS(day_of_year("2024/03/01"), std::invalid_argument);

    const double lat = 46.5167;
    const double noon = solar_elevation_deg(doy, 720.0, lat);
    CHECK(noon > 15.0);
    CHECK(noon < 25.0);  // late-November Lausanne noon sun
    CHECK(solar_elevation_deg(doy, 0.0, lat) < 0.0);
    CHECK(solar_elevation_deg(doy, 600.0, lat) < noon);
    // Summer noon is much higher.
    CHECK(solar_elevation_deg(172, 720.0, lat) > 60.0);
}
