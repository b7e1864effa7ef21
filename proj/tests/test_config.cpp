// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "evcs/config.hpp"
#include "evcs/types.hpp"

using namespace evcs;

TEST_CASE("defaults carry the reference station and tuning values") {
    const StationParams p;
    CHECK(p.eta_pv == 0.98);
    CHECK(p.eta_inv == 0.98);
    CHECK(p.eta_tr == 0.99);
    CHECK(p.eta_cp == 0.95);
    CHECK(p.eta_ch == 0.95);
    CHECK(p.eta_dh == 0.95);
    CHECK(p.c_rate == 1.0);
    CHECK(p.cap_bess_kwh == 506.7);
    CHECK(p.soc_min == 0.10);
    CHECK(p.soc_max == 0.90);
    CHECK(p.p_gc_kw == 954.5);
    CHECK(p.p_cc_kw == 172.5);
    CHECK(p.n_cc == 10);
    CHECK(p.n_cp == 2);
    CHECK(p.p_pv_peak_kw == 500.0);
    CHECK(p.price_kwh_bess == 115.0);
    CHECK(p.d_b_eol == 0.80);

    const Hyperparams h;
    CHECK(h.f_s == 0.8);
    CHECK(h.b == 1.0);
    CHECK(h.c == 0.01);
    CHECK(h.tau == 0.2);
    CHECK(h.a == 0.04);
    CHECK(h.alpha == 10.0);
    CHECK(h.beta == 0.01);
    CHECK(h.gamma == 10.0);
    CHECK(h.rho0 == 10.0);
    CHECK(h.delta == 0.04);
    CHECK(h.eps_abs == 1e-4);
    CHECK(h.eps_rel == 1e-2);
    CHECK(h.eps_bisect == 1e-3);
    CHECK(h.tau_rho == 2.0);
    CHECK(h.mu == 10.0);

    const TimeGrid t;
    CHECK(t.horizon_da_h == 24);
    CHECK(t.horizon_bm_h == 4);
    CHECK(t.dt_da_min == 15);
    CHECK(t.dt_id_min == 5);
    CHECK(t.dt_rt_min == 1);
}

TEST_CASE("validate_config accepts the defaults") {
    CHECK_NOTHROW(validate_config(StationParams{}, Hyperparams{}, TimeGrid{}));
}

TEST_CASE("validate_config names the violated invariant") {
    StationParams p;
    p.soc_min = 0.9;
    p.soc_max = 0.1;
    CHECK_THROWS_WITH_AS(validate_config(p, Hyperparams{}, TimeGrid{}),
                         doctest::Contains("soc_min < soc_max"),
                         std::invalid_argument);

    Hyperparams h;
    h.tau_rho = 1.0;
    CHECK_THROWS_WITH_AS(validate_config(StationParams{}, h, TimeGrid{}),
                         doctest::Contains("tau_rho>1"), std::invalid_argument);

    TimeGrid t;
    t.dt_id_min = 7;
    CHECK_THROWS_AS(validate_config(StationParams{}, Hyperparams{}, t),
                    std::invalid_argument);
}

TEST_CASE("config JSON round-trip is the identity") {
    Config cfg;
    cfg.station.cap_bess_kwh = 321.5;
    cfg.hyper.beta = 0.025;
    cfg.time.dt_da_min = 30;
    cfg.time.dt_id_min = 10;
    cfg.time.dt_rt_min = 2;
    cfg = validate_config(cfg.station, cfg.hyper, cfg.time);

    const Config back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.station.cap_bess_kwh == cfg.station.cap_bess_kwh);
    CHECK(back.hyper.beta == cfg.hyper.beta);
    CHECK(back.time.dt_da_min == cfg.time.dt_da_min);
}

TEST_CASE("config JSON rejects unknown keys and fills defaults") {
    using nlohmann::json;
    CHECK_THROWS_WITH_AS(config_from_json(json{{"stations", json::object()}}),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"hyper", {{"rho", 10.0}}}}),
                    std::invalid_argument);

    const Config cfg = config_from_json(json{{"station", {{"n_cc", 4}}}});
    CHECK(cfg.station.n_cc == 4);
    CHECK(cfg.station.p_gc_kw == 954.5);
}

TEST_CASE("schedule slice and session invariants") {
    ScheduleSlice s;
    CHECK_NOTHROW(validate(s));
    s.s_min_kw = 1.0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);

    EvSession ev;
    ev.id = 3;
    ev.arrival_min = 100;
    ev.departure_min = 90;
    ev.capacity_kwh = 60;
    CHECK_THROWS_WITH_AS(validate(ev), doctest::Contains("arrival < departure"),
                         std::invalid_argument);
    ev.departure_min = 160;
    ev.soc_arrival = 0.5;
    ev.energy_request_kwh = 40.0;  // above capacity * (1 - soc)
    CHECK_THROWS_AS(validate(ev), std::invalid_argument);
    ev.energy_request_kwh = 30.0;
    CHECK_NOTHROW(validate(ev));
}
