// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "evcs/metrics.hpp"

using namespace evcs;

namespace {

const Config kCfg;

// Minute records with one EV at a fixed request/allocation pair.
SimulationTrace flat_trace(int minutes, double p_req, double p_alloc,
                           double theta = 0.0, int session_id = 1) {
    SimulationTrace t;
    t.method = Method::SgAdmm;
    for (int m = 0; m < minutes; ++m) {
        TraceRecord r;
        r.minute = m;
        r.c_alloc_kw = p_alloc;
        r.evs.push_back(EvMinute{session_id, p_req, p_alloc, theta, 0.5});
        t.records.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("gini closed-form cases") {
    CHECK(gini({5, 5, 5, 5}) == doctest::Approx(0.0));
    CHECK(gini({0, 1}) == doctest::Approx(0.5));
    for (int n : {2, 5, 50}) {
        std::vector<double> x(n, 0.0);
        x.back() = 1.0;
        CHECK(gini(x) == doctest::Approx((n - 1.0) / n));
    }
    CHECK(gini({0.0, 0.0}) == 0.0);  // zero-sum convention
    CHECK_THROWS_AS(gini({1.0, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(gini({}), std::invalid_argument);
}

TEST_CASE("gini stays within [0, (n-1)/n] on random inputs") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> uni(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 30;
        std::vector<double> x;
        for (int i = 0; i < n; ++i) x.push_back(uni(rng));
        const double g = gini(x);
        CHECK(g >= 0.0);
        CHECK(g <= (n - 1.0) / n + 1e-12);
    }
}

TEST_CASE("fairness scores and scale invariance") {
    const auto perfect = fairness(flat_trace(30, 50.0, 50.0));
    CHECK(perfect.per_ev.size() == 1);
    CHECK(perfect.per_ev[0].second == 0.0);
    CHECK(perfect.gini_index == 0.0);

    const auto half = fairness(flat_trace(30, 50.0, 25.0));
    CHECK(half.per_ev[0].second == doctest::Approx(0.5));

    // Per-unit definition: scaling both series leaves the score unchanged.
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uni(2.0, 120.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double req = uni(rng);
        const double alloc = req * 0.3 + 0.5 * uni(rng);
        const double k = 1.0 + 4.0 * (trial % 5);
        const auto base = fairness(flat_trace(10, req, alloc));
        const auto scaled = fairness(flat_trace(10, k * req, k * alloc));
        CHECK(base.per_ev[0].second ==
              doctest::Approx(scaled.per_ev[0].second).epsilon(1e-12));
    }

    CHECK_THROWS_AS(fairness(SimulationTrace{}), std::invalid_argument);
}

TEST_CASE("profit breakdown: zero run and the hand fixture") {
    // Zero everything: 60 idle minutes.
    SimulationTrace idle;
    idle.method = Method::Admm;
    for (int m = 0; m < 60; ++m) {
        TraceRecord r;
        r.minute = m;
        idle.records.push_back(r);
    }
    ScheduleSeries sched;
    sched.slices.assign(12, ScheduleSlice{});
    const ProfitBreakdown zero = profit_breakdown(idle, sched, kCfg);
    CHECK(zero.potential_profit == 0.0);
    CHECK(zero.dam_cost == 0.0);
    CHECK(zero.bm_cost == 0.0);
    CHECK(zero.incentives_paid == 0.0);
    CHECK(zero.net_profit == 0.0);

    // 10 kWh sold at 0.5 $/kWh with theta = 0.02, DP bought for 2 $, no
    // imbalance: net = 5 - 2 - 0 - 0.2 = 2.8.
    SimulationTrace t = flat_trace(60, 10.0, 10.0, 0.02);
    ScheduleSeries plan;
    ScheduleSlice slice;
    slice.c_budget_kw = 10.0 * kCfg.station.eta_tr;  // DP grid = 10 kW
    slice.price_dam = 0.2;
    slice.tariff_ev = 0.5;
    plan.slices.assign(12, slice);
    for (auto& r : t.records) {
        r.tariff = 0.5;
        r.price_dam = 0.2;
        r.price_short = 0.3;
        r.price_long = 0.1;
        r.p_g_kw = 10.0;  // matches the plan exactly
    }
    const ProfitBreakdown pb = profit_breakdown(t, plan, kCfg);
    CHECK(pb.potential_profit == doctest::Approx(5.0));
    CHECK(pb.dam_cost == doctest::Approx(2.0));
    CHECK(pb.bm_cost == doctest::Approx(0.0));
    CHECK(pb.incentives_paid == doctest::Approx(0.2));
    CHECK(pb.net_profit == doctest::Approx(2.8));
    CHECK(pb.net_profit == doctest::Approx(pb.potential_profit - pb.dam_cost -
                                           pb.bm_cost - pb.incentives_paid));

    // theta == 0 run pays nothing.
    const ProfitBreakdown free_run =
        profit_breakdown(flat_trace(60, 10.0, 10.0, 0.0), plan, kCfg);
    CHECK(free_run.incentives_paid == 0.0);
}

TEST_CASE("imbalances settle at the short and long prices") {
    SimulationTrace t = flat_trace(60, 0.0, 0.0);
    ScheduleSeries plan;
    ScheduleSlice slice;
    slice.c_budget_kw = 10.0 * kCfg.station.eta_tr;
    plan.slices.assign(12, slice);
    for (auto& r : t.records) {
        r.price_short = 0.3;
        r.price_long = 0.1;
        r.p_g_kw = 16.0;  // 6 kW short of the 10 kW plan
    }
    const ProfitBreakdown shortfall = profit_breakdown(t, plan, kCfg);
    CHECK(shortfall.bm_cost == doctest::Approx(0.3 * 6.0));

    for (auto& r : t.records) r.p_g_kw = 4.0;  // 6 kW long
    const ProfitBreakdown surplus = profit_breakdown(t, plan, kCfg);
    CHECK(surplus.bm_cost == doctest::Approx(-0.1 * 6.0));
}

TEST_CASE("battery wear counts equivalent full cycles") {
    SimulationTrace flat;
    for (int m = 0; m < 120; ++m) {
        TraceRecord r;
        r.minute = m;
        r.p_b_kw = 0.0;
        flat.records.push_back(r);
    }
    CHECK(battery_wear(flat, kCfg.station) == 0.0);

    // Full charge then full discharge at rated power: one equivalent cycle.
    SimulationTrace cycle;
    for (int m = 0; m < 120; ++m) {
        TraceRecord r;
        r.minute = m;
        r.p_b_kw = m < 60 ? 506.7 : -506.7;
        cycle.records.push_back(r);
    }
    const double wear = battery_wear(cycle, kCfg.station);
    CHECK(wear == doctest::Approx(1.0 * (1.0 - 0.8) / 5000.0));

    // Monotone in throughput.
    SimulationTrace half = cycle;
    for (auto& r : half.records) r.p_b_kw *= 0.5;
    CHECK(battery_wear(half, kCfg.station) < wear);
    CHECK_THROWS_AS(battery_wear(cycle, kCfg.station, 0.0), std::invalid_argument);
}

TEST_CASE("extra charging time: identity, doubling, antisymmetry") {
    Scenario sc;
    sc.pv_kw.assign(1440, 0.0);
    sc.price_dam.assign(96, 0.1);
    sc.price_short.assign(96, 0.12);
    sc.price_long.assign(96, 0.08);
    sc.tariff_ev.assign(96, 0.5);
    EvSession s;
    s.id = 1;
    s.arrival_min = 0;
    s.departure_min = 1440;
    s.capacity_kwh = 60.0;
    s.soc_arrival = 0.0;
    s.energy_request_kwh = 10.0;
    sc.sessions.push_back(s);

    // Reference delivers 60 kW; the method 30 kW: completion doubles from
    // 10 to 20 minutes, so the delta equals the reference charging time.
    const SimulationTrace ref = flat_trace(60, 60.0, 60.0);
    const SimulationTrace slow = flat_trace(60, 60.0, 30.0);

    const auto same = extra_charging_time(ref, ref, sc, kCfg);
    CHECK(same.at(1) == 0);

    const auto delta = extra_charging_time(slow, ref, sc, kCfg);
    CHECK(delta.at(1) == 10);

    const auto swapped = extra_charging_time(ref, slow, sc, kCfg);
    CHECK(swapped.at(1) == -delta.at(1));
}

TEST_CASE("timing report aggregates means per method and fleet size") {
    std::vector<std::pair<std::string, std::vector<TimingSample>>> runs;
    runs.push_back({"sg-admm", {{1, 0.010}, {1, 0.020}, {1, 0.060}, {0, 9.0}}});
    runs.push_back({"centralized", {{1, 0.100}}});
    const auto cells = timing_report(runs);
    REQUIRE(cells.size() == 2);
    for (const auto& c : cells) {
        if (c.method == "sg-admm") {
            CHECK(c.n_ev == 1);
            CHECK(c.count == 3);
            CHECK(c.mean_s == doctest::Approx(0.030));
        } else {
            CHECK(c.method == "centralized");
            CHECK(c.count == 1);
        }
    }
}
