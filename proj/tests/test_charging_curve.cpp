// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "evcs/charging_curve.hpp"

using namespace evcs;

namespace {
const PowerSocCurve kTaper({{0.0, 150.0}, {0.8, 150.0}, {1.0, 0.0}});
}

TEST_CASE("curve evaluation interpolates between breakpoints") {
    CHECK(curve_eval(kTaper, 0.8) == 150.0);
    CHECK(curve_eval(kTaper, 0.9) == doctest::Approx(75.0));
    CHECK(curve_eval(kTaper, 1.0) == 0.0);
    CHECK(curve_eval(kTaper, 0.0) == 150.0);
    CHECK_THROWS_AS(curve_eval(kTaper, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(curve_eval(kTaper, 1.1), std::invalid_argument);
}

TEST_CASE("curve construction rejects bad breakpoints") {
    CHECK_THROWS_AS(PowerSocCurve({{0.0, 10.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PowerSocCurve({{0.1, 10.0}, {1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PowerSocCurve({{0.0, 10.0}, {0.5, -1.0}, {1.0, 0.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PowerSocCurve({{0.0, 10.0}, {0.5, 5.0}, {0.5, 4.0}, {1.0, 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("stress function closed form") {
    StressFunction sf;  // a=0.04, b=1, c=0.01
    sf.p_ref_kw = 100.0;

    CHECK(sf_eval(sf, 0.0) == sf.b);
    StressFunction other{.a = 0.07, .b = 2.5, .c = 0.2, .p_ref_kw = 80.0};
    CHECK(sf_eval(other, 0.0) == 2.5);

    // exponent at p = p_ref is 100*a = 4
    CHECK(sf_eval(sf, 100.0) == doctest::Approx(1.0 + 0.01 * (std::exp(4.0) - 1.0)));
    CHECK(sf_eval(sf, 100.0) == doctest::Approx(1.5360).epsilon(1e-4));
    CHECK(sf_eval(sf, 50.0) < sf_eval(sf, 100.0));
    CHECK_THROWS_AS(sf_eval(sf, -1.0), std::invalid_argument);
}

TEST_CASE("stress derivative matches hand value and finite differences") {
    StressFunction sf;
    sf.p_ref_kw = 100.0;
    CHECK(sf_derivative(sf, 0.0) == doctest::Approx(4e-4).epsilon(1e-9));

    const double h = 1e-4;
    for (double p : {10.0, 50.0, 120.0}) {
        const double fd = (sf_eval(sf, p + h) - sf_eval(sf, p - h)) / (2 * h);
        CHECK(std::abs(sf_derivative(sf, p) - fd) < 1e-6);
    }
}

TEST_CASE("stress derivative consistency over random powers") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.01, 190.0);
    StressFunction sf;
    sf.p_ref_kw = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double p = uni(rng);
        const double h = 1e-5 * std::max(1.0, p);
        const double fd = (sf_eval(sf, p + h) - sf_eval(sf, p - h)) / (2 * h);
        CHECK(sf_derivative(sf, p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("piecewise tabulation stays within 1% of the stress function") {
    StressFunction sf;
    sf.p_ref_kw = 100.0;
    const PiecewiseLinear pw = sf_piecewise(sf, 32);
    const PiecewiseLinear pwd = sf_derivative_piecewise(sf, 32);
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double p = 2.0 * sf.p_ref_kw * i / 4000.0;
        worst = std::max(worst, std::abs(pw.eval(p) - sf_eval(sf, p)) / sf_eval(sf, p));
        CHECK(std::abs(pwd.eval(p) - sf_derivative(sf, p)) <
              0.01 * sf_eval(sf, p));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("soc integration: zero power, exact fill, curve cap") {
    const PowerSocCurve flat({{0.0, 60.0}, {1.0, 60.0}});

    const auto idle = integrate_soc(flat, 0.4, std::vector<double>(10, 0.0), 1, 60.0);
    for (double s : idle.soc) CHECK(s == 0.4);

    // 60 kWh at 60 kW from half charge: full after exactly 30 minutes.
    const auto fill = integrate_soc(flat, 0.5, std::vector<double>(30, 60.0), 1, 60.0);
    CHECK(fill.soc.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fill.delivered_kw[29] == doctest::Approx(60.0));

    const auto capped = integrate_soc(kTaper, 0.1, {200.0}, 1, 77.0);
    CHECK(capped.delivered_kw[0] == 150.0);

    CHECK_THROWS_AS(integrate_soc(flat, 0.5, {10.0}, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_soc(flat, 0.5, {-1.0}, 1, 60.0), std::invalid_argument);
}

TEST_CASE("soc integration conserves energy and is monotone in the schedule") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double cap = 30.0 + 90.0 * uni(rng);
        const double rated = 40.0 + 110.0 * uni(rng);
        const PowerSocCurve curve = PowerSocCurve::cc_cv(rated);
        const double soc0 = 0.3 * uni(rng);
        std::vector<double> sched(40), larger(40);
        for (int i = 0; i < 40; ++i) {
            sched[i] = rated * uni(rng) * 0.4;  // light load, no clipping
            larger[i] = sched[i] + rated * uni(rng) * 0.3;
        }
        const auto a = integrate_soc(curve, soc0, sched, 1, cap);
        CHECK(std::abs(a.energy_kwh - (a.soc.back() - soc0) * cap) < 1e-9);

        const auto b = integrate_soc(curve, soc0, larger, 1, cap);
        for (size_t i = 0; i < a.soc.size(); ++i) CHECK(b.soc[i] >= a.soc[i] - 1e-12);
    }
}

TEST_CASE("a custom stress form can replace the exponential") {
    StressFunction sf;
    sf.p_ref_kw = 100.0;
    sf.custom = std::make_shared<
        std::pair<std::function<double(double)>, std::function<double(double)>>>(
        [](double p) { return 1.0 + 0.0001 * p * p; },
        [](double p) { return 0.0002 * p; });
    CHECK(sf_eval(sf, 50.0) == doctest::Approx(1.25));
    CHECK(sf_derivative(sf, 50.0) == doctest::Approx(0.01));
    const double h = 1e-5;
    const double fd = (sf_eval(sf, 80.0 + h) - sf_eval(sf, 80.0 - h)) / (2 * h);
    CHECK(sf_derivative(sf, 80.0) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("curves load from CSV rows") {
    const auto path = std::string("/tmp/evcs_curve_test.csv");
    {
        std::ofstream out(path);
        out << "soc,p_max_kw\n0,150\n0.8,150\n1.0,0\n";
    }
    const PowerSocCurve loaded = PowerSocCurve::from_csv(path);
    CHECK(loaded.eval(0.9) == doctest::Approx(75.0));
    CHECK(loaded.peak_kw() == 150.0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(PowerSocCurve::from_csv("/nonexistent/curve.csv"),
                    std::invalid_argument);
}

TEST_CASE("default session curve derives from capacity") {
    EvSession s;
    s.capacity_kwh = 60.0;
    CHECK(default_rated_kw(s) == 120.0);
    s.capacity_kwh = 100.0;
    CHECK(default_rated_kw(s) == 150.0);
    s.rated_kw = 50.0;
    CHECK(default_rated_kw(s) == 50.0);
}
