// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_CHARGING_CURVE_HPP
#define EVCS_CHARGING_CURVE_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evcs/types.hpp"

namespace evcs {

// Maximum charging power as a function of battery SoC, piecewise linear
// between breakpoints. Breakpoints must cover [0,1] with strictly
// increasing SoC.
class PowerSocCurve {
  public:
    PowerSocCurve() = default;
    explicit PowerSocCurve(std::vector<std::pair<double, double>> breakpoints);

    double eval(double soc) const;     // kW; throws outside [0,1]
    double peak_kw() const;            // max p over the breakpoints
    const std::vector<std::pair<double, double>>& breakpoints() const {
        return points_;
    }

    // CSV rows "soc,p_max_kw", header optional.
    static PowerSocCurve from_csv(const std::string& path);

    // Standard CC-CV shape: flat at rated_kw up to knee_soc, linear to 0 at 1.
    static PowerSocCurve cc_cv(double rated_kw, double knee_soc = 0.8);

  private:
    std::vector<std::pair<double, double>> points_;
};

double curve_eval(const PowerSocCurve& curve, double soc);

// Per-EV default when a session carries no explicit curve: CC-CV at the
// session's rated power (min(2C, 150 kW) unless overridden).
PowerSocCurve default_curve_for(const EvSession& session);
double default_rated_kw(const EvSession& session);

// Charging stress penalty, positive, strictly increasing and convex:
//   SF(p) = b + c * (exp(100 * a * p / p_ref) - 1)
// p_ref is the EV's curve peak so the shape is comparable across vehicles.
// A different closed form can be plugged in through the custom evaluator
// pair; both members must be set together.
struct StressFunction {
    double a = 0.04;
    double b = 1.0;
    double c = 0.01;
    double p_ref_kw = 100.0;
    std::shared_ptr<const std::pair<std::function<double(double)>,
                                    std::function<double(double)>>>
        custom;  // (value, derivative), overrides the exponential form
};

double sf_eval(const StressFunction& sf, double p_kw);
double sf_derivative(const StressFunction& sf, double p_kw);

// Piecewise-linear tabulation of a scalar function on [lo, hi], used where a
// linearized stand-in for SF / SF' is wanted.
class PiecewiseLinear {
  public:
    template <typename F>
    PiecewiseLinear(F&& f, double lo, double hi, int segments)
        : lo_(lo), hi_(hi) {
        if (segments < 1 || !(hi > lo))
            throw std::invalid_argument("PiecewiseLinear: bad grid");
        values_.reserve(segments + 1);
        for (int i = 0; i <= segments; ++i)
            values_.push_back(f(lo + (hi - lo) * i / segments));
    }

    double eval(double x) const;

  private:
    double lo_, hi_;
    std::vector<double> values_;
};

PiecewiseLinear sf_piecewise(const StressFunction& sf, int segments = 32);
PiecewiseLinear sf_derivative_piecewise(const StressFunction& sf, int segments = 32);

struct SocTrajectory {
    std::vector<double> soc;           // size = steps + 1, soc[0] = soc0
    std::vector<double> delivered_kw;  // size = steps
    double energy_kwh = 0.0;
};

// Forward-integrates the battery SoC under a scheduled power series.
// Delivered power per step is min(schedule, curve cap at current SoC,
// remaining headroom), so SoC never exceeds 1 and the energy bookkeeping
// is exact.
SocTrajectory integrate_soc(const PowerSocCurve& curve, double soc0,
                            const std::vector<double>& p_sched_kw, int dt_min,
                            double capacity_kwh);

}  // namespace evcs

#endif
