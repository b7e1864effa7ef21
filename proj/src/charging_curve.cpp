// SPDX-License-Identifier: Apache-2.0
#include "evcs/charging_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evcs {

PowerSocCurve::PowerSocCurve(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.size() < 2)
        throw std::invalid_argument("PowerSocCurve: need at least two breakpoints");
    if (points_.front().first != 0.0 || points_.back().first != 1.0)
        throw std::invalid_argument("PowerSocCurve: breakpoints must cover [0,1]");
    for (size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].second < 0.0)
            throw std::invalid_argument("PowerSocCurve: p_max must be >= 0");
        if (i > 0 && !(points_[i].first > points_[i - 1].first))
            throw std::invalid_argument("PowerSocCurve: soc must be strictly increasing");
    }
}

double PowerSocCurve::eval(double soc) const {
    if (!(soc >= 0.0 && soc <= 1.0))
        throw std::invalid_argument("PowerSocCurve: soc outside [0,1]");
    auto it = std::lower_bound(points_.begin(), points_.end(), soc,
                               [](const auto& bp, double s) { return bp.first < s; });
    if (it == points_.begin()) return it->second;
    if (it == points_.end()) return points_.back().second;
    if (it->first == soc) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (soc - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

double PowerSocCurve::peak_kw() const {
    double p = 0.0;
    for (const auto& bp : points_) p = std::max(p, bp.second);
    return p;
}

PowerSocCurve PowerSocCurve::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("PowerSocCurve: cannot open " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' &&
            line[0] != '.')
            continue;  // header or comment
        std::istringstream ls(line);
        std::string soc_s, p_s;
        if (!std::getline(ls, soc_s, ',') || !std::getline(ls, p_s, ','))
            throw std::invalid_argument("PowerSocCurve: bad row '" + line + "'");
        pts.emplace_back(std::stod(soc_s), std::stod(p_s));
    }
    return PowerSocCurve(std::move(pts));
}

PowerSocCurve PowerSocCurve::cc_cv(double rated_kw, double knee_soc) {
    if (!(rated_kw >= 0) || !(knee_soc > 0.0 && knee_soc < 1.0))
        throw std::invalid_argument("PowerSocCurve: bad cc_cv parameters");
    return PowerSocCurve({{0.0, rated_kw}, {knee_soc, rated_kw}, {1.0, 0.0}});
}

double curve_eval(const PowerSocCurve& curve, double soc) { return curve.eval(soc); }

double default_rated_kw(const EvSession& session) {
    if (session.rated_kw > 0.0) return session.rated_kw;
    return std::min(2.0 * session.capacity_kwh, 150.0);
}

PowerSocCurve default_curve_for(const EvSession& session) {
    return PowerSocCurve::cc_cv(default_rated_kw(session));
}

double sf_eval(const StressFunction& sf, double p_kw) {
    if (p_kw < 0.0) throw std::invalid_argument("sf_eval: p < 0");
    if (sf.custom) return sf.custom->first(p_kw);
    if (!(sf.a > 0 && sf.b > 0 && sf.c > 0 && sf.p_ref_kw > 0))
        throw std::invalid_argument("sf_eval: invalid stress parameters");
    return sf.b + sf.c * (std::exp(100.0 * sf.a * p_kw / sf.p_ref_kw) - 1.0);
}

double sf_derivative(const StressFunction& sf, double p_kw) {
    if (p_kw < 0.0) throw std::invalid_argument("sf_derivative: p < 0");
    if (sf.custom) return sf.custom->second(p_kw);
    const double k = 100.0 * sf.a / sf.p_ref_kw;
    return sf.c * k * std::exp(k * p_kw);
}

double PiecewiseLinear::eval(double x) const {
    const int n = static_cast<int>(values_.size()) - 1;
    double t = (x - lo_) / (hi_ - lo_) * n;
    t = std::clamp(t, 0.0, static_cast<double>(n));
    const int i = std::min(static_cast<int>(t), n - 1);
    const double frac = t - i;
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

PiecewiseLinear sf_piecewise(const StressFunction& sf, int segments) {
    return PiecewiseLinear([&](double p) { return sf_eval(sf, p); }, 0.0,
                           2.0 * sf.p_ref_kw, segments);
}

PiecewiseLinear sf_derivative_piecewise(const StressFunction& sf, int segments) {
    return PiecewiseLinear([&](double p) { return sf_derivative(sf, p); }, 0.0,
                           2.0 * sf.p_ref_kw, segments);
}

SocTrajectory integrate_soc(const PowerSocCurve& curve, double soc0,
                            const std::vector<double>& p_sched_kw, int dt_min,
                            double capacity_kwh) {
    if (capacity_kwh <= 0.0)
        throw std::invalid_argument("integrate_soc: capacity <= 0");
    if (!(soc0 >= 0.0 && soc0 <= 1.0))
        throw std::invalid_argument("integrate_soc: soc0 outside [0,1]");
    if (dt_min <= 0) throw std::invalid_argument("integrate_soc: dt <= 0");

    SocTrajectory out;
    out.soc.reserve(p_sched_kw.size() + 1);
    out.delivered_kw.reserve(p_sched_kw.size());
    double soc = soc0;
    out.soc.push_back(soc);
    const double h = dt_min / 60.0;
    for (double p : p_sched_kw) {
        if (p < 0.0) throw std::invalid_argument("integrate_soc: negative schedule");
        const double headroom_kw = (1.0 - soc) * capacity_kwh / h;
        const double delivered = std::min({p, curve.eval(soc), headroom_kw});
        soc = std::min(1.0, soc + delivered * h / capacity_kwh);
        out.delivered_kw.push_back(delivered);
        out.energy_kwh += delivered * h;
        out.soc.push_back(soc);
    }
    return out;
}

}  // namespace evcs
