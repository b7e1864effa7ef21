// SPDX-License-Identifier: Apache-2.0
#include "evcs/follower.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace evcs {

namespace {

void check_box(const FollowerProblem& fp, double p) {
    if (!(p >= -1e-12 && p <= fp.p_max_kw + 1e-9))
        throw std::invalid_argument("follower: p outside [0, p_max]");
}

// Golden-section minimization on [a, b] to absolute tolerance tol.
template <typename F>
double golden_min(F&& f, double a, double b, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double follower_objective(const FollowerProblem& fp, double p_kw) {
    check_box(fp, p_kw);
    const double p_plus = std::max(p_kw - fp.p_req_kw, 0.0);
    const double p_minus = std::max(fp.p_req_kw - p_kw, 0.0);
    const double sf_req = sf_eval(fp.sf, fp.p_req_kw);
    double cost = fp.beta * p_minus * p_minus;
    cost += fp.gamma * (sf_eval(fp.sf, fp.p_req_kw + p_plus) / sf_req - 1.0);
    cost -= fp.theta * p_kw * fp.dt_min / 60.0;
    return cost;
}

double follower_gradient(const FollowerProblem& fp, double p_kw) {
    check_box(fp, p_kw);
    double g = 0.0;
    if (p_kw < fp.p_req_kw) {
        g = -2.0 * fp.beta * (fp.p_req_kw - p_kw);
    } else if (p_kw > fp.p_req_kw) {
        g = fp.gamma * sf_derivative(fp.sf, p_kw) / sf_eval(fp.sf, fp.p_req_kw);
    }
    g -= fp.theta * fp.dt_min / 60.0;
    return g;
}

double follower_update(const FollowerProblem& fp, const CouplingContext& ctx) {
    if (!(ctx.rho > 0.0)) throw std::invalid_argument("follower_update: rho <= 0");
    if (ctx.mu_cc < 0.0) throw std::invalid_argument("follower_update: mu_cc < 0");

    const auto cost = [&](double p) {
        double v = follower_objective(fp, p);
        v += ctx.lambda * p / ctx.eta_cp;
        const double r = p / ctx.eta_cp + ctx.residual_others_kw;
        v += 0.5 * ctx.rho * r * r;
        v += ctx.mu_cc * p;
        const double cc = std::max(0.0, p + ctx.cc_residual_others_kw - ctx.p_cc_kw);
        v += 0.5 * ctx.rho * cc * cc;
        if (!std::isfinite(v))
            throw std::runtime_error("follower_update: non-finite objective");
        return v;
    };

    constexpr double tol = 1e-4;
    const double p_max = fp.p_max_kw;
    const double kink = std::clamp(fp.p_req_kw, 0.0, p_max);

    double best_p = 0.0;
    double best_v = cost(0.0);
    const auto consider = [&](double p) {
        const double v = cost(p);
        if (v < best_v) {
            best_v = v;
            best_p = p;
        }
    };
    if (kink > 0.0) consider(golden_min(cost, 0.0, kink, tol));
    if (kink < p_max) consider(golden_min(cost, kink, p_max, tol));
    consider(kink);
    consider(p_max);
    return best_p;
}

std::vector<int> Fleet::unique_columns() const {
    std::vector<int> cols = column;
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
}

namespace {

double capped_sum(const Fleet& fleet, double FollowerProblem::* field) {
    std::map<int, double> per_col;
    for (size_t i = 0; i < fleet.size(); ++i)
        per_col[fleet.column[i]] += fleet.followers[i].*field;
    double total = 0.0;
    for (const auto& [col, sum] : per_col) total += std::min(sum, fleet.p_cc_kw);
    return total;
}

}  // namespace

double Fleet::capped_demand_kw() const {
    return capped_sum(*this, &FollowerProblem::p_req_kw);
}

double Fleet::capped_reach_kw() const {
    return capped_sum(*this, &FollowerProblem::p_max_kw);
}

}  // namespace evcs
