// SPDX-License-Identifier: Apache-2.0
#include "evcs/sg_admm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evcs {

namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e8;

double primal_tolerance(size_t n, const Hyperparams& hp, double coupling,
                        double c_eff) {
    return std::sqrt(static_cast<double>(n)) * hp.eps_abs +
           hp.eps_rel * std::max(std::abs(coupling), std::abs(c_eff));
}

// Joint minimizer of the augmented Lagrangian at fixed duals and penalty.
// The coupling penalty is rank-one in p, so the subproblem reduces to a
// scalar root-find on the effective coupling price u = lambda + rho *
// (sum p(u)/eta - c_eff); column-cap penalties resolve the same way one
// level down. Followers respond to a linear price via golden section.
struct XStep {
    std::vector<double> p_kw;
    double coupling = 0.0;  // sum p/eta at the solution
};

double linear_response(const FollowerProblem& fp, double price, double tol) {
    const auto cost = [&](double p) {
        return follower_objective(fp, p) + price * p;
    };
    constexpr double invphi = 0.6180339887498949;
    const auto golden = [&](double a, double b) {
        double x1 = b - invphi * (b - a);
        double x2 = a + invphi * (b - a);
        double f1 = cost(x1);
        double f2 = cost(x2);
        while (b - a > tol) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = cost(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = cost(x2);
            }
        }
        return 0.5 * (a + b);
    };
    const double kink = std::clamp(fp.p_req_kw, 0.0, fp.p_max_kw);
    double best_p = 0.0;
    double best_v = cost(0.0);
    const auto consider = [&](double p) {
        const double v = cost(p);
        if (v < best_v) {
            best_v = v;
            best_p = p;
        }
    };
    if (kink > 0.0) consider(golden(0.0, kink));
    if (kink < fp.p_max_kw) consider(golden(kink, fp.p_max_kw));
    consider(kink);
    consider(fp.p_max_kw);
    return best_p;
}

XStep solve_x(const Fleet& fleet, const std::vector<std::vector<size_t>>& members,
              double c_eff, double lambda, const std::vector<double>& mu,
              double rho) {
    constexpr double tol = 1e-7;
    XStep out;
    out.p_kw.assign(fleet.size(), 0.0);

    // Column response to a base price: members see base plus the active
    // part of the column penalty; the column total is a monotone fixed
    // point in the penalty argument.
    const auto column_total = [&](size_t c, double base_price) {
        double free_total = 0.0;
        for (size_t i : members[c]) {
            out.p_kw[i] = linear_response(fleet.followers[i], base_price, tol);
            free_total += out.p_kw[i];
        }
        if (free_total <= fleet.p_cc_kw) return free_total;
        // Penalty active: solve t = demand(base + rho*(t - P_CC)).
        double lo = std::min(fleet.p_cc_kw, free_total);
        double hi = free_total;
        for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + hi); ++it) {
            const double t = 0.5 * (lo + hi);
            const double price = base_price + rho * std::max(0.0, t - fleet.p_cc_kw);
            double demand = 0.0;
            for (size_t i : members[c])
                demand += linear_response(fleet.followers[i], price, tol);
            (demand > t ? lo : hi) = t;
        }
        const double t = 0.5 * (lo + hi);
        const double price = base_price + rho * std::max(0.0, t - fleet.p_cc_kw);
        double total = 0.0;
        for (size_t i : members[c]) {
            out.p_kw[i] = linear_response(fleet.followers[i], price, tol);
            total += out.p_kw[i];
        }
        return total;
    };

    const auto coupling_at = [&](double u) {
        double v = 0.0;
        for (size_t c = 0; c < members.size(); ++c)
            v += column_total(c, u / fleet.eta_cp + mu[c]) / fleet.eta_cp;
        return v;
    };

    double reach = 0.0;
    for (const auto& fp : fleet.followers) reach += fp.p_max_kw / fleet.eta_cp;

    // g(u) = coupling(u) - c_eff - (u - lambda)/rho is strictly decreasing;
    // its root makes u the post-update dual: u = lambda + rho*(v - c_eff).
    double lo = lambda - rho * (c_eff + 1.0);
    double hi = lambda + rho * (reach + 1.0);
    for (int it = 0; it < 100 && hi - lo > 1e-11 * (1.0 + std::abs(hi)); ++it) {
        const double u = 0.5 * (lo + hi);
        const double g = coupling_at(u) - c_eff - (u - lambda) / rho;
        (g > 0.0 ? lo : hi) = u;
    }
    out.coupling = coupling_at(0.5 * (lo + hi));
    return out;
}

}  // namespace

AdmmState admm_solve(const Fleet& fleet, double c_eff_kw, const Hyperparams& hp,
                     const AdmmState* warm) {
    const size_t n = fleet.size();
    if (n == 0) throw std::invalid_argument("admm_solve: empty fleet");
    if (c_eff_kw < 0.0) throw std::invalid_argument("admm_solve: c_eff < 0");
    if (fleet.column.size() != n)
        throw std::invalid_argument("admm_solve: column list size mismatch");

    const std::vector<int> cols = fleet.unique_columns();
    std::vector<size_t> col_of(n);
    for (size_t i = 0; i < n; ++i) {
        const auto it = std::lower_bound(cols.begin(), cols.end(), fleet.column[i]);
        col_of[i] = static_cast<size_t>(it - cols.begin());
    }

    AdmmState st;
    st.rho = std::clamp(warm ? warm->rho : hp.rho0, kRhoMin, kRhoMax);
    st.lambda = warm ? warm->lambda : 0.0;
    st.mu_cc.assign(cols.size(), 0.0);
    if (warm && warm->mu_cc.size() == cols.size()) st.mu_cc = warm->mu_cc;
    st.p_kw.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double init = (warm && warm->p_kw.size() == n) ? warm->p_kw[i]
                                                             : fleet.followers[i].p_req_kw;
        st.p_kw[i] = std::clamp(init, 0.0, fleet.followers[i].p_max_kw);
    }

    // The coupling equality is unreachable when even full power (with every
    // column clipped at its cap) falls short; skip the iteration loop and
    // report a best-effort point.
    const double reach = fleet.capped_reach_kw() / fleet.eta_cp;
    if (reach + primal_tolerance(n, hp, reach, c_eff_kw) < c_eff_kw) {
        std::vector<double> col_room(cols.size(), fleet.p_cc_kw);
        for (size_t i = 0; i < n; ++i) {
            st.p_kw[i] = std::min(fleet.followers[i].p_max_kw, col_room[col_of[i]]);
            col_room[col_of[i]] -= st.p_kw[i];
        }
        st.r_norm = c_eff_kw - reach;
        st.s_norm = 0.0;
        st.converged = false;
        return st;
    }

    std::vector<std::vector<size_t>> members(cols.size());
    for (size_t i = 0; i < n; ++i) members[col_of[i]].push_back(i);

    std::vector<double> p_prev(n);
    std::vector<double> col_sum(cols.size());
    for (int k = 1; k <= hp.max_admm_iters; ++k) {
        p_prev = st.p_kw;

        const XStep xs =
            solve_x(fleet, members, c_eff_kw, st.lambda, st.mu_cc, st.rho);
        st.p_kw = xs.p_kw;
        const double coupling = xs.coupling;
        std::fill(col_sum.begin(), col_sum.end(), 0.0);
        for (size_t i = 0; i < n; ++i) col_sum[col_of[i]] += st.p_kw[i];

        const double r_eq = coupling - c_eff_kw;
        st.lambda += st.rho * r_eq;
        double r_sq = r_eq * r_eq;
        for (size_t c = 0; c < cols.size(); ++c) {
            const double excess = col_sum[c] - fleet.p_cc_kw;
            st.mu_cc[c] = std::max(0.0, st.mu_cc[c] + st.rho * excess);
            const double viol = std::max(0.0, excess);
            r_sq += viol * viol;
        }
        st.r_norm = std::sqrt(r_sq);

        double dp_sq = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double d = (st.p_kw[i] - p_prev[i]) / fleet.eta_cp;
            dp_sq += d * d;
        }
        st.s_norm = st.rho * std::sqrt(dp_sq);
        st.iterations = k;

        const double tol_pri = primal_tolerance(n, hp, coupling, c_eff_kw);
        const double tol_dual = std::sqrt(static_cast<double>(n)) * hp.eps_abs +
                                hp.eps_rel * std::abs(st.lambda) / fleet.eta_cp;
        if (st.r_norm <= tol_pri && st.s_norm <= tol_dual) {
            st.converged = true;
            break;
        }

        if (st.r_norm > hp.mu * st.s_norm)
            st.rho = std::min(st.rho * hp.tau_rho, kRhoMax);
        else if (st.s_norm > hp.mu * st.r_norm)
            st.rho = std::max(st.rho / hp.tau_rho, kRhoMin);
    }
    return st;
}

std::vector<double> compute_incentives(const std::vector<double>& p_kw,
                                       const Fleet& fleet, double d_cap,
                                       double delta) {
    if (p_kw.size() != fleet.size())
        throw std::invalid_argument("compute_incentives: size mismatch");
    std::vector<double> theta(p_kw.size());
    for (size_t i = 0; i < p_kw.size(); ++i) {
        FollowerProblem fp = fleet.followers[i];
        fp.theta = 0.0;
        theta[i] = std::min(d_cap, std::abs(delta * follower_gradient(fp, p_kw[i])));
    }
    return theta;
}

bool incentive_feasible(const std::vector<double>& p_kw, const Fleet& fleet,
                        double d_cap, double delta, bool admm_converged) {
    if (!admm_converged) return false;
    for (size_t i = 0; i < p_kw.size(); ++i) {
        FollowerProblem fp = fleet.followers[i];
        fp.theta = 0.0;
        if (std::abs(delta * follower_gradient(fp, p_kw[i])) > d_cap) return false;
    }
    return true;
}

namespace {

struct Probe {
    double s = 0.0;
    AdmmState state;
    std::vector<double> theta;
    bool feasible = false;
};

Probe run_probe(const Fleet& fleet, const ScheduleSlice& slice,
                const Hyperparams& hp, double s, const AdmmState* warm) {
    Probe pr;
    pr.s = s;
    pr.state = admm_solve(fleet, std::max(0.0, slice.c_budget_kw + s), hp, warm);
    pr.theta = compute_incentives(pr.state.p_kw, fleet, slice.d_cap, hp.delta);
    pr.feasible = incentive_feasible(pr.state.p_kw, fleet, slice.d_cap, hp.delta,
                                     pr.state.converged);
    return pr;
}

SgResult from_probe(const Probe& pr, int sg_iters, int admm_total, bool fallback) {
    SgResult r;
    r.p_kw = pr.state.p_kw;
    r.theta = pr.theta;
    r.s_kw = pr.s;
    r.sg_iterations = sg_iters;
    r.admm_iterations_total = admm_total;
    r.feasible = pr.feasible;
    r.used_fallback = fallback;
    r.admm = pr.state;
    return r;
}

// Shortfall of the budget against the fleet's ideal demand, with every
// column clipped at its cap (demand above a cap is unreachable and cannot
// steer the slack).
double ideal_shortfall(const Fleet& fleet, const ScheduleSlice& slice) {
    return fleet.capped_demand_kw() / fleet.eta_cp - slice.c_budget_kw;
}

// Extreme of the search side, clamped to the shortfall: slack beyond it
// cannot bring the EVs closer to their requests, and keeping the probe
// within it preserves the bracket's monotonicity.
double clamped_extreme(const Fleet& fleet, const ScheduleSlice& slice,
                       bool positive_side) {
    const double shortfall = ideal_shortfall(fleet, slice);
    if (positive_side) return std::min(slice.s_max_kw, std::max(0.0, shortfall));
    return std::max(slice.s_min_kw, std::min(0.0, shortfall));
}

}  // namespace

SgResult sg_equilibrium(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp, const AdmmState* warm) {
    validate(slice);
    if (fleet.size() == 0) throw std::invalid_argument("sg_equilibrium: empty fleet");

    int probes = 0;
    int admm_total = 0;

    Probe at_zero = run_probe(fleet, slice, hp, 0.0, warm);
    ++probes;
    admm_total += at_zero.state.iterations;
    if (at_zero.feasible) return from_probe(at_zero, probes, admm_total, false);

    const bool positive_side = ideal_shortfall(fleet, slice) >= 0.0;
    const double s_ext = clamped_extreme(fleet, slice, positive_side);
    const double sign = positive_side ? 1.0 : -1.0;
    const double range = slice.s_max_kw - slice.s_min_kw;

    if (std::abs(s_ext) < 1e-12 || range <= 0.0)
        return from_probe(at_zero, probes, admm_total, false);

    Probe high = run_probe(fleet, slice, hp, s_ext, &at_zero.state);
    ++probes;
    admm_total += high.state.iterations;
    if (!high.feasible) return from_probe(high, probes, admm_total, false);

    double lo = 0.0;
    double hi = std::abs(s_ext);
    const AdmmState* prev = &high.state;
    while (hi - lo > hp.eps_bisect * range && probes < hp.max_sg_iters) {
        const double mid = 0.5 * (lo + hi);
        Probe pr = run_probe(fleet, slice, hp, sign * mid, prev);
        ++probes;
        admm_total += pr.state.iterations;
        if (pr.feasible) {
            hi = mid;
            high = std::move(pr);
        } else {
            lo = mid;
        }
        prev = &high.state;
    }

    // Bracket guard: the feasible endpoint is re-validated before returning;
    // if the warm-started verdict no longer holds, take the scan path.
    if (!incentive_feasible(high.state.p_kw, fleet, slice.d_cap, hp.delta,
                            high.state.converged)) {
        SgResult r = sg_linear_scan(fleet, slice, hp);
        r.sg_iterations += probes;
        r.admm_iterations_total += admm_total;
        r.used_fallback = true;
        return r;
    }
    return from_probe(high, probes, admm_total, false);
}

SgResult sg_linear_scan(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp) {
    validate(slice);
    if (fleet.size() == 0) throw std::invalid_argument("sg_linear_scan: empty fleet");

    int probes = 0;
    int admm_total = 0;
    Probe at_zero = run_probe(fleet, slice, hp, 0.0, nullptr);
    ++probes;
    admm_total += at_zero.state.iterations;
    if (at_zero.feasible) return from_probe(at_zero, probes, admm_total, false);

    const bool positive_side = ideal_shortfall(fleet, slice) >= 0.0;
    const double s_ext = clamped_extreme(fleet, slice, positive_side);
    const double sign = positive_side ? 1.0 : -1.0;
    const double range = slice.s_max_kw - slice.s_min_kw;
    const double step = hp.eps_bisect * range;

    if (std::abs(s_ext) < 1e-12 || step <= 0.0)
        return from_probe(at_zero, probes, admm_total, false);

    Probe last = std::move(at_zero);
    for (double t = step; t < std::abs(s_ext) + 0.5 * step; t += step) {
        const double s = sign * std::min(t, std::abs(s_ext));
        last = run_probe(fleet, slice, hp, s, &last.state);
        ++probes;
        admm_total += last.state.iterations;
        if (last.feasible) return from_probe(last, probes, admm_total, false);
    }
    return from_probe(last, probes, admm_total, false);
}

Allocation to_allocation(const SgResult& sg) {
    Allocation a;
    a.p_kw = sg.p_kw;
    a.theta = sg.theta;
    a.slack_kw = sg.s_kw;
    a.lambda = sg.admm.lambda;
    a.mu_cc = sg.admm.mu_cc;
    a.admm_iterations = sg.admm_iterations_total;
    a.sg_iterations = sg.sg_iterations;
    a.converged = sg.admm.converged;
    a.feasible = sg.feasible;
    return a;
}

}  // namespace evcs
