// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used by the tests: dense-grid
// minimization, a dual-bisection solver for the equality-coupled fleet
// problem, exhaustive enumeration for the quantized centralized problem,
// and a slack-grid scan for the Stackelberg loop. These deliberately avoid
// the solver paths they are checking.
#ifndef EVCS_TESTS_ORACLES_HPP
#define EVCS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "evcs/benchmarks.hpp"
#include "evcs/follower.hpp"
#include "evcs/sg_admm.hpp"
#include "evcs/types.hpp"

namespace oracles {

inline double grid_argmin(const std::function<double(double)>& f, double lo,
                          double hi, double step) {
    double best_x = lo;
    double best_v = f(lo);
    for (double x = lo + step; x < hi + 0.5 * step; x += step) {
        const double xi = std::min(x, hi);
        const double v = f(xi);
        if (v < best_v) {
            best_v = v;
            best_x = xi;
        }
    }
    return best_x;
}

// Follower cost re-derived from its definition (not via the library).
inline double follower_cost_ref(const evcs::FollowerProblem& fp, double p) {
    const auto sf = [&](double x) {
        return fp.sf.b + fp.sf.c * (std::exp(100.0 * fp.sf.a * x / fp.sf.p_ref_kw) - 1.0);
    };
    const double p_plus = std::max(p - fp.p_req_kw, 0.0);
    const double p_minus = std::max(fp.p_req_kw - p, 0.0);
    return fp.beta * p_minus * p_minus +
           fp.gamma * (sf(fp.p_req_kw + p_plus) / sf(fp.p_req_kw) - 1.0) -
           fp.theta * p * fp.dt_min / 60.0;
}

// Per-lambda best response on a coarse-to-fine grid.
inline double best_response(const evcs::FollowerProblem& fp, double lambda,
                            double eta_cp) {
    const auto cost = [&](double p) {
        return follower_cost_ref(fp, p) + lambda * p / eta_cp;
    };
    double lo = 0.0, hi = fp.p_max_kw;
    double x = grid_argmin(cost, lo, hi, std::max(1e-3, (hi - lo) / 400.0));
    for (double step : {1e-2, 1e-3, 1e-4, 1e-5}) {
        lo = std::max(0.0, x - 10.0 * step);
        hi = std::min(fp.p_max_kw, x + 10.0 * step);
        x = grid_argmin(cost, lo, hi, step);
    }
    return x;
}

// Equality-constrained optimum of sum_i f_i(p_i) s.t. sum p_i/eta = c_eff,
// 0 <= p_i <= p_max_i, via bisection on the coupling dual. Assumes the
// target is reachable (c_eff <= sum p_max/eta).
inline std::vector<double> equality_optimum(const evcs::Fleet& fleet,
                                            double c_eff) {
    const auto total = [&](double lambda) {
        double sum = 0.0;
        for (const auto& fp : fleet.followers)
            sum += best_response(fp, lambda, fleet.eta_cp) / fleet.eta_cp;
        return sum;
    };
    double lo = -1e3, hi = 1e3;  // demand decreasing in lambda
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) > c_eff ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    std::vector<double> p;
    for (const auto& fp : fleet.followers)
        p.push_back(best_response(fp, lambda, fleet.eta_cp));
    // Spread any residual across unsaturated followers to hit the equality.
    double gap = c_eff;
    for (double v : p) gap -= v / fleet.eta_cp;
    for (int pass = 0; pass < 8 && std::abs(gap) > 1e-12; ++pass) {
        int open = 0;
        for (size_t i = 0; i < p.size(); ++i) {
            const double room = gap > 0 ? fleet.followers[i].p_max_kw - p[i] : p[i];
            if (room > 1e-12) ++open;
        }
        if (open == 0) break;
        const double share = gap * fleet.eta_cp / open;
        for (size_t i = 0; i < p.size(); ++i) {
            const double next =
                std::clamp(p[i] + share, 0.0, fleet.followers[i].p_max_kw);
            gap -= (next - p[i]) / fleet.eta_cp;
            p[i] = next;
        }
    }
    return p;
}

// Exhaustive enumeration of the quantized centralized problem with the same
// tie-break comparator as the solver: cost, then total quanta, then the
// lexicographically smallest assignment in (column id, fleet index) order.
// Cost sums mirror the DP's association (right-to-left within and across
// columns) so ties are bitwise-consistent.
struct BruteForceResult {
    std::vector<double> p_kw;  // fleet order
    double objective = std::numeric_limits<double>::infinity();
    double slack_kw = 0.0;
    bool feasible = false;
};

inline BruteForceResult brute_force_centralized(const evcs::CentralizedProblem& cp) {
    const auto& fleet = cp.fleet;
    const double q = cp.quantum_kw;
    const double dt_h = fleet.followers[0].dt_min / 60.0;

    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < fleet.size(); ++i) groups[fleet.column[i]].push_back(i);
    std::vector<std::vector<size_t>> cols;
    for (const auto& [c, members] : groups) cols.push_back(members);

    std::vector<std::vector<double>> w(fleet.size());
    std::vector<int> levels(fleet.size());
    for (size_t i = 0; i < fleet.size(); ++i) {
        levels[i] = static_cast<int>(std::floor(fleet.followers[i].p_max_kw / q + 1e-9));
        for (int k = 0; k <= levels[i]; ++k)
            w[i].push_back(evcs::centralized_ev_cost(fleet.followers[i], cp.slice,
                                                     cp.hp, k * q));
    }

    std::vector<int> grouped;  // flat member list in column order
    std::vector<size_t> col_start;
    for (const auto& members : cols) {
        col_start.push_back(grouped.size());
        for (size_t m : members) grouped.push_back(static_cast<int>(m));
    }
    col_start.push_back(grouped.size());

    BruteForceResult best;
    int best_total = 0;
    std::vector<int> best_ks, ks(grouped.size(), 0);

    const std::function<void(size_t)> recurse = [&](size_t pos) {
        if (pos == grouped.size()) {
            // Column cap check and cost with the DP's summation order.
            double cost = 0.0;
            int total = 0;
            for (size_t c = cols.size(); c-- > 0;) {
                double col_cost = 0.0;
                double col_kw = 0.0;
                for (size_t j = col_start[c + 1]; j-- > col_start[c];) {
                    col_cost = w[grouped[j]][ks[j]] + col_cost;
                    col_kw += ks[j] * q;
                    total += ks[j];
                }
                if (col_kw > fleet.p_cc_kw + 1e-9) return;
                cost = col_cost + cost;
            }
            const double s = total * q / fleet.eta_cp - cp.slice.c_budget_kw;
            if (s < cp.slice.s_min_kw - 1e-9 || s > cp.slice.s_max_kw + 1e-9) return;
            const double obj = cost + cp.hp.alpha * std::abs(s) * dt_h;
            const bool better =
                obj < best.objective ||
                (obj == best.objective &&
                 (total < best_total || (total == best_total && ks < best_ks)));
            if (better) {
                best.objective = obj;
                best_total = total;
                best_ks = ks;
                best.feasible = true;
                best.slack_kw = s;
            }
            return;
        }
        for (int k = 0; k <= levels[grouped[pos]]; ++k) {
            ks[pos] = k;
            recurse(pos + 1);
        }
        ks[pos] = 0;
    };
    recurse(0);

    if (best.feasible) {
        best.p_kw.assign(fleet.size(), 0.0);
        for (size_t j = 0; j < grouped.size(); ++j)
            best.p_kw[grouped[j]] = best_ks[j] * q;
    }
    return best;
}

// Slack-grid scan per the acceptance definition: step = eps_bisect * span,
// walking |s| outward from zero on the shortfall side, first feasible wins.
struct ScanResult {
    double s_kw = 0.0;
    bool feasible = false;
    int probes = 0;
};

inline ScanResult scan_slack(const evcs::Fleet& fleet, const evcs::ScheduleSlice& slice,
                             const evcs::Hyperparams& hp) {
    ScanResult out;
    const evcs::AdmmState* warm = nullptr;
    evcs::AdmmState prev;

    const auto probe = [&](double s) {
        prev = evcs::admm_solve(fleet, std::max(0.0, slice.c_budget_kw + s), hp, warm);
        warm = &prev;
        ++out.probes;
        return evcs::incentive_feasible(prev.p_kw, fleet, slice.d_cap, hp.delta,
                                        prev.converged);
    };
    if (probe(0.0)) {
        out.s_kw = 0.0;
        out.feasible = true;
        return out;
    }
    const double shortfall =
        fleet.capped_demand_kw() / fleet.eta_cp - slice.c_budget_kw;
    const bool positive = shortfall >= 0.0;
    const double ext = positive ? std::min(slice.s_max_kw, shortfall)
                                : std::max(slice.s_min_kw, shortfall);
    const double step = hp.eps_bisect * (slice.s_max_kw - slice.s_min_kw);
    if (std::abs(ext) < 1e-12 || step <= 0.0) return out;
    for (double t = step; t < std::abs(ext) + 0.5 * step; t += step) {
        const double s = (positive ? 1.0 : -1.0) * std::min(t, std::abs(ext));
        if (probe(s)) {
            out.s_kw = s;
            out.feasible = true;
            return out;
        }
    }
    return out;
}

}  // namespace oracles

#endif
