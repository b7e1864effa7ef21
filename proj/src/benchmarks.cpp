// SPDX-License-Identifier: Apache-2.0
#include "evcs/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace evcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double centralized_ev_cost(const FollowerProblem& follower,
                           const ScheduleSlice& slice, const Hyperparams& hp,
                           double p_kw) {
    FollowerProblem fp = follower;
    fp.theta = 0.0;
    const double dt_h = fp.dt_min / 60.0;
    const double theta =
        std::min(slice.d_cap, std::abs(hp.delta * follower_gradient(fp, p_kw)));
    return -slice.tariff_ev * p_kw * dt_h + follower_objective(fp, p_kw) +
           theta * p_kw * dt_h;
}

namespace {

struct ColumnDp {
    std::vector<size_t> members;              // fleet indices, ascending
    std::vector<int> levels;                  // K_i per member
    std::vector<std::vector<double>> w;       // per member, cost at k quanta
    std::vector<std::vector<double>> suffix;  // suffix[j][m], j = member pos
    int max_quanta = 0;

    // Lex-smallest min-cost assignment of m quanta, via the suffix table.
    std::vector<int> reconstruct(int m) const {
        std::vector<int> ks(members.size(), 0);
        for (size_t j = 0; j < members.size(); ++j) {
            const int kmax = std::min(levels[j], m);
            for (int k = 0; k <= kmax; ++k) {
                if (w[j][k] + suffix[j + 1][m - k] == suffix[j][m]) {
                    ks[j] = k;
                    m -= k;
                    break;
                }
            }
        }
        return ks;
    }
};

ColumnDp build_column_dp(const Fleet& fleet, const ScheduleSlice& slice,
                         const Hyperparams& hp, const std::vector<size_t>& members,
                         double q) {
    ColumnDp dp;
    dp.members = members;
    int sum_levels = 0;
    for (size_t i : members) {
        const int k = static_cast<int>(std::floor(fleet.followers[i].p_max_kw / q + 1e-9));
        dp.levels.push_back(k);
        sum_levels += k;
        std::vector<double> wi(k + 1);
        for (int kk = 0; kk <= k; ++kk)
            wi[kk] = centralized_ev_cost(fleet.followers[i], slice, hp, kk * q);
        dp.w.push_back(std::move(wi));
    }
    dp.max_quanta =
        std::min(sum_levels, static_cast<int>(std::floor(fleet.p_cc_kw / q + 1e-9)));

    const size_t nm = members.size();
    dp.suffix.assign(nm + 1, std::vector<double>(dp.max_quanta + 1, kInf));
    dp.suffix[nm][0] = 0.0;
    for (size_t j = nm; j-- > 0;) {
        for (int m = 0; m <= dp.max_quanta; ++m) {
            double best = kInf;
            const int kmax = std::min(dp.levels[j], m);
            for (int k = 0; k <= kmax; ++k) {
                const double rest = dp.suffix[j + 1][m - k];
                if (rest == kInf) continue;
                best = std::min(best, dp.w[j][k] + rest);
            }
            dp.suffix[j][m] = best;
        }
    }
    return dp;
}

}  // namespace

Allocation centralized_solve(const CentralizedProblem& cp) {
    const Fleet& fleet = cp.fleet;
    const size_t n = fleet.size();
    if (n == 0) throw std::invalid_argument("centralized_solve: empty fleet");
    if (!(cp.quantum_kw > 0.0))
        throw std::invalid_argument("centralized_solve: quantum <= 0");
    if (!(cp.slack_grid_kw > 0.0))
        throw std::invalid_argument("centralized_solve: slack_grid <= 0");
    validate(cp.slice);
    const double q = cp.quantum_kw;
    const double dt_h = fleet.followers[0].dt_min / 60.0;

    // Column groups in ascending column id; members keep fleet order.
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < n; ++i) groups[fleet.column[i]].push_back(i);

    std::vector<ColumnDp> columns;
    int total_quanta = 0;
    for (const auto& [col, members] : groups) {
        columns.push_back(build_column_dp(fleet, cp.slice, cp.hp, members, q));
        total_quanta += columns.back().max_quanta;
    }

    const size_t nc = columns.size();
    std::vector<std::vector<double>> across(nc + 1,
                                            std::vector<double>(total_quanta + 1, kInf));
    across[nc][0] = 0.0;
    for (size_t c = nc; c-- > 0;) {
        for (int M = 0; M <= total_quanta; ++M) {
            double best = kInf;
            const int mmax = std::min(columns[c].max_quanta, M);
            for (int m = 0; m <= mmax; ++m) {
                const double rest = across[c + 1][M - m];
                if (rest == kInf) continue;
                const double own = columns[c].suffix[0][m];
                if (own == kInf) continue;
                best = std::min(best, own + rest);
            }
            across[c][M] = best;
        }
    }

    const double c_budget = cp.slice.c_budget_kw;
    const auto slack_of = [&](int M) { return M * q / fleet.eta_cp - c_budget; };
    const auto violation_of = [&](double s) {
        return std::max({s - cp.slice.s_max_kw, cp.slice.s_min_kw - s, 0.0});
    };

    int best_m = -1;
    double best_cost = kInf;
    bool feasible = false;
    for (int M = 0; M <= total_quanta; ++M) {
        if (across[0][M] == kInf) continue;
        const double s = slack_of(M);
        if (violation_of(s) > 1e-9) continue;
        const double cost = across[0][M] + cp.hp.alpha * std::abs(s) * dt_h;
        if (cost < best_cost) {  // ties keep the lower total (ascending scan)
            best_cost = cost;
            best_m = M;
            feasible = true;
        }
    }
    if (best_m < 0) {
        // No total admits in-bound slack: report the boundary-closest one.
        double best_viol = kInf;
        for (int M = 0; M <= total_quanta; ++M) {
            if (across[0][M] == kInf) continue;
            const double v = violation_of(slack_of(M));
            if (v < best_viol) {
                best_viol = v;
                best_m = M;
            }
        }
        feasible = false;
    }

    // Reconstruct per column; cost ties between column totals resolve to the
    // lexicographically smallest member assignment.
    std::vector<double> p(n, 0.0);
    int remaining = best_m;
    for (size_t c = 0; c < nc; ++c) {
        const double target = across[c][remaining];
        int chosen_m = -1;
        std::vector<int> chosen_ks;
        const int mmax = std::min(columns[c].max_quanta, remaining);
        for (int m = 0; m <= mmax; ++m) {
            const double own = columns[c].suffix[0][m];
            const double rest = across[c + 1][remaining - m];
            if (own == kInf || rest == kInf) continue;
            if (own + rest != target) continue;
            std::vector<int> ks = columns[c].reconstruct(m);
            if (chosen_m < 0 || ks < chosen_ks) {
                chosen_m = m;
                chosen_ks = std::move(ks);
            }
        }
        if (chosen_m < 0)
            throw std::runtime_error("centralized_solve: reconstruction failed");
        for (size_t j = 0; j < columns[c].members.size(); ++j)
            p[columns[c].members[j]] = chosen_ks[j] * q;
        remaining -= chosen_m;
    }

    Allocation out;
    out.p_kw = std::move(p);
    out.theta = compute_incentives(out.p_kw, fleet, cp.slice.d_cap, cp.hp.delta);
    out.slack_kw = std::clamp(slack_of(best_m), cp.slice.s_min_kw, cp.slice.s_max_kw);
    out.feasible = feasible;
    out.converged = true;
    return out;
}

Allocation distributed_solve(const Fleet& fleet, double c_budget_kw,
                             const Hyperparams& hp, const AdmmState* warm,
                             AdmmState* final_state) {
    if (c_budget_kw < 0.0)
        throw std::invalid_argument("distributed_solve: c_budget < 0");
    Fleet plain = fleet;
    for (auto& fp : plain.followers) fp.theta = 0.0;
    // Budget beyond the fleet's physical reach is unusable; the grid keeps
    // it and the followers coordinate to what they can actually draw.
    const double c_eff =
        std::min(c_budget_kw, plain.capped_reach_kw() / plain.eta_cp);
    const AdmmState st = admm_solve(plain, c_eff, hp, warm);
    if (final_state) *final_state = st;

    Allocation out;
    out.p_kw = st.p_kw;
    out.theta.assign(fleet.size(), 0.0);
    out.slack_kw = c_eff - c_budget_kw;
    out.lambda = st.lambda;
    out.mu_cc = st.mu_cc;
    out.admm_iterations = st.iterations;
    out.converged = st.converged;
    out.feasible = st.converged;
    return out;
}

Allocation uncontrolled_step(const Fleet& fleet) {
    Allocation out;
    out.p_kw.reserve(fleet.size());
    for (const auto& fp : fleet.followers)
        out.p_kw.push_back(std::min(fp.p_req_kw, fp.p_max_kw));
    out.theta.assign(fleet.size(), 0.0);
    return out;
}

double leader_objective(const Fleet& fleet, const ScheduleSlice& slice,
                        const Hyperparams& hp, std::span<const double> p_kw,
                        double s_kw) {
    if (p_kw.size() != fleet.size())
        throw std::invalid_argument("leader_objective: size mismatch");
    double total = 0.0;
    for (size_t i = 0; i < fleet.size(); ++i)
        total += centralized_ev_cost(fleet.followers[i], slice, hp, p_kw[i]);
    const double dt_h = fleet.size() ? fleet.followers[0].dt_min / 60.0 : 1.0 / 60.0;
    total += hp.alpha * std::abs(s_kw) * dt_h;
    return total;
}

}  // namespace evcs
