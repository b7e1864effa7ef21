// SPDX-License-Identifier: Apache-2.0
#include "evcs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "text_util.hpp"

namespace evcs {

double gini(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("gini: empty input");
    double sum = 0.0;
    for (double v : x) {
        if (v < 0.0) throw std::invalid_argument("gini: negative entry");
        sum += v;
    }
    if (sum <= 0.0) return 0.0;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double weighted = 0.0;
    for (size_t i = 0; i < x.size(); ++i) weighted += (i + 1) * x[i];
    return 2.0 * weighted / (n * sum) - (n + 1.0) / n;
}

FairnessReport fairness(const SimulationTrace& trace, double floor_kw) {
    std::map<int, std::pair<double, int>> acc;  // id -> (sum, minutes)
    for (const auto& r : trace.records) {
        for (const auto& ev : r.evs) {
            const double dev = std::abs(ev.p_alloc_kw - ev.p_req_kw) /
                               std::max(ev.p_req_kw, floor_kw);
            auto& a = acc[ev.session_id];
            a.first += dev;
            a.second += 1;
        }
    }
    if (acc.empty()) throw std::invalid_argument("fairness: no connected EV minutes");

    FairnessReport rep;
    std::vector<double> scores;
    for (const auto& [id, a] : acc) {
        const double score = a.first / a.second;
        rep.per_ev.emplace_back(id, score);
        scores.push_back(score);
    }
    rep.gini_index = gini(std::move(scores));
    return rep;
}

ProfitBreakdown profit_breakdown(const SimulationTrace& trace,
                                 const ScheduleSeries& schedule, const Config& cfg) {
    const int dt_id = cfg.time.dt_id_min;
    const size_t per_slice = static_cast<size_t>(dt_id / cfg.time.dt_rt_min);
    if (trace.records.size() != schedule.slices.size() * per_slice)
        throw std::invalid_argument("profit_breakdown: trace/schedule misaligned");

    ProfitBreakdown pb;
    const double h = cfg.time.dt_rt_min / 60.0;
    for (const auto& r : trace.records) {
        const ScheduleSlice& slice = schedule.slices[r.minute / dt_id];
        const double dp_kw =
            (slice.c_budget_kw + slice.p_bess_setpoint_kw) / cfg.station.eta_tr;

        pb.potential_profit += r.tariff * r.c_alloc_kw * h;
        pb.dam_cost += r.price_dam * dp_kw * h;
        const double imbalance_kw = r.p_g_kw - dp_kw;
        if (imbalance_kw > 0.0)
            pb.bm_cost += r.price_short * imbalance_kw * h;
        else
            pb.bm_cost -= r.price_long * (-imbalance_kw) * h;
        for (const auto& ev : r.evs)
            pb.incentives_paid += ev.theta * ev.p_alloc_kw * h;
    }
    pb.net_profit =
        pb.potential_profit - pb.dam_cost - pb.bm_cost - pb.incentives_paid;
    return pb;
}

double battery_wear(const SimulationTrace& trace, const StationParams& params,
                    double n_cycles_rated, int dt_min) {
    if (!(n_cycles_rated > 0.0))
        throw std::invalid_argument("battery_wear: n_cycles_rated <= 0");
    if (dt_min <= 0) throw std::invalid_argument("battery_wear: dt <= 0");
    double throughput_kwh = 0.0;
    for (const auto& r : trace.records)
        throughput_kwh += std::abs(r.p_b_kw) * dt_min / 60.0;
    const double cycles = throughput_kwh / (2.0 * params.cap_bess_kwh);
    return cycles * (1.0 - params.d_b_eol) / n_cycles_rated;
}

namespace {

// First minute index at which the session's cumulative delivery reaches the
// target, or its departure when it never does.
int completion_minute(const SimulationTrace& trace, int session_id, double target_kwh,
                      int departure_min, double h) {
    double cum = 0.0;
    for (const auto& r : trace.records) {
        for (const auto& ev : r.evs) {
            if (ev.session_id != session_id) continue;
            cum += ev.p_alloc_kw * h;
            if (cum >= target_kwh - 1e-9) return r.minute;
        }
    }
    return departure_min;
}

double final_delivered(const SimulationTrace& trace, int session_id, double h) {
    double cum = 0.0;
    for (const auto& r : trace.records)
        for (const auto& ev : r.evs)
            if (ev.session_id == session_id) cum += ev.p_alloc_kw * h;
    return cum;
}

}  // namespace

std::map<int, int> extra_charging_time(const SimulationTrace& method_trace,
                                       const SimulationTrace& reference_trace,
                                       const Scenario& sc, const Config& cfg) {
    const double h = cfg.time.dt_rt_min / 60.0;
    std::map<int, int> deltas;
    for (const auto& s : sc.sessions) {
        const double fin_m = final_delivered(method_trace, s.id, h);
        const double fin_r = final_delivered(reference_trace, s.id, h);
        if (fin_m == 0.0 && fin_r == 0.0) {
            bool seen = false;
            for (const auto& r : method_trace.records)
                for (const auto& ev : r.evs)
                    if (ev.session_id == s.id) seen = true;
            if (!seen) throw std::invalid_argument(
                "extra_charging_time: session " + std::to_string(s.id) +
                " missing from the traces");
        }
        const double target = std::min(s.energy_request_kwh, std::min(fin_m, fin_r));
        const int t_m = completion_minute(method_trace, s.id, target, s.departure_min, h);
        const int t_r =
            completion_minute(reference_trace, s.id, target, s.departure_min, h);
        deltas[s.id] = t_m - t_r;
    }
    return deltas;
}

std::vector<TimingCell> timing_report(
    const std::vector<std::pair<std::string, std::vector<TimingSample>>>& runs) {
    std::map<std::pair<std::string, int>, std::pair<double, int>> acc;
    for (const auto& [method, samples] : runs) {
        for (const auto& s : samples) {
            if (s.n_ev == 0) continue;
            auto& a = acc[{method, s.n_ev}];
            a.first += s.seconds;
            a.second += 1;
        }
    }
    std::vector<TimingCell> out;
    for (const auto& [key, a] : acc)
        out.push_back(TimingCell{key.first, key.second, a.first / a.second, a.second});
    return out;
}

void write_timing_csv(const std::vector<TimingCell>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("timing: cannot write " + path);
    out << "method,n_ev,mean_s,samples\n";
    for (const auto& c : cells)
        out << c.method << "," << c.n_ev << "," << detail::fmt(c.mean_s) << ","
            << c.count << "\n";
}

}  // namespace evcs
