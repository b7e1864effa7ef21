// SPDX-License-Identifier: Apache-2.0
#include "evcs/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evcs/benchmarks.hpp"
#include "evcs/charging_curve.hpp"
#include "evcs/dispatch.hpp"
#include "evcs/sg_admm.hpp"
#include "text_util.hpp"

namespace evcs {

const char* method_name(Method m) {
    switch (m) {
        case Method::SgAdmm: return "sg-admm";
        case Method::Admm: return "admm";
        case Method::Centralized: return "centralized";
        case Method::Uncontrolled: return "uncontrolled";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "sg-admm") return Method::SgAdmm;
    if (name == "admm") return Method::Admm;
    if (name == "centralized") return Method::Centralized;
    if (name == "uncontrolled") return Method::Uncontrolled;
    throw std::invalid_argument("unknown method '" + name + "'");
}

namespace {

struct LiveEv {
    EvState state;
    int session_id;
    double p_max_kw = 0.0;
};

// Warm-start memory across control steps, keyed by session and column ids.
struct WarmCache {
    bool valid = false;
    double lambda = 0.0;
    double rho = 0.0;
    std::map<int, double> p_by_session;
    std::map<int, double> mu_by_column;
};

AdmmState warm_state(const WarmCache& cache, const Fleet& fleet,
                     const std::vector<int>& session_ids) {
    AdmmState st;
    st.lambda = cache.lambda;
    st.rho = cache.rho;
    st.p_kw.resize(fleet.size());
    for (size_t i = 0; i < fleet.size(); ++i) {
        const auto it = cache.p_by_session.find(session_ids[i]);
        st.p_kw[i] = it != cache.p_by_session.end() ? it->second
                                                    : fleet.followers[i].p_req_kw;
    }
    const auto cols = fleet.unique_columns();
    st.mu_cc.resize(cols.size());
    for (size_t c = 0; c < cols.size(); ++c) {
        const auto it = cache.mu_by_column.find(cols[c]);
        st.mu_cc[c] = it != cache.mu_by_column.end() ? it->second : 0.0;
    }
    return st;
}

void store_warm(WarmCache& cache, const AdmmState& st, const Fleet& fleet,
                const std::vector<int>& session_ids) {
    cache.valid = true;
    cache.lambda = st.lambda;
    cache.rho = st.rho;
    cache.p_by_session.clear();
    for (size_t i = 0; i < fleet.size(); ++i)
        cache.p_by_session[session_ids[i]] = st.p_kw[i];
    const auto cols = fleet.unique_columns();
    cache.mu_by_column.clear();
    for (size_t c = 0; c < cols.size() && c < st.mu_cc.size(); ++c)
        cache.mu_by_column[cols[c]] = st.mu_cc[c];
}

}  // namespace

SimulationTrace simulate(const Scenario& sc, const ScheduleSeries& schedule,
                         Method method, const Config& cfg, const SimOptions& opt) {
    const int minutes = sc.minutes();
    const int dt = cfg.time.dt_rt_min;
    const double h = dt / 60.0;
    const auto& st_params = cfg.station;
    const size_t n_slices = static_cast<size_t>(minutes / cfg.time.dt_id_min);
    if (schedule.slices.size() != n_slices)
        throw std::invalid_argument("simulate: schedule has " +
                                    std::to_string(schedule.slices.size()) +
                                    " slices, scenario needs " +
                                    std::to_string(n_slices));

    std::vector<PowerSocCurve> curves;
    curves.reserve(sc.sessions.size());
    for (const auto& s : sc.sessions) curves.push_back(default_curve_for(s));

    SimulationTrace trace;
    trace.method = method;
    trace.records.reserve(minutes);

    std::vector<LiveEv> live;
    BessState bess{0.5 * st_params.cap_bess_kwh};
    WarmCache warm;
    const int doy = day_of_year(sc.date.c_str());
    const double q05 = -0.05 * st_params.p_pv_peak_kw;
    const double q95 = 0.05 * st_params.p_pv_peak_kw;
    std::array<double, 15> rp{};

    for (int j = 0; j < minutes; j += dt) {
        const ScheduleSlice& slice = schedule.slices[j / cfg.time.dt_id_min];

        // Arrivals and departures.
        std::erase_if(live, [&](const LiveEv& ev) {
            return sc.sessions[ev.state.session_index].departure_min <= j;
        });
        for (size_t si = 0; si < sc.sessions.size(); ++si) {
            if (sc.sessions[si].arrival_min < j - dt + 1 ||
                sc.sessions[si].arrival_min > j)
                continue;
            LiveEv ev;
            ev.state.session_index = static_cast<int>(si);
            ev.state.soc = sc.sessions[si].soc_arrival;
            ev.session_id = sc.sessions[si].id;
            live.push_back(ev);
        }

        // Requests from the curves; satisfied sessions stop asking.
        for (auto& ev : live) {
            const auto& s = sc.sessions[ev.state.session_index];
            ev.p_max_kw = curves[ev.state.session_index].eval(ev.state.soc);
            const double remaining = std::max(
                0.0, s.energy_request_kwh - ev.state.energy_delivered_kwh);
            ev.state.p_req_kw = std::min(ev.p_max_kw, remaining / h);
        }

        Fleet fleet;
        fleet.eta_cp = st_params.eta_cp;
        fleet.p_cc_kw = st_params.p_cc_kw;
        std::vector<int> fleet_session_ids;
        std::vector<size_t> fleet_live;  // index into live
        for (size_t li = 0; li < live.size(); ++li) {
            if (live[li].state.p_req_kw <= 1e-12) continue;
            const auto& s = sc.sessions[live[li].state.session_index];
            FollowerProblem fp;
            fp.p_req_kw = live[li].state.p_req_kw;
            fp.p_max_kw = live[li].p_max_kw;
            fp.sf = StressFunction{
                .a = cfg.hyper.a,
                .b = cfg.hyper.b,
                .c = cfg.hyper.c,
                .p_ref_kw =
                    std::max(1.0, curves[live[li].state.session_index].peak_kw())};
            fp.beta = cfg.hyper.beta;
            fp.gamma = cfg.hyper.gamma;
            fp.theta = 0.0;
            fp.dt_min = dt;
            fleet.followers.push_back(fp);
            fleet.column.push_back(s.cc_index);
            fleet_session_ids.push_back(s.id);
            fleet_live.push_back(li);
        }

        Allocation alloc;
        double solver_seconds = 0.0;
        if (!fleet.followers.empty()) {
            const auto t0 = std::chrono::steady_clock::now();
            switch (method) {
                case Method::SgAdmm: {
                    AdmmState ws;
                    const AdmmState* wp = nullptr;
                    if (warm.valid) {
                        ws = warm_state(warm, fleet, fleet_session_ids);
                        wp = &ws;
                    }
                    const SgResult sg = sg_equilibrium(fleet, slice, cfg.hyper, wp);
                    alloc = to_allocation(sg);
                    store_warm(warm, sg.admm, fleet, fleet_session_ids);
                    break;
                }
                case Method::Admm: {
                    AdmmState ws;
                    const AdmmState* wp = nullptr;
                    if (warm.valid) {
                        ws = warm_state(warm, fleet, fleet_session_ids);
                        wp = &ws;
                    }
                    AdmmState final_state;
                    alloc = distributed_solve(fleet, slice.c_budget_kw, cfg.hyper,
                                              wp, &final_state);
                    store_warm(warm, final_state, fleet, fleet_session_ids);
                    break;
                }
                case Method::Centralized: {
                    CentralizedProblem cp;
                    cp.fleet = fleet;
                    cp.slice = slice;
                    cp.hp = cfg.hyper;
                    cp.quantum_kw = opt.quantum_kw;
                    alloc = centralized_solve(cp);
                    break;
                }
                case Method::Uncontrolled:
                    alloc = uncontrolled_step(fleet);
                    break;
            }
            solver_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        }
        trace.timing.push_back(
            TimingSample{static_cast<int>(fleet.followers.size()), solver_seconds});

        // Delivery and SoC integration. The realized draw never exceeds the
        // remaining requested energy or the curve headroom.
        double c_req = 0.0;
        double c_alloc = 0.0;
        double solver_coupling = 0.0;
        for (auto& ev : live) {
            ev.state.p_alloc_kw = 0.0;
            ev.state.theta = 0.0;
        }
        for (size_t fi = 0; fi < fleet.followers.size(); ++fi) {
            auto& ev = live[fleet_live[fi]];
            const auto& s = sc.sessions[ev.state.session_index];
            const double remaining = std::max(
                0.0, s.energy_request_kwh - ev.state.energy_delivered_kwh);
            const double headroom = (1.0 - ev.state.soc) * s.capacity_kwh / h;
            const double delivered =
                std::min({alloc.p_kw[fi],
                          curves[ev.state.session_index].eval(ev.state.soc),
                          headroom, remaining / h});
            solver_coupling += alloc.p_kw[fi] / st_params.eta_cp;
            ev.state.soc =
                std::min(1.0, ev.state.soc + delivered * h / s.capacity_kwh);
            ev.state.energy_delivered_kwh += delivered * h;
            ev.state.p_alloc_kw = delivered;
            ev.state.theta = alloc.theta[fi];
        }
        for (const auto& ev : live) {
            c_req += ev.state.p_req_kw;
            c_alloc += ev.state.p_alloc_kw;
        }

        const double c_total = c_alloc / st_params.eta_cp;
        DispatchResult dr =
            dispatch(c_total, slice.p_bess_setpoint_kw, sc.pv_kw[j], st_params);

        // BESS energy bookkeeping; band-refused energy reroutes to the grid.
        const SoeStepResult ss = soe_step(bess, dr.p_b_kw, dt, st_params);
        bess = ss.state;
        if (ss.rerouted_kwh > 0.0) {
            const double delta_kw = ss.rerouted_kwh / (st_params.eta_ch * h);
            dr.p_b_kw -= delta_kw;
            dr.p_g_kw -= delta_kw / st_params.eta_tr;
        } else if (ss.rerouted_kwh < 0.0) {
            const double delta_kw = -ss.rerouted_kwh * st_params.eta_dh / h;
            dr.p_b_kw += delta_kw;
            dr.p_g_kw += delta_kw / st_params.eta_tr;
        }
        dr.gcp_violation_kw =
            std::max(0.0, std::abs(dr.p_g_kw) - st_params.p_gc_kw);

        // Forecast columns: robust persistence held over 15 minutes, plus the
        // per-minute persistence band.
        if (j % 15 < dt) {
            const double prev_pv = j > 0 ? sc.pv_kw[j - 1] : sc.pv_kw[0];
            const double elev_now =
                solar_elevation_deg(doy + j / 1440, j % 1440, sc.site.lat_deg);
            const double elev_prev = solar_elevation_deg(
                doy + (j - dt) / 1440, ((j - dt) % 1440 + 1440) % 1440, sc.site.lat_deg);
            rp = rp_forecast(prev_pv, elev_now, elev_prev);
        }
        const PersistenceBand band =
            persistence_bounds(j > 0 ? sc.pv_kw[j - 1] : sc.pv_kw[0], q05, q95);

        TraceRecord rec;
        rec.minute = j;
        rec.c_budget_kw = slice.c_budget_kw;
        rec.slack_kw = alloc.slack_kw;
        rec.c_req_kw = c_req;
        rec.c_alloc_kw = c_alloc;
        rec.p_g_kw = dr.p_g_kw;
        rec.p_b_kw = dr.p_b_kw;
        rec.pv_kw = sc.pv_kw[j];
        rec.soe_kwh = bess.soe_kwh;
        rec.gcp_violation_kw = dr.gcp_violation_kw;
        rec.clip_residual_kw = dr.clip_residual_kw;
        const size_t n = fleet.followers.size();
        if (n > 0 && method != Method::Uncontrolled) {
            const double target = slice.c_budget_kw + alloc.slack_kw;
            rec.coupling_gap_kw = std::abs(solver_coupling - target);
            rec.coupling_tol_kw =
                std::sqrt(static_cast<double>(n)) * cfg.hyper.eps_abs +
                cfg.hyper.eps_rel * std::max(std::abs(solver_coupling), target);
        }
        rec.pv_fc_kw = rp[j % 15];
        rec.pv_fc_lo_kw = band.lo;
        rec.pv_fc_hi_kw = band.hi;
        rec.tariff = slice.tariff_ev;
        rec.price_dam = slice.price_dam;
        // Settlement prices are the realized ones; the slice may carry
        // forecasts for the controller.
        rec.price_short = sc.price_short[j / cfg.time.dt_da_min];
        rec.price_long = sc.price_long[j / cfg.time.dt_da_min];
        rec.d_cap = slice.d_cap;
        rec.lambda = alloc.lambda;
        rec.sg_iterations = alloc.sg_iterations;
        rec.admm_iterations = alloc.admm_iterations;
        rec.feasible = alloc.feasible;
        rec.converged = alloc.converged;
        for (const auto& ev : live) {
            EvMinute em;
            em.session_id = ev.session_id;
            em.p_req_kw = ev.state.p_req_kw;
            em.p_alloc_kw = ev.state.p_alloc_kw;
            em.theta = ev.state.theta;
            em.soc = ev.state.soc;
            rec.evs.push_back(em);
        }
        std::sort(rec.evs.begin(), rec.evs.end(),
                  [](const EvMinute& a, const EvMinute& b) {
                      return a.session_id < b.session_id;
                  });
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

namespace {

constexpr char kTraceHeader[] =
    "minute,c_budget_kw,slack_kw,c_req_kw,c_alloc_kw,p_g_kw,p_b_kw,pv_kw,soe_kwh,"
    "gcp_violation_kw,clip_residual_kw,coupling_gap_kw,coupling_tol_kw,pv_fc_kw,"
    "pv_fc_lo_kw,pv_fc_hi_kw,tariff,price_dam,price_short,price_long,d_cap,lambda,"
    "sg_iters,admm_iters,feasible,converged,ev_ids,ev_p_req,ev_p_alloc,ev_theta,ev_soc";

template <typename T, typename F>
std::string join(const std::vector<T>& evs, F&& field) {
    std::string out;
    for (size_t i = 0; i < evs.size(); ++i) {
        if (i) out += ';';
        out += field(evs[i]);
    }
    return out;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("trace: cannot write " + path);
    out << "# evcs trace v1 method=" << method_name(trace.method) << "\n"
        << kTraceHeader << "\n";
    for (const auto& r : trace.records) {
        out << r.minute << ',' << detail::fmt(r.c_budget_kw) << ','
            << detail::fmt(r.slack_kw) << ',' << detail::fmt(r.c_req_kw) << ','
            << detail::fmt(r.c_alloc_kw) << ',' << detail::fmt(r.p_g_kw) << ','
            << detail::fmt(r.p_b_kw) << ',' << detail::fmt(r.pv_kw) << ','
            << detail::fmt(r.soe_kwh) << ',' << detail::fmt(r.gcp_violation_kw) << ','
            << detail::fmt(r.clip_residual_kw) << ','
            << detail::fmt(r.coupling_gap_kw) << ','
            << detail::fmt(r.coupling_tol_kw) << ',' << detail::fmt(r.pv_fc_kw) << ','
            << detail::fmt(r.pv_fc_lo_kw) << ',' << detail::fmt(r.pv_fc_hi_kw) << ','
            << detail::fmt(r.tariff) << ',' << detail::fmt(r.price_dam) << ','
            << detail::fmt(r.price_short) << ',' << detail::fmt(r.price_long) << ','
            << detail::fmt(r.d_cap) << ',' << detail::fmt(r.lambda) << ','
            << r.sg_iterations << ',' << r.admm_iterations << ','
            << (r.feasible ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
            << join(r.evs, [](const EvMinute& e) { return detail::fmt(e.session_id); })
            << ','
            << join(r.evs, [](const EvMinute& e) { return detail::fmt(e.p_req_kw); })
            << ','
            << join(r.evs, [](const EvMinute& e) { return detail::fmt(e.p_alloc_kw); })
            << ','
            << join(r.evs, [](const EvMinute& e) { return detail::fmt(e.theta); })
            << ','
            << join(r.evs, [](const EvMinute& e) { return detail::fmt(e.soc); })
            << "\n";
    }
}

SimulationTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("trace: cannot open " + path);
    SimulationTrace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# evcs trace v1 method=", 0) != 0)
        throw std::invalid_argument("trace: missing version line in " + path);
    trace.method = method_from_name(line.substr(std::string("# evcs trace v1 method=").size()));
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::invalid_argument("trace: header mismatch in " + path);

    const auto parse_list = [](std::string_view sv) {
        std::vector<double> out;
        if (sv.empty()) return out;
        for (auto part : detail::split(sv, ';'))
            out.push_back(detail::parse_double(part, "trace list"));
        return out;
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 31)
            throw std::invalid_argument("trace: bad row in " + path + ": " + line);
        TraceRecord r;
        int k = 0;
        r.minute = detail::parse_int(f[k++], path);
        r.c_budget_kw = detail::parse_double(f[k++], path);
        r.slack_kw = detail::parse_double(f[k++], path);
        r.c_req_kw = detail::parse_double(f[k++], path);
        r.c_alloc_kw = detail::parse_double(f[k++], path);
        r.p_g_kw = detail::parse_double(f[k++], path);
        r.p_b_kw = detail::parse_double(f[k++], path);
        r.pv_kw = detail::parse_double(f[k++], path);
        r.soe_kwh = detail::parse_double(f[k++], path);
        r.gcp_violation_kw = detail::parse_double(f[k++], path);
        r.clip_residual_kw = detail::parse_double(f[k++], path);
        r.coupling_gap_kw = detail::parse_double(f[k++], path);
        r.coupling_tol_kw = detail::parse_double(f[k++], path);
        r.pv_fc_kw = detail::parse_double(f[k++], path);
        r.pv_fc_lo_kw = detail::parse_double(f[k++], path);
        r.pv_fc_hi_kw = detail::parse_double(f[k++], path);
        r.tariff = detail::parse_double(f[k++], path);
        r.price_dam = detail::parse_double(f[k++], path);
        r.price_short = detail::parse_double(f[k++], path);
        r.price_long = detail::parse_double(f[k++], path);
        r.d_cap = detail::parse_double(f[k++], path);
        r.lambda = detail::parse_double(f[k++], path);
        r.sg_iterations = detail::parse_int(f[k++], path);
        r.admm_iterations = detail::parse_int(f[k++], path);
        r.feasible = detail::parse_int(f[k++], path) != 0;
        r.converged = detail::parse_int(f[k++], path) != 0;
        const auto ids = parse_list(f[k++]);
        const auto reqs = parse_list(f[k++]);
        const auto allocs = parse_list(f[k++]);
        const auto thetas = parse_list(f[k++]);
        const auto socs = parse_list(f[k++]);
        if (reqs.size() != ids.size() || allocs.size() != ids.size() ||
            thetas.size() != ids.size() || socs.size() != ids.size())
            throw std::invalid_argument("trace: inconsistent EV lists in " + path);
        for (size_t i = 0; i < ids.size(); ++i)
            r.evs.push_back(EvMinute{static_cast<int>(ids[i]), reqs[i], allocs[i],
                                     thetas[i], socs[i]});
        trace.records.push_back(std::move(r));
    }
    return trace;
}

nlohmann::json run_summary(const SimulationTrace& trace, const Config& cfg) {
    double energy_kwh = 0.0;
    double incentives = 0.0;
    int gcp_minutes = 0;
    int coupling_minutes = 0;
    int infeasible_minutes = 0;
    int nonconverged_minutes = 0;
    long admm_total = 0;
    const double h = cfg.time.dt_rt_min / 60.0;
    for (const auto& r : trace.records) {
        energy_kwh += r.c_alloc_kw * h;
        for (const auto& ev : r.evs) incentives += ev.theta * ev.p_alloc_kw * h;
        if (r.gcp_violation_kw > 1e-9) ++gcp_minutes;
        if (trace.method != Method::Uncontrolled &&
            r.coupling_gap_kw > r.coupling_tol_kw + 1e-12)
            ++coupling_minutes;
        if (!r.feasible) ++infeasible_minutes;
        if (!r.converged) ++nonconverged_minutes;
        admm_total += r.admm_iterations;
    }
    double mean_ms = 0.0;
    int solver_calls = 0;
    for (const auto& t : trace.timing) {
        if (t.n_ev == 0) continue;
        mean_ms += 1000.0 * t.seconds;
        ++solver_calls;
    }
    if (solver_calls > 0) mean_ms /= solver_calls;

    return nlohmann::json{{"method", method_name(trace.method)},
                          {"minutes", trace.records.size()},
                          {"energy_delivered_kwh", energy_kwh},
                          {"incentives_paid", incentives},
                          {"gcp_violation_minutes", gcp_minutes},
                          {"coupling_violation_minutes", coupling_minutes},
                          {"infeasible_minutes", infeasible_minutes},
                          {"nonconverged_minutes", nonconverged_minutes},
                          {"admm_iterations_total", admm_total},
                          {"mean_solver_ms", mean_ms},
                          {"solver_calls", solver_calls}};
}

}  // namespace evcs
