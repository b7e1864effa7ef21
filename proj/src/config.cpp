// SPDX-License-Identifier: Apache-2.0
#include "evcs/config.hpp"
#include "evcs/types.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace evcs {

namespace {

void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": requires " + what);
}

void check(bool ok, const std::string& where, const std::string& what) {
    if (!ok) fail(where, what);
}

bool is_eff(double x) { return x > 0.0 && x <= 1.0 && std::isfinite(x); }

}  // namespace

void validate(const StationParams& p) {
    const std::string w = "StationParams";
    check(is_eff(p.eta_pv), w, "eta_pv in (0,1]");
    check(is_eff(p.eta_inv), w, "eta_inv in (0,1]");
    check(is_eff(p.eta_tr), w, "eta_tr in (0,1]");
    check(is_eff(p.eta_cp), w, "eta_cp in (0,1]");
    check(is_eff(p.eta_ch), w, "eta_ch in (0,1]");
    check(is_eff(p.eta_dh), w, "eta_dh in (0,1]");
    check(p.c_rate > 0, w, "c_rate > 0");
    check(p.cap_bess_kwh > 0, w, "cap_bess_kwh > 0");
    check(p.soc_min >= 0 && p.soc_max <= 1, w, "soc_min, soc_max in [0,1]");
    check(p.soc_min < p.soc_max, w, "soc_min < soc_max");
    check(p.p_gc_kw > 0, w, "p_gc_kw > 0");
    check(p.p_cc_kw > 0, w, "p_cc_kw > 0");
    check(p.n_cc > 0, w, "n_cc > 0");
    check(p.n_cp > 0, w, "n_cp > 0");
    check(p.p_pv_peak_kw > 0, w, "p_pv_peak_kw > 0");
    check(p.price_kwh_bess > 0, w, "price_kwh_bess > 0");
    check(p.d_b_eol > 0 && p.d_b_eol <= 1, w, "d_b_eol in (0,1]");
}

void validate(const Hyperparams& h) {
    const std::string w = "Hyperparams";
    check(h.rho0 > 0, w, "rho0 > 0");
    check(h.eps_abs > 0, w, "eps_abs > 0");
    check(h.eps_rel > 0, w, "eps_rel > 0");
    check(h.eps_bisect > 0, w, "eps_bisect > 0");
    check(h.tau_rho > 1, w, "tau_rho>1");
    check(h.mu > 1, w, "mu>1");
    check(h.beta >= 0, w, "beta >= 0");
    check(h.gamma >= 0, w, "gamma >= 0");
    check(h.delta > 0, w, "delta > 0");
    check(h.a > 0, w, "a > 0");
    check(h.b > 0, w, "b > 0");
    check(h.c > 0, w, "c > 0");
    check(h.alpha >= 0, w, "alpha >= 0");
    check(h.max_admm_iters > 0, w, "max_admm_iters > 0");
    check(h.max_sg_iters > 0, w, "max_sg_iters > 0");
}

void validate(const TimeGrid& t) {
    const std::string w = "TimeGrid";
    check(t.dt_rt_min > 0 && t.dt_id_min > 0 && t.dt_da_min > 0, w, "positive granularities");
    check(t.dt_id_min % t.dt_rt_min == 0, w, "dt_rt divides dt_id");
    check(t.dt_da_min % t.dt_id_min == 0, w, "dt_id divides dt_da");
    check(t.horizon_da_h > 0 && t.horizon_bm_h > 0, w, "positive horizons");
    check((t.horizon_da_h * 60) % t.dt_da_min == 0, w, "horizon_da multiple of dt_da");
    check((t.horizon_bm_h * 60) % t.dt_id_min == 0, w, "horizon_bm multiple of dt_id");
}

Config validate_config(const StationParams& station, const Hyperparams& hyper,
                       const TimeGrid& time) {
    validate(station);
    validate(hyper);
    validate(time);
    return Config{station, hyper, time};
}

void validate(const ScheduleSlice& s) {
    const std::string w = "ScheduleSlice";
    check(s.s_min_kw <= 0.0, w, "s_min <= 0");
    check(s.s_max_kw >= 0.0, w, "s_max >= 0");
    check(s.d_cap >= 0.0, w, "d_cap >= 0");
    check(s.c_budget_kw >= 0.0, w, "c_budget >= 0");
    check(std::isfinite(s.tariff_ev) && std::isfinite(s.price_dam) &&
              std::isfinite(s.price_short) && std::isfinite(s.price_long),
          w, "finite prices");
}

void validate(const EvSession& s) {
    const std::string w = "EvSession(id=" + std::to_string(s.id) + ")";
    check(s.arrival_min < s.departure_min, w, "arrival < departure");
    check(s.capacity_kwh > 0, w, "capacity > 0");
    check(s.soc_arrival >= 0 && s.soc_arrival <= 1, w, "soc_arrival in [0,1]");
    check(s.energy_request_kwh >= 0, w, "energy_request >= 0");
    check(s.energy_request_kwh <= s.capacity_kwh * (1.0 - s.soc_arrival) + 1e-9,
          w, "energy_request <= capacity*(1-soc_arrival)");
    check(s.rated_kw >= 0, w, "rated_kw >= 0");
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() +
                                        "' in " + where);
    }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config config_from_json(const nlohmann::json& j) {
    Config cfg;
    reject_unknown(j, {"station", "hyper", "time"}, "top level");

    if (j.contains("station")) {
        const json& s = j.at("station");
        reject_unknown(s,
                       {"eta_pv", "eta_inv", "eta_tr", "eta_cp", "eta_ch", "eta_dh",
                        "c_rate", "cap_bess_kwh", "soc_min", "soc_max", "p_gc_kw",
                        "p_cc_kw", "n_cc", "n_cp", "p_pv_peak_kw", "price_kwh_bess",
                        "d_b_eol"},
                       "station");
        auto& p = cfg.station;
        get(s, "eta_pv", p.eta_pv);
        get(s, "eta_inv", p.eta_inv);
        get(s, "eta_tr", p.eta_tr);
        get(s, "eta_cp", p.eta_cp);
        get(s, "eta_ch", p.eta_ch);
        get(s, "eta_dh", p.eta_dh);
        get(s, "c_rate", p.c_rate);
        get(s, "cap_bess_kwh", p.cap_bess_kwh);
        get(s, "soc_min", p.soc_min);
        get(s, "soc_max", p.soc_max);
        get(s, "p_gc_kw", p.p_gc_kw);
        get(s, "p_cc_kw", p.p_cc_kw);
        get(s, "n_cc", p.n_cc);
        get(s, "n_cp", p.n_cp);
        get(s, "p_pv_peak_kw", p.p_pv_peak_kw);
        get(s, "price_kwh_bess", p.price_kwh_bess);
        get(s, "d_b_eol", p.d_b_eol);
    }
    if (j.contains("hyper")) {
        const json& h = j.at("hyper");
        reject_unknown(h,
                       {"f_s", "b", "c", "tau", "a", "alpha", "beta", "gamma", "rho0",
                        "delta", "eps_abs", "eps_rel", "eps_bisect", "tau_rho", "mu",
                        "max_admm_iters", "max_sg_iters"},
                       "hyper");
        auto& p = cfg.hyper;
        get(h, "f_s", p.f_s);
        get(h, "b", p.b);
        get(h, "c", p.c);
        get(h, "tau", p.tau);
        get(h, "a", p.a);
        get(h, "alpha", p.alpha);
        get(h, "beta", p.beta);
        get(h, "gamma", p.gamma);
        get(h, "rho0", p.rho0);
        get(h, "delta", p.delta);
        get(h, "eps_abs", p.eps_abs);
        get(h, "eps_rel", p.eps_rel);
        get(h, "eps_bisect", p.eps_bisect);
        get(h, "tau_rho", p.tau_rho);
        get(h, "mu", p.mu);
        get(h, "max_admm_iters", p.max_admm_iters);
        get(h, "max_sg_iters", p.max_sg_iters);
    }
    if (j.contains("time")) {
        const json& t = j.at("time");
        reject_unknown(t,
                       {"horizon_da_h", "horizon_bm_h", "dt_da_min", "dt_id_min",
                        "dt_rt_min"},
                       "time");
        auto& p = cfg.time;
        get(t, "horizon_da_h", p.horizon_da_h);
        get(t, "horizon_bm_h", p.horizon_bm_h);
        get(t, "dt_da_min", p.dt_da_min);
        get(t, "dt_id_min", p.dt_id_min);
        get(t, "dt_rt_min", p.dt_rt_min);
    }
    return validate_config(cfg.station, cfg.hyper, cfg.time);
}

nlohmann::json config_to_json(const Config& cfg) {
    const auto& p = cfg.station;
    const auto& h = cfg.hyper;
    const auto& t = cfg.time;
    return json{
        {"station",
         {{"eta_pv", p.eta_pv},
          {"eta_inv", p.eta_inv},
          {"eta_tr", p.eta_tr},
          {"eta_cp", p.eta_cp},
          {"eta_ch", p.eta_ch},
          {"eta_dh", p.eta_dh},
          {"c_rate", p.c_rate},
          {"cap_bess_kwh", p.cap_bess_kwh},
          {"soc_min", p.soc_min},
          {"soc_max", p.soc_max},
          {"p_gc_kw", p.p_gc_kw},
          {"p_cc_kw", p.p_cc_kw},
          {"n_cc", p.n_cc},
          {"n_cp", p.n_cp},
          {"p_pv_peak_kw", p.p_pv_peak_kw},
          {"price_kwh_bess", p.price_kwh_bess},
          {"d_b_eol", p.d_b_eol}}},
        {"hyper",
         {{"f_s", h.f_s},
          {"b", h.b},
          {"c", h.c},
          {"tau", h.tau},
          {"a", h.a},
          {"alpha", h.alpha},
          {"beta", h.beta},
          {"gamma", h.gamma},
          {"rho0", h.rho0},
          {"delta", h.delta},
          {"eps_abs", h.eps_abs},
          {"eps_rel", h.eps_rel},
          {"eps_bisect", h.eps_bisect},
          {"tau_rho", h.tau_rho},
          {"mu", h.mu},
          {"max_admm_iters", h.max_admm_iters},
          {"max_sg_iters", h.max_sg_iters}}},
        {"time",
         {{"horizon_da_h", t.horizon_da_h},
          {"horizon_bm_h", t.horizon_bm_h},
          {"dt_da_min", t.dt_da_min},
          {"dt_id_min", t.dt_id_min},
          {"dt_rt_min", t.dt_rt_min}}}};
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json j;
    in >> j;
    return config_from_json(j);
}

}  // namespace evcs
