// SPDX-License-Identifier: Apache-2.0
#include "evcs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "evcs/charging_curve.hpp"
#include "evcs/dispatch.hpp"
#include "text_util.hpp"

namespace evcs {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "scenario: cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

// "ts,value" series with a mandatory header.
std::vector<double> read_series_csv(const std::string& path, const char* header) {
    const auto lines = read_lines(path);
    require(!lines.empty() && lines[0] == header,
            "scenario: " + path + " must start with header '" + header + "'");
    std::vector<double> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto f = detail::split(lines[i], ',');
        require(f.size() == 2, "scenario: bad row in " + path + ": " + lines[i]);
        out.push_back(detail::parse_double(f[1], path));
    }
    return out;
}

void write_series_csv(const std::string& path, const char* header,
                      const std::vector<double>& values, int step_min) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "scenario: cannot write " + path);
    out << header << "\n";
    for (size_t i = 0; i < values.size(); ++i)
        out << i * step_min << "," << detail::fmt(values[i]) << "\n";
}

}  // namespace

void validate_scenario(Scenario& sc, const Config& cfg) {
    const int minutes = sc.minutes();
    require(minutes >= 1440, "scenario: pv_kw must span at least one day (1440 minutes)");
    require(minutes % 1440 == 0, "scenario: pv_kw must span whole days");
    const size_t n_da = static_cast<size_t>(minutes / cfg.time.dt_da_min);

    const auto check_len = [&](const std::vector<double>& s, const char* name) {
        if (s.size() != n_da)
            throw std::invalid_argument("scenario: series '" + std::string(name) +
                                        "' has length " + std::to_string(s.size()) +
                                        ", expected " + std::to_string(n_da));
    };
    check_len(sc.price_dam, "price_dam");
    check_len(sc.price_short, "price_short");
    check_len(sc.price_long, "price_long");
    check_len(sc.tariff_ev, "tariff_ev");

    for (double v : sc.pv_kw)
        require(std::isfinite(v) && v >= 0.0, "scenario: pv_kw must be finite and >= 0");
    for (const auto* s : {&sc.price_dam, &sc.price_short, &sc.price_long, &sc.tariff_ev})
        for (double v : *s) require(std::isfinite(v), "scenario: prices must be finite");

    // Per-plug occupancy; sessions with cc = -1 get a first-fit assignment.
    struct Interval {
        int from, to, id;
    };
    const int n_plugs = cfg.station.n_cc * cfg.station.n_cp;
    std::vector<std::vector<Interval>> busy(n_plugs);
    const auto overlaps = [](const Interval& a, int from, int to) {
        return a.from < to && from < a.to;
    };
    std::vector<EvSession*> order;
    for (auto& s : sc.sessions) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(),
                     [](const EvSession* a, const EvSession* b) {
                         return a->arrival_min < b->arrival_min;
                     });
    for (EvSession* s : order) {
        validate(*s);
        require(s->arrival_min >= 0 && s->departure_min <= minutes,
                "scenario: session " + std::to_string(s->id) + " outside the horizon");
        if (s->cc_index >= 0) {
            require(s->cc_index < cfg.station.n_cc && s->cp_index >= 0 &&
                        s->cp_index < cfg.station.n_cp,
                    "scenario: session " + std::to_string(s->id) + " has a bad plug");
            auto& plug = busy[s->cc_index * cfg.station.n_cp + s->cp_index];
            for (const auto& iv : plug)
                if (overlaps(iv, s->arrival_min, s->departure_min))
                    throw std::invalid_argument(
                        "scenario: sessions overlap on one plug (ids " +
                        std::to_string(iv.id) + ", " + std::to_string(s->id) + ")");
            plug.push_back({s->arrival_min, s->departure_min, s->id});
        } else {
            int found = -1;
            for (int p = 0; p < n_plugs && found < 0; ++p) {
                bool free = true;
                for (const auto& iv : busy[p])
                    if (overlaps(iv, s->arrival_min, s->departure_min)) free = false;
                if (free) found = p;
            }
            require(found >= 0, "scenario: no free plug for session " +
                                    std::to_string(s->id) + " (capacity exceeded)");
            // Breadth-first over columns: every column gets one EV before any
            // column gets two, matching how drivers pick free columns.
            s->cc_index = found % cfg.station.n_cc;
            s->cp_index = found / cfg.station.n_cc;
            busy[found].push_back({s->arrival_min, s->departure_min, s->id});
        }
    }

    std::set<int> ids;
    for (const auto& s : sc.sessions)
        require(ids.insert(s.id).second,
                "scenario: duplicate session id " + std::to_string(s.id));
}

Scenario load_scenario(const std::string& path, const Config& cfg) {
    Scenario sc;
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        std::ifstream in(path);
        require(static_cast<bool>(in), "scenario: cannot open " + path);
        json j;
        in >> j;
        if (j.contains("date")) sc.date = j.at("date").get<std::string>();
        if (j.contains("site")) {
            sc.site.lat_deg = j.at("site").value("lat", sc.site.lat_deg);
            sc.site.lon_deg = j.at("site").value("lon", sc.site.lon_deg);
        }
        sc.pv_kw = j.at("pv_kw").get<std::vector<double>>();
        sc.price_dam = j.at("price_dam").get<std::vector<double>>();
        sc.price_short = j.at("price_short").get<std::vector<double>>();
        sc.price_long = j.at("price_long").get<std::vector<double>>();
        sc.tariff_ev = j.at("tariff_ev").get<std::vector<double>>();
        for (const auto& js : j.at("sessions")) {
            EvSession s;
            s.id = js.at("id").get<int>();
            s.arrival_min = js.at("arrival_min").get<int>();
            s.departure_min = js.at("departure_min").get<int>();
            s.capacity_kwh = js.at("capacity_kwh").get<double>();
            s.soc_arrival = js.at("soc_arrival").get<double>();
            s.energy_request_kwh = js.at("energy_kwh").get<double>();
            s.cc_index = js.value("cc_index", -1);
            s.cp_index = js.value("cp_index", -1);
            s.rated_kw = js.value("rated_kw", 0.0);
            sc.sessions.push_back(s);
        }
    } else {
        sc.pv_kw = read_series_csv(path + "/pv.csv", "ts,kw");
        sc.price_dam = read_series_csv(path + "/prices_dam.csv", "ts,price");
        sc.price_short = read_series_csv(path + "/prices_short.csv", "ts,price");
        sc.price_long = read_series_csv(path + "/prices_long.csv", "ts,price");
        sc.tariff_ev = read_series_csv(path + "/tariff.csv", "ts,price");
        const auto lines = read_lines(path + "/sessions.csv");
        require(!lines.empty() &&
                    lines[0] ==
                        "id,arrival_min,departure_min,capacity_kwh,soc_arrival,energy_kwh",
                "scenario: sessions.csv header mismatch");
        for (size_t i = 1; i < lines.size(); ++i) {
            const auto f = detail::split(lines[i], ',');
            require(f.size() == 6, "scenario: bad sessions.csv row: " + lines[i]);
            EvSession s;
            s.id = detail::parse_int(f[0], "sessions.csv");
            s.arrival_min = detail::parse_int(f[1], "sessions.csv");
            s.departure_min = detail::parse_int(f[2], "sessions.csv");
            s.capacity_kwh = detail::parse_double(f[3], "sessions.csv");
            s.soc_arrival = detail::parse_double(f[4], "sessions.csv");
            s.energy_request_kwh = detail::parse_double(f[5], "sessions.csv");
            sc.sessions.push_back(s);
        }
    }
    validate_scenario(sc, cfg);
    return sc;
}

void save_scenario_json(const Scenario& sc, const std::string& path) {
    json sessions = json::array();
    for (const auto& s : sc.sessions) {
        json js{{"id", s.id},
                {"arrival_min", s.arrival_min},
                {"departure_min", s.departure_min},
                {"capacity_kwh", s.capacity_kwh},
                {"soc_arrival", s.soc_arrival},
                {"energy_kwh", s.energy_request_kwh},
                {"cc_index", s.cc_index},
                {"cp_index", s.cp_index}};
        if (s.rated_kw > 0.0) js["rated_kw"] = s.rated_kw;
        sessions.push_back(js);
    }
    const json j{{"date", sc.date},
                 {"site", {{"lat", sc.site.lat_deg}, {"lon", sc.site.lon_deg}}},
                 {"pv_kw", sc.pv_kw},
                 {"price_dam", sc.price_dam},
                 {"price_short", sc.price_short},
                 {"price_long", sc.price_long},
                 {"tariff_ev", sc.tariff_ev},
                 {"sessions", sessions}};
    std::ofstream out(path);
    require(static_cast<bool>(out), "scenario: cannot write " + path);
    out << j.dump(1) << "\n";
}

void save_scenario_csv(const Scenario& sc, const std::string& dir) {
    write_series_csv(dir + "/pv.csv", "ts,kw", sc.pv_kw, 1);
    write_series_csv(dir + "/prices_dam.csv", "ts,price", sc.price_dam, 15);
    write_series_csv(dir + "/prices_short.csv", "ts,price", sc.price_short, 15);
    write_series_csv(dir + "/prices_long.csv", "ts,price", sc.price_long, 15);
    write_series_csv(dir + "/tariff.csv", "ts,price", sc.tariff_ev, 15);
    std::ofstream out(dir + "/sessions.csv");
    require(static_cast<bool>(out), "scenario: cannot write sessions.csv");
    out << "id,arrival_min,departure_min,capacity_kwh,soc_arrival,energy_kwh\n";
    for (const auto& s : sc.sessions)
        out << s.id << "," << s.arrival_min << "," << s.departure_min << ","
            << detail::fmt(s.capacity_kwh) << "," << detail::fmt(s.soc_arrival) << ","
            << detail::fmt(s.energy_request_kwh) << "\n";
}

Scenario generate_synthetic(std::uint64_t seed, const SyntheticConfig& syn,
                            const Config& cfg) {
    require(syn.n_sessions >= 0 && syn.days >= 1, "generate_synthetic: bad config");
    double weight_sum = 0.0;
    for (const auto& pk : syn.arrival_peaks) weight_sum += pk[2];
    require(weight_sum > 0.0, "generate_synthetic: arrival profile has zero mass");

    std::mt19937_64 rng(seed);
    Scenario sc;
    const int minutes = 1440 * syn.days;
    const int doy = day_of_year(sc.date.c_str());

    // Clear-sky PV from the site's elevation curve, with smooth AR(1) noise.
    sc.pv_kw.resize(minutes);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double ar = 0.0;
    for (int m = 0; m < minutes; ++m) {
        ar = 0.97 * ar + 0.03 * gauss(rng) * syn.pv_noise * 20.0;
        const double elev = solar_elevation_deg(doy + m / 1440, m % 1440,
                                                sc.site.lat_deg);
        const double clear = std::max(0.0, std::sin(elev * std::acos(-1.0) / 180.0));
        sc.pv_kw[m] = std::max(0.0, cfg.station.p_pv_peak_kw * clear *
                                        std::clamp(1.0 + ar, 0.0, 1.2));
    }

    // Flat-ish price shapes with a morning/evening bump; $/kWh.
    const int n_da = minutes / cfg.time.dt_da_min;
    sc.price_dam.resize(n_da);
    sc.price_short.resize(n_da);
    sc.price_long.resize(n_da);
    sc.tariff_ev.assign(n_da, 0.50);
    for (int k = 0; k < n_da; ++k) {
        const int day = k * cfg.time.dt_da_min / 1440;
        const double h = (k * cfg.time.dt_da_min % 1440) / 60.0;
        const double bump = 0.02 * (std::exp(-0.5 * std::pow((h - 9) / 2.5, 2)) +
                                    std::exp(-0.5 * std::pow((h - 19) / 2.5, 2)));
        sc.price_dam[k] = 0.10 + bump * (1.0 + 0.2 * day) + 0.004 * day;
        sc.price_short[k] = sc.price_dam[k] * 1.25;
        sc.price_long[k] = sc.price_dam[k] * 0.75;
    }

    // Sessions: arrival from the peak mixture, truncated-normal stay,
    // capacity from the mix, energy toward a sampled target SoC.
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int next_id = 1;
    for (int d = 0; d < syn.days; ++d) {
        for (int k = 0; k < syn.n_sessions; ++k) {
            double pick = uni(rng) * weight_sum;
            const auto* peak = &syn.arrival_peaks.back();
            for (const auto& pk : syn.arrival_peaks) {
                if (pick < pk[2]) {
                    peak = &pk;
                    break;
                }
                pick -= pk[2];
            }
            const double arrival_h = (*peak)[0] + (*peak)[1] * gauss(rng);
            int arrival = d * 1440 + static_cast<int>(std::lround(arrival_h * 60.0));
            arrival = std::clamp(arrival, d * 1440, d * 1440 + 1439);
            double stay = syn.stay_mean_min + syn.stay_sd_min * gauss(rng);
            stay = std::clamp(stay, 10.0, 6.0 * 60.0);
            const int departure = std::min(minutes, arrival + static_cast<int>(stay));
            if (departure - arrival < 5) continue;

            EvSession s;
            s.id = next_id;
            s.arrival_min = arrival;
            s.departure_min = departure;
            s.capacity_kwh =
                syn.capacity_mix_kwh[static_cast<size_t>(uni(rng) * syn.capacity_mix_kwh.size()) %
                                     syn.capacity_mix_kwh.size()];
            s.soc_arrival = syn.soc_arrival_lo +
                            (syn.soc_arrival_hi - syn.soc_arrival_lo) * uni(rng);
            const double target =
                std::min(1.0, syn.target_soc_lo +
                                  (syn.target_soc_hi - syn.target_soc_lo) * uni(rng));
            s.energy_request_kwh =
                std::max(0.0, s.capacity_kwh * (std::max(target, s.soc_arrival) -
                                                s.soc_arrival));
            sc.sessions.push_back(s);
            ++next_id;
        }
    }

    // First-fit plug assignment; sessions that find no plug are dropped so
    // concurrency stays within the hardware.
    const int n_plugs = cfg.station.n_cc * cfg.station.n_cp;
    std::vector<std::vector<std::pair<int, int>>> busy(n_plugs);
    std::vector<EvSession> placed;
    std::stable_sort(sc.sessions.begin(), sc.sessions.end(),
                     [](const EvSession& a, const EvSession& b) {
                         return a.arrival_min < b.arrival_min;
                     });
    for (auto& s : sc.sessions) {
        int found = -1;
        for (int p = 0; p < n_plugs && found < 0; ++p) {
            bool free = true;
            for (const auto& iv : busy[p])
                if (iv.first < s.departure_min && s.arrival_min < iv.second) free = false;
            if (free) found = p;
        }
        if (found < 0) continue;
        s.cc_index = found % cfg.station.n_cc;
        s.cp_index = found / cfg.station.n_cc;
        busy[found].push_back({s.arrival_min, s.departure_min});
        placed.push_back(s);
    }
    sc.sessions = std::move(placed);

    validate_scenario(sc, cfg);
    return sc;
}

Scenario make_concurrent_scenario(int n_ev, int start_min, int window_min,
                                  const Config& cfg, double capacity_kwh,
                                  double rated_kw) {
    require(n_ev >= 0 && n_ev <= cfg.station.n_cc * cfg.station.n_cp,
            "make_concurrent_scenario: more EVs than plugs");
    Scenario sc;
    sc.pv_kw.assign(1440, 0.0);
    const int n_da = 1440 / cfg.time.dt_da_min;
    sc.price_dam.assign(n_da, 0.10);
    sc.price_short.assign(n_da, 0.125);
    sc.price_long.assign(n_da, 0.075);
    sc.tariff_ev.assign(n_da, 0.50);
    for (int i = 0; i < n_ev; ++i) {
        EvSession s;
        s.id = i + 1;
        s.arrival_min = start_min;
        s.departure_min = start_min + window_min;
        s.capacity_kwh = capacity_kwh;
        s.soc_arrival = 0.10;
        s.energy_request_kwh = 0.85 * capacity_kwh;
        s.cc_index = i % cfg.station.n_cc;
        s.cp_index = i / cfg.station.n_cc;
        s.rated_kw = rated_kw;
        sc.sessions.push_back(s);
    }
    validate_scenario(sc, cfg);
    return sc;
}

namespace {

// Expected uncontrolled power draw per minute for one session: full curve
// power, tapered by the remaining requested energy.
std::vector<double> expected_profile(const EvSession& s, int dt_min) {
    const PowerSocCurve curve = default_curve_for(s);
    std::vector<double> power;
    double soc = s.soc_arrival;
    double remaining = s.energy_request_kwh;
    const double h = dt_min / 60.0;
    for (int m = s.arrival_min; m < s.departure_min; ++m) {
        const double p = std::min(curve.eval(std::min(soc, 1.0)), remaining / h);
        power.push_back(p);
        soc = std::min(1.0, soc + p * h / s.capacity_kwh);
        remaining = std::max(0.0, remaining - p * h);
    }
    return power;
}

}  // namespace

ScheduleSeries schedule_provider(const Scenario& sc, ScheduleMode mode,
                                 const Config& cfg,
                                 const std::string& schedule_file) {
    if (mode == ScheduleMode::File)
        return read_schedule_csv(schedule_file, cfg, sc.minutes());

    const auto& st = cfg.station;
    const int dt_id = cfg.time.dt_id_min;
    const int n_slices = sc.minutes() / dt_id;
    const int da_per_id = cfg.time.dt_da_min / dt_id;

    // Aggregate expected EV demand per minute and column, clip each column
    // at its cap and refer the total to the coupling point.
    std::vector<std::vector<double>> col_demand(
        st.n_cc, std::vector<double>(sc.minutes(), 0.0));
    for (const auto& s : sc.sessions) {
        const auto profile = expected_profile(s, cfg.time.dt_rt_min);
        auto& col = col_demand[std::max(0, s.cc_index)];
        for (size_t k = 0; k < profile.size(); ++k)
            col[s.arrival_min + k] += profile[k];
    }
    std::vector<double> demand_kw(sc.minutes(), 0.0);
    for (int m = 0; m < sc.minutes(); ++m) {
        double total = 0.0;
        for (int c = 0; c < st.n_cc; ++c)
            total += std::min(col_demand[c][m], st.p_cc_kw);
        demand_kw[m] = total / st.eta_cp;
    }

    const double budget_cap = st.eta_tr * st.p_gc_kw +
                              st.cap_bess_kwh * st.c_rate * st.eta_dh * st.eta_inv;
    const double soe_ref = 0.5 * st.cap_bess_kwh;
    double soe_model = soe_ref;
    const double h = dt_id / 60.0;

    // Imbalance prices are unknown in real time; the slices carry a 1-day
    // persistence forecast while settlement uses the realized series.
    const int da_per_day = 1440 / cfg.time.dt_da_min;
    const std::vector<double> short_fc =
        price_persistence_1d(sc.price_short, da_per_day);
    const std::vector<double> long_fc =
        price_persistence_1d(sc.price_long, da_per_day);

    ScheduleSeries out;
    out.slices.resize(n_slices);
    out.bess_soe_ref_kwh.assign(n_slices, soe_ref);
    for (int k = 0; k < n_slices; ++k) {
        ScheduleSlice& slice = out.slices[k];
        double mean_demand = 0.0;
        for (int m = 0; m < dt_id; ++m) mean_demand += demand_kw[k * dt_id + m];
        mean_demand /= dt_id;
        slice.c_budget_kw = std::clamp(mean_demand, 0.0, budget_cap);

        double pull = (soe_ref - soe_model) / h;
        pull = std::clamp(pull, -st.cap_bess_kwh * st.c_rate,
                          st.cap_bess_kwh * st.c_rate);
        slice.p_bess_setpoint_kw = pull;
        soe_model += pull >= 0.0 ? pull * st.eta_ch * h : pull / st.eta_dh * h;

        slice.d_cap = 0.10;
        slice.s_max_kw = std::max(0.0, st.p_gc_kw * st.eta_tr - slice.c_budget_kw);
        slice.s_min_kw = -slice.c_budget_kw;
        const int da = k / da_per_id;
        slice.tariff_ev = sc.tariff_ev[da];
        slice.price_dam = sc.price_dam[da];
        slice.price_short = short_fc[da];
        slice.price_long = long_fc[da];
        validate(slice);
    }
    return out;
}

void write_schedule_csv(const ScheduleSeries& series, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "schedule: cannot write " + path);
    out << "ts,c_kw,bess_kw,d_cap,s_min,s_max,tariff,dam,short,long\n";
    for (size_t k = 0; k < series.slices.size(); ++k) {
        const auto& s = series.slices[k];
        out << k * 5 << "," << detail::fmt(s.c_budget_kw) << ","
            << detail::fmt(s.p_bess_setpoint_kw) << "," << detail::fmt(s.d_cap) << ","
            << detail::fmt(s.s_min_kw) << "," << detail::fmt(s.s_max_kw) << ","
            << detail::fmt(s.tariff_ev) << "," << detail::fmt(s.price_dam) << ","
            << detail::fmt(s.price_short) << "," << detail::fmt(s.price_long) << "\n";
    }
}

ScheduleSeries read_schedule_csv(const std::string& path, const Config& cfg,
                                 int minutes) {
    const auto lines = read_lines(path);
    require(!lines.empty() &&
                lines[0] == "ts,c_kw,bess_kw,d_cap,s_min,s_max,tariff,dam,short,long",
            "schedule: header mismatch in " + path);
    ScheduleSeries out;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto f = detail::split(lines[i], ',');
        require(f.size() == 10, "schedule: bad row: " + lines[i]);
        ScheduleSlice s;
        s.c_budget_kw = detail::parse_double(f[1], path);
        s.p_bess_setpoint_kw = detail::parse_double(f[2], path);
        s.d_cap = detail::parse_double(f[3], path);
        s.s_min_kw = detail::parse_double(f[4], path);
        s.s_max_kw = detail::parse_double(f[5], path);
        s.tariff_ev = detail::parse_double(f[6], path);
        s.price_dam = detail::parse_double(f[7], path);
        s.price_short = detail::parse_double(f[8], path);
        s.price_long = detail::parse_double(f[9], path);
        validate(s);
        out.slices.push_back(s);
    }
    const size_t expected = static_cast<size_t>(minutes / cfg.time.dt_id_min);
    if (out.slices.size() != expected)
        throw std::invalid_argument("schedule: " + std::to_string(out.slices.size()) +
                                    " slices, expected " + std::to_string(expected));
    out.bess_soe_ref_kwh.assign(out.slices.size(), 0.5 * cfg.station.cap_bess_kwh);
    return out;
}

}  // namespace evcs
