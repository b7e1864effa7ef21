// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness: run one controller over a scenario, compare all
// four, sweep controller timing against fleet size, or generate synthetic
// scenarios. Exit codes: 0 success, 2 validation error, 3 solver
// non-convergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evcs/benchmarks.hpp"
#include "evcs/config.hpp"
#include "evcs/metrics.hpp"
#include "evcs/scenario.hpp"
#include "evcs/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string scenario_path;
    std::string schedule_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    double quantum = 0.5;
    int max_iters = 0;  // 0 = keep config value
    int sessions = 30;
};

evcs::Config load_cfg(const CommonOpts& o) {
    evcs::Config cfg;
    if (!o.config_path.empty()) cfg = evcs::load_config(o.config_path);
    if (o.max_iters > 0) cfg.hyper.max_admm_iters = o.max_iters;
    return evcs::validate_config(cfg.station, cfg.hyper, cfg.time);
}

evcs::Scenario load_or_generate(const CommonOpts& o, const evcs::Config& cfg) {
    if (!o.scenario_path.empty()) return evcs::load_scenario(o.scenario_path, cfg);
    evcs::SyntheticConfig syn;
    syn.n_sessions = o.sessions;
    return evcs::generate_synthetic(o.seed, syn, cfg);
}

evcs::ScheduleSeries make_schedule(const CommonOpts& o, const evcs::Scenario& sc,
                                   const evcs::Config& cfg) {
    if (!o.schedule_path.empty())
        return evcs::schedule_provider(sc, evcs::ScheduleMode::File, cfg,
                                       o.schedule_path);
    return evcs::schedule_provider(sc, evcs::ScheduleMode::Heuristic, cfg);
}

json method_metrics(const evcs::SimulationTrace& trace,
                    const evcs::ScheduleSeries& schedule, const evcs::Config& cfg) {
    json m = evcs::run_summary(trace, cfg);
    const evcs::ProfitBreakdown pb = evcs::profit_breakdown(trace, schedule, cfg);
    m["profit"] = {{"dam_cost", pb.dam_cost},
                   {"bm_cost", pb.bm_cost},
                   {"potential_profit", pb.potential_profit},
                   {"incentives_paid", pb.incentives_paid},
                   {"net_profit", pb.net_profit}};
    m["battery_wear"] = evcs::battery_wear(trace, cfg.station);
    try {
        const evcs::FairnessReport fr = evcs::fairness(trace);
        json per_ev = json::object();
        for (const auto& [id, score] : fr.per_ev)
            per_ev[std::to_string(id)] = score;
        m["fairness"] = {{"per_ev", per_ev}, {"gini", fr.gini_index}};
    } catch (const std::invalid_argument&) {
        // no connected EV minutes in this run
    }
    return m;
}

// Returns true when the run kept convergence everywhere it promised it.
bool run_method(evcs::Method method, const evcs::Scenario& sc,
                const evcs::ScheduleSeries& schedule, const evcs::Config& cfg,
                const evcs::SimOptions& opt, const std::string& out_dir,
                evcs::SimulationTrace& trace_out) {
    trace_out = evcs::simulate(sc, schedule, method, cfg, opt);
    evcs::write_trace_csv(trace_out,
                          out_dir + "/trace_" + evcs::method_name(method) + ".csv");
    std::ofstream mf(out_dir + "/metrics_" + std::string(evcs::method_name(method)) +
                     ".json");
    const json m = method_metrics(trace_out, schedule, cfg);
    mf << m.dump(1) << "\n";
    if (method == evcs::Method::SgAdmm || method == evcs::Method::Admm)
        return m.at("nonconverged_minutes").get<int>() == 0;
    return true;
}

json quartiles(std::vector<int> values) {
    if (values.empty()) return json{{"n", 0}};
    std::sort(values.begin(), values.end());
    const auto at = [&](double q) {
        const double pos = q * (values.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - lo) * (values[hi] - values[lo]);
    };
    return json{{"n", values.size()},
                {"q25", at(0.25)},
                {"median", at(0.5)},
                {"q75", at(0.75)}};
}

int cmd_run(const CommonOpts& o, const std::string& method_name) {
    const evcs::Config cfg = load_cfg(o);
    evcs::Scenario sc = load_or_generate(o, cfg);
    const evcs::ScheduleSeries schedule = make_schedule(o, sc, cfg);
    fs::create_directories(o.out_dir);
    evcs::SimOptions opt{o.quantum};

    evcs::SimulationTrace trace;
    const bool ok = run_method(evcs::method_from_name(method_name), sc, schedule,
                               cfg, opt, o.out_dir, trace);
    std::ofstream sf(o.out_dir + "/summary.json");
    sf << evcs::run_summary(trace, cfg).dump(1) << "\n";
    std::cout << "wrote " << o.out_dir << "/trace_" << method_name << ".csv\n";
    return ok ? 0 : 3;
}

int cmd_compare(const CommonOpts& o) {
    const evcs::Config cfg = load_cfg(o);
    evcs::Scenario sc = load_or_generate(o, cfg);
    const evcs::ScheduleSeries schedule = make_schedule(o, sc, cfg);
    fs::create_directories(o.out_dir);
    evcs::SimOptions opt{o.quantum};

    const evcs::Method methods[] = {evcs::Method::SgAdmm, evcs::Method::Admm,
                                    evcs::Method::Centralized,
                                    evcs::Method::Uncontrolled};
    // Methods run sequentially so each controller owns its wall clock.
    bool all_ok = true;
    std::vector<evcs::SimulationTrace> traces;
    std::vector<std::pair<std::string, std::vector<evcs::TimingSample>>> timing;
    json summary;
    for (const evcs::Method m : methods) {
        evcs::SimulationTrace trace;
        all_ok &= run_method(m, sc, schedule, cfg, opt, o.out_dir, trace);
        timing.emplace_back(evcs::method_name(m), trace.timing);
        summary["methods"][evcs::method_name(m)] = evcs::run_summary(trace, cfg);
        traces.push_back(std::move(trace));
    }
    evcs::write_timing_csv(evcs::timing_report(timing), o.out_dir + "/timing.csv");

    // Extra charging time of every method against the incentive-based one.
    for (size_t i = 1; i < traces.size(); ++i) {
        const auto deltas =
            evcs::extra_charging_time(traces[i], traces[0], sc, cfg);
        std::vector<int> v;
        for (const auto& [id, d] : deltas) v.push_back(d);
        summary["extra_charging_time_vs_sg_admm"]
               [evcs::method_name(traces[i].method)] = quartiles(std::move(v));
    }
    std::ofstream sf(o.out_dir + "/summary.json");
    sf << summary.dump(1) << "\n";
    std::cout << "wrote " << o.out_dir << "/{trace_*,metrics_*,timing.csv,summary.json}\n";
    return all_ok ? 0 : 3;
}

int cmd_sweep(const CommonOpts& o, const std::string& evs_range, int window_min) {
    const evcs::Config cfg = load_cfg(o);
    int ev_lo = 1, ev_hi = 20;
    if (const auto pos = evs_range.find(".."); pos != std::string::npos) {
        ev_lo = std::stoi(evs_range.substr(0, pos));
        ev_hi = std::stoi(evs_range.substr(pos + 2));
    } else if (!evs_range.empty()) {
        ev_lo = ev_hi = std::stoi(evs_range);
    }
    if (ev_lo < 1 || ev_hi < ev_lo)
        throw std::invalid_argument("sweep: bad --evs range");

    fs::create_directories(o.out_dir);
    evcs::SimOptions opt{o.quantum};
    const evcs::Method methods[] = {evcs::Method::SgAdmm, evcs::Method::Admm,
                                    evcs::Method::Centralized,
                                    evcs::Method::Uncontrolled};
    std::vector<std::pair<std::string, std::vector<evcs::TimingSample>>> timing;
    for (int n = ev_lo; n <= ev_hi; ++n) {
        const evcs::Scenario sc =
            evcs::make_concurrent_scenario(n, 600, window_min, cfg);
        const evcs::ScheduleSeries schedule =
            evcs::schedule_provider(sc, evcs::ScheduleMode::Heuristic, cfg);
        for (const evcs::Method m : methods) {
            const evcs::SimulationTrace trace =
                evcs::simulate(sc, schedule, m, cfg, opt);
            timing.emplace_back(evcs::method_name(m), trace.timing);
        }
        std::cout << "swept n_ev=" << n << "\n";
    }
    evcs::write_timing_csv(evcs::timing_report(timing), o.out_dir + "/timing.csv");
    std::cout << "wrote " << o.out_dir << "/timing.csv\n";
    return 0;
}

int cmd_gen(const CommonOpts& o, const std::string& out_file, bool csv, int days) {
    const evcs::Config cfg = load_cfg(o);
    evcs::SyntheticConfig syn;
    syn.n_sessions = o.sessions;
    syn.days = days;
    const evcs::Scenario sc = evcs::generate_synthetic(o.seed, syn, cfg);
    if (csv) {
        fs::create_directories(out_file);
        evcs::save_scenario_csv(sc, out_file);
    } else {
        if (out_file.find('/') != std::string::npos)
            fs::create_directories(fs::path(out_file).parent_path());
        evcs::save_scenario_json(sc, out_file);
    }
    std::cout << "wrote " << out_file << " (" << sc.sessions.size()
              << " sessions)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging station real-time control simulator"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string method = "sg-admm";
    std::string evs_range = "1..20";
    std::string gen_out = "scenario.json";
    bool gen_csv = false;
    int days = 1;
    int window_min = 30;

    const auto add_common = [&](CLI::App* cmd, bool with_scenario) {
        cmd->add_option("--config", o.config_path, "config JSON path");
        cmd->add_option("--seed", o.seed, "RNG seed for synthetic scenarios");
        cmd->add_option("--quantum", o.quantum, "centralized power quantum, kW");
        cmd->add_option("--max-iters", o.max_iters, "ADMM iteration cap override");
        cmd->add_option("--sessions", o.sessions, "synthetic sessions per day");
        if (with_scenario) {
            cmd->add_option("--scenario", o.scenario_path,
                            "scenario JSON bundle or CSV directory (default: synthetic)");
            cmd->add_option("--schedule", o.schedule_path,
                            "schedule CSV (default: heuristic provider)");
            cmd->add_option("--out", o.out_dir, "output directory");
        }
    };

    CLI::App* run = app.add_subcommand("run", "run one controller");
    add_common(run, true);
    run->add_option("--method", method,
                    "sg-admm | admm | centralized | uncontrolled");

    CLI::App* compare = app.add_subcommand("compare", "run all four controllers");
    add_common(compare, true);

    CLI::App* sweep = app.add_subcommand("sweep", "timing sweep over fleet size");
    add_common(sweep, false);
    sweep->add_option("--evs", evs_range, "fleet sizes, e.g. 1..20");
    sweep->add_option("--minutes", window_min, "connected window per level");
    sweep->add_option("--out", o.out_dir, "output directory");

    CLI::App* gen = app.add_subcommand("gen-scenario", "generate a synthetic scenario");
    add_common(gen, false);
    gen->add_option("--out", gen_out, "output file (.json) or directory with --csv");
    gen->add_flag("--csv", gen_csv, "write the CSV directory form");
    gen->add_option("--days", days, "scenario length in days");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(o, method);
        if (compare->parsed()) return cmd_compare(o);
        if (sweep->parsed()) return cmd_sweep(o, evs_range, window_min);
        if (gen->parsed()) return cmd_gen(o, gen_out, gen_csv, days);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
