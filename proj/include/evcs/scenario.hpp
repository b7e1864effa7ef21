// SPDX-License-Identifier: Apache-2.0
#ifndef EVCS_SCENARIO_HPP
#define EVCS_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evcs/config.hpp"
#include "evcs/types.hpp"

namespace evcs {

struct Site {
    double lat_deg = 46.5167;  // 46 deg 31' N
    double lon_deg = 6.55;     // 6 deg 33' E
};

// One simulation input: per-minute PV realization, 15-minute price series,
// and the session list. Spans whole days at real-time granularity.
struct Scenario {
    std::string date = "2024-11-29";
    Site site;
    std::vector<double> pv_kw;        // per dt_rt minute
    std::vector<double> price_dam;    // per dt_da step, $/kWh
    std::vector<double> price_short;  // per dt_da step
    std::vector<double> price_long;   // per dt_da step
    std::vector<double> tariff_ev;    // per dt_da step
    std::vector<EvSession> sessions;

    int minutes() const { return static_cast<int>(pv_kw.size()); }
};

// Validates series lengths against the grid, session invariants and plug
// feasibility; assigns first-fit plugs to sessions still carrying cc = -1.
void validate_scenario(Scenario& sc, const Config& cfg);

struct ScheduleSeries {
    std::vector<ScheduleSlice> slices;       // per dt_id step
    std::vector<double> bess_soe_ref_kwh;    // per dt_id step
};

// JSON bundle (single file) and CSV directory forms.
Scenario load_scenario(const std::string& path, const Config& cfg);
void save_scenario_json(const Scenario& sc, const std::string& path);
void save_scenario_csv(const Scenario& sc, const std::string& dir);

struct SyntheticConfig {
    int n_sessions = 30;
    int days = 1;
    // Arrival mixture: {hour, sd_hours, weight} per peak.
    std::vector<std::array<double, 3>> arrival_peaks = {
        {9.0, 1.5, 0.40}, {13.5, 2.0, 0.25}, {18.0, 1.5, 0.35}};
    double stay_mean_min = 50.0;
    double stay_sd_min = 20.0;
    std::vector<double> capacity_mix_kwh = {40.0, 60.0, 77.0, 100.0};
    double soc_arrival_lo = 0.10;
    double soc_arrival_hi = 0.50;
    double target_soc_lo = 0.70;
    double target_soc_hi = 0.95;
    double pv_noise = 0.05;
};

// Deterministic for a fixed seed. Sessions are assigned to plugs first-fit;
// candidates that find no free plug are dropped, so concurrency never
// exceeds n_cc * n_cp. PV follows a clear-sky elevation curve scaled to the
// station's PV peak with smooth seeded noise.
Scenario generate_synthetic(std::uint64_t seed, const SyntheticConfig& syn,
                            const Config& cfg);

// n_ev sessions all connected during [start_min, start_min + window_min),
// one per plug; used by the timing sweep and scarcity fixtures.
Scenario make_concurrent_scenario(int n_ev, int start_min, int window_min,
                                  const Config& cfg, double capacity_kwh = 100.0,
                                  double rated_kw = 150.0);

enum class ScheduleMode { Heuristic, File };

// Heuristic stand-in for the scheduling layers: budgets follow the expected
// EV demand from curve integration (capped by what grid plus BESS can
// carry), the BESS setpoint pulls toward a flat SoE reference, the incentive
// cap is constant and the slack bounds span the unused grid headroom on the
// positive side and the budget itself on the negative side.
ScheduleSeries schedule_provider(const Scenario& sc, ScheduleMode mode,
                                 const Config& cfg,
                                 const std::string& schedule_file = "");

void write_schedule_csv(const ScheduleSeries& series, const std::string& path);
ScheduleSeries read_schedule_csv(const std::string& path, const Config& cfg,
                                 int minutes);

}  // namespace evcs

#endif
