#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpbis/screening.hpp"
#include "cpbis/types.hpp"

namespace cpbis {

struct ScheduleBlock {
    Micros interval{};
    Micros duration{};
};

/// Broadcast plan as alternating time blocks, e.g. 1535 ms for 16 s then
/// 5645 ms for 24 s. The cycle period is the sum of block durations.
struct BroadcastSchedule {
    std::string name;
    std::vector<ScheduleBlock> blocks;

    Micros period() const;
    AdvertiserConfig to_advertiser(const AdvertiserConfig& defaults) const;
    // "1535ms for 16s / 5645ms for 24s"
    std::string describe() const;
};

void validate(const BroadcastSchedule& schedule);

/// Block form of a pair over `period`. The left block is rounded down to whole
/// seconds so the equivalent interval never drops below a_min.
BroadcastSchedule schedule_from_pair(const CandidatePair& pair, Micros period, std::string name = "cpbis");

struct CellResult {
    std::string schedule;
    std::string scan_mode;
    std::size_t n_trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    // Over successful trials only; empty when none succeeded.
    std::optional<double> mean_latency_s;
    // Sample standard deviation of successful latencies; needs two successes.
    std::optional<double> latency_sd_s;
};

/// n trials with the scanner entering at a uniformly random point of both its
/// own cycle and the schedule cycle. Trial i uses derive_seed(seed, 2, i), so
/// cells sharing a seed see the same entry draws.
CellResult run_trials(const BroadcastSchedule& schedule, const ScanMode& mode, const AdvertiserConfig& defaults,
                      Micros limit, std::size_t n, std::uint64_t seed, unsigned workers = 0);

struct WeightedRow {
    std::string schedule;
    double success_rate = 0.0;
    std::optional<double> mean_latency_s;
};

struct TrialReport {
    std::vector<CellResult> cells;  // schedule-major
    std::vector<WeightedRow> weighted;
};

TrialReport compare_modes(const std::vector<BroadcastSchedule>& schedules, const std::vector<ScanMode>& catalog,
                          const AdvertiserConfig& defaults, Micros limit, std::size_t n, std::uint64_t seed,
                          unsigned workers = 0);

}  // namespace cpbis
