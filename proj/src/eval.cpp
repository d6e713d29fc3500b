#include "cpbis/eval.hpp"

#include <cmath>

#include "cpbis/format.hpp"
#include "cpbis/parallel.hpp"
#include "cpbis/sim.hpp"

namespace cpbis {

Micros BroadcastSchedule::period() const {
    Micros total{0};
    for (const auto& b : blocks) {
        total += b.duration;
    }
    return total;
}

AdvertiserConfig BroadcastSchedule::to_advertiser(const AdvertiserConfig& defaults) const {
    AdvertiserConfig adv = defaults;
    adv.intervals.clear();
    adv.proportions.clear();
    const Micros total = period();
    adv.block_period = total;
    for (const auto& b : blocks) {
        adv.intervals.push_back(b.interval);
        adv.proportions.push_back(static_cast<double>(b.duration.count()) / static_cast<double>(total.count()));
    }
    return adv;
}

std::string BroadcastSchedule::describe() const {
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty()) {
            out += " / ";
        }
        out += format_ms(b.interval) + "ms for " + format_number(to_s(b.duration)) + "s";
    }
    return out;
}

void validate(const BroadcastSchedule& schedule) {
    if (schedule.blocks.empty() || schedule.blocks.size() > 2) {
        throw ValidationError("schedule '" + schedule.name + "' must have one or two blocks");
    }
    for (const auto& b : schedule.blocks) {
        if (b.interval.count() <= 0 || b.duration.count() <= 0) {
            throw ValidationError("schedule '" + schedule.name + "': block interval and duration must be positive");
        }
    }
}

BroadcastSchedule schedule_from_pair(const CandidatePair& pair, Micros period, std::string name) {
    const double period_s = to_s(period);
    const double left_s = std::floor(pair.delta * period_s + 1e-9);
    BroadcastSchedule s{std::move(name), {}};
    if (left_s > 0) {
        s.blocks.push_back({pair.left.interval, from_s(left_s)});
    }
    if (period_s - left_s > 0) {
        s.blocks.push_back({pair.right.interval, period - from_s(left_s)});
    }
    return s;
}

CellResult run_trials(const BroadcastSchedule& schedule, const ScanMode& mode, const AdvertiserConfig& defaults,
                      Micros limit, std::size_t n, std::uint64_t seed, unsigned workers) {
    validate(schedule);
    validate(mode);
    if (n == 0) {
        throw ValidationError("trial count must be at least 1");
    }
    if (limit.count() < 0) {
        throw ValidationError("time limit must be non-negative");
    }
    const SimScenario scenario{mode, schedule.to_advertiser(defaults), limit, seed};
    validate(scenario.advertiser);

    std::vector<std::optional<Micros>> outcome(n);
    parallel_for(n, workers, [&](std::size_t i) { outcome[i] = simulate_one(scenario, derive_seed(seed, 2, i)); });

    CellResult cell;
    cell.schedule = schedule.name;
    cell.scan_mode = mode.name;
    cell.n_trials = n;
    double sum_s = 0.0;
    for (const auto& o : outcome) {
        if (o) {
            ++cell.successes;
            sum_s += to_s(*o);
        }
    }
    cell.success_rate = static_cast<double>(cell.successes) / static_cast<double>(n);
    if (cell.successes > 0) {
        cell.mean_latency_s = sum_s / static_cast<double>(cell.successes);
    }
    if (cell.successes > 1) {
        double ss = 0.0;
        for (const auto& o : outcome) {
            if (o) {
                const double d = to_s(*o) - *cell.mean_latency_s;
                ss += d * d;
            }
        }
        cell.latency_sd_s = std::sqrt(ss / static_cast<double>(cell.successes - 1));
    }
    return cell;
}

TrialReport compare_modes(const std::vector<BroadcastSchedule>& schedules, const std::vector<ScanMode>& catalog,
                          const AdvertiserConfig& defaults, Micros limit, std::size_t n, std::uint64_t seed,
                          unsigned workers) {
    const auto modes = validate_catalog(catalog);
    TrialReport report;
    for (const auto& schedule : schedules) {
        WeightedRow row;
        row.schedule = schedule.name;
        double latency = 0.0;
        bool latency_defined = true;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            auto cell = run_trials(schedule, modes[m], defaults, limit, n, derive_seed(seed, 3, m), workers);
            row.success_rate += modes[m].market_share * cell.success_rate;
            if (cell.mean_latency_s) {
                latency += modes[m].market_share * *cell.mean_latency_s;
            } else if (modes[m].market_share > 0.0) {
                latency_defined = false;
            }
            report.cells.push_back(std::move(cell));
        }
        if (latency_defined) {
            row.mean_latency_s = latency;
        }
        report.weighted.push_back(std::move(row));
    }
    return report;
}

}  // namespace cpbis
