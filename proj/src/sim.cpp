#include "cpbis/sim.hpp"

#include <algorithm>
#include <cmath>

#include "cpbis/parallel.hpp"

namespace cpbis {

void validate(const SimScenario& scenario) {
    validate(scenario.scan_mode);
    validate(scenario.advertiser);
    if (scenario.horizon <= scenario.advertiser.max_interval()) {
        throw ValidationError("horizon must exceed the largest broadcast interval");
    }
}

EntryPhase draw_entry(const SimScenario& scenario, Rng& rng) {
    const auto& adv = scenario.advertiser;
    EntryPhase e;
    e.scanner_phase = Micros{static_cast<std::int64_t>(rng.below(scenario.scan_mode.scan_interval.count()))};
    e.scanner_channel = static_cast<int>(rng.below(static_cast<std::uint64_t>(adv.channels)));
    e.schedule_position = Micros{static_cast<std::int64_t>(rng.below(adv.block_period.count()))};
    const Micros current = adv.interval_at(e.schedule_position);
    e.first_event = Micros{static_cast<std::int64_t>(rng.below(current.count()))};
    return e;
}

std::optional<Micros> simulate_from(const SimScenario& scenario, const EntryPhase& entry, Rng& rng) {
    const auto& adv = scenario.advertiser;
    const std::int64_t period = scenario.scan_mode.scan_interval.count();
    const std::int64_t window = scenario.scan_mode.scan_window.count();
    const std::int64_t pdu = adv.pdu_duration.count();
    const std::int64_t pdu_spacing = pdu + adv.channel_gap.count();
    const std::int64_t horizon = scenario.horizon.count();
    const std::int64_t block_period = adv.block_period.count();
    const int channels = adv.channels;
    // Back-to-back windows on one channel form a single unbroken listening span.
    const bool continuous = window == period && channels == 1;
    const auto delay_max = static_cast<std::uint64_t>(adv.adv_delay_max.count());

    std::int64_t event = entry.first_event.count();
    for (;;) {
        for (int ch = 0; ch < channels; ++ch) {
            const std::int64_t start = event + ch * pdu_spacing;
            if (start + pdu > horizon) {
                return std::nullopt;
            }
            const std::int64_t scan_time = start + entry.scanner_phase.count();
            const std::int64_t n = scan_time / period;
            if ((entry.scanner_channel + n) % channels != ch) {
                continue;
            }
            const std::int64_t into_window = scan_time - n * period;
            if (continuous || into_window + pdu <= window) {
                return Micros{start + pdu};
            }
        }
        const Micros position{(entry.schedule_position.count() + event) % block_period};
        const std::int64_t delay = delay_max == 0 ? 0 : static_cast<std::int64_t>(rng.up_to(delay_max));
        event += adv.interval_at(position).count() + delay;
    }
}

std::optional<Micros> simulate_one(const SimScenario& scenario, std::uint64_t sub_seed) {
    Rng rng(sub_seed);
    const EntryPhase entry = draw_entry(scenario, rng);
    return simulate_from(scenario, entry, rng);
}

double LatencyCdf::at(Micros latency) const {
    if (total == 0) {
        return 0.0;
    }
    const auto it = std::upper_bound(sorted_latencies.begin(), sorted_latencies.end(), latency);
    return static_cast<double>(it - sorted_latencies.begin()) / static_cast<double>(total);
}

LatencyCdf estimate_cdf(const SimScenario& scenario, std::size_t n_runs, unsigned workers) {
    validate(scenario);
    if (n_runs == 0) {
        throw ValidationError("n_runs must be at least 1");
    }
    std::vector<std::optional<Micros>> runs(n_runs);
    parallel_for(n_runs, workers, [&](std::size_t i) {
        runs[i] = simulate_one(scenario, derive_seed(scenario.rng_seed, 0, i));
    });

    LatencyCdf cdf;
    cdf.total = n_runs;
    cdf.sorted_latencies.reserve(n_runs);
    for (const auto& r : runs) {
        if (r) {
            cdf.sorted_latencies.push_back(*r);
        } else {
            ++cdf.timeouts;
        }
    }
    std::sort(cdf.sorted_latencies.begin(), cdf.sorted_latencies.end());
    return cdf;
}

std::size_t quantile_rank(double p, std::size_t total) {
    const double x = p * static_cast<double>(total);
    const auto k = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
    return std::max<std::size_t>(k, 1);
}

Micros quantile(const LatencyCdf& cdf, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("quantile probability must lie in (0, 1)");
    }
    if (cdf.total == 0) {
        throw QuantileUnreachable("quantile unreachable: empty CDF");
    }
    const std::size_t rank = quantile_rank(p, cdf.total);
    if (rank > cdf.sorted_latencies.size()) {
        throw QuantileUnreachable("quantile unreachable: timeouts keep the CDF below p");
    }
    return cdf.sorted_latencies[rank - 1];
}

}  // namespace cpbis
