#pragma once

#include <cstdint>
#include <optional>

#include "cpbis/random.hpp"
#include "cpbis/types.hpp"

namespace cpbis {

struct SimScenario {
    ScanMode scan_mode;
    AdvertiserConfig advertiser;
    Micros horizon{300'000'000};
    std::uint64_t rng_seed = 0;
};

void validate(const SimScenario& scenario);

/// Random state at the moment the scanner comes into range (t = 0).
///
/// The scanner is `scanner_phase` into its current scan interval and that
/// interval listens on `scanner_channel`. The advertiser is at
/// `schedule_position` within its block period and its next advertising event
/// starts at `first_event`.
struct EntryPhase {
    Micros scanner_phase{};
    int scanner_channel = 0;
    Micros schedule_position{};
    Micros first_event{};
};

EntryPhase draw_entry(const SimScenario& scenario, Rng& rng);

/// Runs one discovery process from the given entry state. Per-event advDelay
/// values are drawn from `rng`. Returns the time until the first advertising
/// PDU is fully received, or nullopt if that exceeds the horizon.
std::optional<Micros> simulate_from(const SimScenario& scenario, const EntryPhase& entry, Rng& rng);

/// One draw with its own generator seeded by `sub_seed`.
std::optional<Micros> simulate_one(const SimScenario& scenario, std::uint64_t sub_seed);

struct LatencyCdf {
    std::vector<Micros> sorted_latencies;
    std::size_t timeouts = 0;
    std::size_t total = 0;

    // Empirical CDF at `latency`, counting timeouts in the denominator.
    double at(Micros latency) const;

    friend bool operator==(const LatencyCdf&, const LatencyCdf&) = default;
};

/// n_runs independent draws; run i uses derive_seed(rng_seed, 0, i).
/// `workers` = 0 uses all hardware threads. Output does not depend on it.
LatencyCdf estimate_cdf(const SimScenario& scenario, std::size_t n_runs, unsigned workers = 0);

class QuantileUnreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lower empirical quantile: smallest latency whose CDF is >= p.
Micros quantile(const LatencyCdf& cdf, double p);

// Rank (1-based) of the lower p-quantile among `total` samples.
std::size_t quantile_rank(double p, std::size_t total);

}  // namespace cpbis
