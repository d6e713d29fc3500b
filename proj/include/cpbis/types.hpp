#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpbis {

// All scheduling arithmetic is done on integer microseconds.
using Micros = std::chrono::microseconds;

inline constexpr double kShareTolerance = 1e-9;

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Exact conversion from a millisecond quantity given in a config. Rejects values
// that are not a whole number of microseconds.
Micros from_ms(double ms);
Micros from_s(double s);
Micros from_us(double us);

constexpr double to_ms(Micros d) { return static_cast<double>(d.count()) / 1000.0; }
constexpr double to_s(Micros d) { return static_cast<double>(d.count()) / 1e6; }

/// Scanner duty cycle: listens for `scan_window` at the start of each
/// `scan_interval`. `market_share` is the fraction of finders using this mode.
struct ScanMode {
    std::string name;
    Micros scan_interval{};
    Micros scan_window{};
    double market_share = 1.0;
};

ScanMode make_scan_mode(std::string name, double interval_ms, double window_ms, double share);
void validate(const ScanMode& mode);

/// Throws ValidationError naming the first violated invariant; returns the
/// catalog unchanged otherwise.
std::vector<ScanMode> validate_catalog(std::vector<ScanMode> modes);

/// Advertising plan. With more than one interval the advertiser alternates
/// time blocks: interval i is used for proportions[i] * block_period.
struct AdvertiserConfig {
    std::vector<Micros> intervals;
    std::vector<double> proportions;
    Micros adv_delay_max{10'000};
    Micros pdu_duration{376};
    Micros channel_gap{400};
    int channels = 3;
    Micros block_period{40'000'000};

    Micros max_interval() const;
    // Interval in force at a position within the block period.
    Micros interval_at(Micros position) const;
};

AdvertiserConfig single_interval(Micros interval, const AdvertiserConfig& defaults = {});
void validate(const AdvertiserConfig& adv);

/// Power constraint: the equivalent interval must be at least `a_min`;
/// `quantile_p` selects the worst-case latency from a discovery CDF.
struct ConstraintConfig {
    Micros a_min{};
    double quantile_p = 0.9;
};

void validate(const ConstraintConfig& c);

struct DistributionPoint {
    Micros interval{};
    double latency_ms = 0.0;

    double interval_ms() const { return to_ms(interval); }
    friend bool operator==(const DistributionPoint&, const DistributionPoint&) = default;
};

/// Ordered (interval, worst-case latency) pairs. `gaps` lists grid intervals
/// that were swept but produced no usable quantile.
struct DistributionSeries {
    std::string label;
    std::vector<DistributionPoint> points;
    std::vector<Micros> gaps;

    friend bool operator==(const DistributionSeries&, const DistributionSeries&) = default;
};

void validate(const DistributionSeries& s);

}  // namespace cpbis
