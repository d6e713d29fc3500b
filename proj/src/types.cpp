#include "cpbis/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpbis {

namespace {

Micros exact_micros(double value, double scale, const char* unit) {
    if (!std::isfinite(value)) {
        throw ValidationError(std::string("non-finite duration in ") + unit);
    }
    const double us = value * scale;
    const double rounded = std::round(us);
    if (std::abs(us - rounded) > 1e-3 + 1e-12 * std::abs(us)) {
        throw ValidationError("duration " + std::to_string(value) + " " + unit +
                              " is not a whole number of microseconds");
    }
    return Micros{static_cast<std::int64_t>(rounded)};
}

}  // namespace

Micros from_ms(double ms) { return exact_micros(ms, 1000.0, "ms"); }
Micros from_s(double s) { return exact_micros(s, 1e6, "s"); }
Micros from_us(double us) { return exact_micros(us, 1.0, "us"); }

ScanMode make_scan_mode(std::string name, double interval_ms, double window_ms, double share) {
    ScanMode mode{std::move(name), from_ms(interval_ms), from_ms(window_ms), share};
    validate(mode);
    return mode;
}

void validate(const ScanMode& mode) {
    if (mode.scan_interval.count() <= 0) {
        throw ValidationError("scan mode '" + mode.name + "': scan interval must be positive");
    }
    if (mode.scan_window.count() <= 0) {
        throw ValidationError("scan mode '" + mode.name + "': scan window must be positive");
    }
    if (mode.scan_window > mode.scan_interval) {
        throw ValidationError("scan mode '" + mode.name + "': window exceeds interval");
    }
    if (!(mode.market_share >= 0.0 && mode.market_share <= 1.0)) {
        throw ValidationError("scan mode '" + mode.name + "': market share outside [0, 1]");
    }
}

std::vector<ScanMode> validate_catalog(std::vector<ScanMode> modes) {
    if (modes.empty()) {
        throw ValidationError("scan mode catalog is empty");
    }
    double total = 0.0;
    for (const auto& m : modes) {
        validate(m);
        total += m.market_share;
    }
    if (std::abs(total - 1.0) > kShareTolerance) {
        throw ValidationError("market shares sum to " + std::to_string(total) + ", expected 1");
    }
    return modes;
}

Micros AdvertiserConfig::max_interval() const {
    return *std::max_element(intervals.begin(), intervals.end());
}

Micros AdvertiserConfig::interval_at(Micros position) const {
    if (intervals.size() == 1) {
        return intervals.front();
    }
    double boundary = 0.0;
    const double period = static_cast<double>(block_period.count());
    for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
        boundary += proportions[i] * period;
        if (static_cast<double>(position.count()) < boundary) {
            return intervals[i];
        }
    }
    return intervals.back();
}

AdvertiserConfig single_interval(Micros interval, const AdvertiserConfig& defaults) {
    AdvertiserConfig adv = defaults;
    adv.intervals = {interval};
    adv.proportions = {1.0};
    return adv;
}

void validate(const AdvertiserConfig& adv) {
    if (adv.intervals.empty()) {
        throw ValidationError("advertiser has no broadcast intervals");
    }
    if (adv.proportions.size() != adv.intervals.size()) {
        throw ValidationError("advertiser proportions and intervals differ in length");
    }
    if (adv.pdu_duration.count() <= 0) {
        throw ValidationError("pdu duration must be positive");
    }
    if (adv.adv_delay_max.count() < 0) {
        throw ValidationError("adv delay max must be non-negative");
    }
    if (adv.channel_gap.count() < 0) {
        throw ValidationError("channel gap must be non-negative");
    }
    if (adv.channels < 1 || adv.channels > 3) {
        throw ValidationError("channel count must be 1, 2 or 3");
    }
    if (adv.block_period.count() <= 0) {
        throw ValidationError("block period must be positive");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < adv.intervals.size(); ++i) {
        if (adv.intervals[i] < adv.pdu_duration) {
            throw ValidationError("broadcast interval shorter than pdu duration");
        }
        if (!(adv.proportions[i] >= 0.0 && adv.proportions[i] <= 1.0)) {
            throw ValidationError("advertiser proportion outside [0, 1]");
        }
        total += adv.proportions[i];
    }
    if (std::abs(total - 1.0) > kShareTolerance) {
        throw ValidationError("advertiser proportions sum to " + std::to_string(total) + ", expected 1");
    }
}

void validate(const ConstraintConfig& c) {
    if (c.a_min.count() <= 0) {
        throw ValidationError("a_min must be positive");
    }
    if (!(c.quantile_p > 0.0 && c.quantile_p < 1.0)) {
        throw ValidationError("quantile P must lie in (0, 1)");
    }
}

void validate(const DistributionSeries& s) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const auto& p = s.points[i];
        if (p.interval.count() <= 0 || !(p.latency_ms > 0.0)) {
            throw ValidationError("series '" + s.label + "': non-positive point");
        }
        if (i > 0 && !(s.points[i - 1].interval < p.interval)) {
            throw ValidationError("series '" + s.label + "': intervals not strictly increasing");
        }
    }
}

}  // namespace cpbis
