#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "cpbis/sim.hpp"
#include "cpbis/types.hpp"

namespace cpbis {

/// Ascending broadcast intervals a_start, a_start + a_step, ... <= a_end.
struct SweepGrid {
    Micros a_start{};
    Micros a_end{};
    Micros a_step{5'000};
    std::size_t n_runs = 1000;
    double quantile_p = 0.9;
    Micros horizon{300'000'000};

    std::vector<Micros> intervals() const;
};

void validate(const SweepGrid& grid);

/// Worst-case (quantile) latency for each grid interval under one scan mode.
/// Grid point i is simulated with seed derive_seed(seed, 1, i), so two modes
/// swept with the same seed use common random numbers.
DistributionSeries build_distribution(const ScanMode& mode, const SweepGrid& grid,
                                      const AdvertiserConfig& advertiser_template,
                                      std::uint64_t seed, unsigned workers = 0);

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Market-share mixture: L(A) = sum_i shares[i] * L_i(A). A gap in any input
/// series removes that interval from the output.
DistributionSeries superimpose(std::span<const DistributionSeries> series, std::span<const double> shares);

// Straight-line fit L = slope * A + intercept, both in milliseconds.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    // Hull vertices the line passes through.
    DistributionPoint left;
    DistributionPoint right;
};

/// Lower envelope of a sawtooth (A, L) series over [from, to].
///
/// Returns the line that stays on or below every point in range and has the
/// largest mean value over those points (the lower convex hull edge spanning
/// their mean interval). For a latency sweep this is the line through the
/// deepest troughs.
LineFit fit_lower_envelope(const DistributionSeries& series, Micros from, Micros to);

// -- cache files ------------------------------------------------------------

std::string series_file_name(const std::string& label, double p, std::uint64_t seed);

void write_series_csv(const DistributionSeries& series, const std::filesystem::path& path);
DistributionSeries read_series_csv(const std::filesystem::path& path, std::string label);

/// Returns the cached series when `dir` holds one produced from the same mode,
/// grid, advertiser and seed; otherwise sweeps and writes the cache.
/// `hit` (if given) reports whether the cache was used.
DistributionSeries cached_distribution(const std::filesystem::path& dir, const ScanMode& mode,
                                       const SweepGrid& grid, const AdvertiserConfig& advertiser_template,
                                       std::uint64_t seed, unsigned workers = 0, bool* hit = nullptr);

}  // namespace cpbis
