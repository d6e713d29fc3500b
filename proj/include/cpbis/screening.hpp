#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpbis/sweep.hpp"
#include "cpbis/types.hpp"

namespace cpbis {

/// Two broadcast intervals straddling a_min, mixed so the equivalent interval
/// delta * A_left + (1 - delta) * A_right equals a_min exactly.
///
/// `slope` and `intercept` describe the line through both points (ms per ms,
/// ms). On that line the weighted latency at the constraint boundary is
/// slope * a_min + intercept.
struct CandidatePair {
    DistributionPoint left;
    DistributionPoint right;
    double slope = 0.0;
    double intercept = 0.0;
    double delta = 0.0;
    double weighted_latency_ms = 0.0;

    friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

CandidatePair make_pair(const DistributionPoint& left, const DistributionPoint& right, Micros a_min);

struct PartitionedCandidates {
    std::vector<DistributionPoint> b_left;   // interval < a_min
    std::vector<DistributionPoint> b_right;  // interval >= a_min
};

class NoTroughs : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptySide : public std::runtime_error {
public:
    EmptySide(const std::string& what, bool left_empty) : std::runtime_error(what), left_empty_(left_empty) {}
    bool left_empty() const { return left_empty_; }

private:
    bool left_empty_;
};

// Strict local minima; a plateau counts once, at its rightmost point.
std::vector<DistributionPoint> find_troughs(const DistributionSeries& series);

// Right-to-left removal of points whose latency exceeds their surviving right
// neighbour. Output is ascending in interval and non-decreasing in latency.
std::vector<DistributionPoint> prune_non_increasing(std::span<const DistributionPoint> troughs);

PartitionedCandidates partition(std::span<const DistributionPoint> pruned, Micros a_min);

// Compares slope(a) to slope(b): negative, zero or positive. Interval
// differences are exact integers, so this avoids dividing.
int compare_slopes(const DistributionPoint& a_left, const DistributionPoint& a_right,
                   const DistributionPoint& b_left, const DistributionPoint& b_right);

/// Best partner on the left of a_min for one right point: the steepest line.
/// Ties go to the larger left interval.
CandidatePair best_left_for(const DistributionPoint& right, std::span<const DistributionPoint> b_left, Micros a_min);

/// best_left_for for every right point, in right-point order.
std::vector<CandidatePair> local_optimum_pairs(const PartitionedCandidates& parts, Micros a_min);

/// Flattest of the local optimum pairs. Ties go to the smaller weighted
/// latency, then to the smaller right interval.
CandidatePair select_optimal_pair(const PartitionedCandidates& parts, Micros a_min);

/// Market-share weighted latency of a two-interval plan that spends fraction c
/// of its time on the left interval.
double weighted_latency(double l1_left, double l2_left, double l1_right, double l2_right,
                        double w1, double w2, double c);

/// Error from one pipeline stage of run_cpbis.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct CpbisReport {
    ConstraintConfig constraint;
    std::vector<DistributionSeries> per_mode;
    std::vector<double> shares;
    DistributionSeries superimposed;
    std::vector<DistributionPoint> troughs;
    std::vector<DistributionPoint> pruned;
    PartitionedCandidates parts;
    std::vector<CandidatePair> local_pairs;
    std::optional<CandidatePair> optimal;
    // A candidate sitting exactly on a_min, usable on its own.
    std::optional<DistributionPoint> single_interval_alternative;
    // Set when one side of a_min is empty and no pair exists.
    std::optional<DistributionPoint> fallback_single;
    std::vector<std::string> warnings;
};

/// Runs everything after the sweep: superimpose, troughs, pruning, partition
/// and pair selection. Errors are StageError.
CpbisReport screen(std::vector<DistributionSeries> per_mode, std::vector<double> shares,
                   const ConstraintConfig& constraint);

struct SweepSource {
    AdvertiserConfig advertiser;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    // Cache directory for per-mode series; empty disables caching.
    std::filesystem::path cache_dir;
};

/// Full pipeline: one sweep per scan mode, then screen().
CpbisReport run_cpbis(const std::vector<ScanMode>& catalog, const SweepGrid& grid,
                      const ConstraintConfig& constraint, const SweepSource& source);

}  // namespace cpbis
