#include "cpbis/screening.hpp"

#include <algorithm>

namespace cpbis {

CandidatePair make_pair(const DistributionPoint& left, const DistributionPoint& right, Micros a_min) {
    if (!(left.interval < a_min && a_min <= right.interval)) {
        throw ValidationError("pair does not straddle a_min");
    }
    CandidatePair pair{left, right};
    const auto span_us = static_cast<double>((right.interval - left.interval).count());
    pair.slope = (right.latency_ms - left.latency_ms) / (span_us / 1000.0);
    pair.intercept = right.latency_ms - pair.slope * right.interval_ms();
    pair.delta = static_cast<double>((right.interval - a_min).count()) / span_us;
    pair.weighted_latency_ms = pair.delta * left.latency_ms + (1.0 - pair.delta) * right.latency_ms;
    return pair;
}

std::vector<DistributionPoint> find_troughs(const DistributionSeries& series) {
    const auto& pts = series.points;
    if (pts.size() < 3) {
        throw NoTroughs("no troughs: series '" + series.label + "' has fewer than three points");
    }
    std::vector<DistributionPoint> troughs;
    std::size_t i = 0;
    while (i < pts.size()) {
        std::size_t j = i;
        while (j + 1 < pts.size() && pts[j + 1].latency_ms == pts[i].latency_ms) {
            ++j;
        }
        if (i > 0 && j + 1 < pts.size() && pts[i - 1].latency_ms > pts[i].latency_ms &&
            pts[j + 1].latency_ms > pts[j].latency_ms) {
            troughs.push_back(pts[j]);
        }
        i = j + 1;
    }
    if (troughs.empty()) {
        throw NoTroughs("no troughs: series '" + series.label + "' is monotone");
    }
    return troughs;
}

std::vector<DistributionPoint> prune_non_increasing(std::span<const DistributionPoint> troughs) {
    std::vector<DistributionPoint> kept;
    for (auto it = troughs.rbegin(); it != troughs.rend(); ++it) {
        if (kept.empty() || it->latency_ms <= kept.back().latency_ms) {
            kept.push_back(*it);
        }
    }
    std::reverse(kept.begin(), kept.end());
    return kept;
}

PartitionedCandidates partition(std::span<const DistributionPoint> pruned, Micros a_min) {
    PartitionedCandidates parts;
    for (const auto& p : pruned) {
        (p.interval < a_min ? parts.b_left : parts.b_right).push_back(p);
    }
    if (parts.b_left.empty()) {
        throw EmptySide("left side empty: no candidate interval below a_min", true);
    }
    if (parts.b_right.empty()) {
        throw EmptySide("right side empty: no candidate interval at or above a_min", false);
    }
    return parts;
}

int compare_slopes(const DistributionPoint& a_left, const DistributionPoint& a_right,
                   const DistributionPoint& b_left, const DistributionPoint& b_right) {
    using Wide = long double;
    const Wide a_rise = static_cast<Wide>(a_right.latency_ms) - a_left.latency_ms;
    const Wide b_rise = static_cast<Wide>(b_right.latency_ms) - b_left.latency_ms;
    const auto a_run = static_cast<Wide>((a_right.interval - a_left.interval).count());
    const auto b_run = static_cast<Wide>((b_right.interval - b_left.interval).count());
    const Wide lhs = a_rise * b_run;
    const Wide rhs = b_rise * a_run;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

CandidatePair best_left_for(const DistributionPoint& right, std::span<const DistributionPoint> b_left, Micros a_min) {
    if (b_left.empty()) {
        throw EmptySide("left side empty: no candidate interval below a_min", true);
    }
    const DistributionPoint* best = &b_left.front();
    for (const auto& cand : b_left.subspan(1)) {
        const int c = compare_slopes(cand, right, *best, right);
        if (c > 0 || (c == 0 && cand.interval > best->interval)) {
            best = &cand;
        }
    }
    return make_pair(*best, right, a_min);
}

std::vector<CandidatePair> local_optimum_pairs(const PartitionedCandidates& parts, Micros a_min) {
    std::vector<CandidatePair> pairs;
    pairs.reserve(parts.b_right.size());
    for (const auto& right : parts.b_right) {
        pairs.push_back(best_left_for(right, parts.b_left, a_min));
    }
    return pairs;
}

namespace {

CandidatePair flattest(std::span<const CandidatePair> pairs) {
    const CandidatePair* best = &pairs.front();
    for (const auto& p : pairs.subspan(1)) {
        const int c = compare_slopes(p.left, p.right, best->left, best->right);
        bool better = c < 0;
        if (c == 0) {
            better = p.weighted_latency_ms < best->weighted_latency_ms ||
                     (p.weighted_latency_ms == best->weighted_latency_ms && p.right.interval < best->right.interval);
        }
        if (better) {
            best = &p;
        }
    }
    return *best;
}

}  // namespace

CandidatePair select_optimal_pair(const PartitionedCandidates& parts, Micros a_min) {
    if (parts.b_right.empty()) {
        throw EmptySide("right side empty: no candidate interval at or above a_min", false);
    }
    const auto pairs = local_optimum_pairs(parts, a_min);
    return flattest(pairs);
}

double weighted_latency(double l1_left, double l2_left, double l1_right, double l2_right,
                        double w1, double w2, double c) {
    return c * (w1 * l1_left + w2 * l2_left) + (1.0 - c) * (w1 * l1_right + w2 * l2_right);
}

CpbisReport screen(std::vector<DistributionSeries> per_mode, std::vector<double> shares,
                   const ConstraintConfig& constraint) {
    validate(constraint);
    CpbisReport report;
    report.constraint = constraint;
    report.per_mode = std::move(per_mode);
    report.shares = std::move(shares);

    try {
        report.superimposed = superimpose(report.per_mode, report.shares);
    } catch (const std::exception& e) {
        throw StageError("superimpose", e.what());
    }
    try {
        report.troughs = find_troughs(report.superimposed);
    } catch (const std::exception& e) {
        throw StageError("find_troughs", e.what());
    }
    report.pruned = prune_non_increasing(report.troughs);

    const Micros a_min = constraint.a_min;
    try {
        report.parts = partition(report.pruned, a_min);
    } catch (const EmptySide& e) {
        // Single-interval fallback: lowest latency at or above a_min, larger
        // interval on ties.
        const DistributionPoint* best = nullptr;
        for (const auto& p : report.superimposed.points) {
            if (p.interval >= a_min && (!best || p.latency_ms <= best->latency_ms)) {
                best = &p;
            }
        }
        if (!best) {
            throw StageError("partition", std::string(e.what()) + "; no interval at or above a_min to fall back on");
        }
        report.fallback_single = *best;
        report.warnings.push_back(std::string(e.what()) + "; falling back to the best single interval at or above a_min");
        for (const auto& p : report.pruned) {
            (p.interval < a_min ? report.parts.b_left : report.parts.b_right).push_back(p);
        }
        return report;
    }

    try {
        report.local_pairs = local_optimum_pairs(report.parts, a_min);
        report.optimal = flattest(report.local_pairs);
    } catch (const std::exception& e) {
        throw StageError("select_optimal_pair", e.what());
    }
    if (report.parts.b_right.front().interval == a_min) {
        report.single_interval_alternative = report.parts.b_right.front();
    }
    return report;
}

CpbisReport run_cpbis(const std::vector<ScanMode>& catalog, const SweepGrid& grid,
                      const ConstraintConfig& constraint, const SweepSource& source) {
    std::vector<ScanMode> modes;
    SweepGrid g = grid;
    try {
        modes = validate_catalog(catalog);
        validate(constraint);
        g.quantile_p = constraint.quantile_p;
        validate(g);
    } catch (const std::exception& e) {
        throw StageError("validate", e.what());
    }

    std::vector<DistributionSeries> per_mode;
    std::vector<double> shares;
    for (const auto& mode : modes) {
        try {
            per_mode.push_back(source.cache_dir.empty()
                                   ? build_distribution(mode, g, source.advertiser, source.seed, source.workers)
                                   : cached_distribution(source.cache_dir, mode, g, source.advertiser, source.seed,
                                                         source.workers));
        } catch (const std::exception& e) {
            throw StageError("build_distribution", e.what());
        }
        shares.push_back(mode.market_share);
    }
    return screen(std::move(per_mode), std::move(shares), constraint);
}

}  // namespace cpbis
