#pragma once

// Reference implementations used only by tests. None of these share code
// paths with the library routines they check.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cpbis/screening.hpp"
#include "cpbis/types.hpp"

namespace cpbis::oracle {

// -- discovery latency on a 1 ms phase grid ----------------------------------
//
// Fixed-interval advertiser, no advDelay. The scanner enters at phase phi in
// [0, T) of its cycle; the first advertising event follows entry after u in
// [0, A). Both are enumerated on a 1 ms grid, together with the starting
// scanner channel. Listening spans are materialised explicitly and each PDU is
// checked for containment in a span of its own channel.
class PhaseGridOracle {
public:
    struct Params {
        std::int64_t scan_interval_us;
        std::int64_t scan_window_us;
        std::int64_t interval_us;
        std::int64_t pdu_us = 376;
        std::int64_t gap_us = 400;
        int channels = 3;
        std::int64_t horizon_us = 300'000'000;
    };

    explicit PhaseGridOracle(Params p) : p_(p) {
        const std::int64_t t_ms = p.scan_interval_us / 1000;
        const std::int64_t a_ms = p.interval_us / 1000;
        for (int c0 = 0; c0 < p.channels; ++c0) {
            const auto spans = listening_spans(c0);
            // x = phi + u is the scanner-frame time of the first event.
            for (std::int64_t x = 0; x <= t_ms + a_ms - 2; ++x) {
                const std::int64_t u_lo = std::max<std::int64_t>(0, x - (t_ms - 1));
                const std::int64_t u_hi = std::min<std::int64_t>(a_ms - 1, x);
                cells_.push_back({time_to_discovery(spans, x * 1000), u_lo, u_hi});
            }
        }
        total_ = static_cast<double>(t_ms) * static_cast<double>(a_ms) * p.channels;
    }

    // Fraction of grid entries discovered within `latency_us` (<= horizon).
    double cdf(std::int64_t latency_us) const {
        double count = 0;
        for (const auto& c : cells_) {
            if (c.h_us == kNever) {
                continue;
            }
            // latency = u * 1000 + h, counted for u in [u_lo, u_hi]
            const std::int64_t room = latency_us - c.h_us;
            if (room < c.u_lo * 1000) {
                continue;
            }
            const std::int64_t u_max = std::min(c.u_hi, room / 1000);
            count += static_cast<double>(u_max - c.u_lo + 1);
        }
        return count / total_;
    }

    // Lower quantile by bisection on the CDF.
    std::int64_t quantile_us(double q) const {
        std::int64_t lo = 0, hi = p_.horizon_us;
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (cdf(mid) >= q) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return lo;
    }

    // Discovery latency for a single grid entry (phi, u in ms).
    std::optional<std::int64_t> latency_us(std::int64_t phi_ms, std::int64_t u_ms, int c0) const {
        const auto spans = listening_spans(c0);
        const auto h = time_to_discovery(spans, (phi_ms + u_ms) * 1000);
        if (h == kNever || u_ms * 1000 + h > p_.horizon_us) {
            return std::nullopt;
        }
        return u_ms * 1000 + h;
    }

private:
    static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

    struct Span {
        std::int64_t start, end;
        int channel;
    };
    struct Cell {
        std::int64_t h_us;
        std::int64_t u_lo, u_hi;
    };

    std::vector<Span> listening_spans(int c0) const {
        std::vector<Span> spans;
        const std::int64_t limit = p_.horizon_us + p_.scan_interval_us + p_.interval_us;
        for (std::int64_t n = 0; n * p_.scan_interval_us <= limit; ++n) {
            Span s{n * p_.scan_interval_us, n * p_.scan_interval_us + p_.scan_window_us,
                   static_cast<int>((c0 + n) % p_.channels)};
            if (!spans.empty() && spans.back().end == s.start && spans.back().channel == s.channel) {
                spans.back().end = s.end;
            } else {
                spans.push_back(s);
            }
        }
        return spans;
    }

    // Scanner-frame delay from the first event at `x` to the end of the first
    // received PDU, or kNever past the horizon.
    std::int64_t time_to_discovery(const std::vector<Span>& spans, std::int64_t x) const {
        for (std::int64_t event = x;; event += p_.interval_us) {
            for (int ch = 0; ch < p_.channels; ++ch) {
                const std::int64_t s = event + ch * (p_.pdu_us + p_.gap_us);
                // Latency is u + (s + pdu - x) >= s + pdu - x.
                if (s + p_.pdu_us - x > p_.horizon_us) {
                    return kNever;
                }
                auto it = std::upper_bound(spans.begin(), spans.end(), s,
                                           [](std::int64_t v, const Span& sp) { return v < sp.start; });
                if (it == spans.begin()) {
                    continue;
                }
                --it;
                if (it->channel == ch && s + p_.pdu_us <= it->end) {
                    return s + p_.pdu_us - x;
                }
            }
        }
    }

    Params p_;
    std::vector<Cell> cells_;
    double total_ = 0;
};

// -- screening oracles --------------------------------------------------------

// Every strict local minimum, plateaus reported at their right end, by
// comparing each point against the nearest differing neighbours.
inline std::vector<DistributionPoint> brute_troughs(const std::vector<DistributionPoint>& pts) {
    std::vector<DistributionPoint> out;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (pts[i + 1].latency_ms == pts[i].latency_ms) {
            continue;  // not the right end of a plateau
        }
        std::size_t left = i;
        while (left > 0 && pts[left - 1].latency_ms == pts[i].latency_ms) {
            --left;
        }
        if (left == 0) {
            continue;
        }
        if (pts[left - 1].latency_ms > pts[i].latency_ms && pts[i + 1].latency_ms > pts[i].latency_ms) {
            out.push_back(pts[i]);
        }
    }
    return out;
}

// Repeatedly delete any element whose latency exceeds its successor's.
inline std::vector<DistributionPoint> fixpoint_prune(std::vector<DistributionPoint> v) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            if (v[i].latency_ms > v[i + 1].latency_ms) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return v;
}

// Weighted latency of (left, right) with the left share at its largest
// feasible value, computed directly from the proportion.
inline double boundary_latency(const DistributionPoint& l, const DistributionPoint& r, double a_min_ms) {
    const double delta = (r.interval_ms() - a_min_ms) / (r.interval_ms() - l.interval_ms());
    return delta * l.latency_ms + (1.0 - delta) * r.latency_ms;
}

// Minimum weighted latency over all left partners of `right`.
inline double best_for_right(const DistributionPoint& right, const std::vector<DistributionPoint>& b_left,
                             double a_min_ms) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : b_left) {
        best = std::min(best, boundary_latency(l, right, a_min_ms));
    }
    return best;
}

// Global minimum of k * a_min + b over B_L x B_R.
inline double global_min_line_value(const std::vector<DistributionPoint>& b_left,
                                    const std::vector<DistributionPoint>& b_right, double a_min_ms) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : b_left) {
        for (const auto& r : b_right) {
            const double k = (r.latency_ms - l.latency_ms) / (r.interval_ms() - l.interval_ms());
            const double b = r.latency_ms - k * r.interval_ms();
            best = std::min(best, k * a_min_ms + b);
        }
    }
    return best;
}

}  // namespace cpbis::oracle
