#include "cpbis/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cpbis/format.hpp"
#include "cpbis/parallel.hpp"

namespace cpbis {

std::vector<Micros> SweepGrid::intervals() const {
    std::vector<Micros> out;
    for (Micros a = a_start; a <= a_end; a += a_step) {
        out.push_back(a);
    }
    return out;
}

void validate(const SweepGrid& grid) {
    if (grid.a_start.count() <= 0) {
        throw ValidationError("sweep a_start must be positive");
    }
    if (grid.a_step.count() <= 0) {
        throw ValidationError("sweep a_step must be positive");
    }
    if (!(grid.a_start < grid.a_end)) {
        throw ValidationError("sweep a_start must be below a_end");
    }
    if ((grid.a_end - grid.a_start) / grid.a_step < 2) {
        throw ValidationError("sweep grid needs at least three intervals");
    }
    if (grid.n_runs == 0) {
        throw ValidationError("sweep n_runs must be at least 1");
    }
    if (!(grid.quantile_p > 0.0 && grid.quantile_p < 1.0)) {
        throw ValidationError("sweep quantile P must lie in (0, 1)");
    }
    if (grid.horizon <= grid.a_end) {
        throw ValidationError("sweep horizon must exceed a_end");
    }
}

DistributionSeries build_distribution(const ScanMode& mode, const SweepGrid& grid,
                                      const AdvertiserConfig& advertiser_template,
                                      std::uint64_t seed, unsigned workers) {
    validate(mode);
    validate(grid);
    const auto intervals = grid.intervals();
    std::vector<std::optional<Micros>> quantiles(intervals.size());

    parallel_for(intervals.size(), workers, [&](std::size_t i) {
        SimScenario scenario{mode, single_interval(intervals[i], advertiser_template), grid.horizon,
                             derive_seed(seed, 1, i)};
        const LatencyCdf cdf = estimate_cdf(scenario, grid.n_runs, 1);
        try {
            quantiles[i] = quantile(cdf, grid.quantile_p);
        } catch (const QuantileUnreachable&) {
            quantiles[i].reset();
        }
    });

    DistributionSeries series;
    series.label = mode.name;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (quantiles[i]) {
            series.points.push_back({intervals[i], to_ms(*quantiles[i])});
        } else {
            series.gaps.push_back(intervals[i]);
        }
    }
    if (series.points.empty()) {
        throw std::runtime_error("empty distribution: every grid point of '" + mode.name + "' timed out");
    }
    return series;
}

namespace {

std::vector<Micros> grid_of(const DistributionSeries& s) {
    std::vector<Micros> g;
    g.reserve(s.points.size() + s.gaps.size());
    for (const auto& p : s.points) {
        g.push_back(p.interval);
    }
    g.insert(g.end(), s.gaps.begin(), s.gaps.end());
    std::sort(g.begin(), g.end());
    return g;
}

}  // namespace

DistributionSeries superimpose(std::span<const DistributionSeries> series, std::span<const double> shares) {
    if (series.empty() || series.size() != shares.size()) {
        throw ValidationError("superimpose needs one share per series");
    }
    double total = 0.0;
    for (double w : shares) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw ValidationError("market share outside [0, 1]");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > kShareTolerance) {
        throw ValidationError("market shares do not sum to 1");
    }
    const auto grid = grid_of(series.front());
    for (const auto& s : series.subspan(1)) {
        if (grid_of(s) != grid) {
            throw GridMismatch("grid mismatch: series '" + s.label + "' is on a different interval grid");
        }
    }

    std::map<Micros, std::pair<std::size_t, double>> acc;
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (const auto& p : series[i].points) {
            auto& [count, sum] = acc[p.interval];
            ++count;
            sum += shares[i] * p.latency_ms;
        }
    }
    DistributionSeries out;
    out.label = "superimposed";
    for (const auto& a : grid) {
        const auto it = acc.find(a);
        if (it != acc.end() && it->second.first == series.size()) {
            out.points.push_back({a, it->second.second});
        } else {
            out.gaps.push_back(a);
        }
    }
    return out;
}

LineFit fit_lower_envelope(const DistributionSeries& series, Micros from, Micros to) {
    std::vector<DistributionPoint> hull;
    double sum_a = 0.0;
    std::size_t n = 0;
    // Signed area of (o, a, b); <= 0 means a is not strictly below the chord o-b.
    auto turn = [](const DistributionPoint& o, const DistributionPoint& a, const DistributionPoint& b) {
        return (a.interval_ms() - o.interval_ms()) * (b.latency_ms - o.latency_ms) -
               (a.latency_ms - o.latency_ms) * (b.interval_ms() - o.interval_ms());
    };
    for (const auto& p : series.points) {
        if (p.interval < from || p.interval > to) {
            continue;
        }
        sum_a += p.interval_ms();
        ++n;
        while (hull.size() >= 2 && turn(hull[hull.size() - 2], hull.back(), p) <= 0) {
            hull.pop_back();
        }
        hull.push_back(p);
    }
    if (hull.size() < 2) {
        throw std::runtime_error("envelope fit needs at least two points in range");
    }
    const double mean_a = sum_a / static_cast<double>(n);
    std::size_t edge = 0;
    while (edge + 2 < hull.size() && hull[edge + 1].interval_ms() <= mean_a) {
        ++edge;
    }
    LineFit fit;
    fit.left = hull[edge];
    fit.right = hull[edge + 1];
    fit.slope = (fit.right.latency_ms - fit.left.latency_ms) / (fit.right.interval_ms() - fit.left.interval_ms());
    fit.intercept = fit.left.latency_ms - fit.slope * fit.left.interval_ms();
    return fit;
}

std::string series_file_name(const std::string& label, double p, std::uint64_t seed) {
    return label + "_p" + format_number(p) + "_seed" + std::to_string(seed) + ".csv";
}

void write_series_csv(const DistributionSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "interval_ms,latency_ms\n";
    for (const auto& p : series.points) {
        out << format_ms(p.interval) << ',' << format_number(p.latency_ms) << '\n';
    }
}

DistributionSeries read_series_csv(const std::filesystem::path& path, std::string label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    DistributionSeries s;
    s.label = std::move(label);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "interval_ms,latency_ms") {
                throw std::runtime_error(path.string() + ": unexpected header");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        const auto a = comma == std::string::npos ? std::nullopt : parse_number(std::string_view(line).substr(0, comma));
        const auto l = comma == std::string::npos ? std::nullopt : parse_number(std::string_view(line).substr(comma + 1));
        if (!a || !l) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed row");
        }
        s.points.push_back({from_ms(*a), *l});
    }
    validate(s);
    return s;
}

namespace {

nlohmann::ordered_json cache_key(const ScanMode& mode, const SweepGrid& grid, const AdvertiserConfig& adv,
                                 std::uint64_t seed) {
    nlohmann::ordered_json k;
    k["scan_interval_us"] = mode.scan_interval.count();
    k["scan_window_us"] = mode.scan_window.count();
    k["a_start_us"] = grid.a_start.count();
    k["a_end_us"] = grid.a_end.count();
    k["a_step_us"] = grid.a_step.count();
    k["n_runs"] = grid.n_runs;
    k["quantile_p"] = format_number(grid.quantile_p);
    k["horizon_us"] = grid.horizon.count();
    k["adv_delay_max_us"] = adv.adv_delay_max.count();
    k["pdu_duration_us"] = adv.pdu_duration.count();
    k["channel_gap_us"] = adv.channel_gap.count();
    k["channels"] = adv.channels;
    k["seed"] = seed;
    return k;
}

}  // namespace

DistributionSeries cached_distribution(const std::filesystem::path& dir, const ScanMode& mode,
                                       const SweepGrid& grid, const AdvertiserConfig& advertiser_template,
                                       std::uint64_t seed, unsigned workers, bool* hit) {
    const auto csv = dir / series_file_name(mode.name, grid.quantile_p, seed);
    auto meta = csv;
    meta.replace_extension(".meta.json");
    const auto key = cache_key(mode, grid, advertiser_template, seed);

    if (std::filesystem::exists(csv) && std::filesystem::exists(meta)) {
        std::ifstream in(meta);
        const auto stored = nlohmann::ordered_json::parse(in, nullptr, false);
        if (!stored.is_discarded() && stored.contains("key") && stored["key"] == key) {
            auto series = read_series_csv(csv, mode.name);
            for (const auto& g : stored.value("gaps_us", std::vector<std::int64_t>{})) {
                series.gaps.emplace_back(g);
            }
            if (hit) {
                *hit = true;
            }
            return series;
        }
    }

    auto series = build_distribution(mode, grid, advertiser_template, seed, workers);
    std::filesystem::create_directories(dir);
    write_series_csv(series, csv);
    nlohmann::ordered_json m;
    m["key"] = key;
    std::vector<std::int64_t> gaps;
    for (auto g : series.gaps) {
        gaps.push_back(g.count());
    }
    m["gaps_us"] = gaps;
    std::ofstream(meta, std::ios::binary) << m.dump(2) << '\n';
    if (hit) {
        *hit = false;
    }
    return series;
}

}  // namespace cpbis
