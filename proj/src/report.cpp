#include "cpbis/report.hpp"

#include <fstream>
#include <sstream>

#include "cpbis/format.hpp"

namespace cpbis {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

Json points_json(const std::vector<DistributionPoint>& points) {
    Json arr = Json::array();
    for (const auto& p : points) {
        arr.push_back(to_json(p));
    }
    return arr;
}

Json schedule_json(const BroadcastSchedule& s) {
    Json j;
    j["name"] = s.name;
    j["period_s"] = to_s(s.period());
    Json blocks = Json::array();
    for (const auto& b : s.blocks) {
        blocks.push_back({{"interval_ms", to_ms(b.interval)}, {"duration_s", to_s(b.duration)}});
    }
    j["blocks"] = blocks;
    j["text"] = s.describe();
    return j;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

}  // namespace

Json to_json(const DistributionPoint& p) {
    return {{"interval_ms", p.interval_ms()}, {"latency_ms", p.latency_ms}};
}

Json to_json(const CandidatePair& pair) {
    Json j;
    j["a_left_ms"] = pair.left.interval_ms();
    j["a_right_ms"] = pair.right.interval_ms();
    j["delta"] = pair.delta;
    j["weighted_latency_ms"] = pair.weighted_latency_ms;
    j["slope"] = pair.slope;
    j["intercept"] = pair.intercept;
    j["latency_left_ms"] = pair.left.latency_ms;
    j["latency_right_ms"] = pair.right.latency_ms;
    return j;
}

Json config_echo(const RunConfig& config) {
    Json j;
    Json modes = Json::array();
    for (const auto& m : config.catalog) {
        modes.push_back({{"name", m.name},
                         {"scan_interval_ms", to_ms(m.scan_interval)},
                         {"scan_window_ms", to_ms(m.scan_window)},
                         {"market_share", m.market_share}});
    }
    j["scan_modes"] = modes;
    j["sweep"] = {{"a_start_ms", to_ms(config.grid.a_start)},
                  {"a_end_ms", to_ms(config.grid.a_end)},
                  {"a_step_ms", to_ms(config.grid.a_step)},
                  {"n_runs", config.grid.n_runs},
                  {"horizon_ms", to_ms(config.grid.horizon)}};
    j["constraint"] = {{"a_min_ms", to_ms(config.constraint.a_min)}, {"quantile_p", config.constraint.quantile_p}};
    j["advertiser"] = {{"adv_delay_max_ms", to_ms(config.advertiser.adv_delay_max)},
                       {"pdu_duration_us", config.advertiser.pdu_duration.count()},
                       {"channel_gap_us", config.advertiser.channel_gap.count()},
                       {"channels", config.advertiser.channels},
                       {"block_period_s", to_s(config.advertiser.block_period)}};
    j["seed"] = config.seed;
    return j;
}

Json to_json(const CpbisReport& report, const RunConfig& config) {
    Json j;
    j["optimal_pair"] = report.optimal ? to_json(*report.optimal) : Json(nullptr);
    j["block_schedule"] = report.optimal
                              ? schedule_json(schedule_from_pair(*report.optimal, config.advertiser.block_period))
                              : Json(nullptr);
    j["single_interval_alternative"] =
        report.single_interval_alternative ? to_json(*report.single_interval_alternative) : Json(nullptr);
    j["fallback_single"] = report.fallback_single ? to_json(*report.fallback_single) : Json(nullptr);
    j["warnings"] = report.warnings;
    if (config.reference) {
        const auto& ref = *config.reference;
        Json r{{"a_left_ms", to_ms(ref.a_left)}, {"a_right_ms", to_ms(ref.a_right)}, {"delta", ref.delta}};
        if (report.optimal) {
            r["matches_obtained"] = ref.a_left == report.optimal->left.interval &&
                                    ref.a_right == report.optimal->right.interval;
        }
        j["reference_pair"] = r;
    }

    Json stages;
    Json labels = Json::array();
    for (const auto& s : report.per_mode) {
        labels.push_back(s.label);
    }
    stages["series"] = labels;
    stages["superimposed_points"] = report.superimposed.points.size();
    stages["troughs"] = points_json(report.troughs);
    stages["pruned"] = points_json(report.pruned);
    stages["b_left"] = points_json(report.parts.b_left);
    stages["b_right"] = points_json(report.parts.b_right);
    Json pairs = Json::array();
    for (const auto& p : report.local_pairs) {
        pairs.push_back(to_json(p));
    }
    stages["local_optimum_pairs"] = pairs;
    j["stages"] = stages;
    j["config_echo"] = config_echo(config);
    return j;
}

Json to_json(const TrialReport& report, const RunConfig& config) {
    Json j;
    Json cells = Json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"schedule", c.schedule},
                         {"scan_mode", c.scan_mode},
                         {"success_rate", c.success_rate},
                         {"mean_latency_s", c.mean_latency_s ? Json(*c.mean_latency_s) : Json(nullptr)},
                         {"latency_sd_s", c.latency_sd_s ? Json(*c.latency_sd_s) : Json(nullptr)},
                         {"successes", c.successes},
                         {"n", c.n_trials}});
    }
    j["cells"] = cells;
    Json rows = Json::array();
    for (const auto& w : report.weighted) {
        rows.push_back({{"schedule", w.schedule},
                        {"success_rate", w.success_rate},
                        {"mean_latency_s", w.mean_latency_s ? Json(*w.mean_latency_s) : Json(nullptr)}});
    }
    j["weighted"] = rows;
    Json schedules = Json::array();
    for (const auto& s : config.schedules) {
        schedules.push_back(schedule_json(s));
    }
    j["schedules"] = schedules;
    j["limit_s"] = to_s(config.eval_limit);
    j["n_trials"] = config.eval_trials;
    j["config_echo"] = config_echo(config);
    return j;
}

std::string summarize(const CpbisReport& report, const RunConfig& config) {
    std::ostringstream out;
    out << "a_min " << format_ms(report.constraint.a_min) << " ms, P " << format_number(report.constraint.quantile_p)
        << "\n";
    out << "troughs " << report.troughs.size() << ", after pruning " << report.pruned.size() << " (left "
        << report.parts.b_left.size() << ", right " << report.parts.b_right.size() << ")\n";
    for (const auto& w : report.warnings) {
        out << "warning: " << w << "\n";
    }
    if (report.optimal) {
        const auto& p = *report.optimal;
        out << "optimal pair: " << format_ms(p.left.interval) << " ms / " << format_ms(p.right.interval)
            << " ms, delta " << format_number(p.delta) << ", weighted latency " << format_number(p.weighted_latency_ms)
            << " ms\n";
        out << "block schedule: " << schedule_from_pair(p, config.advertiser.block_period).describe() << "\n";
    }
    if (report.single_interval_alternative) {
        out << "single interval at a_min: " << format_ms(report.single_interval_alternative->interval) << " ms, latency "
            << format_number(report.single_interval_alternative->latency_ms) << " ms\n";
    }
    if (report.fallback_single) {
        out << "fallback single interval: " << format_ms(report.fallback_single->interval) << " ms, latency "
            << format_number(report.fallback_single->latency_ms) << " ms\n";
    }
    if (config.reference) {
        const auto& r = *config.reference;
        out << "reference pair: " << format_ms(r.a_left) << " ms / " << format_ms(r.a_right) << " ms, delta "
            << format_number(r.delta) << "\n";
    }
    return out.str();
}

std::string summarize(const TrialReport& report) {
    std::ostringstream out;
    for (const auto& c : report.cells) {
        out << c.schedule << " x " << c.scan_mode << ": success " << format_number(c.success_rate) << ", mean "
            << opt_number(c.mean_latency_s) << " s (n=" << c.n_trials << ")\n";
    }
    for (const auto& w : report.weighted) {
        out << w.schedule << " weighted: success " << format_number(w.success_rate) << ", mean "
            << opt_number(w.mean_latency_s) << " s\n";
    }
    return out.str();
}

void write_points_csv(const std::vector<DistributionPoint>& points, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "interval_ms,latency_ms\n";
    for (const auto& p : points) {
        out << format_ms(p.interval) << ',' << format_number(p.latency_ms) << '\n';
    }
}

void write_pairs_csv(const std::vector<CandidatePair>& pairs, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "a_left_ms,latency_left_ms,a_right_ms,latency_right_ms,slope,intercept,delta,weighted_latency_ms\n";
    for (const auto& p : pairs) {
        out << format_ms(p.left.interval) << ',' << format_number(p.left.latency_ms) << ','
            << format_ms(p.right.interval) << ',' << format_number(p.right.latency_ms) << ','
            << format_number(p.slope) << ',' << format_number(p.intercept) << ',' << format_number(p.delta) << ','
            << format_number(p.weighted_latency_ms) << '\n';
    }
}

void write_trials_csv(const TrialReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "schedule,scan_mode,success_rate,mean_latency_s,n\n";
    std::size_t n = 0;
    for (const auto& c : report.cells) {
        out << c.schedule << ',' << c.scan_mode << ',' << format_number(c.success_rate) << ','
            << opt_number(c.mean_latency_s) << ',' << c.n_trials << '\n';
        n = c.n_trials;
    }
    for (const auto& w : report.weighted) {
        out << w.schedule << ",weighted," << format_number(w.success_rate) << ',' << opt_number(w.mean_latency_s)
            << ',' << n << '\n';
    }
}

void write_json(const Json& json, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << json.dump(2) << '\n';
}

}  // namespace cpbis
