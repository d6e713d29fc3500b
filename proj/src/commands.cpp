#include "cpbis/commands.hpp"

#include <fstream>

#include "cpbis/format.hpp"
#include "cpbis/report.hpp"

namespace cpbis {

RunConfig apply_overrides(RunConfig config, const CommandOptions& options) {
    if (options.out) {
        config.output_dir = *options.out;
    }
    if (options.seed) {
        config.seed = *options.seed;
    }
    if (options.workers) {
        config.workers = *options.workers;
    }
    return config;
}

SweepOutput cmd_sweep(const RunConfig& config) {
    SweepOutput out;
    const auto& dir = config.output_dir;
    std::vector<double> shares;
    for (const auto& mode : config.catalog) {
        bool hit = false;
        out.per_mode.push_back(
            cached_distribution(dir, mode, config.grid, config.advertiser, config.seed, config.workers, &hit));
        out.files.push_back(dir / series_file_name(mode.name, config.grid.quantile_p, config.seed));
        out.cache_hits += hit ? 1 : 0;
        shares.push_back(mode.market_share);
    }
    out.superimposed = superimpose(out.per_mode, shares);
    const auto mixed = dir / series_file_name(out.superimposed.label, config.grid.quantile_p, config.seed);
    write_series_csv(out.superimposed, mixed);
    out.files.push_back(mixed);
    return out;
}

OptimizeOutput cmd_optimize(const RunConfig& config, bool emit_stages) {
    SweepSource source{config.advertiser, config.seed, config.workers, config.output_dir};
    OptimizeOutput out;
    out.report = run_cpbis(config.catalog, config.grid, config.constraint, source);
    const auto& dir = config.output_dir;

    const auto report_path = dir / "cpbis_report.json";
    write_json(to_json(out.report, config), report_path);
    out.files.push_back(report_path);

    out.summary = summarize(out.report, config);
    const auto summary_path = dir / "cpbis_summary.txt";
    {
        std::ofstream(summary_path, std::ios::binary) << out.summary;
    }
    out.files.push_back(summary_path);

    if (emit_stages) {
        const auto mixed = dir / series_file_name(out.report.superimposed.label, config.grid.quantile_p, config.seed);
        write_series_csv(out.report.superimposed, mixed);
        write_points_csv(out.report.troughs, dir / "stage_troughs.csv");
        write_points_csv(out.report.pruned, dir / "stage_pruned.csv");
        write_pairs_csv(out.report.local_pairs, dir / "stage_pairs.csv");
        out.files.insert(out.files.end(),
                         {mixed, dir / "stage_troughs.csv", dir / "stage_pruned.csv", dir / "stage_pairs.csv"});
    }
    return out;
}

EvaluateOutput cmd_evaluate(const RunConfig& config) {
    if (config.schedules.empty()) {
        throw ConfigError("evaluate needs at least one [[schedule]] in the config");
    }
    EvaluateOutput out;
    out.report = compare_modes(config.schedules, config.catalog, config.advertiser, config.eval_limit,
                               config.eval_trials, config.seed, config.workers);
    const auto& dir = config.output_dir;
    write_trials_csv(out.report, dir / "trials.csv");
    write_json(to_json(out.report, config), dir / "trials.json");
    out.files = {dir / "trials.csv", dir / "trials.json"};
    out.summary = summarize(out.report);
    return out;
}

}  // namespace cpbis
