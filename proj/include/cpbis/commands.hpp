#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cpbis/config.hpp"
#include "cpbis/eval.hpp"
#include "cpbis/screening.hpp"

namespace cpbis {

// Flags shared by the CLI subcommands; unset fields fall back to the config.
struct CommandOptions {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool emit_stages = false;
};

/// Config with command-line overrides applied.
RunConfig apply_overrides(RunConfig config, const CommandOptions& options);

struct SweepOutput {
    std::vector<DistributionSeries> per_mode;
    DistributionSeries superimposed;
    std::vector<std::filesystem::path> files;
    std::size_t cache_hits = 0;
};

/// Per-mode series (cached in the output directory) plus the superimposed one.
SweepOutput cmd_sweep(const RunConfig& config);

struct OptimizeOutput {
    CpbisReport report;
    std::vector<std::filesystem::path> files;
    std::string summary;
};

/// Sweep (reusing cache), screen, and write cpbis_report.json. Stage errors
/// propagate as StageError.
OptimizeOutput cmd_optimize(const RunConfig& config, bool emit_stages);

struct EvaluateOutput {
    TrialReport report;
    std::vector<std::filesystem::path> files;
    std::string summary;
};

EvaluateOutput cmd_evaluate(const RunConfig& config);

}  // namespace cpbis
