// cpbis: sweep discovery-latency distributions, select a two-interval
// broadcast plan, and evaluate broadcast schedules.

#include <iostream>

#include <CLI11.hpp>

#include "cpbis/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool emit_stages = false;
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "Output directory (overrides run.output_dir)");
    cmd->add_option("--seed", flags.seed, "Base RNG seed (overrides run.seed)");
    cmd->add_option("--workers", flags.workers, "Worker threads, 0 = all cores");
}

cpbis::RunConfig load(const CLI::App& cmd, const Flags& flags) {
    cpbis::CommandOptions opts;
    if (cmd.count("--out")) {
        opts.out = flags.out;
    }
    if (cmd.count("--seed")) {
        opts.seed = flags.seed;
    }
    if (cmd.count("--workers")) {
        opts.workers = flags.workers;
    }
    return cpbis::apply_overrides(cpbis::load_config(flags.config), opts);
}

void list_files(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) {
        std::cout << "wrote " << f.string() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-interval BLE broadcast screening"};
    app.require_subcommand(1);

    Flags flags;
    auto* sweep = app.add_subcommand("sweep", "Sweep broadcast intervals per scan mode and superimpose");
    add_common(sweep, flags);
    auto* optimize = app.add_subcommand("optimize", "Select the optimal interval pair and proportion");
    add_common(optimize, flags);
    optimize->add_flag("--emit-stages", flags.emit_stages, "Also write trough, pruned and pair CSVs");
    auto* evaluate = app.add_subcommand("evaluate", "Simulate discovery trials for configured schedules");
    add_common(evaluate, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            const auto cfg = load(*sweep, flags);
            const auto out = cpbis::cmd_sweep(cfg);
            if (out.cache_hits > 0) {
                std::cout << "reused " << out.cache_hits << " cached series\n";
            }
            list_files(out.files);
        } else if (optimize->parsed()) {
            const auto cfg = load(*optimize, flags);
            const auto out = cpbis::cmd_optimize(cfg, flags.emit_stages);
            std::cout << out.summary;
            list_files(out.files);
        } else if (evaluate->parsed()) {
            const auto cfg = load(*evaluate, flags);
            const auto out = cpbis::cmd_evaluate(cfg);
            std::cout << out.summary;
            list_files(out.files);
        }
    } catch (const cpbis::StageError& e) {
        std::cerr << "error in stage " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
