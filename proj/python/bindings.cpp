#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cpbis/commands.hpp"
#include "cpbis/format.hpp"
#include "cpbis/report.hpp"
#include "cpbis/sim.hpp"

namespace py = pybind11;
using namespace cpbis;

namespace {

py::object to_python(const Json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

AdvertiserConfig advertiser(unsigned channels, double adv_delay_max_ms) {
    AdvertiserConfig adv;
    adv.channels = channels;
    adv.adv_delay_max = from_ms(adv_delay_max_ms);
    return adv;
}

std::vector<DistributionPoint> points_from(const std::vector<std::pair<double, double>>& pts) {
    std::vector<DistributionPoint> out;
    out.reserve(pts.size());
    for (auto [a, l] : pts) {
        out.push_back({from_ms(a), l});
    }
    return out;
}

std::vector<std::pair<double, double>> points_to(const std::vector<DistributionPoint>& pts) {
    std::vector<std::pair<double, double>> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        out.emplace_back(p.interval_ms(), p.latency_ms);
    }
    return out;
}

RunConfig configured(const std::filesystem::path& path, std::optional<std::filesystem::path> out,
                     std::optional<std::uint64_t> seed, std::optional<unsigned> workers) {
    CommandOptions opts;
    opts.out = std::move(out);
    opts.seed = seed;
    opts.workers = workers;
    return apply_overrides(load_config(path), opts);
}

}  // namespace

PYBIND11_MODULE(_cpbis, m) {
    m.doc() = "Two-interval BLE broadcast screening";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);
    py::register_exception<QuantileUnreachable>(m, "QuantileUnreachable", PyExc_RuntimeError);

    py::class_<ScanMode>(m, "ScanMode")
        .def(py::init(&make_scan_mode), py::arg("name"), py::arg("scan_interval_ms"), py::arg("scan_window_ms"),
             py::arg("market_share") = 1.0)
        .def_readonly("name", &ScanMode::name)
        .def_property_readonly("scan_interval_ms", [](const ScanMode& s) { return to_ms(s.scan_interval); })
        .def_property_readonly("scan_window_ms", [](const ScanMode& s) { return to_ms(s.scan_window); })
        .def_readonly("market_share", &ScanMode::market_share)
        .def("__repr__", [](const ScanMode& s) {
            return "ScanMode('" + s.name + "', " + format_ms(s.scan_interval) + ", " + format_ms(s.scan_window) + ")";
        });

    py::class_<DistributionSeries>(m, "Series")
        .def(py::init([](std::string label, const std::vector<std::pair<double, double>>& pts) {
                 DistributionSeries s{std::move(label), points_from(pts), {}};
                 validate(s);
                 return s;
             }),
             py::arg("label"), py::arg("points"))
        .def_readonly("label", &DistributionSeries::label)
        .def_property_readonly("points", [](const DistributionSeries& s) { return points_to(s.points); })
        .def_property_readonly("gaps_ms", [](const DistributionSeries& s) {
            std::vector<double> out;
            for (auto g : s.gaps) {
                out.push_back(to_ms(g));
            }
            return out;
        });

    py::class_<CandidatePair>(m, "Pair")
        .def_property_readonly("a_left_ms", [](const CandidatePair& p) { return p.left.interval_ms(); })
        .def_property_readonly("a_right_ms", [](const CandidatePair& p) { return p.right.interval_ms(); })
        .def_property_readonly("latency_left_ms", [](const CandidatePair& p) { return p.left.latency_ms; })
        .def_property_readonly("latency_right_ms", [](const CandidatePair& p) { return p.right.latency_ms; })
        .def_readonly("slope", &CandidatePair::slope)
        .def_readonly("intercept", &CandidatePair::intercept)
        .def_readonly("delta", &CandidatePair::delta)
        .def_readonly("weighted_latency_ms", &CandidatePair::weighted_latency_ms);

    m.def(
        "latency_samples",
        [](const ScanMode& mode, double interval_ms, std::size_t n_runs, std::uint64_t seed, double horizon_ms,
           unsigned channels, double adv_delay_max_ms, unsigned workers) {
            SimScenario s{mode, single_interval(from_ms(interval_ms), advertiser(channels, adv_delay_max_ms)),
                          from_ms(horizon_ms), seed};
            const auto cdf = estimate_cdf(s, n_runs, workers);
            std::vector<double> ms;
            ms.reserve(cdf.sorted_latencies.size());
            for (auto l : cdf.sorted_latencies) {
                ms.push_back(to_ms(l));
            }
            return py::make_tuple(ms, cdf.timeouts);
        },
        "Sorted discovery latencies (ms) and the timeout count for one broadcast interval.", py::arg("mode"),
        py::arg("interval_ms"), py::arg("n_runs") = 1000, py::arg("seed") = 1, py::arg("horizon_ms") = 300000.0,
        py::arg("channels") = 3, py::arg("adv_delay_max_ms") = 10.0, py::arg("workers") = 0);

    m.def(
        "sweep",
        [](const ScanMode& mode, double a_start_ms, double a_end_ms, double a_step_ms, std::size_t n_runs,
           double quantile_p, std::uint64_t seed, double horizon_ms, unsigned workers) {
            SweepGrid g;
            g.a_start = from_ms(a_start_ms);
            g.a_end = from_ms(a_end_ms);
            g.a_step = from_ms(a_step_ms);
            g.n_runs = n_runs;
            g.quantile_p = quantile_p;
            g.horizon = from_ms(horizon_ms);
            return build_distribution(mode, g, AdvertiserConfig{}, seed, workers);
        },
        "Quantile latency series over a grid of broadcast intervals.", py::arg("mode"), py::arg("a_start_ms"),
        py::arg("a_end_ms"), py::arg("a_step_ms") = 5.0, py::arg("n_runs") = 1000, py::arg("quantile_p") = 0.9,
        py::arg("seed") = 1, py::arg("horizon_ms") = 300000.0, py::arg("workers") = 0);

    m.def("superimpose", [](const std::vector<DistributionSeries>& s, const std::vector<double>& shares) {
        return superimpose(s, shares);
    });
    m.def("find_troughs", [](const DistributionSeries& s) { return points_to(find_troughs(s)); });
    m.def("prune", [](const std::vector<std::pair<double, double>>& pts) {
        return points_to(prune_non_increasing(points_from(pts)));
    });
    m.def(
        "select_optimal_pair",
        [](const std::vector<std::pair<double, double>>& candidates, double a_min_ms) {
            return select_optimal_pair(partition(points_from(candidates), from_ms(a_min_ms)), from_ms(a_min_ms));
        },
        "Best pair from pruned candidates straddling a_min.", py::arg("candidates"), py::arg("a_min_ms"));
    m.def("weighted_latency", &weighted_latency, py::arg("l1_left"), py::arg("l2_left"), py::arg("l1_right"),
          py::arg("l2_right"), py::arg("w1"), py::arg("w2"), py::arg("c"));

    m.def(
        "run_trials",
        [](const std::vector<std::pair<double, double>>& blocks, const ScanMode& mode, double limit_s, std::size_t n,
           std::uint64_t seed, unsigned workers) {
            BroadcastSchedule sched{"schedule", {}};
            for (auto [interval_ms, duration_s] : blocks) {
                sched.blocks.push_back({from_ms(interval_ms), from_s(duration_s)});
            }
            const auto c = run_trials(sched, mode, AdvertiserConfig{}, from_s(limit_s), n, seed, workers);
            py::dict d;
            d["success_rate"] = c.success_rate;
            d["successes"] = c.successes;
            d["n"] = c.n_trials;
            d["mean_latency_s"] = c.mean_latency_s;
            return d;
        },
        "Timed discovery trials for a schedule given as [(interval_ms, duration_s), ...].", py::arg("blocks"),
        py::arg("mode"), py::arg("limit_s") = 40.0, py::arg("n") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

    m.def(
        "optimize",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed, std::optional<unsigned> workers, bool emit_stages) {
            const auto cfg = configured(config, std::move(out), seed, workers);
            OptimizeOutput result;
            {
                py::gil_scoped_release release;
                result = cmd_optimize(cfg, emit_stages);
            }
            return to_python(to_json(result.report, cfg));
        },
        "Run the optimize command; returns the report as a dict.", py::arg("config"), py::arg("out") = py::none(),
        py::arg("seed") = py::none(), py::arg("workers") = py::none(), py::arg("emit_stages") = false);

    m.def(
        "evaluate",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed, std::optional<unsigned> workers) {
            const auto cfg = configured(config, std::move(out), seed, workers);
            EvaluateOutput result;
            {
                py::gil_scoped_release release;
                result = cmd_evaluate(cfg);
            }
            return to_python(to_json(result.report, cfg));
        },
        "Run the evaluate command; returns the trial report as a dict.", py::arg("config"),
        py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("workers") = py::none());

    m.def(
        "sweep_config",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed, std::optional<unsigned> workers) {
            const auto cfg = configured(config, std::move(out), seed, workers);
            SweepOutput result;
            {
                py::gil_scoped_release release;
                result = cmd_sweep(cfg);
            }
            return py::make_tuple(result.per_mode, result.superimposed, result.files);
        },
        "Run the sweep command; returns (per_mode, superimposed, files).", py::arg("config"),
        py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("workers") = py::none());
}
