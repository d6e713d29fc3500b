#include <doctest.h>

#include <cmath>
#include <vector>

#include "cpbis/random.hpp"
#include "cpbis/screening.hpp"
#include "oracles.hpp"

using namespace cpbis;

namespace {

DistributionPoint pt(double a_ms, double l) { return {from_ms(a_ms), l}; }

DistributionSeries series_of(std::vector<double> latencies, double start = 1000, double step = 5) {
    DistributionSeries s;
    s.label = "s";
    for (std::size_t i = 0; i < latencies.size(); ++i) {
        s.points.push_back(pt(start + step * static_cast<double>(i), latencies[i]));
    }
    return s;
}

// Random pruned candidate sets: ascending intervals on a 5 ms grid,
// non-decreasing latency, at least one point each side of a_min.
PartitionedCandidates random_parts(Rng& rng, Micros a_min) {
    PartitionedCandidates parts;
    const std::size_t n_left = 1 + rng.below(12);
    const std::size_t n_right = 1 + rng.below(12);
    const std::int64_t a_min_ms = a_min.count() / 1000;
    std::int64_t a = 500 + 5 * static_cast<std::int64_t>(rng.below(40));
    double l = 100.0 + static_cast<double>(rng.below(5000));
    const bool coarse = rng.below(4) == 0;  // small integer latencies force ties
    auto next_latency = [&] {
        l += coarse ? static_cast<double>(rng.below(3)) * 100 : static_cast<double>(rng.below(400000)) / 100;
        return l;
    };
    for (std::size_t i = 0; i < n_left && a < a_min_ms; ++i) {
        parts.b_left.push_back(pt(static_cast<double>(a), next_latency()));
        a += 5 * (1 + static_cast<std::int64_t>(rng.below(60)));
    }
    if (parts.b_left.empty() || parts.b_left.back().interval >= a_min) {
        parts.b_left = {pt(static_cast<double>(a_min_ms - 5), next_latency())};
    }
    a = std::max(a, a_min_ms);
    if (rng.below(5) == 0) {
        a = a_min_ms;
    }
    for (std::size_t i = 0; i < n_right; ++i) {
        parts.b_right.push_back(pt(static_cast<double>(a), next_latency()));
        a += 5 * (1 + static_cast<std::int64_t>(rng.below(60)));
    }
    return parts;
}

}  // namespace

TEST_SUITE("screening") {

TEST_CASE("trough examples") {
    auto t = find_troughs(series_of({3, 1, 2}));
    REQUIRE(t.size() == 1);
    CHECK(t[0] == pt(1005, 1));

    t = find_troughs(series_of({3, 1, 1, 2}));
    REQUIRE(t.size() == 1);
    CHECK(t[0] == pt(1010, 1));

    CHECK_THROWS_AS(find_troughs(series_of({1, 2, 3, 4})), NoTroughs);
    CHECK_THROWS_AS(find_troughs(series_of({4, 3, 2})), NoTroughs);
    CHECK_THROWS_AS(find_troughs(series_of({1, 2})), NoTroughs);
    // Endpoints never count.
    CHECK(find_troughs(series_of({1, 5, 2, 6, 0})).size() == 1);
}

TEST_CASE("troughs match the brute-force scan on random series") {
    Rng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> l(3 + rng.below(40));
        for (auto& v : l) {
            v = static_cast<double>(rng.below(6));
        }
        const auto s = series_of(l);
        const auto expected = oracle::brute_troughs(s.points);
        if (expected.empty()) {
            CHECK_THROWS_AS(find_troughs(s), NoTroughs);
        } else {
            CHECK(find_troughs(s) == expected);
        }
    }
}

TEST_CASE("pruning example") {
    const std::vector<DistributionPoint> in{pt(2000, 5), pt(2500, 4), pt(3000, 4.5)};
    CHECK(prune_non_increasing(in) == std::vector<DistributionPoint>{pt(2500, 4), pt(3000, 4.5)});
}

TEST_CASE("pruning equals the deletion fixpoint and is non-decreasing") {
    Rng rng(23);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<DistributionPoint> in;
        for (std::size_t i = 0, n = rng.below(30); i < n; ++i) {
            in.push_back(pt(1000 + 5.0 * static_cast<double>(i), static_cast<double>(rng.below(10))));
        }
        const auto out = prune_non_increasing(in);
        CHECK(out == oracle::fixpoint_prune(in));
        for (std::size_t i = 1; i < out.size(); ++i) {
            CHECK(out[i - 1].interval < out[i].interval);
            CHECK(out[i - 1].latency_ms <= out[i].latency_ms);
        }
        if (!in.empty()) {
            CHECK(out.back() == in.back());
        }
    }
}

TEST_CASE("partition around a_min") {
    const std::vector<DistributionPoint> pruned{pt(3245, 100), pt(4605, 200)};
    auto parts = partition(pruned, from_ms(4000));
    CHECK(parts.b_left == std::vector<DistributionPoint>{pt(3245, 100)});
    CHECK(parts.b_right == std::vector<DistributionPoint>{pt(4605, 200)});

    const std::vector<DistributionPoint> at_min{pt(3245, 100), pt(4000, 150)};
    parts = partition(at_min, from_ms(4000));
    CHECK(parts.b_right.front() == pt(4000, 150));

    try {
        partition(std::vector<DistributionPoint>{pt(4605, 200)}, from_ms(4000));
        FAIL("expected EmptySide");
    } catch (const EmptySide& e) {
        CHECK(e.left_empty());
    }
    try {
        partition(std::vector<DistributionPoint>{pt(3245, 100)}, from_ms(4000));
        FAIL("expected EmptySide");
    } catch (const EmptySide& e) {
        CHECK_FALSE(e.left_empty());
    }
}

TEST_CASE("best left partner example") {
    const std::vector<DistributionPoint> left{pt(1000, 10), pt(2000, 8)};
    const auto pair = best_left_for(pt(5000, 12), left, from_ms(4000));
    CHECK(pair.left == pt(2000, 8));
    CHECK(pair.delta == doctest::Approx(1.0 / 3.0));
    CHECK(pair.weighted_latency_ms == doctest::Approx(8.0 / 3.0 + 8.0));
}

TEST_CASE("pair fields are consistent") {
    const auto p = make_pair(pt(1535, 6000), pt(5645, 20000), from_ms(4000));
    CHECK(p.delta * 1535 + (1 - p.delta) * 5645 == doctest::Approx(4000).epsilon(1e-12));
    CHECK(p.slope * 4000 + p.intercept == doctest::Approx(p.weighted_latency_ms).epsilon(1e-12));
    CHECK(p.slope * 1535 + p.intercept == doctest::Approx(6000));
}

TEST_CASE("selected pair equals exhaustive minimisation") {
    Rng rng(2024);
    int mismatches = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const Micros a_min = from_ms(2000 + 5.0 * static_cast<double>(rng.below(600)));
        const auto parts = random_parts(rng, a_min);
        const double a_ms = to_ms(a_min);
        const auto chosen = select_optimal_pair(parts, a_min);
        const double brute = oracle::global_min_line_value(parts.b_left, parts.b_right, a_ms);
        if (std::abs(chosen.weighted_latency_ms - brute) > 1e-9 * std::max(1.0, std::abs(brute))) {
            ++mismatches;
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("each local pair is the best left partner of its right point") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const Micros a_min = from_ms(4000);
        const auto parts = random_parts(rng, a_min);
        const auto pairs = local_optimum_pairs(parts, a_min);
        REQUIRE(pairs.size() == parts.b_right.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(pairs[i].right == parts.b_right[i]);
            const double best = oracle::best_for_right(parts.b_right[i], parts.b_left, 4000);
            CHECK(pairs[i].weighted_latency_ms == doctest::Approx(best).epsilon(1e-9));
        }
    }
}

TEST_CASE("weighted latency examples") {
    CHECK(weighted_latency(1, 2, 3, 4, 0.5, 0.5, 1.0) == doctest::Approx(1.5));
    CHECK(weighted_latency(4, 100, 8, 100, 1.0, 0.0, 0.5) == doctest::Approx(6));
    CHECK(weighted_latency(4, 6, 8, 10, 0.5, 0.5, 0.0) == doctest::Approx(9));
}

TEST_CASE("weighted latency of the mixture equals the line value at a_min") {
    Rng rng(7);
    for (int trial = 0; trial < 5000; ++trial) {
        const double a_l = 500 + static_cast<double>(rng.below(3000));
        const double a_r = 4000 + static_cast<double>(rng.below(4000));
        const double a_min = 4000;
        const double l1[2] = {static_cast<double>(rng.below(40000)), static_cast<double>(rng.below(40000))};
        const double l2[2] = {static_cast<double>(rng.below(40000)), static_cast<double>(rng.below(40000))};
        const double w1 = static_cast<double>(rng.below(1001)) / 1000;
        const double w2 = 1 - w1;
        const DistributionPoint left = pt(a_l, w1 * l1[0] + w2 * l2[0]);
        const DistributionPoint right = pt(a_r, w1 * l1[1] + w2 * l2[1]);
        const auto pair = make_pair(left, right, from_ms(a_min));
        const double direct = weighted_latency(l1[0], l2[0], l1[1], l2[1], w1, w2, pair.delta);
        CHECK(std::abs(direct - (pair.slope * a_min + pair.intercept)) <= 1e-6);
    }
}

TEST_CASE("collinear candidates give equal weighted latency") {
    Rng rng(13);
    for (int trial = 0; trial < 2000; ++trial) {
        const double k = static_cast<double>(rng.below(10000)) / 1000;
        const double b = static_cast<double>(rng.below(2000)) - 1000;
        const double a_min = 4000;
        const auto on_line = [&](double a) { return pt(a, k * a + b); };
        const double a1 = 500 + 5.0 * static_cast<double>(rng.below(700));
        const double a2 = 500 + 5.0 * static_cast<double>(rng.below(700));
        const double a3 = 4000 + 5.0 * static_cast<double>(rng.below(800));
        const double a4 = 4005 + 5.0 * static_cast<double>(rng.below(800));
        const auto p = make_pair(on_line(a1), on_line(a3), from_ms(a_min));
        const auto q = make_pair(on_line(a2), on_line(a4), from_ms(a_min));
        const double expect = k * a_min + b;
        CHECK(p.weighted_latency_ms == doctest::Approx(q.weighted_latency_ms).epsilon(1e-9));
        CHECK(p.weighted_latency_ms == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("flattest local pair is the pairwise minimum") {
    Rng rng(555);
    for (int trial = 0; trial < 2000; ++trial) {
        const Micros a_min = from_ms(4000);
        const auto parts = random_parts(rng, a_min);
        const auto pairs = local_optimum_pairs(parts, a_min);
        double min_local = pairs.front().weighted_latency_ms;
        for (const auto& p : pairs) {
            min_local = std::min(min_local, p.weighted_latency_ms);
        }
        const auto chosen = select_optimal_pair(parts, a_min);
        CHECK(chosen.weighted_latency_ms == doctest::Approx(min_local).epsilon(1e-9));
        for (const auto& l : parts.b_left) {
            for (const auto& r : parts.b_right) {
                CHECK(chosen.weighted_latency_ms <= oracle::boundary_latency(l, r, 4000) * (1 + 1e-9) + 1e-9);
            }
        }
    }
}

TEST_CASE("screen reports stage errors and fallbacks") {
    ConstraintConfig c{from_ms(1010), 0.9};
    try {
        screen({series_of({1, 2, 3, 4})}, {1.0}, c);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "find_troughs");
    }

    // Troughs only below a_min: fallback to the best single interval >= a_min.
    c.a_min = from_ms(1020);
    const auto r = screen({series_of({5, 1, 6, 2, 7, 8})}, {1.0}, c);
    CHECK_FALSE(r.optimal.has_value());
    REQUIRE(r.fallback_single.has_value());
    CHECK(r.fallback_single->interval == from_ms(1020));
    CHECK_FALSE(r.warnings.empty());

    // Candidate sitting exactly on a_min.
    c.a_min = from_ms(1015);
    const auto at = screen({series_of({5, 1, 6, 2, 7, 3, 9})}, {1.0}, c);
    REQUIRE(at.optimal.has_value());
    REQUIRE(at.single_interval_alternative.has_value());
    CHECK(at.single_interval_alternative->interval == from_ms(1015));
}

TEST_CASE("full pipeline is deterministic and rejects bad input") {
    const std::vector<ScanMode> catalog{make_scan_mode("a", 1000, 100, 0.5), make_scan_mode("b", 1500, 300, 0.5)};
    SweepGrid grid;
    grid.a_start = from_ms(200);
    grid.a_end = from_ms(1400);
    grid.a_step = from_ms(20);
    grid.n_runs = 300;
    grid.horizon = from_s(60);
    const ConstraintConfig c{from_ms(800), 0.9};
    SweepSource src;
    src.seed = 4;
    src.workers = 1;
    const auto r1 = run_cpbis(catalog, grid, c, src);
    const auto r2 = run_cpbis(catalog, grid, c, src);
    CHECK(r1.superimposed == r2.superimposed);
    REQUIRE(r1.optimal.has_value());
    CHECK(*r1.optimal == *r2.optimal);
    CHECK(r1.optimal->left.interval < c.a_min);
    CHECK(r1.optimal->right.interval >= c.a_min);

    try {
        run_cpbis({make_scan_mode("a", 1000, 100, 0.4)}, grid, c, src);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "validate");
    }
}

}  // TEST_SUITE
