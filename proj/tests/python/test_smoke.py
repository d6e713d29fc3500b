import json
import os
import pathlib

import pytest

import cpbis

DATA = pathlib.Path(os.environ.get("CPBIS_TEST_DATA", pathlib.Path(__file__).parents[1] / "data"))


def test_scan_mode_validation():
    mode = cpbis.ScanMode("m", 4096, 1024, 0.5)
    assert mode.scan_interval_ms == 4096
    assert mode.scan_window_ms == 1024
    with pytest.raises(cpbis.ValidationError, match="window exceeds interval"):
        cpbis.ScanMode("bad", 100, 200)


def test_latency_samples_continuous_bound():
    mode = cpbis.ScanMode("c", 1000, 1000)
    lat, timeouts = cpbis.latency_samples(mode, 500, n_runs=2000, channels=1, adv_delay_max_ms=0, workers=1)
    assert timeouts == 0
    assert lat == sorted(lat)
    assert max(lat) <= 500 + 0.376


def test_sweep_and_screening():
    fast = cpbis.ScanMode("fast", 1000, 100, 0.5)
    slow = cpbis.ScanMode("slow", 1500, 300, 0.5)
    series = [cpbis.sweep(m, 200, 1400, 20, n_runs=300, seed=4, horizon_ms=60000, workers=1) for m in (fast, slow)]
    assert series[0].points == cpbis.sweep(fast, 200, 1400, 20, n_runs=300, seed=4, horizon_ms=60000).points
    mixed = cpbis.superimpose(series, [0.5, 0.5])
    troughs = cpbis.find_troughs(mixed)
    pruned = cpbis.prune(troughs)
    assert all(a[1] <= b[1] for a, b in zip(pruned, pruned[1:]))
    pair = cpbis.select_optimal_pair(pruned, 800)
    assert pair.a_left_ms < 800 <= pair.a_right_ms
    assert pair.delta * pair.a_left_ms + (1 - pair.delta) * pair.a_right_ms == pytest.approx(800, abs=1e-3)


def test_select_examples():
    pair = cpbis.select_optimal_pair([(1000, 10), (2000, 8.5), (5000, 12)], 4000)
    assert pair.a_left_ms == 2000
    assert cpbis.weighted_latency(4, 100, 8, 100, 1.0, 0.0, 0.5) == pytest.approx(6)
    with pytest.raises(RuntimeError, match="monotone"):
        cpbis.find_troughs(cpbis.Series("mono", [(1000, 1), (1005, 2), (1010, 3)]))


def test_run_trials():
    mode = cpbis.ScanMode("m", 5120, 512)
    cell = cpbis.run_trials([(1535, 16), (5645, 24)], mode, limit_s=40, n=300, seed=3, workers=1)
    assert 0 <= cell["success_rate"] <= 1
    assert cell["n"] == 300
    assert cpbis.run_trials([(1000, 40)], mode, limit_s=0.0001, n=50)["success_rate"] == 0


def test_commands(tmp_path):
    cfg = DATA / "small_pair.toml"
    report = cpbis.optimize(cfg, out=tmp_path, workers=1, emit_stages=True)
    assert report["optimal_pair"]["a_left_ms"] < 800 <= report["optimal_pair"]["a_right_ms"]
    on_disk = json.loads((tmp_path / "cpbis_report.json").read_text())
    assert on_disk["optimal_pair"] == report["optimal_pair"]
    assert (tmp_path / "stage_pairs.csv").exists()

    per_mode, mixed, files = cpbis.sweep_config(DATA / "minimal.toml", out=tmp_path / "s")
    assert len(per_mode) == 2 and len(files) == 3
    trials = cpbis.evaluate(DATA / "minimal.toml", out=tmp_path / "e")
    assert {c["schedule"] for c in trials["cells"]} == {"single", "dual"}

    with pytest.raises(cpbis.ConfigError, match="constraint.a_min_ms"):
        cpbis.optimize(DATA / "missing_a_min.toml", out=tmp_path / "m")
