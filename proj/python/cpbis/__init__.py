"""Two-interval BLE broadcast screening."""

from ._cpbis import (
    ConfigError,
    Pair,
    QuantileUnreachable,
    ScanMode,
    Series,
    StageError,
    ValidationError,
    evaluate,
    find_troughs,
    latency_samples,
    optimize,
    prune,
    run_trials,
    select_optimal_pair,
    superimpose,
    sweep,
    sweep_config,
    weighted_latency,
)

__all__ = [
    "ConfigError",
    "Pair",
    "QuantileUnreachable",
    "ScanMode",
    "Series",
    "StageError",
    "ValidationError",
    "evaluate",
    "find_troughs",
    "latency_samples",
    "optimize",
    "prune",
    "run_trials",
    "select_optimal_pair",
    "superimpose",
    "sweep",
    "sweep_config",
    "weighted_latency",
]
