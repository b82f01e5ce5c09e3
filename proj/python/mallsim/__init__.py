"""Python bindings for the mallsim workload simulator."""

from ._mallsim import (
    BelowMinimum,
    ConfigError,
    InfeasibleAllocation,
    InvalidRank,
    MalformedFile,
    MallsimError,
    UndersizedDimension,
    block_distribution,
    calibrate,
    choose_config,
    efficiency,
    experiment,
    generate_workload,
    iteration_time,
    memory_required,
    redistribution_plan,
    run,
    speedup,
    static_max_nodes,
)

VARIANTS = ("Static", "Baseline", "Merge", "BaselineAsync", "MergeAsync")

__all__ = [name for name in dir() if not name.startswith("_")]
