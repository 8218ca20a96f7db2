from .montecarlo_service import (
    OrderingReport,
    RuinEstimate,
    SimConfig,
    SimEstimate,
    WaitingEstimates,
    WorkloadEstimates,
    batch_estimate,
    binomial_estimate,
    default_horizon,
    ordering_check,
    ratio_estimate,
    simulate_delayed_ruin,
    simulate_ordinary_ruin,
    simulate_waiting,
    simulate_workload,
)
from .worker import run_replications, spawn_generators

__all__ = [
    "OrderingReport",
    "RuinEstimate",
    "SimConfig",
    "SimEstimate",
    "WaitingEstimates",
    "WorkloadEstimates",
    "batch_estimate",
    "binomial_estimate",
    "default_horizon",
    "ordering_check",
    "ratio_estimate",
    "run_replications",
    "simulate_delayed_ruin",
    "simulate_ordinary_ruin",
    "simulate_waiting",
    "simulate_workload",
    "spawn_generators",
]
