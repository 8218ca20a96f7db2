from .queuerisk_service import (
    DEFAULT_LEVEL,
    ScenarioReport,
    analyze,
    check_duality,
    delayed_ruin,
    delayed_ruin_tail,
    duality_grid,
    ordinary_ruin,
    residual_density,
    ruin_lst,
    var_quantile,
    workload_tail,
)

__all__ = [
    "DEFAULT_LEVEL",
    "ScenarioReport",
    "analyze",
    "check_duality",
    "delayed_ruin",
    "delayed_ruin_tail",
    "duality_grid",
    "ordinary_ruin",
    "residual_density",
    "ruin_lst",
    "var_quantile",
    "workload_tail",
]
