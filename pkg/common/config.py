import os
from pathlib import Path

# ============================================================================
# Logging / Output Configuration
# ============================================================================

LOG_LEVEL = os.getenv("MXQ_LOG_LEVEL", "INFO").upper()
OUTPUT_DIR = os.getenv("MXQ_OUTPUT_DIR", "./output")


def get_output_dir(create: bool = True) -> Path:
    path = Path(OUTPUT_DIR)
    if create:
        path.mkdir(parents=True, exist_ok=True)
    return path


# ============================================================================
# Root Finding / Factorization Tolerances
# ============================================================================

AXIS_EPS = float(os.getenv("MXQ_AXIS_EPS", "1e-9"))
CLUSTER_REL = float(os.getenv("MXQ_CLUSTER_REL", "1e-7"))
ROOT_MAX_ITER = int(os.getenv("MXQ_ROOT_MAX_ITER", "100"))


def cluster_radius(max_abs_root: float) -> float:
    # Roots closer than this are merged into one root of summed multiplicity.
    return CLUSTER_REL * (1.0 + max_abs_root)


# ============================================================================
# Analytic Self-Checks
# ============================================================================

DUALITY_TOL = float(os.getenv("MXQ_DUALITY_TOL", "1e-8"))
DUALITY_POINTS = int(os.getenv("MXQ_DUALITY_POINTS", "100"))
WORKLOAD_ATOM_TOL = float(os.getenv("MXQ_WORKLOAD_ATOM_TOL", "1e-9"))
ORDERING_TOL = float(os.getenv("MXQ_ORDERING_TOL", "1e-9"))


# ============================================================================
# Simulation Configuration
# ============================================================================

SEED = int(os.getenv("MXQ_SEED", "20240917"))
N_CUSTOMERS = int(os.getenv("MXQ_N_CUSTOMERS", "1000000"))
WARMUP = int(os.getenv("MXQ_WARMUP", "10000"))
N_BATCHES = int(os.getenv("MXQ_N_BATCHES", "50"))
N_JOBS = int(os.getenv("MXQ_N_JOBS", "1"))

# Verification sweep: smaller simulations, band of VERIFY_SIGMAS standard errors
VERIFY_N_CUSTOMERS = int(os.getenv("MXQ_VERIFY_N_CUSTOMERS", "200000"))
VERIFY_SIGMAS = float(os.getenv("MXQ_VERIFY_SIGMAS", "4.0"))
# Finite-horizon ruin simulations sit slightly below the infinite-horizon value
VERIFY_RUIN_SLACK = float(os.getenv("MXQ_VERIFY_RUIN_SLACK", "0.005"))


def get_sim_config(**overrides):
    # Build a validated SimConfig from the environment defaults.
    from services.montecarlo.montecarlo_service import SimConfig

    params = {
        "seed": SEED,
        "n_customers": N_CUSTOMERS,
        "warmup": WARMUP,
        "n_batches": N_BATCHES,
    }
    params.update(overrides)
    return SimConfig(**params)


# ============================================================================
# Table Reproduction
# ============================================================================

# unit_service_rate: mu=1, lambda=rho ; unit_arrival_rate: lambda=1, mu=1/rho
TABLE_NORMALIZATION = os.getenv("MXQ_TABLE_NORMALIZATION", "unit_service_rate")
