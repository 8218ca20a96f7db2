# File Path: services/montecarlo/worker.py

# Replication runner: every replication gets its own PCG64 stream spawned from
# one master SeedSequence, and results come back in replication order so the
# output does not depend on the number of joblib workers.

import logging
from typing import Any, Callable, List, Optional

import numpy as np
from joblib import Parallel, delayed

from common import config

logger = logging.getLogger(__name__)


def spawn_generators(seed: int, n: int) -> List[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(seed).spawn(n)]


def _run_one(fn: Callable[..., Any], seed_seq: np.random.SeedSequence, args: tuple, kwargs: dict) -> Any:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    return fn(*args, rng=rng, **kwargs)


def run_replications(
    fn: Callable[..., Any], seed: int, replications: int, *args, n_jobs: Optional[int] = None, **kwargs
) -> List[Any]:
    """Call ``fn(*args, rng=..., **kwargs)`` once per replication; results in index order."""
    jobs = config.N_JOBS if n_jobs is None else n_jobs
    seeds = np.random.SeedSequence(seed).spawn(replications)
    if jobs == 1 or replications == 1:
        return [_run_one(fn, ss, args, kwargs) for ss in seeds]
    logger.info(f"Running {replications} replications on {jobs} workers")
    return Parallel(n_jobs=jobs)(delayed(_run_one)(fn, ss, args, kwargs) for ss in seeds)
