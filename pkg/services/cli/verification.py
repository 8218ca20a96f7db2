# File Path: services/cli/verification.py

"""
Verification sweep behind ``mxqueue verify``.

For every model of the sweep:
    rouche          plus/minus root counts of g - f and g agree
    atom            inverted P(W = 0) equals the root product
    duality         delayed ruin (Takacs route) equals the workload tail
    workload_atom   P(V = 0) = 1 - rho
    simulation      E W, P(W = 0), P(W > u), P(V = 0), P(V > v) and the delayed
                    ruin probability inside the batch-means band (optional)

plus the exact convex-ordering suite and the point-mass regression, which
must be detected as a known non-ordering.
"""

import logging
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple

from joblib import Parallel, delayed

from common import config
from common.errors import MxQueueError, OrderingViolation, RoucheCountMismatch
from services.inversion import evaluate
from services.montecarlo import SimConfig, ordering_check, simulate_delayed_ruin, simulate_waiting, simulate_workload
from services.models import (
    DependenceModel,
    build_scenario,
    cheriyan_ramabhadran,
    kibble_moran,
    model_to_dict,
    y_transform,
    y_transform_at,
)
from services.polyrat import Polynomial, Root, RootSet, find_roots
from services.queuerisk import analyze
from services.wienerhopf import factorize

from .reference_tables import SCENARIOS, rates_for

logger = logging.getLogger(__name__)

SWEEP_K = (1, 2, 4, 7)
SWEEP_RHO = (0.25, 0.5, 0.75)
ORDERING_K = (2, 5, 14)
ORDERING_RATES = (1.0, 2.0)

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_KNOWN = "known"

Check = Dict


def default_sweep(normalization: Optional[str] = None) -> List[Tuple[str, DependenceModel]]:
    """K in {1,2,4,7} x rho in {.25,.5,.75} x three scenarios, Kibble-Moran m in {1,2}, one Cheriyan-Ramabhadran."""
    normalization = normalization or config.TABLE_NORMALIZATION
    sweep = []
    for K in SWEEP_K:
        for rho in SWEEP_RHO:
            lam, mu = rates_for(rho, normalization)
            for kind in SCENARIOS:
                sweep.append((f"{kind} K={K} rho={rho}", build_scenario(kind, K, [1.0 / K] * K, lam, mu)))
    lam, mu = rates_for(0.5, normalization)
    for m in (1, 2):
        sweep.append((f"kibble-moran m={m} p=0.5", kibble_moran(m, 0.5, lam, mu)))
    sweep.append(("cheriyan-ramabhadran", cheriyan_ramabhadran((1, 1, 1), (1.0, 0.5, 1.0))))
    return sweep


def flipped_root_finder(p: Polynomial, tol: Optional[float] = None) -> RootSet:
    """Fault injection: mirror the leftmost root of p into the right half-plane."""
    roots = find_roots(p, tol)
    if not roots.count:
        return roots
    idx = min(range(len(roots.roots)), key=lambda i: roots.roots[i].location.real)
    flipped = list(roots.roots)
    flipped[idx] = Root(-flipped[idx].location, flipped[idx].multiplicity)
    return RootSet(tuple(flipped), roots.residual_bound)


def _record(check: str, name: str, m: Optional[DependenceModel], status: str, **detail) -> Check:
    return {
        "check": check,
        "model": name,
        "parameters": model_to_dict(m) if m is not None else None,
        "status": status,
        "detail": detail,
    }


def _failure(check: str, name: str, m: DependenceModel, err: MxQueueError) -> Check:
    return _record(check, name, m, STATUS_FAIL, **err.to_dict())


def check_model(
    name: str,
    m: DependenceModel,
    sim_cfg: Optional[SimConfig] = None,
    sigmas: float = config.VERIFY_SIGMAS,
    root_finder: Callable = find_roots,
) -> List[Check]:
    checks: List[Check] = []

    try:
        fr = factorize(y_transform(m), root_finder=root_finder, transform=partial(y_transform_at, m))
    except MxQueueError as e:
        return [_failure("rouche", name, m, e)]
    checks.append(_record("rouche", name, m, STATUS_PASS, minus=fr.s_minus.count, plus=fr.s_plus.count))

    try:
        report = analyze(m)
    except MxQueueError as e:
        return checks + [_failure("duality", name, m, e)]

    atom_gap = abs(report.waiting_tail.atom0 - fr.atom)
    checks.append(_record("atom", name, m, STATUS_PASS if atom_gap <= 1e-9 else STATUS_FAIL, gap=atom_gap))
    checks.append(_record("duality", name, m, STATUS_PASS, gap=report.duality_gap))
    v_gap = abs(report.workload_tail.atom0 - (1.0 - report.rho))
    v_status = STATUS_PASS if v_gap <= config.WORKLOAD_ATOM_TOL else STATUS_FAIL
    checks.append(_record("workload_atom", name, m, v_status, gap=v_gap))

    if sim_cfg is not None:
        checks += _simulation_checks(name, m, report, sim_cfg, sigmas)
    return checks


def _sim_record(
    check: str, name: str, m: DependenceModel, est, exact: float, sigmas: float, slack: float = 0.0, **detail
) -> Check:
    ok = est.covers(exact, k=sigmas, slack=slack)
    return _record(
        check,
        name,
        m,
        STATUS_PASS if ok else STATUS_FAIL,
        exact=float(exact),
        estimate=est.point,
        std_error=est.std_error,
        **detail,
    )


def _simulation_checks(name: str, m: DependenceModel, report, sim_cfg: SimConfig, sigmas: float) -> List[Check]:
    """Waiting time, workload and delayed ruin against their simulated counterparts."""
    grid = [0.5 * report.meanW, report.meanW, report.q95]
    grid = sorted({float(u) for u in grid if u > 0})
    checks: List[Check] = []

    sim = simulate_waiting(m, sim_cfg, grid=grid)
    checks.append(_sim_record("simulation_meanW", name, m, sim.meanW, report.meanW, sigmas))
    checks.append(_sim_record("simulation_atomW", name, m, sim.atomW, report.atomW, sigmas))
    for u, est in sim.tail.items():
        checks.append(_sim_record("simulation_tailW", name, m, est, evaluate(report.waiting_tail, u), sigmas, u=u))

    v_grid = [m.c * u for u in grid]
    work = simulate_workload(m, sim_cfg, grid=v_grid)
    checks.append(_sim_record("simulation_atomV", name, m, work.atomV, report.workload_tail.atom0, sigmas))
    for v, est in work.tail.items():
        checks.append(_sim_record("simulation_tailV", name, m, est, evaluate(report.workload_tail, v), sigmas, u=v))

    for u in (0.0, m.c * report.meanW):
        ruin = simulate_delayed_ruin(m, sim_cfg, u)
        exact = evaluate(report.delayed_ruin, u)
        slack = config.VERIFY_RUIN_SLACK
        checks.append(
            _sim_record(
                "simulation_delayed_ruin", name, m, ruin.estimate, exact, sigmas, slack=slack, u=u, horizon=ruin.horizon
            )
        )
    return checks


def ordering_suite() -> List[Check]:
    lam, mu = ORDERING_RATES
    checks = []
    for K in ORDERING_K:
        name = f"ordering K={K} uniform"
        try:
            report = ordering_check(K, [1.0 / K] * K, lam, mu)
            checks.append(_record("ordering", name, None, STATUS_PASS, points=int(report.t_grid.size)))
        except MxQueueError as e:
            checks.append(_record("ordering", name, None, STATUS_FAIL, **e.to_dict()))

    # M = 1 almost surely: D0 <= D- does not hold
    name = "ordering K=2 point mass"
    try:
        ordering_check(2, [1.0, 0.0], lam, mu, check_negative=True, include_waiting=False)
        checks.append(_record("ordering_regression", name, None, STATUS_FAIL, reason="violation not detected"))
    except OrderingViolation as e:
        checks.append(_record("ordering_regression", name, None, STATUS_KNOWN, reason="known non-ordering", **e.details))
    return checks


def run_verification(
    sim_cfg: Optional[SimConfig] = None,
    inject_fault: bool = False,
    normalization: Optional[str] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[bool, List[Check]]:
    """Run every check of the sweep; passed is False if any check failed."""
    finder = flipped_root_finder if inject_fault else find_roots
    jobs = n_jobs or config.N_JOBS
    sweep = default_sweep(normalization)
    per_model = Parallel(n_jobs=jobs)(delayed(check_model)(name, m, sim_cfg, root_finder=finder) for name, m in sweep)
    checks = [c for group in per_model for c in group]
    checks += ordering_suite()

    failures = [c for c in checks if c["status"] == STATUS_FAIL]
    for c in failures:
        logger.error(f"❌ {c['check']} failed for {c['model']}: {c['detail']}")
    if inject_fault and any(c["detail"].get("errorType") == RoucheCountMismatch.__name__ for c in failures):
        logger.info("Injected fault detected by the root-count assertion")
    passed = not failures
    mark = "✅" if passed else "❌"
    logger.info(f"{mark} Verification: {len(checks)} checks over {len(sweep)} models, {len(failures)} failed")
    return passed, checks
