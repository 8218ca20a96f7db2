# File Path: services/montecarlo/montecarlo_service.py

"""
Simulation oracle for the analytic laws.

- waiting times: Lindley recursion W_{n+1} = max(W_n + B_n/c - A_n, 0),
  started empty, batch means for the standard errors
- workload: time average of the piecewise-linear workload path
- ruin: paths of the surplus process u + c t - claims, started ordinary or in
  stationarity (first pair drawn from the residual law), finite horizon
- ordering: stop-loss transforms of D = A - B under common random numbers,
  next to the exact values
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import stats

from common import config
from common.errors import OrderingViolation
from services.inversion import difference_mean, difference_stop_loss, stop_loss
from services.models import DependenceModel, build_scenario, check_stability, moments, sample_pairs, sample_residual_pairs

from .worker import run_replications

logger = logging.getLogger(__name__)


# ============================================================================
# Configuration and estimates
# ============================================================================


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(config.SEED, ge=0)
    n_customers: int = Field(config.N_CUSTOMERS, gt=0)
    warmup: int = Field(config.WARMUP, ge=0)
    n_batches: int = Field(config.N_BATCHES, ge=20)
    replications: int = Field(1, ge=1)
    n_paths: int = Field(100_000, gt=0)
    horizon: Optional[float] = Field(None, gt=0)
    n_jobs: int = Field(config.N_JOBS, ge=-1)

    @field_validator("n_jobs")
    @classmethod
    def _jobs_nonzero(cls, v: int) -> int:
        if v == 0:
            raise ValueError("n_jobs must be nonzero")
        return v

    @model_validator(mode="after")
    def _batches_fit(self) -> "SimConfig":
        if self.n_customers < self.n_batches:
            raise ValueError("n_customers must be at least n_batches")
        if self.n_paths < self.replications:
            raise ValueError("n_paths must be at least replications")
        return self


class SimEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    point: float
    std_error: float = Field(ge=0)
    n: int = Field(ge=0)

    def interval(self, confidence: float = 0.95) -> Tuple[float, float]:
        # point +/- z * std_error
        z = stats.norm.ppf(0.5 + confidence / 2.0)
        return self.point - z * self.std_error, self.point + z * self.std_error

    def covers(self, value: float, k: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.point - value) <= k * self.std_error + slack


def batch_estimate(batch_values: np.ndarray, n: int) -> SimEstimate:
    """Mean of the batch means with the batch-means standard error."""
    values = np.asarray(batch_values, dtype=float)
    se = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return SimEstimate(point=float(values.mean()), std_error=se, n=n)


def ratio_estimate(numerators: np.ndarray, denominators: np.ndarray, n: int) -> SimEstimate:
    """sum(num)/sum(den) with the standard error of the per-batch ratios."""
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    point = float(num.sum() / den.sum()) if den.sum() > 0 else float("nan")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / den, point)
    se = float(ratios.std(ddof=1) / np.sqrt(ratios.size)) if ratios.size > 1 else 0.0
    return SimEstimate(point=point, std_error=se, n=n)


def binomial_estimate(hits: int, n: int) -> SimEstimate:
    p = hits / n
    return SimEstimate(point=p, std_error=float(np.sqrt(p * (1.0 - p) / n)), n=n)


@dataclass
class WaitingEstimates:
    meanW: SimEstimate
    atomW: SimEstimate
    tail: Dict[float, SimEstimate] = field(default_factory=dict)
    lst: Dict[float, SimEstimate] = field(default_factory=dict)
    customers_per_cycle: Optional[SimEstimate] = None
    mean_idle: Optional[SimEstimate] = None

    def to_dict(self) -> Dict:
        return {
            "meanW": self.meanW.model_dump(),
            "atomW": self.atomW.model_dump(),
            "tail": [{"u": u, **est.model_dump()} for u, est in self.tail.items()],
            "lst": [{"s": s, **est.model_dump()} for s, est in self.lst.items()],
            "customersPerCycle": self.customers_per_cycle.model_dump() if self.customers_per_cycle else None,
            "meanIdle": self.mean_idle.model_dump() if self.mean_idle else None,
        }


@dataclass
class WorkloadEstimates:
    atomV: SimEstimate
    tail: Dict[float, SimEstimate] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {"atomV": self.atomV.model_dump(), "tail": [{"v": v, **est.model_dump()} for v, est in self.tail.items()]}


@dataclass
class RuinEstimate:
    estimate: SimEstimate
    u: float
    horizon: float
    start: str

    def to_dict(self) -> Dict:
        # finite-horizon estimate: a lower bound for the infinite-horizon ruin probability
        return {"u": self.u, "horizon": self.horizon, "start": self.start, **self.estimate.model_dump()}


# ============================================================================
# Lindley recursion
# ============================================================================


def _lindley_chunk(x: np.ndarray, w0: float) -> Tuple[np.ndarray, float]:
    # W_i = S_i - min(-w0, min_{k<=i} S_k) with S_0 = 0
    s = np.concatenate(([0.0], np.cumsum(x)))
    w = s - np.minimum(-w0, np.minimum.accumulate(s))
    return w[:-1], float(w[-1])


def _lindley_batches(
    m: DependenceModel, cfg: SimConfig, rng: np.random.Generator
) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (W, A, B) for each batch after the warm-up; B_n and A_n follow customer n."""
    w0 = 0.0
    if cfg.warmup:
        a, b = sample_pairs(m, cfg.warmup, rng)
        _, w0 = _lindley_chunk(b / m.c - a, w0)
    batch_len = cfg.n_customers // cfg.n_batches
    for _ in range(cfg.n_batches):
        a, b = sample_pairs(m, batch_len, rng)
        w, w0 = _lindley_chunk(b / m.c - a, w0)
        yield w, a, b


def _waiting_batches(m, cfg, grid, lst_grid, rng) -> np.ndarray:
    rows = []
    for w, a, b in _lindley_batches(m, cfg, rng):
        after = w + b / m.c - a
        idle = after <= 0
        row = [w.mean(), np.mean(w == 0.0)]
        row += [np.mean(w > u) for u in grid]
        row += [np.mean(np.exp(-s * w)) for s in lst_grid]
        row += [w.size, np.count_nonzero(w == 0.0), -after[idle].sum(), np.count_nonzero(idle)]
        rows.append(row)
    return np.array(rows)


def simulate_waiting(
    m: DependenceModel, cfg: SimConfig, grid: Sequence[float] = (), lst_grid: Sequence[float] = ()
) -> WaitingEstimates:
    """Batch-means estimates of E W, P(W = 0), P(W > u) and E exp(-sW)."""
    check_stability(m)
    grid, lst_grid = list(grid), list(lst_grid)
    runs = run_replications(_waiting_batches, cfg.seed, cfg.replications, m, cfg, grid, lst_grid, n_jobs=cfg.n_jobs)
    table = np.vstack(runs)
    n = int(table[:, -4].sum())
    g, k = len(grid), len(lst_grid)

    result = WaitingEstimates(
        meanW=batch_estimate(table[:, 0], n),
        atomW=batch_estimate(table[:, 1], n),
        tail={u: batch_estimate(table[:, 2 + i], n) for i, u in enumerate(grid)},
        lst={s: batch_estimate(table[:, 2 + g + i], n) for i, s in enumerate(lst_grid)},
        customers_per_cycle=ratio_estimate(table[:, -4], table[:, -3], n),
        mean_idle=ratio_estimate(table[:, -2], table[:, -1], n),
    )
    logger.info(f"✅ Simulated {n} customers: E W = {result.meanW.point:.5f} ± {result.meanW.std_error:.5f}")
    return result


def _workload_batches(m, cfg, grid, rng) -> np.ndarray:
    rows = []
    for w, a, b in _lindley_batches(m, cfg, rng):
        # work just after the arrival, then linear decrease at rate c during A
        x = m.c * w + b
        row = [a.sum(), (a - np.minimum(x / m.c, a)).sum()]
        row += [np.clip((x - v) / m.c, 0.0, a).sum() for v in grid]
        rows.append(row)
    return np.array(rows)


def simulate_workload(m: DependenceModel, cfg: SimConfig, grid: Sequence[float] = ()) -> WorkloadEstimates:
    """Time-average estimates of P(V = 0) and P(V > v)."""
    check_stability(m)
    grid = list(grid)
    runs = run_replications(_workload_batches, cfg.seed, cfg.replications, m, cfg, grid, n_jobs=cfg.n_jobs)
    table = np.vstack(runs)
    n = cfg.n_customers * cfg.replications
    total_time = table[:, 0]
    return WorkloadEstimates(
        atomV=ratio_estimate(table[:, 1], total_time, n),
        tail={v: ratio_estimate(table[:, 2 + i], total_time, n) for i, v in enumerate(grid)},
    )


# ============================================================================
# Ruin
# ============================================================================


def default_horizon(m: DependenceModel) -> float:
    # 50 * E A * K, K the mixing order where the family has one
    mom = moments(m)
    if m.order is not None:
        K = m.order
    elif m.mixing is not None:
        K = int(np.ceil(m.mixing.mean()))
    else:
        K = 1
    return 50.0 * mom.EA * K


def _ruin_paths(m: DependenceModel, u: float, horizon: float, n_paths: int, stationary: bool, rng) -> int:
    surplus = np.full(n_paths, float(u))
    clock = np.zeros(n_paths)
    ruined = np.zeros(n_paths, dtype=bool)
    active = np.ones(n_paths, dtype=bool)
    first = True
    while active.any():
        idx = np.nonzero(active)[0]
        if first and stationary:
            a, b = sample_residual_pairs(m, idx.size, rng)
        else:
            a, b = sample_pairs(m, idx.size, rng)
        first = False
        clock[idx] += a
        in_time = clock[idx] <= horizon
        surplus[idx] += m.c * a - np.where(in_time, b, 0.0)
        hit = in_time & (surplus[idx] < 0)
        ruined[idx[hit]] = True
        active[idx[hit | ~in_time]] = False
    return int(ruined.sum())


def _simulate_ruin(m, cfg, u, horizon, stationary) -> RuinEstimate:
    check_stability(m)
    horizon = horizon or cfg.horizon or default_horizon(m)
    per_rep = cfg.n_paths // cfg.replications
    hits = run_replications(_ruin_paths, cfg.seed, cfg.replications, m, u, horizon, per_rep, stationary, n_jobs=cfg.n_jobs)
    n = per_rep * cfg.replications
    est = binomial_estimate(int(sum(hits)), n)
    start = "stationary" if stationary else "ordinary"
    logger.info(f"✅ {start} ruin at u={u}: {est.point:.5f} ± {est.std_error:.5f} (horizon {horizon:.1f})")
    return RuinEstimate(est, float(u), float(horizon), start)


def simulate_delayed_ruin(m: DependenceModel, cfg: SimConfig, u: float, horizon: Optional[float] = None) -> RuinEstimate:
    """Finite-horizon ruin probability with a stationary start."""
    return _simulate_ruin(m, cfg, u, horizon, stationary=True)


def simulate_ordinary_ruin(m: DependenceModel, cfg: SimConfig, u: float, horizon: Optional[float] = None) -> RuinEstimate:
    """Finite-horizon ruin probability started at a claim epoch."""
    return _simulate_ruin(m, cfg, u, horizon, stationary=False)


# ============================================================================
# Convex ordering of D = A - B across scenarios
# ============================================================================


@dataclass
class OrderingReport:
    K: int
    weights: List[float]
    symmetric: bool
    checked_negative: bool
    t_grid: np.ndarray
    exact: Dict[str, np.ndarray]
    means: Dict[str, float]
    violations: List[Dict] = field(default_factory=list)
    waiting: Optional[Dict[str, np.ndarray]] = None
    empirical: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def exact_dict(self) -> Dict:
        out = {"t": self.t_grid.tolist(), "means": self.means, "violations": self.violations}
        out.update({k: v.tolist() for k, v in self.exact.items()})
        if self.waiting is not None:
            out["waiting"] = {k: np.asarray(v).tolist() for k, v in self.waiting.items()}
        return out


def _compare(lower: np.ndarray, upper: np.ndarray, t: np.ndarray, relation: str, tol: float) -> List[Dict]:
    gaps = lower - upper
    bad = np.nonzero(gaps > tol)[0]
    return [{"relation": relation, "t": float(t[i]), "gap": float(gaps[i])} for i in bad]


def _empirical_ordering(K, weights, lam, mu, t_grid, n, rng) -> Dict:
    # common random numbers: one A per draw, B built from the same exponential columns
    w = np.asarray(weights) / np.sum(weights)
    m1 = rng.choice(K, size=n, p=w)
    m2 = rng.choice(K, size=n, p=w)
    a = np.cumsum(rng.exponential(1.0 / lam, (n, K)), axis=1)[np.arange(n), m1]
    b_cum = np.cumsum(rng.exponential(1.0 / mu, (n, K)), axis=1)
    d = {
        "plus": a - b_cum[np.arange(n), m1],
        "zero": a - b_cum[np.arange(n), m2],
        "minus": a - b_cum[np.arange(n), K - 1 - m1],
    }
    sl = {k: np.maximum(v[:, None] - t_grid[None, :], 0.0) for k, v in d.items()}
    out: Dict = {"n": n}
    for k, v in sl.items():
        out[k] = v.mean(axis=0).tolist()
        out[f"{k}_se"] = (v.std(axis=0, ddof=1) / np.sqrt(n)).tolist()
    flags = []
    for lo, hi in (("plus", "zero"), ("zero", "minus")):
        diff = sl[lo] - sl[hi]
        se = diff.std(axis=0, ddof=1) / np.sqrt(n)
        for i in np.nonzero(diff.mean(axis=0) > 3.0 * se + config.ORDERING_TOL)[0]:
            flags.append({"relation": f"{lo}<={hi}", "t": float(t_grid[i]), "gap": float(diff.mean(axis=0)[i])})
    out["flags"] = flags
    return out


def ordering_check(
    K: int,
    weights: Sequence[float],
    lam: float,
    mu: float,
    cfg: Optional[SimConfig] = None,
    t_grid: Optional[Sequence[float]] = None,
    check_negative: Optional[bool] = None,
    include_waiting: bool = True,
    raise_on_violation: bool = True,
) -> OrderingReport:
    """Exact (and optionally simulated) stop-loss curves of D+, D0, D- and W+, W0, W-.

    The second relation D0 <= D- is only claimed for symmetric weights; pass
    ``check_negative=True`` to test it anyway.
    """
    tol = config.ORDERING_TOL
    models = {kind: build_scenario(kind, K, weights, lam, mu) for kind in ("positive", "independent", "negative")}
    symmetric = models["positive"].mixing.is_symmetric()
    test_negative = symmetric if check_negative is None else check_negative
    if not symmetric:
        logger.warning("⚠️ weights are not symmetric; D0 <= D- is not implied")

    if t_grid is None:
        spread = np.sqrt(max(moments(m).VarA + moments(m).VarB for m in models.values()))
        centre = difference_mean(models["positive"])
        t_grid = np.linspace(centre - 3 * spread, centre + 3 * spread, 25)
    t = np.asarray(t_grid, dtype=float)

    exact = {
        "plus": np.atleast_1d(difference_stop_loss(models["positive"], t)),
        "zero": np.atleast_1d(difference_stop_loss(models["independent"], t)),
        "minus": np.atleast_1d(difference_stop_loss(models["negative"], t)),
    }
    means = {
        "plus": difference_mean(models["positive"]),
        "zero": difference_mean(models["independent"]),
        "minus": difference_mean(models["negative"]),
    }

    violations = _compare(exact["plus"], exact["zero"], t, "D+<=D0", tol)
    if abs(means["plus"] - means["zero"]) > tol:
        violations.append({"relation": "E D+ = E D0", "t": float("nan"), "gap": means["plus"] - means["zero"]})
    if test_negative:
        violations += _compare(exact["zero"], exact["minus"], t, "D0<=D-", tol)
        if abs(means["zero"] - means["minus"]) > tol:
            violations.append({"relation": "E D0 = E D-", "t": float("nan"), "gap": means["zero"] - means["minus"]})

    waiting = None
    if include_waiting and all(moments(m).rho < 1 for m in models.values()):
        from services.queuerisk import analyze

        t_w = t[t >= 0] if np.any(t >= 0) else np.array([0.0])
        reports = {k: analyze(m) for k, m in models.items()}
        waiting = {
            "t": t_w,
            "plus": np.atleast_1d(stop_loss(reports["positive"].waiting_tail, t_w)),
            "zero": np.atleast_1d(stop_loss(reports["independent"].waiting_tail, t_w)),
            "minus": np.atleast_1d(stop_loss(reports["negative"].waiting_tail, t_w)),
        }
        w_tol = max(tol, config.DUALITY_TOL)
        violations += _compare(waiting["plus"], waiting["zero"], t_w, "W+<=W0", w_tol)
        if test_negative:
            violations += _compare(waiting["zero"], waiting["minus"], t_w, "W0<=W-", w_tol)

    empirical = None
    if cfg is not None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
        empirical = _empirical_ordering(K, weights, lam, mu, t, cfg.n_paths, rng)

    report = OrderingReport(
        K, [float(x) for x in weights], symmetric, test_negative, t, exact, means, violations, waiting, empirical
    )
    if violations and raise_on_violation:
        first = violations[0]
        raise OrderingViolation(first["relation"], first["t"], first["gap"], {"violations": violations})
    return report
