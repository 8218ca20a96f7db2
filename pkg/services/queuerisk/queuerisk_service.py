# File Path: services/queuerisk/queuerisk_service.py

"""
End-user laws for one dependence model.

Waiting time W      inverted from the Wiener-Hopf transform
Workload V          P(V > v) = rho * P(cW + B_res > v)
Ordinary ruin       Psi0(u) = P(cW > u)
Delayed ruin        Takacs: Psi(u) = rho * T_Z(u) + rho * (Psi0 * b)(u)

Z = B_res has density b = (1 - F_B)/E B and tail T_Z. The workload and the
delayed ruin function are computed along separate closed-form paths and
must coincide (P(V > u) = Psi(u)); ``analyze`` checks this on a grid.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Optional

import numpy as np

from common import config
from common.errors import DualityViolation
from services.inversion.exppoly_utils import (
    ExpPolyMix,
    add,
    as_function,
    convolve,
    density_from_tail,
    evaluate,
    integrate_tail,
    invert_tail,
    mean,
    quantile,
    rescale,
    scale,
)
from services.models import (
    DependenceModel,
    MomentReport,
    check_stability,
    marginal_b_tail,
    model_to_dict,
    y_transform,
    y_transform_at,
)
from services.polyrat import Polynomial, RationalFn
from services.wienerhopf import FactorizationResult, factorize, idle_lst, idle_tail, waiting_lst

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.95


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    model: DependenceModel
    moments: MomentReport
    factorization: FactorizationResult = field(repr=False)
    meanW: float
    atomW: float
    q95: float
    level: float
    waiting_lst: RationalFn = field(repr=False)
    waiting_tail: ExpPolyMix = field(repr=False)
    workload_tail: ExpPolyMix = field(repr=False)
    ordinary_ruin: ExpPolyMix = field(repr=False)
    delayed_ruin: ExpPolyMix = field(repr=False)
    idle_tail: ExpPolyMix = field(repr=False)
    mean_idle: float
    duality_gap: float

    @property
    def rho(self) -> float:
        return self.moments.rho

    def summary(self) -> Dict:
        return {
            "family": self.model.family,
            "parameters": model_to_dict(self.model),
            "rho": self.moments.rho,
            "corr": self.moments.corr,
            "moments": self.moments.to_dict(),
            "meanW": self.meanW,
            "atomW": self.atomW,
            "level": self.level,
            "qW": self.q95,
            "meanV": mean(self.workload_tail),
            "atomV": self.workload_tail.atom0,
            "varOrdinary": var_quantile(self, self.level, "ordinary"),
            "varDelayed": var_quantile(self, self.level, "delayed"),
            "meanIdle": self.mean_idle,
            "meanCustomersPerBusyCycle": 1.0 / self.atomW,
            "dualityGap": self.duality_gap,
            "roots": self.factorization.to_dict(),
        }

    def curves(self, grid) -> Dict[str, np.ndarray]:
        u = np.asarray(grid, dtype=float)
        return {
            "u": u,
            "P(W>u)": np.atleast_1d(evaluate(self.waiting_tail, u)),
            "P(V>u)": np.atleast_1d(evaluate(self.workload_tail, u)),
            "Psi0(u)": np.atleast_1d(evaluate(self.ordinary_ruin, u)),
            "Psi(u)": np.atleast_1d(evaluate(self.delayed_ruin, u)),
        }


def residual_density(b_tail: ExpPolyMix) -> ExpPolyMix:
    """Density (1 - F_B)/E B of B_res as a law without atom."""
    return scale(as_function(b_tail), 1.0 / mean(b_tail))


def workload_tail(cw_tail: ExpPolyMix, b_tail: ExpPolyMix, rho: float) -> ExpPolyMix:
    """P(V > v) = rho [a T_Z(v) + (f_cW * T_Z)(v) + T_cW(v)], atom 1 - rho."""
    t_z = integrate_tail(residual_density(b_tail))
    cw_law = density_from_tail(cw_tail)
    # law of cW convolved with the function T_Z: atom part a T_Z plus density part f_cW * T_Z
    through = convolve(cw_law, t_z)
    total = add(through, as_function(cw_tail))
    return scale(total, rho, atom=1.0 - rho)


def delayed_ruin_tail(ordinary: ExpPolyMix, b_tail: ExpPolyMix, rho: float) -> ExpPolyMix:
    """Takacs route: Psi(u) = rho T_Z(u) + rho (Psi0 * b)(u)."""
    b = residual_density(b_tail)
    t_z = integrate_tail(b)
    total = add(t_z, convolve(as_function(ordinary), b))
    return scale(total, rho, atom=1.0 - rho)


def ordinary_ruin(report: ScenarioReport, u) -> float:
    """Psi0(u) = P(W > u/c)."""
    return evaluate(report.ordinary_ruin, u)


def delayed_ruin(report: ScenarioReport, u) -> float:
    return evaluate(report.delayed_ruin, u)


def ruin_lst(fr: FactorizationResult, c: float = 1.0) -> RationalFn:
    """Laplace transform of Psi0: (1/s)(1 - E exp(-csW))."""
    wl = waiting_lst(fr).rescale_argument(c)
    diff = wl.den - wl.num
    quotient = Polynomial(diff.coeffs[1:]) if diff.degree >= 1 else Polynomial([0.0])
    return RationalFn(quotient, wl.den, wl.den_roots)


def var_quantile(report: ScenarioReport, level: float, which: str = "ordinary") -> float:
    """Smallest capital u with ruin probability <= 1 - level."""
    if which == "ordinary":
        return quantile(report.ordinary_ruin, level)
    if which == "delayed":
        return quantile(report.delayed_ruin, level)
    raise ValueError(f"unknown ruin function: {which}")


def duality_grid(meanW: float, c: float, EB: float, n_points: Optional[int] = None) -> np.ndarray:
    n = n_points or config.DUALITY_POINTS
    upper = 10.0 * meanW * c if meanW > 0 else 10.0 * EB
    return np.linspace(0.0, max(upper, 10.0 * EB), n)


def check_duality(workload: ExpPolyMix, delayed: ExpPolyMix, grid: np.ndarray, tol: Optional[float] = None) -> float:
    """Max |Psi(u) - P(V > u)| over the grid; raises DualityViolation above tol."""
    tol = config.DUALITY_TOL if tol is None else tol
    gaps = np.abs(np.atleast_1d(evaluate(delayed, grid)) - np.atleast_1d(evaluate(workload, grid)))
    worst = int(np.argmax(gaps))
    if gaps[worst] > tol:
        raise DualityViolation(float(grid[worst]), float(gaps[worst]), {"tolerance": tol})
    atom_gap = abs(workload.atom0 - delayed.atom0)
    if atom_gap > tol:
        raise DualityViolation(0.0, atom_gap, {"check": "atom"})
    return float(gaps[worst])


def analyze(m: DependenceModel, level: float = DEFAULT_LEVEL) -> ScenarioReport:
    """Full pipeline: Y-transform, factorization, inversion, workload and ruin laws, duality check."""
    mom = check_stability(m)
    fr = factorize(y_transform(m), transform=partial(y_transform_at, m))
    wl = waiting_lst(fr)
    w_tail = invert_tail(wl)
    if abs(w_tail.atom0 - fr.atom) > 1e-9:
        logger.warning(f"⚠️ inverted atom {w_tail.atom0:.12f} differs from root product {fr.atom:.12f}")

    b_tail = marginal_b_tail(m)
    psi0 = rescale(w_tail, m.c)
    v_tail = workload_tail(psi0, b_tail, mom.rho)
    psi = delayed_ruin_tail(psi0, b_tail, mom.rho)

    start = evaluate(v_tail, 0.0)
    if abs(start - mom.rho) > config.WORKLOAD_ATOM_TOL:
        raise DualityViolation(0.0, abs(start - mom.rho), {"check": "workload atom", "rho": mom.rho})

    meanW = mean(w_tail)
    gap = check_duality(v_tail, psi, duality_grid(meanW, m.c, mom.EB))

    _, mean_i = idle_lst(fr)
    i_tail = idle_tail(fr)
    if abs(mean(i_tail) - mean_i) > 1e-8 * max(1.0, mean_i):
        logger.warning(f"⚠️ idle tail mean {mean(i_tail):.10f} differs from transform mean {mean_i:.10f}")

    report = ScenarioReport(
        model=m,
        moments=mom,
        factorization=fr,
        meanW=meanW,
        atomW=fr.atom,
        q95=quantile(w_tail, level),
        level=level,
        waiting_lst=wl,
        waiting_tail=w_tail,
        workload_tail=v_tail,
        ordinary_ruin=psi0,
        delayed_ruin=psi,
        idle_tail=i_tail,
        mean_idle=mean_i,
        duality_gap=gap,
    )
    logger.info(f"✅ Analyzed {m.family}: rho={mom.rho:.4f}, E W={meanW:.6f}, P(W=0)={fr.atom:.6f}")
    return report
