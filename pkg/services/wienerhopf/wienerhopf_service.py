# File Path: services/wienerhopf/wienerhopf_service.py

"""
Wiener-Hopf factorization of 1 - E exp(-sY) = (g - f)/g.

The roots of g - f and of g are split by half-plane. With strict stability
g - f has a simple root at 0, no other root on the imaginary axis, and as
many roots in Re s >= 0 as g has in Re s > 0. Then

    E exp(-sW) = prod_j (1 - s/st_j-) / prod_k (1 - s/s_k-)
    P(W = 0)   = prod_k s_k- / prod_j st_j-
    E exp(sI)  = 1 - prod_k (s - s_k+) / prod_j (s - st_j+)

where s- / s+ are roots of g - f and st- / st+ roots of g.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from common import config
from common.errors import MxQueueError, RoucheCountMismatch, StabilityViolation
from services.inversion.exppoly_utils import ExpPolyMix, invert_tail
from services.polyrat import Polynomial, RationalFn, Root, RootSet, classify_halfplane, find_roots

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorizationResult:
    s_minus: RootSet
    s_plus: RootSet
    stilde_minus: RootSet
    stilde_plus: RootSet
    atom: float
    EY: float = 0.0
    cancelled: RootSet = field(default_factory=RootSet)

    def to_dict(self) -> Dict:
        return {
            "s_minus": self.s_minus.to_list(),
            "s_plus": self.s_plus.to_list(),
            "stilde_minus": self.stilde_minus.to_list(),
            "stilde_plus": self.stilde_plus.to_list(),
            "cancelled": self.cancelled.to_list(),
            "atom": self.atom,
            "EY": self.EY,
        }


def _cancel_common(a: RootSet, b: RootSet, radius: float) -> Tuple[RootSet, RootSet, List[Root]]:
    """Pair roots of a and b closer than radius and remove the shared multiplicity from both."""
    a_roots = [list(r) for r in a.roots]
    b_roots = [list(r) for r in b.roots]
    cancelled: List[Root] = []
    for ra in a_roots:
        for rb in b_roots:
            if ra[1] == 0 or rb[1] == 0:
                continue
            if abs(ra[0] - rb[0]) < radius:
                k = min(ra[1], rb[1])
                ra[1] -= k
                rb[1] -= k
                cancelled.append(Root(complex(rb[0]), k))
    keep_a = tuple(Root(loc, mult) for loc, mult in a_roots if mult > 0)
    keep_b = tuple(Root(loc, mult) for loc, mult in b_roots if mult > 0)
    return RootSet(keep_a, a.residual_bound), RootSet(keep_b, b.residual_bound), cancelled


def _mismatch(message: str, **sets: RootSet) -> RoucheCountMismatch:
    return RoucheCountMismatch(message, {name: rs.to_list() for name, rs in sets.items()})


# A refined root may move at most this far (relative) from its eigenvalue estimate.
REFINE_MOVE_REL = 1e-4


def _transform_residual(transform: Callable[[complex], complex], s: complex, real: bool) -> complex:
    value = 1.0 - complex(transform(s))
    return complex(value.real, 0.0) if real else value


def _refine_root(z: complex, transform: Callable[[complex], complex], spacing: float) -> complex:
    """Newton on 1 - E exp(-sY) evaluated from the model, not from the expanded g - f.

    Steps that leave the neighbourhood of the starting estimate are not taken.
    """
    real = z.imag == 0.0
    limit = min(REFINE_MOVE_REL * (1.0 + abs(z)), 0.25 * spacing)
    start = z
    try:
        fz = _transform_residual(transform, z, real)
        for _ in range(config.ROOT_MAX_ITER):
            if fz == 0 or not np.isfinite(fz):
                break
            h = 1e-6 * (1.0 + abs(z))
            slope = (_transform_residual(transform, z + h, real) - _transform_residual(transform, z - h, real)) / (2.0 * h)
            if slope == 0 or not np.isfinite(slope):
                break
            step = fz / slope
            candidate = complex(z - step)
            if real:
                candidate = complex(candidate.real, 0.0)
            if abs(candidate - start) > limit:
                break
            fc = _transform_residual(transform, candidate, real)
            if not np.isfinite(fc) or abs(fc) >= abs(fz):
                break
            z, fz = candidate, fc
            if abs(step) <= 4 * np.finfo(float).eps * max(abs(z), 1.0):
                break
    except (ArithmeticError, MxQueueError):
        return start
    return z


def _refine_roots(roots: RootSet, transform: Callable[[complex], complex]) -> RootSet:
    locs = [r.location for r in roots.roots]
    refined = []
    for i, r in enumerate(roots.roots):
        if r.multiplicity != 1 or abs(r.location) <= config.AXIS_EPS:
            refined.append(r)
            continue
        spacing = min((abs(r.location - other) for j, other in enumerate(locs) if j != i), default=1.0)
        refined.append(Root(_refine_root(r.location, transform, spacing), 1))
    return RootSet(tuple(refined), roots.residual_bound)


def factorize(
    yt: RationalFn,
    tol: Optional[float] = None,
    root_finder: Callable[[Polynomial, Optional[float]], RootSet] = find_roots,
    transform: Optional[Callable[[complex], complex]] = None,
) -> FactorizationResult:
    """Locate and classify the roots of g and g - f for yt = f/g and compute the atom P(W = 0).

    ``root_finder`` locates the roots of g - f; the verification suite swaps it
    for a faulty one to check that the count assertions fire. ``transform``,
    when given, evaluates E exp(-sY) directly and is used to refine the simple
    roots of g - f.
    """
    f, g = yt.num, yt.den
    if not yt.is_proper():
        raise ValueError("Y-transform must satisfy deg f < deg g")
    if abs(yt(0.0) - 1.0) > 1e-9:
        raise ValueError(f"Y-transform must equal 1 at s = 0, got {yt(0.0)}")

    # E Y = -d/ds E exp(-sY) at 0
    EY = float(-np.real(yt.derivative_at(0.0)))
    if not EY < 0:
        raise StabilityViolation(f"stability violated: E Y = {EY:.6g} >= 0", {"EY": EY})

    g_roots = yt.poles()
    h = g - f
    coeffs = h.coeffs.copy()
    coeffs[0] = 0.0  # f(0) = g(0)
    h_roots = root_finder(Polynomial(coeffs), tol)
    if transform is not None:
        h_roots = _refine_roots(h_roots, transform)

    eps = config.AXIS_EPS
    s_minus, s_plus, s_axis = classify_halfplane(h_roots, eps)
    st_minus, st_plus, st_axis = classify_halfplane(g_roots, eps)

    if st_axis.count:
        raise _mismatch("g has a root on the imaginary axis", stilde_axis=st_axis)
    if s_axis.count != 1 or abs(s_axis.roots[0].location) > eps:
        raise _mismatch("g - f must have exactly one axis root, the simple root at 0", axis=s_axis)

    max_abs = max([abs(r.location) for r in h_roots] + [abs(r.location) for r in g_roots] + [0.0])
    radius = tol if tol is not None else config.cluster_radius(max_abs)
    s_minus, st_minus, cancelled_minus = _cancel_common(s_minus, st_minus, radius)
    s_plus, st_plus, cancelled_plus = _cancel_common(s_plus, st_plus, radius)
    s_plus = RootSet((Root(0j, 1),) + s_plus.roots, s_plus.residual_bound)

    if s_plus.count != st_plus.count:
        raise _mismatch(
            f"plus-side root counts differ: {s_plus.count} vs {st_plus.count}", s_plus=s_plus, stilde_plus=st_plus
        )
    if s_minus.count != st_minus.count:
        raise _mismatch(
            f"minus-side root counts differ: {s_minus.count} vs {st_minus.count}", s_minus=s_minus, stilde_minus=st_minus
        )

    atom_c = s_minus.product() / st_minus.product() if s_minus.count else 1.0 + 0j
    atom = float(np.real(atom_c))
    if abs(np.imag(atom_c)) > 1e-8 or not (0.0 < atom <= 1.0 + 1e-10):
        raise _mismatch(f"atom {atom_c} is not a probability", s_minus=s_minus, stilde_minus=st_minus)
    atom = min(atom, 1.0)

    cancelled = RootSet(tuple(cancelled_minus + cancelled_plus))
    if cancelled.count:
        logger.info(f"Cancelled {cancelled.count} common roots of f and g")
    logger.debug(
        f"factorize: |s-|={s_minus.count}, |s+|={s_plus.count}, atom={atom:.10f}, residual={h_roots.residual_bound:.2e}"
    )
    return FactorizationResult(s_minus, s_plus, st_minus, st_plus, atom, EY, cancelled)


def _one_minus_over(roots: RootSet) -> Polynomial:
    # prod (1 - s/r)^m = prod(-1/r)^m * prod (s - r)^m
    locs = roots.locations()
    lead = np.prod(-1.0 / locs) if locs.size else 1.0
    return Polynomial.from_roots(locs, lead)


def waiting_lst(fr: FactorizationResult) -> RationalFn:
    """E exp(-sW) with value 1 at 0 and limit P(W = 0) at infinity."""
    num = _one_minus_over(fr.stilde_minus).real()
    den = _one_minus_over(fr.s_minus).real()
    return RationalFn(num, den, fr.s_minus, fr.stilde_minus)


def idle_lst(fr: FactorizationResult) -> Tuple[RationalFn, float]:
    """(E exp(sI) for Re s <= 0, mean idle period)."""
    P = Polynomial.from_roots(fr.s_plus.locations()).real()
    P_tilde = Polynomial.from_roots(fr.stilde_plus.locations()).real()
    lst = RationalFn(P_tilde - P, P_tilde, fr.stilde_plus)
    # d/ds [1 - P/P~] at 0 with P(0) = 0
    mean_idle = float(np.real(-P.derivative()(0.0) / P_tilde(0.0)))
    return lst, mean_idle


def idle_tail(fr: FactorizationResult) -> ExpPolyMix:
    """P(I > u), inverted from E exp(-sI)."""
    lst, _ = idle_lst(fr)
    return invert_tail(lst.rescale_argument(-1.0))
