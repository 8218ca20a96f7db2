"""
Polynomial and rational-function algebra over the complex numbers.

Coefficients are stored in ascending degree order (``coeffs[k]`` multiplies
``s**k``), the same convention as ``numpy.polynomial.polynomial``. Every
transform manipulation in the other services goes through these types.

Root finding uses the companion-matrix eigenvalues (``numpy.roots``), then
clusters nearby eigenvalues into multiple roots and polishes each root with
Newton steps on the original polynomial (on its (m-1)-th derivative for an
m-fold root).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from common import config
from common.errors import NonConvergence

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]

# Trailing coefficients below this fraction of the largest one are dropped.
TRIM_REL = 1e-14
# Backward-error threshold for accepting a cluster of eigenvalues as one multiple root.
MULTIPLICITY_TOL = 1e-12
# Candidate radius (relative) for multiple-root detection before the derivative test.
CANDIDATE_REL = 1e-3
# Backward error above which a polished root is reported as non-converged.
BACKWARD_ERROR_MAX = 1e-8


def _trim(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.size == 0:
        return np.zeros(1, dtype=complex)
    peak = np.max(np.abs(coeffs))
    if peak == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(coeffs) > TRIM_REL * peak)[0]
    return coeffs[: keep[-1] + 1].copy()


class Polynomial:
    """Complex polynomial, ascending coefficients, trailing zeros trimmed."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Union[Sequence[Number], np.ndarray, Number]):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        self.coeffs = _trim(arr)

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls([value])

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: Number = 1.0) -> "Polynomial":
        roots = list(roots)
        if not roots:
            return cls([lead])
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def linear(cls, root: complex) -> "Polynomial":
        # s - root
        return cls([-root, 1.0])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(np.max(np.abs(self.coeffs)), 1e-300)
        return bool(np.all(np.abs(self.coeffs.imag) <= tol * scale))

    def real(self) -> "Polynomial":
        return Polynomial(self.coeffs.real)

    def __call__(self, s):
        return npoly.polyval(s, self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polyadd(self.coeffs, _as_poly(other).coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polysub(self.coeffs, _as_poly(other).coeffs))

    def __mul__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.coeffs, other.coeffs))
        return self.scale(other)

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        return Polynomial(npoly.polypow(self.coeffs, n)) if n > 0 else Polynomial([1.0])

    def scale(self, factor: Number) -> "Polynomial":
        return Polynomial(self.coeffs * complex(factor))

    def derivative(self, k: int = 1) -> "Polynomial":
        if k > self.degree:
            return Polynomial([0.0])
        return Polynomial(npoly.polyder(self.coeffs, k))

    def compose(self, inner: "Polynomial") -> "Polynomial":
        # Horner on polynomials: self(inner(s))
        result = Polynomial([self.coeffs[-1]])
        for c in self.coeffs[-2::-1]:
            result = result * inner + Polynomial([c])
        return result

    def rescale_argument(self, factor: Number) -> "Polynomial":
        # p(factor * s)
        powers = complex(factor) ** np.arange(len(self.coeffs))
        return Polynomial(self.coeffs * powers)

    def taylor(self, at: complex, order: int) -> np.ndarray:
        """Coefficients of p around ``at``: p(s) = sum_k out[k] (s - at)^k, k < order."""
        work = self.coeffs.astype(complex).copy()
        out = np.zeros(order, dtype=complex)
        n = len(work)
        for k in range(min(order, n)):
            # synthetic division by (s - at); remainder is the k-th Taylor coefficient
            acc = 0j
            quotient = np.zeros(max(n - k - 1, 1), dtype=complex)
            for j in range(n - k - 1, -1, -1):
                acc = acc * at + work[j]
                if j > 0:
                    quotient[j - 1] = acc
            out[k] = acc
            work = quotient
        return out

    def divide_exact(self, divisor: "Polynomial", rel_tol: float = 1e-8) -> "Polynomial":
        quotient, remainder = npoly.polydiv(self.coeffs, divisor.coeffs)
        scale = max(np.max(np.abs(self.coeffs)), 1e-300)
        if np.max(np.abs(remainder)) > rel_tol * scale:
            raise ValueError(f"inexact polynomial division, remainder {np.max(np.abs(remainder)):.3e}")
        return Polynomial(quotient)

    def __repr__(self) -> str:
        terms = ", ".join(f"{c:.6g}" for c in self.coeffs)
        return f"Polynomial([{terms}])"


def _as_poly(value: Union[Polynomial, Number]) -> Polynomial:
    return value if isinstance(value, Polynomial) else Polynomial([value])


def poly_arith(a: Polynomial, b: Union[Polynomial, Number], op: str) -> Polynomial:
    """Add, subtract, multiply or scale; result is trimmed."""
    if op == "add":
        return a + _as_poly(b)
    if op == "sub":
        return a - _as_poly(b)
    if op == "mul":
        return a * _as_poly(b)
    if op == "scale":
        factor = b.coeffs[0] if isinstance(b, Polynomial) else b
        return a.scale(factor)
    raise ValueError(f"unknown polynomial operation: {op}")


# ============================================================================
# Roots
# ============================================================================


class Root(NamedTuple):
    location: complex
    multiplicity: int


@dataclass(frozen=True)
class RootSet:
    roots: Tuple[Root, ...] = ()
    residual_bound: float = 0.0

    @property
    def count(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    def locations(self) -> np.ndarray:
        """Root locations repeated by multiplicity."""
        if not self.roots:
            return np.zeros(0, dtype=complex)
        return np.concatenate([np.full(r.multiplicity, r.location, dtype=complex) for r in self.roots])

    def scaled(self, factor: float) -> "RootSet":
        return RootSet(tuple(Root(r.location * factor, r.multiplicity) for r in self.roots), self.residual_bound)

    def union(self, other: "RootSet") -> "RootSet":
        return RootSet(self.roots + other.roots, max(self.residual_bound, other.residual_bound))

    def product(self, shift: complex = 0.0) -> complex:
        # prod (shift - r)^m
        return complex(np.prod([(shift - r.location) ** r.multiplicity for r in self.roots])) if self.roots else 1.0

    def to_list(self) -> List[dict]:
        return [
            {"re": float(np.real(r.location)), "im": float(np.imag(r.location)), "multiplicity": int(r.multiplicity)}
            for r in self.roots
        ]

    @classmethod
    def from_locations(cls, locations: Iterable[complex], residual_bound: float = 0.0) -> "RootSet":
        return cls(tuple(Root(complex(z), 1) for z in locations), residual_bound)


def merge_roots(roots: Sequence[Root], radius: float) -> Tuple[Root, ...]:
    """Single-linkage merge of roots closer than ``radius``; centroid weighted by multiplicity."""
    items = list(roots)
    n = len(items)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(items[i].location - items[j].location) < radius:
                parent[find(i)] = find(j)

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(items[i])

    merged = []
    for members in groups.values():
        mult = sum(m.multiplicity for m in members)
        centre = sum(m.location * m.multiplicity for m in members) / mult
        merged.append(Root(complex(centre), mult))
    return tuple(sorted(merged, key=lambda r: (r.location.real, r.location.imag)))


def _backward_scale(coeffs: np.ndarray, at: complex, k: int) -> float:
    # sum_j |C(j,k) a_j| |at|^(j-k): magnitude scale of the k-th Taylor coefficient
    j = np.arange(k, len(coeffs))
    binom = np.array([math.comb(int(jj), k) for jj in j], dtype=float)
    return float(np.sum(binom * np.abs(coeffs[k:]) * np.abs(at) ** (j - k))) or 1e-300


def _is_multiple_root(poly: Polynomial, centre: complex, m: int) -> bool:
    taylor = poly.taylor(centre, m)
    for k in range(m):
        if abs(taylor[k]) > MULTIPLICITY_TOL * _backward_scale(poly.coeffs, centre, k):
            return False
    return True


def _polish(poly: Polynomial, root: Root, max_iter: int) -> Tuple[complex, bool]:
    # Newton on p^(m-1), which has a simple root where p has an m-fold one.
    target = poly.derivative(root.multiplicity - 1)
    slope = target.derivative()
    z = root.location
    fz = target(z)
    for _ in range(max_iter):
        if fz == 0:
            return z, True
        dz = slope(z)
        if dz == 0:
            return z, True
        step = fz / dz
        candidate = z - step
        fc = target(candidate)
        if abs(fc) >= abs(fz):
            return z, True
        z, fz = candidate, fc
        if abs(step) <= 4 * np.finfo(float).eps * max(abs(z), 1.0):
            return z, True
    return z, False


def _relative_residual(poly: Polynomial, z: complex) -> float:
    return abs(poly(z)) / _backward_scale(poly.coeffs, z, 0)


def find_roots(p: Polynomial, tol: Optional[float] = None) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    ``tol`` is the cluster radius; by default ``config.cluster_radius`` of the
    largest root modulus. Raises NonConvergence when polishing cannot bring a
    root to a backward error below ``BACKWARD_ERROR_MAX``.
    """
    if p.degree < 1:
        raise ValueError("find_roots needs a polynomial of degree >= 1")
    if not np.all(np.isfinite(p.coeffs)):
        raise ValueError("polynomial coefficients must be finite")

    coeffs = p.coeffs
    real_input = p.is_real()
    n_zero = int(np.argmax(coeffs != 0))
    work = Polynomial(coeffs[n_zero:] / coeffs[-1])  # monic, origin roots removed

    found: List[Root] = []
    if n_zero:
        found.append(Root(0j, n_zero))

    if work.degree >= 1:
        companion_input = work.coeffs.real if real_input else work.coeffs
        try:
            raw = np.roots(companion_input[::-1])
        except np.linalg.LinAlgError as e:
            raise NonConvergence(f"eigenvalue iteration failed: {e}", {"degree": p.degree}) from e

        max_abs = float(np.max(np.abs(raw))) if raw.size else 0.0
        radius = tol if tol is not None else config.cluster_radius(max_abs)
        candidates = merge_roots([Root(complex(z), 1) for z in raw], CANDIDATE_REL * (1.0 + max_abs))

        clustered: List[Root] = []
        for cand in candidates:
            if cand.multiplicity > 1 and not _is_multiple_root(work, cand.location, cand.multiplicity):
                members = [Root(complex(z), 1) for z in raw if abs(z - cand.location) < CANDIDATE_REL * (1.0 + max_abs)]
                clustered.extend(merge_roots(members, radius))
            else:
                clustered.append(cand)

        if real_input:
            clustered = _symmetrize(clustered, radius)

        for root in clustered:
            z, converged = _polish(work, root, config.ROOT_MAX_ITER)
            if real_input and abs(z.imag) <= radius:
                z = complex(z.real, 0.0)
            if not converged and _relative_residual(work, z) > BACKWARD_ERROR_MAX:
                raise NonConvergence(
                    "root polishing budget exhausted",
                    {"root": [z.real, z.imag], "multiplicity": root.multiplicity, "degree": p.degree},
                )
            found.append(Root(z, root.multiplicity))

        if real_input:
            found = list(_mirror_upper(found, radius))

    result = tuple(sorted(found, key=lambda r: (r.location.real, r.location.imag)))
    residual = max((abs(work(r.location)) for r in result if r.location != 0), default=0.0)
    if sum(r.multiplicity for r in result) != p.degree:
        raise NonConvergence("root count does not match degree", {"degree": p.degree})
    logger.debug(f"find_roots: degree {p.degree}, {len(result)} distinct roots, residual {residual:.2e}")
    return RootSet(result, float(residual))


def _symmetrize(roots: List[Root], radius: float) -> List[Root]:
    # Keep real roots and the upper half-plane; the lower half is restored by conjugation.
    upper = [r for r in roots if r.location.imag > radius]
    lower = [r for r in roots if r.location.imag < -radius]
    real = [Root(complex(r.location.real, 0.0), r.multiplicity) for r in roots if abs(r.location.imag) <= radius]
    if sum(r.multiplicity for r in upper) != sum(r.multiplicity for r in lower):
        logger.warning("⚠️ conjugate pairing failed; keeping unsymmetrized roots")
        return roots
    return real + upper


def _mirror_upper(roots: List[Root], radius: float) -> List[Root]:
    out = list(roots)
    for r in roots:
        if r.location.imag > radius:
            out.append(Root(r.location.conjugate(), r.multiplicity))
    return out


def classify_halfplane(r: RootSet, axis_eps: Optional[float] = None) -> Tuple[RootSet, RootSet, RootSet]:
    """Split into (Re < -eps, Re > +eps, |Re| <= eps); multiplicities preserved."""
    eps = config.AXIS_EPS if axis_eps is None else axis_eps
    minus = tuple(x for x in r.roots if x.location.real < -eps)
    plus = tuple(x for x in r.roots if x.location.real > eps)
    axis = tuple(x for x in r.roots if abs(x.location.real) <= eps)
    return (
        RootSet(minus, r.residual_bound),
        RootSet(plus, r.residual_bound),
        RootSet(axis, r.residual_bound),
    )


# ============================================================================
# Rational functions
# ============================================================================



def _uses_factors(poly: Polynomial, roots: Optional[RootSet]) -> bool:
    if roots is None or poly.is_zero:
        return False
    if roots.count == poly.degree:
        return True
    # a leading coefficient lost to trimming is recovered from the constant term
    return poly.coeffs[0] != 0 and all(r.location != 0 for r in roots.roots)


def _factored_lead(poly: Polynomial, roots: RootSet) -> complex:
    if poly.coeffs[0] != 0 and all(r.location != 0 for r in roots.roots):
        # p(0) prod (1 - s/r)^m has leading coefficient p(0) prod (-1/r)^m
        return complex(poly.coeffs[0] * np.prod([(-1.0 / r.location) ** r.multiplicity for r in roots.roots]))
    return poly.lead


def _factored_value(lead: complex, roots: RootSet, s):
    # lead * prod (s - r)^m, evaluated factor by factor
    s_arr = np.asarray(s, dtype=complex)
    out = np.full(s_arr.shape, lead, dtype=complex)
    for r in roots.roots:
        out = out * (s_arr - r.location) ** r.multiplicity
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RationalFn:
    """num(s) / den(s).

    ``den_roots`` is set when the denominator is known in factored form,
    ``num_roots`` likewise for the numerator. A side whose roots are known is
    evaluated from its factors, which stays accurate near clustered or
    high-order roots where the expanded coefficients cancel.
    """

    num: Polynomial
    den: Polynomial
    den_roots: Optional[RootSet] = field(default=None, compare=False)
    num_roots: Optional[RootSet] = field(default=None, compare=False)

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("rational function with zero denominator")

    @property
    def num_factored(self) -> bool:
        return _uses_factors(self.num, self.num_roots)

    @property
    def den_factored(self) -> bool:
        return _uses_factors(self.den, self.den_roots)

    @property
    def num_degree(self) -> int:
        return self.num_roots.count if self.num_factored else self.num.degree

    @property
    def den_degree(self) -> int:
        return self.den_roots.count if self.den_factored else self.den.degree

    @property
    def num_lead(self) -> complex:
        return _factored_lead(self.num, self.num_roots) if self.num_factored else self.num.lead

    @property
    def den_lead(self) -> complex:
        return _factored_lead(self.den, self.den_roots) if self.den_factored else self.den.lead

    def _num_value(self, s):
        return _factored_value(self.num_lead, self.num_roots, s) if self.num_factored else self.num(s)

    def _den_value(self, s):
        return _factored_value(self.den_lead, self.den_roots, s) if self.den_factored else self.den(s)

    def __call__(self, s):
        return self._num_value(s) / self._den_value(s)

    def derivative_at(self, s: complex) -> complex:
        n, d = self._num_value(s), self._den_value(s)
        return (self.num.derivative()(s) * d - n * self.den.derivative()(s)) / (d * d)

    def is_proper(self) -> bool:
        return self.num.is_zero or self.num_degree < self.den_degree

    def value_at_infinity(self) -> complex:
        if self.num.is_zero or self.num_degree < self.den_degree:
            return 0j
        if self.num_degree == self.den_degree:
            return self.num_lead / self.den_lead
        return complex(np.inf)

    def poles(self) -> RootSet:
        if self.den_roots is not None:
            return self.den_roots
        if self.den.degree < 1:
            return RootSet()
        return find_roots(self.den)

    def real(self) -> "RationalFn":
        return RationalFn(self.num.real(), self.den.real(), self.den_roots, self.num_roots)

    def rescale_argument(self, factor: float) -> "RationalFn":
        # R(factor * s); poles and zeros move to root / factor
        roots = self.den_roots.scaled(1.0 / factor) if self.den_roots is not None else None
        zeros = self.num_roots.scaled(1.0 / factor) if self.num_roots is not None else None
        return RationalFn(self.num.rescale_argument(factor), self.den.rescale_argument(factor), roots, zeros)
