"""
Exponential-polynomial algebra.

An ``ExpPolyMix`` is an atom at zero plus a finite sum of terms
``coef * u**power * exp(rate * u)`` on u >= 0, every rate with negative real
part. The same container is used in two roles:

* as a *tail*: the terms give P(X > u) for u > 0 and ``atom0`` records P(X = 0);
* as a *law*: ``atom0`` is a point mass at 0 and the terms are a density.

``convolve`` and ``laplace`` work on laws, ``mean``/``stop_loss``/``quantile``
on tails. ``density_from_tail`` and ``integrate_tail`` move between the two.
Everything is closed form; nothing here integrates numerically.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import binom, comb, factorial

from common import config
from common.errors import PoleOnAxis
from services.polyrat import RationalFn, merge_roots

logger = logging.getLogger(__name__)

Term = Tuple[complex, int, complex]
ArrayLike = Union[float, Sequence[float], np.ndarray]

# Rates closer than this (relative) are treated as equal.
RATE_MERGE_REL = 1e-7


def _rate_radius(*rates: complex) -> float:
    return RATE_MERGE_REL * (1.0 + max((abs(r) for r in rates), default=0.0))


def _fact(n: int) -> float:
    return float(factorial(n, exact=True))


@dataclass(frozen=True)
class ExpPolyMix:
    atom0: float = 0.0
    coefs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex), compare=False)
    powers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int), compare=False)
    rates: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atom0", float(self.atom0))
        object.__setattr__(self, "coefs", np.asarray(self.coefs, dtype=complex).ravel())
        object.__setattr__(self, "powers", np.asarray(self.powers, dtype=int).ravel())
        object.__setattr__(self, "rates", np.asarray(self.rates, dtype=complex).ravel())
        if not (len(self.coefs) == len(self.powers) == len(self.rates)):
            raise ValueError("coefs, powers and rates must have the same length")
        if np.any(self.powers < 0):
            raise ValueError("powers must be nonnegative")
        if np.any(self.rates.real >= 0):
            raise ValueError("every rate needs a negative real part")

    @classmethod
    def from_terms(cls, terms: Iterable[Term], atom0: float = 0.0) -> "ExpPolyMix":
        terms = list(terms)
        if not terms:
            return cls(atom0)
        coefs, powers, rates = zip(*terms)
        return cls(atom0, np.array(coefs, dtype=complex), np.array(powers, dtype=int), np.array(rates, dtype=complex))

    @property
    def terms(self) -> List[Term]:
        return [(complex(c), int(p), complex(r)) for c, p, r in zip(self.coefs, self.powers, self.rates)]

    def __len__(self) -> int:
        return len(self.coefs)

    def __call__(self, u: ArrayLike):
        return evaluate(self, u)

    def __add__(self, other: "ExpPolyMix") -> "ExpPolyMix":
        return add(self, other)

    def to_dict(self) -> dict:
        return {
            "atom0": self.atom0,
            "terms": [
                {"coef": [c.real, c.imag], "power": p, "rate": [r.real, r.imag]}
                for c, p, r in self.terms
            ],
        }


# ============================================================================
# Construction helpers
# ============================================================================


def erlang_tail(order: int, rate: float) -> ExpPolyMix:
    # P(Erlang(order, rate) > u) = exp(-rate u) sum_{k<order} (rate u)^k / k!
    return ExpPolyMix.from_terms([(rate**k / _fact(k), k, -rate) for k in range(order)])


def erlang_density(order: int, rate: float) -> ExpPolyMix:
    return ExpPolyMix.from_terms([(rate**order / _fact(order - 1), order - 1, -rate)])


def add(f: ExpPolyMix, g: ExpPolyMix) -> ExpPolyMix:
    return simplify(
        ExpPolyMix(
            f.atom0 + g.atom0,
            np.concatenate([f.coefs, g.coefs]),
            np.concatenate([f.powers, g.powers]),
            np.concatenate([f.rates, g.rates]),
        )
    )


def scale(f: ExpPolyMix, factor: float, atom: Optional[float] = None) -> ExpPolyMix:
    """Multiply the terms by ``factor``; the atom is scaled too unless given explicitly."""
    new_atom = f.atom0 * factor if atom is None else atom
    return ExpPolyMix(new_atom, f.coefs * factor, f.powers, f.rates)


def as_function(f: ExpPolyMix) -> ExpPolyMix:
    return ExpPolyMix(0.0, f.coefs, f.powers, f.rates)


def rescale(f: ExpPolyMix, c: float) -> ExpPolyMix:
    """u -> f(u / c): the tail of cX from the tail of X."""
    return ExpPolyMix(f.atom0, f.coefs / c ** f.powers.astype(float), f.powers, f.rates / c)


def simplify(f: ExpPolyMix) -> ExpPolyMix:
    """Merge terms with equal power and (numerically) equal rate, drop exact zeros."""
    merged: List[List] = []
    for c, p, r in f.terms:
        for item in merged:
            if item[1] == p and abs(item[2] - r) < _rate_radius(item[2], r):
                item[0] += c
                break
        else:
            merged.append([c, p, r])
    kept = [(c, p, r) for c, p, r in merged if c != 0]
    return ExpPolyMix.from_terms(kept, f.atom0)


# ============================================================================
# Functionals
# ============================================================================


def evaluate(f: ExpPolyMix, u: ArrayLike):
    """Value of the terms at u >= 0 (real part; the atom is not added)."""
    u_arr = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u_arr)[:, None]
    vals = (f.coefs[None, :] * flat ** f.powers[None, :] * np.exp(f.rates[None, :] * flat)).sum(axis=1)
    out = vals.real
    return float(out[0]) if u_arr.ndim == 0 else out


def density_from_tail(tail: ExpPolyMix) -> ExpPolyMix:
    """Law (atom + density) of X from its tail: density = -d/du tail."""
    terms: List[Term] = []
    for c, p, r in tail.terms:
        terms.append((-c * r, p, r))
        if p > 0:
            terms.append((-c * p, p - 1, r))
    return simplify(ExpPolyMix.from_terms(terms, tail.atom0))


def integrate_tail(f: ExpPolyMix) -> ExpPolyMix:
    """v -> int_v^inf f(u) du, as an ExpPolyMix function (atom 0)."""
    terms: List[Term] = []
    for c, p, r in f.terms:
        # int_v^inf u^p e^{ru} du = e^{rv} sum_k p!/k! v^k (-r)^{-(p-k+1)}
        for k in range(p + 1):
            terms.append((c * _fact(p) / _fact(k) * (-r) ** (-(p - k + 1)), k, r))
    return simplify(ExpPolyMix.from_terms(terms))


def mean(f: ExpPolyMix) -> float:
    """int_0^inf tail(u) du."""
    if len(f) == 0:
        return 0.0
    fact = np.array([_fact(int(p)) for p in f.powers])
    return float(np.sum(f.coefs * fact / (-f.rates) ** (f.powers + 1)).real)


def stop_loss(f: ExpPolyMix, t: ArrayLike):
    """E(X - t)+ = int_t^inf tail(u) du, for t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("stop_loss of a tail is defined for t >= 0")
    return evaluate(integrate_tail(f), t)


def quantile(f: ExpPolyMix, p: float) -> float:
    """Smallest q with tail(q) <= 1 - p; 0 when the atom already covers level p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    target = 1.0 - p
    if 1.0 - f.atom0 <= target or len(f) == 0:
        return 0.0

    def excess(x: float) -> float:
        return evaluate(f, x) - target

    hi = max(1.0, mean(f) / target)
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("quantile bracket did not close; tail is not a distribution tail")
    return float(brentq(excess, 0.0, hi, xtol=1e-10, rtol=4 * np.finfo(float).eps, maxiter=500))


def laplace(f: ExpPolyMix, s: Union[complex, np.ndarray], include_atom: bool = True):
    """atom0 (optionally) + sum coef * p! / (s - rate)^(p+1)."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))[:, None]
    fact = np.array([_fact(int(p)) for p in f.powers])
    vals = (f.coefs * fact / (s_arr - f.rates) ** (f.powers + 1)).sum(axis=1)
    if include_atom:
        vals = vals + f.atom0
    return complex(vals[0]) if np.ndim(s) == 0 else vals


# ============================================================================
# Convolution
# ============================================================================


def _convolve_terms(a: Term, b: Term) -> List[Term]:
    # int_0^u (u-x)^p e^{r1(u-x)} x^q e^{r2 x} dx
    c1, p, r1 = a
    c2, q, r2 = b
    coef = c1 * c2
    if abs(r1 - r2) < _rate_radius(r1, r2):
        r = 0.5 * (r1 + r2)
        return [(coef * _fact(p) * _fact(q) / _fact(p + q + 1), p + q + 1, r)]

    delta = r2 - r1
    out: List[Term] = []
    for j in range(p + 1):
        base = coef * comb(p, j, exact=True) * (-1) ** j
        n = q + j
        # int_0^u x^n e^{delta x} dx = n!/(-delta)^{n+1} - sum_k n!/k! (-delta)^{k-n-1} u^k e^{delta u}
        out.append((base * _fact(n) / (-delta) ** (n + 1), p - j, r1))
        for k in range(n + 1):
            out.append((-base * _fact(n) / _fact(k) * (-delta) ** (k - n - 1), p - j + k, r2))
    return out


def convolve(f: ExpPolyMix, g: ExpPolyMix) -> ExpPolyMix:
    """Convolution of two laws: atoms are point masses at 0, terms are densities."""
    terms: List[Term] = []
    for c, p, r in g.terms:
        terms.append((f.atom0 * c, p, r))
    for c, p, r in f.terms:
        terms.append((g.atom0 * c, p, r))
    for a in f.terms:
        for b in g.terms:
            terms.extend(_convolve_terms(a, b))
    return simplify(ExpPolyMix.from_terms([t for t in terms if t[0] != 0], f.atom0 * g.atom0))


def expect_shifted(g: ExpPolyMix, law: ExpPolyMix, t: ArrayLike):
    """E[g(t + Y)] for t >= 0, g an ExpPolyMix function and Y distributed as ``law``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    total = law.atom0 * np.atleast_1d(evaluate(g, t_arr)).astype(complex)
    for c, p, r in g.terms:
        for d, q, rho in law.terms:
            w = -(r + rho)
            # int_0^inf (t+y)^p e^{r(t+y)} y^q e^{rho y} dy
            inner = np.zeros_like(t_arr, dtype=complex)
            for j in range(p + 1):
                inner += comb(p, j, exact=True) * t_arr ** (p - j) * _fact(j + q) / w ** (j + q + 1)
            total += c * d * np.exp(r * t_arr) * inner
    out = total.real
    return float(out[0]) if np.ndim(t) == 0 else out


# ============================================================================
# Partial fractions
# ============================================================================


def _power_series(shift: complex, power: int, order: int) -> np.ndarray:
    # Taylor coefficients of (shift + h)^power in h, up to h^(order-1); power may be negative
    j = np.arange(order if power < 0 else min(order, power + 1))
    out = np.zeros(order, dtype=complex)
    out[: len(j)] = binom(power, j) * complex(shift) ** (power - j)
    return out


def _principal_series(lst: RationalFn, poles: Sequence, pole, order: int) -> np.ndarray:
    """Taylor coefficients at ``pole`` of (s - pole)^order * (-L(s)/s), up to h^(order-1).

    Built from the factors of L where they are known, so a numerator with a
    high-order zero next to the pole does not cancel away.
    """
    p = pole.location
    if lst.num_factored:
        series = np.zeros(order, dtype=complex)
        series[0] = -lst.num_lead / lst.den_lead
        for z in lst.num_roots:
            series = np.convolve(series, _power_series(p - z.location, z.multiplicity, order))[:order]
    else:
        series = -lst.num.taylor(p, order) / lst.den_lead
    series = np.convolve(series, _power_series(p, -1, order))[:order]
    for other in poles:
        if other is pole:
            continue
        series = np.convolve(series, _power_series(p - other.location, -other.multiplicity, order))[:order]
    return series


def invert_tail(lst: RationalFn, axis_eps: Optional[float] = None) -> ExpPolyMix:
    """Tail P(X > u) of the distribution whose LST is ``lst``.

    The tail transform (1 - L(s)) / s has the same principal parts as -L(s)/s
    at the poles of L; a pole p of order m contributes
    sum_k R_k u^(k-1)/(k-1)! e^(p u).
    """
    eps = config.AXIS_EPS if axis_eps is None else axis_eps
    if lst.num_degree > lst.den_degree and not lst.num.is_zero:
        raise ValueError("improper transform cannot be a distribution LST")
    atom0 = float(np.real(lst.value_at_infinity()))

    at_zero = complex(lst(0.0))
    if abs(at_zero - 1.0) > 1e-8:
        raise ValueError(f"transform is not normalized: L(0) - 1 = {at_zero - 1.0:.3e}")
    if lst.den_degree == 0 or (lst.den - lst.num).degree == 0:
        return ExpPolyMix(atom0)

    poles = lst.poles()
    max_abs = max((abs(r.location) for r in poles), default=0.0)
    poles = merge_roots(poles.roots, _rate_radius(max_abs))
    bad = [r for r in poles if r.location.real >= -eps]
    if bad:
        raise PoleOnAxis(
            "transform has a pole in the closed right half-plane",
            {"poles": [[complex(r.location).real, complex(r.location).imag, r.multiplicity] for r in bad]},
        )

    terms: List[Term] = []
    for pole in poles:
        m = pole.multiplicity
        series = _principal_series(lst, poles, pole, m)
        for k in range(1, m + 1):
            residue = series[m - k]
            terms.append((residue / _fact(k - 1), k - 1, pole.location))

    tail = simplify(ExpPolyMix.from_terms(terms, atom0))
    start = evaluate(tail, 0.0)
    if abs(start - (1.0 - atom0)) > 1e-6:
        logger.warning(f"⚠️ inverted tail starts at {start:.8f}, expected {1.0 - atom0:.8f}")
    logger.debug(f"invert_tail: {len(poles)} poles, {len(tail)} terms, atom {atom0:.6f}")
    return tail
