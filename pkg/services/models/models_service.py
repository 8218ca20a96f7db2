# File Path: services/models/models_service.py

"""
Bivariate matrix-exponential dependence families for (A, B): inter-arrival time
A and the service requirement B of the same customer.

Families
--------
MixedErlangPositive     (Erlang(lam, M), Erlang(mu, M))
MixedErlangIndependent  (Erlang(lam, M1), Erlang(mu, M2)), M1, M2 iid
MixedErlangNegative     (Erlang(lam, M), Erlang(mu, K + 1 - M)), M finite on {1..K}
KibbleMoran             positive family with M a sum of m geometric(p) counts
CheriyanRamabhadran     (Z0 + Z1, Z0 + Z2), Zi ~ Erlang(beta_i, m_i) independent

M is either finitely supported (``FiniteSupport``) or discrete phase-type
(``DiscretePhaseType``). Every transform is built symbolically, and the
denominator of every RationalFn built here carries its roots, so repeated
poles are never re-found numerically.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from common.errors import InvalidDistribution, InvalidModelError, SingularMatrix, StabilityViolation
from services.inversion.exppoly_utils import ExpPolyMix, add, erlang_tail, invert_tail, scale
from services.polyrat import Polynomial, RationalFn, Root, RootSet, merge_roots

logger = logging.getLogger(__name__)

FAMILY_POSITIVE = "MixedErlangPositive"
FAMILY_INDEPENDENT = "MixedErlangIndependent"
FAMILY_NEGATIVE = "MixedErlangNegative"
FAMILY_KIBBLE_MORAN = "KibbleMoran"
FAMILY_CHERIYAN = "CheriyanRamabhadran"

FAMILIES = (FAMILY_POSITIVE, FAMILY_INDEPENDENT, FAMILY_NEGATIVE, FAMILY_KIBBLE_MORAN, FAMILY_CHERIYAN)
SCENARIO_FAMILIES = {"positive": FAMILY_POSITIVE, "independent": FAMILY_INDEPENDENT, "negative": FAMILY_NEGATIVE}

WEIGHT_TOL = 1e-12


# ============================================================================
# Mixing distributions
# ============================================================================


@dataclass(frozen=True)
class FiniteSupport:
    """Weights pi_1..pi_K of M on {1..K}."""

    weights: Tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidDistribution("weights must be a non-empty list", {"weights": list(self.weights)})
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise InvalidDistribution("weights must be finite and nonnegative", {"weights": w.tolist()})
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidDistribution(f"weights sum to {w.sum():.15g}, not 1", {"weights": w.tolist()})
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def K(self) -> int:
        return len(self.weights)

    def pmf(self) -> np.ndarray:
        return np.asarray(self.weights)

    def support(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def is_symmetric(self, tol: float = WEIGHT_TOL) -> bool:
        w = self.pmf()
        return bool(np.all(np.abs(w - w[::-1]) <= tol))

    def mean(self) -> float:
        return float(np.dot(self.support(), self.pmf()))

    def variance(self) -> float:
        k = self.support()
        return float(np.dot(k**2, self.pmf()) - self.mean() ** 2)


@dataclass(frozen=True)
class DiscretePhaseType:
    """M = number of transient states visited before absorption; start vector alpha, transient matrix T."""

    alpha: np.ndarray = field(compare=False)
    T: np.ndarray = field(compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        n = alpha.size
        if T.shape != (n, n):
            raise InvalidModelError("T must be square with the size of alpha", {"alpha": n, "T": list(T.shape)})
        if np.any(alpha < -WEIGHT_TOL) or alpha.sum() > 1.0 + WEIGHT_TOL:
            raise InvalidDistribution("alpha must be nonnegative with sum <= 1", {"alpha": alpha.tolist()})
        if np.any(T < 0) or np.any(T.sum(axis=1) > 1.0 + WEIGHT_TOL):
            raise InvalidModelError("T must be substochastic", {"T": T.tolist()})
        if abs(np.linalg.det(np.eye(n) - T)) < 1e-14:
            raise SingularMatrix("I - T is singular", {"T": T.tolist()})
        object.__setattr__(self, "alpha", np.clip(alpha, 0.0, None))
        object.__setattr__(self, "T", T)

    @property
    def n_states(self) -> int:
        return self.alpha.size

    @property
    def exit_vector(self) -> np.ndarray:
        return 1.0 - self.T.sum(axis=1)

    @property
    def defect(self) -> float:
        return float(1.0 - self.alpha.sum())

    def visits(self) -> np.ndarray:
        # nu = alpha (I - T)^-1, expected visits per state
        return scipy.linalg.solve((np.eye(self.n_states) - self.T).T, self.alpha)

    def mean(self) -> float:
        return float(self.visits().sum())

    def factorial_moment2(self) -> float:
        # E[M(M-1)] = 2 alpha T (I - T)^-2 1
        n = self.n_states
        inv1 = scipy.linalg.solve(np.eye(n) - self.T, np.ones(n))
        inv2 = scipy.linalg.solve(np.eye(n) - self.T, inv1)
        return float(2.0 * self.alpha @ self.T @ inv2)

    def variance(self) -> float:
        m1 = self.mean()
        return self.factorial_moment2() + m1 - m1**2

    def pgf(self, z: complex) -> complex:
        # z alpha (I - z T)^-1 t
        n = self.n_states
        try:
            x = scipy.linalg.solve(np.eye(n) - z * self.T, self.exit_vector.astype(complex))
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            raise SingularMatrix(f"resolvent singular at z={z}", {"z": [complex(z).real, complex(z).imag]}) from e
        return complex(self.defect + z * self.alpha @ x)

    def eigen_roots(self) -> Tuple[Root, ...]:
        """Eigenvalues of T with multiplicities; read off the diagonal when T is triangular."""
        T = self.T
        if np.array_equal(T, np.triu(T)) or np.array_equal(T, np.tril(T)):
            diag = np.diag(T)
            values, counts = np.unique(diag, return_counts=True)
            return tuple(Root(complex(v), int(c)) for v, c in zip(values, counts))
        eig = np.linalg.eigvals(T)
        return merge_roots([Root(complex(v), 1) for v in eig], 1e-7 * (1.0 + np.max(np.abs(eig))))

    def resolvent_polynomials(self) -> Tuple[Polynomial, Polynomial]:
        """(N, chi) with alpha (wI - T)^-1 t = N(w) / chi(w).

        chi is the characteristic polynomial of T; the adjugate comes from the
        Faddeev-LeVerrier recursion M_{n-1} = I, M_{k-1} = T M_k + c_k I.
        """
        n = self.n_states
        chi_desc = np.poly(self.T) if n > 0 else np.array([1.0])
        chi = np.asarray(chi_desc[::-1], dtype=float)  # ascending, chi[n] = 1
        t = self.exit_vector
        coeffs = np.zeros(n)
        M = np.eye(n)
        coeffs[n - 1] = self.alpha @ M @ t
        for k in range(n - 1, 0, -1):
            M = self.T @ M + chi[k] * np.eye(n)
            coeffs[k - 1] = self.alpha @ M @ t
        return Polynomial(coeffs), Polynomial(chi)


MixingDistribution = Union[FiniteSupport, DiscretePhaseType]


class PairComponent(NamedTuple):
    a_order: int
    b_order: int
    weight: float


class PairSample(NamedTuple):
    a: float
    b: float


# ============================================================================
# Dependence model
# ============================================================================


@dataclass(frozen=True)
class DependenceModel:
    family: str
    lam: Optional[float] = None
    mu: Optional[float] = None
    c: float = 1.0
    mixing: Optional[MixingDistribution] = None
    order: Optional[int] = None
    p: Optional[float] = None
    cr_orders: Optional[Tuple[int, int, int]] = None
    cr_rates: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidModelError(f"unknown family: {self.family}", {"family": self.family})
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidModelError("speed c must be positive", {"c": self.c})
        if self.family == FAMILY_CHERIYAN:
            if self.cr_orders is None or self.cr_rates is None or len(self.cr_orders) != 3 or len(self.cr_rates) != 3:
                raise InvalidModelError("CheriyanRamabhadran needs three orders and three rates")
            if any(int(k) != k or k < 1 for k in self.cr_orders):
                raise InvalidModelError("orders must be positive integers", {"orders": list(self.cr_orders)})
            if any(not (np.isfinite(b) and b > 0) for b in self.cr_rates):
                raise InvalidModelError("rates must be positive", {"beta": list(self.cr_rates)})
            return
        for name, value in (("lambda", self.lam), ("mu", self.mu)):
            if value is None or not (np.isfinite(value) and value > 0):
                raise InvalidModelError(f"rate {name} must be positive", {name: value})
        if self.mixing is None:
            raise InvalidModelError("mixing distribution missing", {"family": self.family})
        if self.family == FAMILY_NEGATIVE and not isinstance(self.mixing, FiniteSupport):
            raise InvalidModelError("MixedErlangNegative needs finitely supported mixing on {1..K}")
        if isinstance(self.mixing, DiscretePhaseType) and self.mixing.defect > WEIGHT_TOL:
            raise InvalidDistribution("M must be at least 1: alpha has to sum to 1", {"defect": self.mixing.defect})

    @property
    def is_pair_mixture(self) -> bool:
        return isinstance(self.mixing, FiniteSupport)

    @property
    def components(self) -> Tuple[PairComponent, ...]:
        """Finite list of (a-order, b-order, weight) pairs with positive weight."""
        if not self.is_pair_mixture:
            raise InvalidModelError(f"{self.family} with phase-type mixing has no finite pair list")
        w = self.mixing.pmf()
        K = self.mixing.K
        if self.family == FAMILY_POSITIVE:
            comps = [PairComponent(i + 1, i + 1, w[i]) for i in range(K)]
        elif self.family == FAMILY_NEGATIVE:
            comps = [PairComponent(i + 1, K - i, w[i]) for i in range(K)]
        else:
            comps = [PairComponent(i + 1, j + 1, w[i] * w[j]) for i in range(K) for j in range(K)]
        return tuple(c for c in comps if c.weight > 0)

    def summary(self) -> Dict:
        mom = moments(self)
        return {"family": self.family, "parameters": model_to_dict(self), "rho": mom.rho, "corr": mom.corr}


# ============================================================================
# Builders
# ============================================================================


def build_scenario(kind: str, K: int, weights: Sequence[float], lam: float, mu: float, c: float = 1.0) -> DependenceModel:
    """positive / independent / negative mixed-Erlang pair with M ~ weights on {1..K}."""
    if kind not in SCENARIO_FAMILIES:
        raise InvalidModelError(f"unknown scenario kind: {kind}", {"kind": kind})
    if int(K) != K or K < 1:
        raise InvalidModelError("K must be a positive integer", {"K": K})
    if len(weights) != K:
        raise InvalidDistribution(f"expected {K} weights, got {len(weights)}", {"weights": list(weights)})
    mixing = FiniteSupport(tuple(weights))
    return DependenceModel(SCENARIO_FAMILIES[kind], lam=float(lam), mu=float(mu), c=float(c), mixing=mixing, order=int(K))


def build_dph_scenario(kind: str, alpha, T, lam: float, mu: float, c: float = 1.0) -> DependenceModel:
    if kind not in ("positive", "independent"):
        raise InvalidModelError("phase-type mixing is available for the positive and independent scenarios", {"kind": kind})
    mixing = DiscretePhaseType(np.asarray(alpha, dtype=float), np.asarray(T, dtype=float))
    return DependenceModel(SCENARIO_FAMILIES[kind], lam=float(lam), mu=float(mu), c=float(c), mixing=mixing)


def uniform_scenario(kind: str, K: int, lam: float, mu: float, c: float = 1.0) -> DependenceModel:
    return build_scenario(kind, K, [1.0 / K] * K, lam, mu, c)


def mm1(lam: float, mu: float, c: float = 1.0) -> DependenceModel:
    return build_scenario("positive", 1, [1.0], lam, mu, c)


def kibble_moran(m: int, p: float, lam: float, mu: float, c: float = 1.0) -> DependenceModel:
    """m-fold convolution of Kibble and Moran's bivariate exponential: M = sum of m geometric(p)."""
    if int(m) != m or m < 1:
        raise InvalidModelError("order m must be a positive integer", {"m": m})
    if not 0.0 < p <= 1.0:
        raise InvalidModelError("p must lie in (0, 1]", {"p": p})
    T = np.diag(np.full(m, 1.0 - p)) + np.diag(np.full(m - 1, p), k=1)
    alpha = np.zeros(m)
    alpha[0] = 1.0
    return DependenceModel(
        FAMILY_KIBBLE_MORAN,
        lam=float(lam),
        mu=float(mu),
        c=float(c),
        mixing=DiscretePhaseType(alpha, T),
        order=int(m),
        p=float(p),
    )


def cheriyan_ramabhadran(orders: Sequence[int], rates: Sequence[float], c: float = 1.0) -> DependenceModel:
    return DependenceModel(
        FAMILY_CHERIYAN, c=float(c), cr_orders=tuple(int(k) for k in orders), cr_rates=tuple(float(b) for b in rates)
    )


# ============================================================================
# Transforms
# ============================================================================


def _lam_minus(lam: float) -> Polynomial:
    return Polynomial([lam, -1.0])  # lam - s


def _mu_plus(mu: float, c: float) -> Polynomial:
    return Polynomial([mu, 1.0 / c])  # mu + s/c


def _dph_composed(mixing: DiscretePhaseType, w: Polynomial, root_map) -> RationalFn:
    # P_M evaluated at z = 1/w(s): alpha (w I - T)^-1 t = N(w)/chi(w)
    N, chi = mixing.resolvent_polynomials()
    roots = []
    for e in mixing.eigen_roots():
        roots.extend(Root(r, e.multiplicity) for r in root_map(e.location))
    return RationalFn(N.compose(w), chi.compose(w), RootSet(tuple(roots)))


def _product(a: RationalFn, b: RationalFn) -> RationalFn:
    return RationalFn(a.num * b.num, a.den * b.den, a.den_roots.union(b.den_roots))


def _erlang_power(rate: float, linear: Polynomial, root: complex, order: int) -> RationalFn:
    # rate^order / linear(s)^order with linear(root) = 0
    return RationalFn(Polynomial([rate**order]), linear**order, RootSet((Root(complex(root), order),)))


def y_transform(m: DependenceModel) -> RationalFn:
    """E exp(-s Y) = f(s)/g(s) for Y = B/c - A."""
    c = m.c
    if m.family == FAMILY_CHERIYAN:
        (m0, m1, m2), (b0, b1, b2) = m.cr_orders, m.cr_rates
        result = _product(
            _erlang_power(b1, Polynomial([b1, -1.0]), b1, m1),
            _erlang_power(b2, Polynomial([b2, 1.0 / c]), -b2 * c, m2),
        )
        kappa = 1.0 / c - 1.0
        if abs(kappa) > 1e-14:
            result = _product(_erlang_power(b0, Polynomial([b0, kappa]), -b0 / kappa, m0), result)
        return result

    lam, mu = m.lam, m.mu
    lm, mp = _lam_minus(lam), _mu_plus(mu, c)

    if m.is_pair_mixture:
        comps = m.components
        A = max(k.a_order for k in comps)
        B = max(k.b_order for k in comps)
        lm_pow = [lm**k for k in range(A + 1)]
        mp_pow = [mp**k for k in range(B + 1)]
        f = Polynomial([0.0])
        for a, b, w in comps:
            f = f + (lm_pow[A - a] * mp_pow[B - b]).scale(w * lam**a * mu**b)
        g = lm_pow[A] * mp_pow[B]
        roots = RootSet((Root(complex(lam), A), Root(complex(-mu * c), B)))
        return RationalFn(f, g, roots)

    mixing = m.mixing
    if m.family in (FAMILY_POSITIVE, FAMILY_KIBBLE_MORAN):
        w = (lm * mp).scale(1.0 / (lam * mu))

        def s_roots(e: complex):
            # (lam - s)(mu c + s) = c lam mu e  <=>  s^2 - (lam - mu c) s - c lam mu (1 - e) = 0
            b = lam - mu * c
            disc = np.sqrt(complex(b * b + 4.0 * c * lam * mu * (1.0 - e)))
            return [(b - disc) / 2.0, (b + disc) / 2.0]

        return _dph_composed(mixing, w, s_roots)

    # independent: P_M(lam/(lam - s)) * P_M(mu/(mu + s/c))
    a_part = _dph_composed(mixing, lm.scale(1.0 / lam), lambda e: [lam * (1.0 - e)])
    b_part = _dph_composed(mixing, mp.scale(1.0 / mu), lambda e: [mu * c * (e - 1.0)])
    return _product(a_part, b_part)


def marginal_b_lst(m: DependenceModel) -> RationalFn:
    """E exp(-s B) as a RationalFn with known poles."""
    if m.family == FAMILY_CHERIYAN:
        (m0, _, m2), (b0, _, b2) = m.cr_orders, m.cr_rates
        return _product(
            _erlang_power(b0, Polynomial([b0, 1.0]), -b0, m0),
            _erlang_power(b2, Polynomial([b2, 1.0]), -b2, m2),
        )
    mu = m.mu
    if m.is_pair_mixture:
        comps = m.components
        B = max(k.b_order for k in comps)
        lin = Polynomial([mu, 1.0])
        f = Polynomial([0.0])
        for _, b, w in comps:
            f = f + (lin ** (B - b)).scale(w * mu**b)
        return RationalFn(f, lin**B, RootSet((Root(complex(-mu), B),)))
    return _dph_composed(m.mixing, Polynomial([1.0, 1.0 / mu]), lambda e: [mu * (e - 1.0)])


def joint_lst(m: DependenceModel, s1: complex, s2: complex) -> complex:
    """E exp(-s1 A - s2 B)."""
    if m.family == FAMILY_CHERIYAN:
        (m0, m1, m2), (b0, b1, b2) = m.cr_orders, m.cr_rates
        return complex((b0 / (b0 + s1 + s2)) ** m0 * (b1 / (b1 + s1)) ** m1 * (b2 / (b2 + s2)) ** m2)

    lam, mu = m.lam, m.mu
    za = lam / (lam + s1)
    zb = mu / (mu + s2)
    if m.is_pair_mixture:
        return complex(sum(w * za**a * zb**b for a, b, w in m.components))

    mixing = m.mixing
    if m.family == FAMILY_INDEPENDENT:
        return mixing.pgf(za) * mixing.pgf(zb)
    # alpha [((lam+s1)(mu+s2)/(lam mu)) I - T]^-1 t
    w = (lam + s1) * (mu + s2) / (lam * mu)
    n = mixing.n_states
    matrix = w * np.eye(n) - mixing.T
    try:
        if abs(np.linalg.det(matrix)) < 1e-300:
            raise np.linalg.LinAlgError("singular resolvent")
        x = scipy.linalg.solve(matrix, mixing.exit_vector.astype(complex))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SingularMatrix("resolvent singular", {"s1": str(s1), "s2": str(s2)}) from e
    return complex(mixing.alpha @ x)


def y_transform_at(m: DependenceModel, s: complex) -> complex:
    """E exp(-sY) at one point, straight from the joint transform."""
    return joint_lst(m, -s, s / m.c)


# ============================================================================
# Moments
# ============================================================================


@dataclass(frozen=True)
class MomentReport:
    EA: float
    EB: float
    VarA: float
    VarB: float
    Cov: float
    corr: float
    rho: float
    EY: float

    def to_dict(self) -> Dict[str, float]:
        return {k: float(getattr(self, k)) for k in ("EA", "EB", "VarA", "VarB", "Cov", "corr", "rho", "EY")}


def _moment_report(EA, EB, VarA, VarB, Cov, c) -> MomentReport:
    denom = np.sqrt(VarA * VarB)
    corr = Cov / denom if denom > 0 else 0.0
    return MomentReport(EA, EB, VarA, VarB, Cov, float(corr), EB / (c * EA), EB / c - EA)


def moments(m: DependenceModel) -> MomentReport:
    if m.family == FAMILY_CHERIYAN:
        (m0, m1, m2), (b0, b1, b2) = m.cr_orders, m.cr_rates
        EA = m0 / b0 + m1 / b1
        EB = m0 / b0 + m2 / b2
        VarA = m0 / b0**2 + m1 / b1**2
        VarB = m0 / b0**2 + m2 / b2**2
        return _moment_report(EA, EB, VarA, VarB, m0 / b0**2, m.c)

    lam, mu = m.lam, m.mu
    if m.is_pair_mixture:
        comps = m.components
        a = np.array([k.a_order for k in comps], dtype=float)
        b = np.array([k.b_order for k in comps], dtype=float)
        w = np.array([k.weight for k in comps])
        EA = float(w @ a) / lam
        EB = float(w @ b) / mu
        VarA = float(w @ (a + a**2)) / lam**2 - EA**2
        VarB = float(w @ (b + b**2)) / mu**2 - EB**2
        Cov = float(w @ (a * b)) / (lam * mu) - EA * EB
        return _moment_report(EA, EB, VarA, VarB, Cov, m.c)

    mix = m.mixing
    EM, VarM = mix.mean(), mix.variance()
    EA, EB = EM / lam, EM / mu
    VarA = (EM + VarM) / lam**2
    VarB = (EM + VarM) / mu**2
    Cov = 0.0 if m.family == FAMILY_INDEPENDENT else VarM / (lam * mu)
    return _moment_report(EA, EB, VarA, VarB, Cov, m.c)


def check_stability(m: DependenceModel) -> MomentReport:
    mom = moments(m)
    if not mom.EY < 0:
        raise StabilityViolation(
            f"stability violated: E(B/c - A) = {mom.EY:.6g} >= 0 (rho = {mom.rho:.6g})",
            {"EY": mom.EY, "rho": mom.rho},
        )
    return mom


def marginal_b_tail(m: DependenceModel) -> ExpPolyMix:
    """1 - F_B(w) in closed form."""
    if m.is_pair_mixture:
        by_order: Dict[int, float] = {}
        for _, b, w in m.components:
            by_order[b] = by_order.get(b, 0.0) + w
        tail = ExpPolyMix()
        for b in sorted(by_order):
            tail = add(tail, scale(erlang_tail(b, m.mu), by_order[b]))
        return tail
    return invert_tail(marginal_b_lst(m))


# ============================================================================
# JSON model files
# ============================================================================


class ModelSpec(BaseModel):
    """On-disk model description (see docs/model-schema.md)."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    family: Literal[
        "MixedErlangPositive", "MixedErlangIndependent", "MixedErlangNegative", "KibbleMoran", "CheriyanRamabhadran"
    ]
    c: float = Field(1.0, gt=0)
    lam: Optional[float] = Field(None, alias="lambda", gt=0)
    mu: Optional[float] = Field(None, gt=0)
    K: Optional[int] = Field(None, ge=1)
    m: Optional[int] = Field(None, ge=1)
    p: Optional[float] = Field(None, gt=0, le=1)
    weights: Optional[List[float]] = None
    alpha: Optional[List[float]] = None
    T: Optional[List[List[float]]] = None
    beta: Optional[List[float]] = Field(None, min_length=3, max_length=3)
    orders: Optional[List[int]] = Field(None, min_length=3, max_length=3)


def _require(desc: ModelSpec, *names: str) -> None:
    missing = [n for n in names if getattr(desc, n) is None]
    if missing:
        raise InvalidModelError(f"{desc.family} requires fields: {', '.join(missing)}", {"missing": missing})


def model_from_dict(data: Dict) -> DependenceModel:
    try:
        desc = ModelSpec.model_validate(data)
    except ValidationError as e:
        raise InvalidModelError("model description does not match the schema", {"errors": json.loads(e.json())}) from e

    if desc.family == FAMILY_CHERIYAN:
        _require(desc, "orders", "beta")
        return cheriyan_ramabhadran(desc.orders, desc.beta, desc.c)
    _require(desc, "lam", "mu")
    if desc.family == FAMILY_KIBBLE_MORAN:
        _require(desc, "m", "p")
        return kibble_moran(desc.m, desc.p, desc.lam, desc.mu, desc.c)

    kind = {v: k for k, v in SCENARIO_FAMILIES.items()}[desc.family]
    if desc.alpha is not None or desc.T is not None:
        _require(desc, "alpha", "T")
        return build_dph_scenario(kind, desc.alpha, desc.T, desc.lam, desc.mu, desc.c)
    _require(desc, "weights")
    K = desc.K if desc.K is not None else len(desc.weights)
    return build_scenario(kind, K, desc.weights, desc.lam, desc.mu, desc.c)


def load_model(path: Union[str, Path]) -> DependenceModel:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise InvalidModelError(f"model file is not valid JSON: {e}", {"path": str(path)}) from e
    model = model_from_dict(data)
    logger.info(f"✅ Loaded {model.family} model from {path}")
    return model


def model_to_dict(m: DependenceModel) -> Dict:
    out: Dict = {"family": m.family, "c": m.c}
    if m.family == FAMILY_CHERIYAN:
        out.update({"orders": list(m.cr_orders), "beta": list(m.cr_rates)})
        return out
    out.update({"lambda": m.lam, "mu": m.mu})
    if m.family == FAMILY_KIBBLE_MORAN:
        out.update({"m": m.order, "p": m.p})
    elif m.is_pair_mixture:
        out.update({"K": m.mixing.K, "weights": list(m.mixing.weights)})
    else:
        out.update({"alpha": m.mixing.alpha.tolist(), "T": m.mixing.T.tolist()})
    return out
