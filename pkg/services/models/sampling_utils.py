# File Path: services/models/sampling_utils.py

# Exact samplers for the dependence families: ordinary pairs (A, B) and the
# stationary first pair (A_res, B*). All draws are vectorized over n and take
# an explicit numpy Generator.

from typing import Tuple

import numpy as np

from .models_service import FAMILY_CHERIYAN, FAMILY_INDEPENDENT, DependenceModel, DiscretePhaseType, PairSample, moments

Pairs = Tuple[np.ndarray, np.ndarray]


def erlang(order: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Erlang(order, rate) draws; order 0 gives 0."""
    order = np.asarray(order)
    safe = np.maximum(order, 1)
    return np.where(order > 0, rng.gamma(safe, 1.0 / rate), 0.0)


def _walk(states: np.ndarray, P: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # Number of further transient visits; column n of P is absorption.
    n_states = P.shape[0]
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    state = states.copy()
    count = np.zeros(state.size, dtype=np.int64)
    active = state < n_states
    while active.any():
        idx = np.nonzero(active)[0]
        u = rng.random(idx.size)
        nxt = (u[:, None] > cum[state[idx]]).sum(axis=1)
        state[idx] = nxt
        moved = nxt < n_states
        count[idx[moved]] += 1
        active[idx] = moved
    return count


def sample_dph(mixing: DiscretePhaseType, n: int, rng: np.random.Generator) -> np.ndarray:
    k = mixing.n_states
    start = np.append(mixing.alpha, max(mixing.defect, 0.0))
    start = start / start.sum()
    first = rng.choice(k + 1, size=n, p=start)
    P = np.hstack([mixing.T, mixing.exit_vector[:, None]])
    return np.where(first < k, 1 + _walk(first, P, rng), 0)


def sample_size_biased_dph(mixing: DiscretePhaseType, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws with P(M = k) proportional to k P(M = k).

    A visit is marked uniformly among all visits: the marked state j has law
    nu / sum(nu) with nu = alpha (I - T)^-1, the part before it is the reversed
    chain from j, the part after it the forward chain.
    """
    k = mixing.n_states
    nu = mixing.visits()
    j = rng.choice(k, size=n, p=nu / nu.sum())

    with np.errstate(divide="ignore", invalid="ignore"):
        back = np.where(nu[:, None] > 0, (nu[None, :] * mixing.T.T) / nu[:, None], 0.0)
        stop = np.where(nu > 0, mixing.alpha / nu, 1.0)
    P_back = np.hstack([back, stop[:, None]])
    P_fwd = np.hstack([mixing.T, mixing.exit_vector[:, None]])
    return _walk(j, P_back, rng) + 1 + _walk(j, P_fwd, rng)


def sample_pairs(m: DependenceModel, n: int, rng: np.random.Generator) -> Pairs:
    if m.family == FAMILY_CHERIYAN:
        (m0, m1, m2), (b0, b1, b2) = m.cr_orders, m.cr_rates
        z0 = rng.gamma(m0, 1.0 / b0, n)
        z1 = rng.gamma(m1, 1.0 / b1, n)
        z2 = rng.gamma(m2, 1.0 / b2, n)
        return z0 + z1, z0 + z2

    if m.is_pair_mixture:
        comps = m.components
        weights = np.array([k.weight for k in comps])
        idx = rng.choice(len(comps), size=n, p=weights / weights.sum())
        a_ord = np.array([k.a_order for k in comps])[idx]
        b_ord = np.array([k.b_order for k in comps])[idx]
        return erlang(a_ord, m.lam, rng), erlang(b_ord, m.mu, rng)

    m_a = sample_dph(m.mixing, n, rng)
    m_b = sample_dph(m.mixing, n, rng) if m.family == FAMILY_INDEPENDENT else m_a
    return erlang(m_a, m.lam, rng), erlang(m_b, m.mu, rng)


def sample_residual_pairs(m: DependenceModel, n: int, rng: np.random.Generator) -> Pairs:
    """(A_res, B*) = (U * A~, B*) where (A~, B*) has the A-size-biased joint law."""
    u = rng.random(n)

    if m.family == FAMILY_CHERIYAN:
        (m0, m1, m2), (b0, b1, b2) = m.cr_orders, m.cr_rates
        # size-bias the summand Z0 or Z1 of A in proportion to its mean
        bias_z0 = rng.random(n) < (m0 / b0) / moments(m).EA
        z0 = np.where(bias_z0, rng.gamma(m0 + 1, 1.0 / b0, n), rng.gamma(m0, 1.0 / b0, n))
        z1 = np.where(bias_z0, rng.gamma(m1, 1.0 / b1, n), rng.gamma(m1 + 1, 1.0 / b1, n))
        z2 = rng.gamma(m2, 1.0 / b2, n)
        return u * (z0 + z1), z0 + z2

    if m.is_pair_mixture:
        comps = m.components
        size = np.array([k.weight * k.a_order / m.lam for k in comps])
        idx = rng.choice(len(comps), size=n, p=size / size.sum())
        a_ord = np.array([k.a_order for k in comps])[idx]
        b_ord = np.array([k.b_order for k in comps])[idx]
        return u * erlang(a_ord + 1, m.lam, rng), erlang(b_ord, m.mu, rng)

    m_a = sample_size_biased_dph(m.mixing, n, rng)
    m_b = sample_dph(m.mixing, n, rng) if m.family == FAMILY_INDEPENDENT else m_a
    return u * erlang(m_a + 1, m.lam, rng), erlang(m_b, m.mu, rng)


def sample_pair(m: DependenceModel, rng: np.random.Generator) -> PairSample:
    a, b = sample_pairs(m, 1, rng)
    return PairSample(float(a[0]), float(b[0]))


def sample_residual_pair(m: DependenceModel, rng: np.random.Generator) -> PairSample:
    a, b = sample_residual_pairs(m, 1, rng)
    return PairSample(float(a[0]), float(b[0]))
