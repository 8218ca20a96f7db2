# File Path: services/inversion/inversion_service.py

"""
Stop-loss transforms of the difference D = A - B for the mixed-Erlang
scenarios, computed exactly inside the exponential-polynomial algebra.
"""

import logging
from typing import Union

import numpy as np

from common.errors import InvalidModelError

from .exppoly_utils import erlang_density, erlang_tail, expect_shifted, integrate_tail

logger = logging.getLogger(__name__)


def difference_mean(m) -> float:
    if not getattr(m, "is_pair_mixture", False):
        raise InvalidModelError("difference stop-loss needs a finitely mixed Erlang model", {"family": m.family})
    return float(sum(w * (a / m.lam - b / m.mu) for a, b, w in m.components))


def difference_stop_loss(m, t: Union[float, np.ndarray]):
    """E(D - t)+ for D = A - B and any real t.

    t >= 0: E(X - Y - t)+ = E[SL_X(t + Y)] per mixture component, SL_X the
    stop-loss transform of X. t < 0: E(D - t)+ = E D - t + E(Y - X + t)+.
    """
    mean_d = difference_mean(m)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    pos = t_arr >= 0
    out = np.zeros_like(t_arr)
    if (~pos).any():
        out[~pos] = mean_d - t_arr[~pos]

    for a, b, w in m.components:
        sl_a = integrate_tail(erlang_tail(a, m.lam))
        sl_b = integrate_tail(erlang_tail(b, m.mu))
        if pos.any():
            out[pos] += w * expect_shifted(sl_a, erlang_density(b, m.mu), t_arr[pos])
        if (~pos).any():
            out[~pos] += w * expect_shifted(sl_b, erlang_density(a, m.lam), -t_arr[~pos])

    return float(out[0]) if np.ndim(t) == 0 else out
