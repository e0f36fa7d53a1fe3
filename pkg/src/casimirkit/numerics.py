"""Small numerical helpers: Richardson tables, derivatives, Gauss panels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def observed_order(values, ratio=2.0):
    """Convergence order p from the last three entries of a geometric ladder.

    For v_k = v + c h_k^p with h_{k+1} = h_k / ratio, the successive
    differences shrink by ratio**p.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("need at least three ladder values")
    d1 = v[-2] - v[-3]
    d2 = v[-1] - v[-2]
    if d1 == 0 or d2 == 0 or d2 / d1 <= 0:
        return None
    return -math.log(abs(d2 / d1)) / math.log(ratio)


def richardson_table(values, order, ratio=2.0, step=None):
    """Richardson table for a ladder with step h_k = h_0 / ratio**k.

    Column j removes the error term of power ``order + (j-1)*step``
    (``step`` defaults to ``order``).  Returns the list of columns.
    """
    step = order if step is None else step
    cols = [list(map(float, values))]
    for j in range(1, len(values)):
        p = order + (j - 1) * step
        f = ratio**p
        prev = cols[-1]
        cols.append([(f * prev[i + 1] - prev[i]) / (f - 1.0) for i in range(len(prev) - 1)])
    return cols


@dataclass(frozen=True)
class Extrapolated:
    value: float
    error: float
    order: float


def extrapolate(values, ratio=2.0, order=None) -> Extrapolated:
    """Richardson-extrapolate a ladder, estimating the order if not given.

    The error estimate is the spread between the two most refined entries
    of the last two table columns.
    """
    if order is None:
        p = observed_order(values, ratio)
        if p is None or p <= 0:
            return Extrapolated(float(values[-1]), abs(values[-1] - values[-2]), float("nan"))
        # snap to an integer when the estimate is clearly one
        order = float(round(p)) if abs(p - round(p)) < 0.25 and round(p) > 0 else p
    cols = richardson_table(values, order, ratio)
    best = cols[-1][-1]
    if len(cols) >= 2:
        err = abs(best - cols[-2][-1])
    else:
        err = float("inf")
    return Extrapolated(best, err, order)


@dataclass(frozen=True)
class Derivative:
    value: float
    error: float


def central_derivative(f, x, h, noise=0.0, levels=2) -> Derivative:
    """Central differences at steps h, h/2, ... refined by Richardson.

    With the default two levels this is one Richardson step and the error is
    the gap between the two raw differences.  With more levels the error is
    the gap between the last two refined values.  ``noise`` is an absolute
    error bound on each evaluation of ``f``; it is propagated into the error.
    """
    if levels < 2:
        raise ValueError("need at least two step sizes")
    steps = [h / 2**k for k in range(levels)]
    raw = [(f(x + s) - f(x - s)) / (2 * s) for s in steps]
    cols = richardson_table(raw, 2.0, 2.0)
    value = cols[-1][0]
    if levels == 2:
        err = abs(raw[1] - raw[0]) / 3
    else:
        err = abs(cols[-1][0] - cols[-2][-1])
    return Derivative(value, err + 2 * noise / steps[-1])


@lru_cache(maxsize=16)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def graded_panels(scale, t_max=64.0, n=20, knee=2.0, width=4.0):
    """Gauss-Legendre nodes/weights on [0, t_max], one row per integral.

    Row i uses panels [0, c_i], [c_i, 2c_i], [2c_i, 4c_i], ... up to ``knee``
    and then uniform panels of ``width``.  The geometric part keeps every
    panel at least a half-width away from a singularity at t <= -c_i.
    Rows are padded with zero-width panels so the result is rectangular.
    """
    c = np.minimum(np.asarray(scale, dtype=float), knee)
    kgeo = int(math.ceil(math.log2(knee / c.min()))) + 1
    geo = np.minimum(c[:, None] * 2.0 ** np.arange(kgeo)[None, :], knee)
    geo = np.concatenate([np.zeros((c.size, 1)), geo], axis=1)
    if geo[0, -1] < knee:
        geo = np.concatenate([geo, np.full((c.size, 1), knee)], axis=1)
    tail = np.arange(knee + width, t_max + width / 2, width)
    edges = np.concatenate([geo, np.broadcast_to(tail, (c.size, tail.size))], axis=1)
    lo = edges[:, :-1]
    hi = edges[:, 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x, w = gauss_legendre(n)
    nodes = (mid[:, :, None] + half[:, :, None] * x[None, None, :]).reshape(c.size, -1)
    weights = (half[:, :, None] * w[None, None, :]).reshape(c.size, -1)
    return nodes, weights
