"""Constructed measurement series for the statistics tests.

Each fixture is engineered so that a quoted profile or verdict holds by
construction; none of them is real experimental data.
"""
import math

import numpy as np

from casimirkit.boxes import plates_pressure_ideal
from casimirkit.stats import ErrorCombinationPolicy, MeasurementPoint, TheoryBand, level_factor

POLICY = ErrorCombinationPolicy()


def pressure_mpa(a):
    """Ideal-metal pressure magnitude in mPa, a stand-in for measured means."""
    return abs(plates_pressure_ideal(a, 0.0).value) * 1e3


def _point(a, mean, d_tot, r=1.0, d_a=0.0):
    """Point with d_syst / s_mean = r whose combined error is d_tot."""
    q = POLICY.q(r)
    if r == 0:
        return MeasurementPoint(a, mean, d_tot / q, 0.0, 0.1 * d_tot, d_a)
    half = 0.5 * d_tot / q
    return MeasurementPoint(a, mean, half, half, half / r, d_a)


RELATIVE_ERROR_TARGETS = ((162.0, 0.0019), (400.0, 0.009), (746.0, 0.090))
AGREEMENT_TARGETS = ((162.0, 0.019), (300.0, 0.014), (745.0, 0.097))


def relative_error_series():
    return [_point(a, pressure_mpa(a), rel * pressure_mpa(a)) for a, rel in RELATIVE_ERROR_TARGETS]


def agreement_series():
    """Series plus a theory-error function with Xi/|mean| on target (quadrature rule).

    Experimental and theoretical parts split the target 3:4 so that their
    quadrature sum is exactly 5 parts.
    """
    series = []
    theory = {}
    for a, rel in AGREEMENT_TARGETS:
        m = pressure_mpa(a)
        series.append(_point(a, m, 0.6 * rel * m, r=0.0))
        theory[a] = 0.8 * rel * m
    return series, lambda a: theory[float(a)]


def dense_series(lo=160.0, hi=750.0, step=5.0, rel_err=0.01, d_a=0.5):
    a = np.arange(lo, hi + step / 2, step)
    return [_point(float(x), pressure_mpa(x), rel_err * pressure_mpa(x), r=2.0, d_a=d_a) for x in a]


def offset_band(series, lo=500.0, hi=600.0, width=0.005):
    """Band centred on the data, pushed well clear of the crosses on [lo, hi].

    The band grid is the data grid padded by 50 nm, and the shift ramps up
    over one grid step on either side of the window so that crosses just
    outside it still touch the band.
    """
    a = np.array([p.a for p in series])
    grid = np.concatenate([[a[0] - 50.0], a, [a[-1] + 50.0]])
    centre = np.array([pressure_mpa(x) for x in grid])
    d_tot = np.interp(grid, a, [POLICY.q(2.0) * (p.d_rand + p.d_syst) for p in series])
    shift = np.where((grid >= lo) & (grid <= hi), 3.0 * (d_tot + width * centre), 0.0)
    return TheoryBand.from_center(grid, centre + shift, width * centre)


def two_level_differences(n=100, inside_95=96, outside_999=97, seed=3):
    """(diffs, xi95) with ``inside_95`` of n dots inside Xi at 0.95 and
    ``outside_999`` of them outside the shrunk 0.999 interval.

    The 0.999 interval is the 0.95 half-width times ``shrink`` < 1, the
    "interval shrunk" construction for a tighter statistic.
    """
    rng = np.random.default_rng(seed)
    a = np.linspace(160.0, 750.0, n)
    xi95 = 0.01 * np.array([pressure_mpa(x) for x in a])
    shrink = 0.5
    u = np.empty(n)
    idx = rng.permutation(n)
    n_in_999 = n - outside_999
    # inside both intervals, inside only the wide one, outside both
    u[idx[:n_in_999]] = rng.uniform(0.0, 0.9 * shrink, n_in_999)
    u[idx[n_in_999:inside_95]] = rng.uniform(1.1 * shrink, 0.95, inside_95 - n_in_999)
    u[idx[inside_95:]] = rng.uniform(1.2, 2.0, n - inside_95)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    diffs = [(float(x), float(s * v * w)) for x, s, v, w in zip(a, sign, u, xi95)]

    def xi(x, scale=1.0):
        return scale * np.interp(x, a, xi95)

    return diffs, xi, shrink


def tight_subrange_differences(level=0.999, lo=500.0, hi=600.0):
    """Differences that leave the ``level`` interval on [lo, hi] and sit at 0 elsewhere.

    Xi at ``level`` comes from the 0.95 half-width by the normal-quantile
    ratio, the same rule make_xi applies.
    """
    a = np.arange(160.0, 751.0, 5.0)
    base = 0.01 * np.array([pressure_mpa(x) for x in a])
    scale = level_factor(level)
    diffs = [(float(x), 1.5 * scale * b if lo <= x <= hi else 0.0) for x, b in zip(a, base)]

    def xi(x, lev=level):
        return level_factor(lev) * np.interp(x, a, base)

    return diffs, xi

