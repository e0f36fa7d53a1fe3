"""Experiment-versus-theory comparison.

Combines random and systematic errors of measured Casimir pressures or
forces, and judges theories either by band overlap or by the confidence
interval of the theory-minus-experiment differences.  Values carry whatever
units the caller uses; separations are in nm.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats as _sps

DEFAULT_LEVEL = 0.95
# fraction of points outside the interval needed to exclude a theory
DEFAULT_EXCLUSION_FRACTION = 0.95


@dataclass(frozen=True)
class MeasurementPoint:
    """One measured value with its random and systematic errors.

    ``s_mean`` is the standard deviation of the mean; ``d_a`` is the error
    of the separation itself (nm), used for the arms of the crosses.
    """

    a: float
    mean: float
    d_rand: float
    d_syst: float
    s_mean: float
    d_a: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"separation must be > 0 nm, got {self.a}")
        for name in ("d_rand", "d_syst", "s_mean", "d_a"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class ErrorCombinationPolicy:
    """Maps r = d_syst / s_mean to the factor q in d_tot = q (d_rand + d_syst).

    Without a ``table`` q rises linearly in r/(1+r) from ``q_low`` (r = 0) to
    ``q_high`` (r = inf).  A table is a sequence of (r, q) pairs with r
    increasing; the last q also serves r = inf.
    """

    beta: float = DEFAULT_LEVEL
    q_low: float = 0.71
    q_high: float = 0.81
    table: Optional[tuple] = None

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("confidence level must lie in (0, 1)")
        if self.table is not None:
            tab = tuple((float(r), float(q)) for r, q in self.table)
            rs = [r for r, _ in tab]
            qs = [q for _, q in tab]
            if len(tab) < 2 or any(np.diff(rs) <= 0) or any(np.diff(qs) < 0):
                raise ValueError("q table needs >= 2 rows, r increasing and q non-decreasing")
            object.__setattr__(self, "table", tab)
            lo, hi = qs[0], qs[-1]
        else:
            if self.q_high < self.q_low:
                raise ValueError("q_high must be >= q_low")
            lo, hi = self.q_low, self.q_high
        if math.isclose(self.beta, 0.95) and not (0.71 <= lo and hi <= 0.81):
            raise ValueError("at beta = 0.95 every q must lie in [0.71, 0.81]")

    def q(self, r) -> float:
        if r < 0 or math.isnan(r):
            raise ValueError("r must be >= 0")
        if self.table is None:
            if math.isinf(r):
                return self.q_high
            return self.q_low + (self.q_high - self.q_low) * r / (1.0 + r)
        rs, qs = zip(*self.table)
        if math.isinf(r):
            return qs[-1]
        return float(np.interp(r, rs, qs))


def error_ratio(point: MeasurementPoint) -> float:
    """r = d_syst / s_mean, with 0/0 -> 0 and x/0 -> inf."""
    if point.s_mean == 0:
        return math.inf if point.d_syst > 0 else 0.0
    return point.d_syst / point.s_mean


def total_experimental_error(point: MeasurementPoint, policy=ErrorCombinationPolicy()) -> float:
    return policy.q(error_ratio(point)) * (point.d_rand + point.d_syst)


def _nonzero_mean(point):
    if point.mean == 0:
        raise ValueError(f"zero mean value at a = {point.a} nm")
    return abs(point.mean)


def relative_error_profile(series: Sequence[MeasurementPoint], policy=ErrorCombinationPolicy()):
    """[(a, d_tot / |mean|)] for every point."""
    if not series:
        raise ValueError("empty series")
    return [(p.a, total_experimental_error(p, policy) / _nonzero_mean(p)) for p in series]


def agreement_measure(xi: Callable[[float], float], series: Sequence[MeasurementPoint]):
    """[(a, Xi(a) / |mean|)]: half-width of the difference interval relative to the data."""
    return [(p.a, float(xi(p.a)) / _nonzero_mean(p)) for p in series]


# ---------------------------------------------------------------------------
# confidence half-widths


def level_factor(level: float, reference: float = DEFAULT_LEVEL) -> float:
    """Ratio of two-sided normal quantiles, used to move a half-width between levels."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    return float(_sps.norm.ppf(0.5 + level / 2) / _sps.norm.ppf(0.5 + reference / 2))


def make_xi(
    series: Sequence[MeasurementPoint],
    theory_error: Callable[[float], float],
    policy=ErrorCombinationPolicy(),
    level: float = DEFAULT_LEVEL,
    rule: str = "quadrature",
):
    """Half-width Xi(a) of the theory-minus-experiment interval at ``level``.

    ``rule="quadrature"``: sqrt(d_tot^2 + d_theor^2).  ``rule="linear"``:
    q (d_tot + d_theor) with q from ``policy`` at r = d_theor / d_tot.  Both
    are given at ``policy.beta`` and rescaled to ``level`` by normal quantiles.
    Returns a callable that interpolates linearly between the series points.
    """
    if rule not in ("quadrature", "linear"):
        raise ValueError(f"unknown Xi rule {rule!r}")
    a = np.array([p.a for p in series], dtype=float)
    order = np.argsort(a)
    scale = level_factor(level, policy.beta)
    values = []
    for p in series:
        de = total_experimental_error(p, policy)
        dt = float(theory_error(p.a))
        if dt < 0:
            raise ValueError("theoretical error must be >= 0")
        if rule == "quadrature":
            values.append(math.hypot(de, dt))
        else:
            r = dt / de if de > 0 else math.inf
            values.append(policy.q(r) * (de + dt))
    xs = a[order]
    ys = np.asarray(values)[order] * scale

    def xi(x):
        return np.interp(x, xs, ys)

    return xi


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    """``consistent``, ``excluded`` or ``inconclusive`` at a confidence level."""

    kind: str
    level: float

    def __str__(self):
        if self.kind == "excluded":
            return f"ExcludedAt({self.level:g})"
        return f"{self.kind.capitalize()}({self.level:g})"


def Consistent(level):
    return Verdict("consistent", level)


def ExcludedAt(level):
    return Verdict("excluded", level)


def Inconclusive(level):
    return Verdict("inconclusive", level)


def decide(flags, level, exclusion_fraction=DEFAULT_EXCLUSION_FRACTION) -> Verdict:
    """Consistent when >= ``level`` of the points agree, excluded when at least
    ``exclusion_fraction`` disagree, inconclusive otherwise."""
    f = np.asarray(flags, dtype=bool)
    if f.size == 0:
        raise ValueError("no points in range")
    inside = f.mean()
    if inside >= level:
        return Consistent(level)
    if 1.0 - inside >= exclusion_fraction:
        return ExcludedAt(level)
    return Inconclusive(level)


@dataclass(frozen=True)
class RangeVerdict:
    lo: float
    hi: float
    count: int
    verdict: Verdict


@dataclass(frozen=True)
class ComparisonVerdict:
    """Per-point flags (True = agreement) and range verdicts for one method."""

    method: str
    level: float
    a: tuple
    flags: tuple
    verdict: Verdict
    windows: tuple = ()
    subranges: tuple = ()
    agreement: tuple = ()
    exclusion_fraction: float = DEFAULT_EXCLUSION_FRACTION

    def over(self, lo, hi) -> RangeVerdict:
        """Verdict restricted to lo <= a <= hi."""
        a = np.asarray(self.a)
        mask = (a >= lo) & (a <= hi)
        flags = np.asarray(self.flags)[mask]
        return RangeVerdict(lo, hi, int(mask.sum()), decide(flags, self.level, self.exclusion_fraction))

    def to_dict(self):
        def rv(r):
            return {"lo_nm": r.lo, "hi_nm": r.hi, "count": r.count, "verdict": str(r.verdict)}

        return {
            "method": self.method,
            "level": self.level,
            "exclusion_fraction": self.exclusion_fraction,
            "verdict": str(self.verdict),
            "points": [{"a_nm": a, "agrees": bool(f)} for a, f in zip(self.a, self.flags)],
            "windows": [rv(w) for w in self.windows],
            "subranges": [rv(s) for s in self.subranges],
            "agreement": [{"a_nm": a, "ratio": r} for a, r in self.agreement],
        }


def sliding_windows(a, width=100.0, step=50.0):
    """Windows [lo, lo + width] starting at min(a) and moving by ``step``."""
    a = np.asarray(a, dtype=float)
    lo = float(a.min())
    out = []
    while True:
        hi = lo + width
        out.append((lo, hi))
        if hi >= a.max():
            return out
        lo += step


def _finish(method, level, a, flags, exclusion_fraction, windows, subranges, agreement=()):
    base = ComparisonVerdict(
        method, level, tuple(a), tuple(bool(f) for f in flags),
        decide(flags, level, exclusion_fraction), exclusion_fraction=exclusion_fraction,
    )
    win = tuple(w for w in (base.over(lo, hi) for lo, hi in windows) if w.count > 0)
    sub = tuple(base.over(lo, hi) for lo, hi in subranges)
    return ComparisonVerdict(
        method, level, base.a, base.flags, base.verdict, win, sub, tuple(agreement), exclusion_fraction
    )


@dataclass(frozen=True)
class TheoryBand:
    """Lower and upper theoretical values on a separation grid (nm)."""

    a: np.ndarray = field(repr=False)
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)

    def __post_init__(self):
        a, lo, hi = (np.asarray(x, dtype=float) for x in (self.a, self.lo, self.hi))
        if not (a.ndim == 1 and a.shape == lo.shape == hi.shape and a.size >= 2):
            raise ValueError("band arrays must be 1-d, equal length, at least 2 points")
        if np.any(np.diff(a) <= 0):
            raise ValueError("band separations must be strictly increasing")
        if np.any(lo > hi):
            raise ValueError("band lower edge exceeds upper edge")
        for name, v in (("a", a), ("lo", lo), ("hi", hi)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_center(cls, a, center, half_width):
        c = np.asarray(center, dtype=float)
        w = np.asarray(half_width, dtype=float)
        return cls(a, c - w, c + w)

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self):
        return 0.5 * (self.hi - self.lo)

    def at(self, x):
        return np.interp(x, self.a, self.lo), np.interp(x, self.a, self.hi)

    def covers(self, lo, hi) -> bool:
        return self.a[0] <= lo and hi <= self.a[-1]

    def meets(self, x0, x1, y0, y1) -> bool:
        """Does the band region over [x0, x1] meet the value range [y0, y1]?

        Needs one x with lo(x) <= y1 and hi(x) >= y0.  g(x) = max(lo - y1,
        y0 - hi) is piecewise linear, so its minimum sits at a grid point, an
        end point, or where the two linear pieces cross.
        """
        x0 = max(x0, self.a[0])
        x1 = min(x1, self.a[-1])
        inner = self.a[(self.a > x0) & (self.a < x1)]
        knots = np.concatenate([[x0], inner, [x1]])
        lo, hi = self.at(knots)
        f1 = lo - y1
        f2 = y0 - hi
        if np.any(np.maximum(f1, f2) <= 0):
            return True
        d1 = np.diff(f1)
        d2 = np.diff(f2)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (f2[:-1] - f1[:-1]) / (d1 - d2)
            g = f1[:-1] + t * d1
        ok = np.isfinite(t) & (t > 0) & (t < 1)
        return bool(np.any(ok & (g <= 0)))


def band_overlap_method(
    series: Sequence[MeasurementPoint],
    band: TheoryBand,
    policy=ErrorCombinationPolicy(),
    exclusion_fraction=DEFAULT_EXCLUSION_FRACTION,
    windows=None,
    subranges=(),
) -> ComparisonVerdict:
    """A point agrees when its error cross [a +- d_a] x [mean +- d_tot] meets the band."""
    if not series:
        raise ValueError("empty series")
    a = [p.a for p in series]
    if not band.covers(min(a), max(a)):
        raise ValueError(
            f"band covers {band.a[0]:g}-{band.a[-1]:g} nm but the data span {min(a):g}-{max(a):g} nm"
        )
    flags = []
    for p in series:
        d = total_experimental_error(p, policy)
        flags.append(band.meets(p.a - p.d_a, p.a + p.d_a, p.mean - d, p.mean + d))
    windows = sliding_windows(a) if windows is None else windows
    return _finish("BandOverlap", policy.beta, a, flags, exclusion_fraction, windows, subranges)


def difference_interval_method(
    diffs,
    xi: Callable[[float], float],
    level: float = DEFAULT_LEVEL,
    exclusion_fraction=DEFAULT_EXCLUSION_FRACTION,
    windows=None,
    subranges=(),
    series: Optional[Sequence[MeasurementPoint]] = None,
) -> ComparisonVerdict:
    """A point agrees when |P_theor - P_expt| <= Xi(a).

    ``diffs`` is a sequence of (a, P_theor - P_expt).  Passing the measured
    ``series`` adds the agreement-measure profile to the verdict.
    """
    if len(diffs) == 0:
        raise ValueError("no differences given")
    a = [float(x) for x, _ in diffs]
    flags = []
    for x, d in diffs:
        half = float(xi(x))
        if not half > 0:
            raise ValueError(f"Xi must be > 0, got {half} at a = {x} nm")
        flags.append(abs(d) <= half)
    windows = sliding_windows(a) if windows is None else windows
    agreement = agreement_measure(xi, series) if series is not None else ()
    return _finish(
        "DifferenceInterval", level, a, flags, exclusion_fraction, windows, subranges, agreement
    )


def differences(series: Sequence[MeasurementPoint], theory: Callable[[float], float]):
    return [(p.a, float(theory(p.a)) - p.mean) for p in series]


# ---------------------------------------------------------------------------
# files

SERIES_COLUMNS = ("a_nm", "mean", "d_rand", "d_syst", "s_mean")
BAND_COLUMNS = ("a_nm", "lo", "hi")


def _read_rows(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.lstrip().startswith("#"))
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        names = [n.strip() for n in reader.fieldnames]
        missing = [c for c in required if c not in names]
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for lineno, raw in enumerate(reader, 2):
            row = {k.strip(): v for k, v in raw.items() if k is not None}
            try:
                rows.append({k: float(row[k]) for k in names if row.get(k) not in (None, "")})
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
    return rows


def read_series(path):
    """Measurement series CSV: a_nm, mean, d_rand, d_syst, s_mean[, d_a_nm]."""
    rows = _read_rows(path, SERIES_COLUMNS)
    return [
        MeasurementPoint(r["a_nm"], r["mean"], r["d_rand"], r["d_syst"], r["s_mean"], r.get("d_a_nm", 0.0))
        for r in rows
    ]


def write_series(path, series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS + ("d_a_nm",))
        for p in series:
            w.writerow([repr(float(v)) for v in (p.a, p.mean, p.d_rand, p.d_syst, p.s_mean, p.d_a)])


def read_band(path) -> TheoryBand:
    """Theory band CSV: a_nm, lo, hi."""
    rows = _read_rows(path, BAND_COLUMNS)
    return TheoryBand([r["a_nm"] for r in rows], [r["lo"] for r in rows], [r["hi"] for r in rows])


def write_band(path, band: TheoryBand):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BAND_COLUMNS)
        for row in zip(band.a, band.lo, band.hi):
            w.writerow([repr(float(v)) for v in row])


def compare(series, band: TheoryBand, policy=ErrorCombinationPolicy(), level=DEFAULT_LEVEL,
            rule="quadrature", subranges=()):
    """Run both methods with the band centre as theory and its half-width as theoretical error."""
    overlap = band_overlap_method(series, band, policy, subranges=subranges)

    def theory_error(x):
        return float(np.interp(x, band.a, band.half_width))

    xi = make_xi(series, theory_error, policy, level, rule)
    diffs = differences(series, lambda x: np.interp(x, band.a, band.center))
    interval = difference_interval_method(diffs, xi, level, subranges=subranges, series=series)
    return {
        "band_overlap": overlap.to_dict(),
        "difference_interval": interval.to_dict(),
        "relative_error": [{"a_nm": a, "delta_tot": d} for a, d in relative_error_profile(series, policy)],
    }


def verdict_json(doc) -> str:
    """Deterministic JSON; floats use the shortest round-trip representation."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
