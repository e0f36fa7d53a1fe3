"""Casimir energies, free energies and forces in ideal rectangular boxes.

Lengths are in nm and temperatures in K; energies are returned in J,
forces in N, pressures in Pa.  Two fields are supported: a massless scalar
with Dirichlet walls and the electromagnetic field inside ideal-metal walls.

The renormalized zero-temperature energy is computed by the cutoff method:
the exponentially regulated mode sum minus its volume, surface and edge
divergences, evaluated on a halving ladder of cutoffs and Richardson
extrapolated.  An image-sum representation (Poisson resummation of the
mode lattice, accelerated with Bessel-K series) is available as a fast
path and as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import special

from . import constants as const
from .errors import ConvergenceError, TermBudgetExceeded
from .kernels import REGULATED, THERMAL, box_mode_sum, estimate_mode_count
from .numerics import Derivative, central_derivative, extrapolate

TERM_BUDGET = 10**9
# relative tail of the regulated sum beyond XMAX is ~XMAX^3 exp(-XMAX)/6 ~ 4e-18
XMAX = 50.0


class FieldKind(str, Enum):
    SCALAR = "scalar"
    EM = "em"


@dataclass(frozen=True)
class BoxGeometry:
    ax: float
    ay: float
    az: float

    def __post_init__(self):
        if not (self.ax > 0 and self.ay > 0 and self.az > 0):
            raise ValueError(f"box sides must be > 0, got {self.sides}")

    @property
    def sides(self):
        return (self.ax, self.ay, self.az)

    @property
    def volume(self):
        return self.ax * self.ay * self.az

    @property
    def face_sum(self):
        return self.ax * self.ay + self.ax * self.az + self.ay * self.az

    @property
    def edge_sum(self):
        return self.ax + self.ay + self.az

    def scaled(self, factor):
        return BoxGeometry(self.ax * factor, self.ay * factor, self.az * factor)

    def with_side(self, axis, value):
        sides = list(self.sides)
        sides[_axis_index(axis)] = value
        return BoxGeometry(*sides)

    @classmethod
    def cube(cls, a):
        return cls(a, a, a)


@dataclass(frozen=True)
class PistonedBox:
    box: BoxGeometry
    position: float  # partition at z = position, nm

    def __post_init__(self):
        if not 0 < self.position < self.box.az:
            raise ValueError("piston must lie strictly inside the box")

    def sections(self, position=None):
        z1 = self.position if position is None else position
        b = self.box
        return BoxGeometry(b.ax, b.ay, z1), BoxGeometry(b.ax, b.ay, b.az - z1)


@dataclass(frozen=True)
class CutoffEvaluation:
    delta: float  # s
    regulated: float  # J
    subtracted: float  # J


@dataclass(frozen=True)
class RenormalizedEnergy:
    value: float  # J
    error: float
    order: float = float("nan")
    ladder: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class ForceResult:
    value: float  # N
    error: float


def _field(field_kind) -> FieldKind:
    return FieldKind(field_kind)


def _axis_index(axis):
    if isinstance(axis, str):
        return "xyz".index(axis.lower())
    return int(axis)


def _ev_to_j(x):
    return x * const.EV


def mode_frequency(box: BoxGeometry, n, l, p):
    """Angular frequency (rad/s) of the (n, l, p) cavity mode."""
    k = math.pi * np.sqrt((np.asarray(n) / box.ax) ** 2 + (np.asarray(l) / box.ay) ** 2
                          + (np.asarray(p) / box.az) ** 2)
    w = const.C * k / const.NM
    return float(w) if np.ndim(w) == 0 else w


def _check_budget(box, d, xmax, budget):
    count = estimate_mode_count(box.sides, d, xmax)
    if count > budget:
        raise TermBudgetExceeded(
            f"mode sum needs ~{count:.3g} terms, budget is {budget:.3g}; "
            "increase the cutoff or use method='images'"
        )


def regulated_energy(box: BoxGeometry, field, delta, budget=TERM_BUDGET):
    """(hbar/2) sum_modes omega exp(-delta omega); ``delta`` in seconds."""
    em = _field(field) is FieldKind.EM
    d = const.C * delta / const.NM  # c delta in nm
    if not d > 0:
        raise ValueError("cutoff must be > 0")
    _check_budget(box, d, XMAX, budget)
    s = box_mode_sum(box.sides, em, REGULATED, d, XMAX)
    return _ev_to_j(0.5 * const.HBARC_EV_NM * s)


def counterterms(box: BoxGeometry, field, delta):
    """Volume, surface and edge divergences (I1, I2, I3) of the regulated sum, in J.

    Scalar: I1 = 3 hbar V/(2 pi^2 c^3 delta^4), I2 = -hbar S2/(4 pi c^2 delta^3),
    I3 = hbar S1/(8 pi c delta^2).  EM: (2 I1, 0, -2 I3).
    """
    d = const.C * delta / const.NM
    hc = const.HBARC_EV_NM
    i1 = 3.0 * hc * box.volume / (2.0 * math.pi**2 * d**4)
    i2 = -hc * box.face_sum / (4.0 * math.pi * d**3)
    i3 = hc * box.edge_sum / (8.0 * math.pi * d**2)
    if _field(field) is FieldKind.EM:
        i1, i2, i3 = 2.0 * i1, 0.0, -2.0 * i3
    return _ev_to_j(i1), _ev_to_j(i2), _ev_to_j(i3)


def cutoff_evaluation(box: BoxGeometry, field, delta, budget=TERM_BUDGET) -> CutoffEvaluation:
    reg = regulated_energy(box, field, delta, budget)
    i1, i2, i3 = counterterms(box, field, delta)
    # subtract the largest pieces first
    return CutoffEvaluation(delta, reg, ((reg - i1) - i2) - i3)


def default_ladder(box: BoxGeometry, levels=5):
    """delta_k = delta_0 / 2^k with delta_0 = (min side) / (2c)."""
    d0 = 0.5 * min(box.sides) * const.NM / const.C
    return [d0 / 2**k for k in range(levels)]


def _energy_ladder(box, field, levels, rtol, budget):
    ladder = tuple(cutoff_evaluation(box, field, d, budget) for d in default_ladder(box, levels))
    ext = extrapolate([c.subtracted for c in ladder])
    # rounding in the finest regulated sum survives the subtraction
    error = ext.error + 1e-15 * abs(ladder[-1].regulated)
    scale = const.EV * const.HBARC_EV_NM / min(box.sides)
    if not error <= rtol * max(abs(ext.value), 1e-3 * scale):
        raise ConvergenceError(
            f"cutoff ladder did not converge: error {error:.3g} J on {ext.value:.6g} J",
            estimate=ext.value,
            error=error,
        )
    return RenormalizedEnergy(ext.value, error, ext.order, ladder)


# ---------------------------------------------------------------------------
# image-sum representation


def lattice_sum(s, sides, cutoff=50.0):
    """sum over nonzero n in Z^d of (sum_i (a_i n_i)^2)^(-s), for s > d/2.

    One coordinate is Poisson-resummed against the others (Chowla-Selberg),
    which turns the slowly converging tail into a Bessel-K series.
    """
    sides = sorted(float(a) for a in sides)
    d = len(sides)
    if d == 1:
        return 2.0 * special.zeta(2 * s) / sides[0] ** (2 * s)
    a_d = sides[-1]
    rest = sides[:-1]
    D = d - 1
    vol = math.prod(rest)
    nu = s - D / 2
    total = lattice_sum(s, rest, cutoff)
    total += (
        2.0 * math.pi ** (D / 2) * special.gamma(nu) / (vol * special.gamma(s))
        * a_d ** (D - 2 * s) * special.zeta(2 * s - D)
    )
    # dual-lattice vectors q = 2 pi (k_i / a_i), k != 0
    kmax = [int(cutoff * a / (2 * math.pi * a_d)) + 1 for a in rest]
    grids = np.meshgrid(*[np.arange(-k, k + 1) for k in kmax], indexing="ij")
    q = 2 * math.pi * np.sqrt(sum((g / a) ** 2 for g, a in zip(grids, rest))).ravel()
    q = q[q > 0]
    nmax = int(cutoff / (a_d * q.min())) + 1
    n = np.arange(1, nmax + 1)[:, None]
    arg = a_d * n * q[None, :]
    mask = arg <= cutoff
    terms = np.where(mask, (q[None, :] / (2 * a_d * n)) ** nu * special.kv(nu, np.where(mask, arg, 1.0)), 0.0)
    total += 4.0 * math.pi ** (D / 2) / (vol * special.gamma(s)) * float(np.sum(terms))
    return total


def _zeta_m1_3d(sides):
    vol = math.prod(sides)
    return -vol / (2 * math.pi**2) * lattice_sum(2.0, sides)


def _zeta_m1_2d(a, b):
    return -a * b / (4 * math.pi) * lattice_sum(1.5, (a, b))


def _zeta_m1_1d(a):
    return -math.pi / (6 * a)


def image_sum_energy(box: BoxGeometry, field) -> float:
    """Renormalized zero-temperature energy (J) from the image-sum representation.

    Writes the mode sums through full-lattice Epstein functions at s = -1,
    each given by Poisson resummation as a lattice sum over images.
    """
    ax, ay, az = box.sides
    z3 = _zeta_m1_3d(box.sides)
    z1 = sum(_zeta_m1_1d(a) for a in box.sides)
    if _field(field) is FieldKind.EM:
        e = const.HBARC_EV_NM / 8.0 * (z3 - z1)
    else:
        z2 = _zeta_m1_2d(ax, ay) + _zeta_m1_2d(ax, az) + _zeta_m1_2d(ay, az)
        e = const.HBARC_EV_NM / 16.0 * (z3 - z2 + z1)
    return _ev_to_j(e)


def renormalized_energy_T0(
    box: BoxGeometry, field, method="ladder", levels=5, rtol=1e-6, budget=TERM_BUDGET
) -> RenormalizedEnergy:
    """Finite Casimir energy of the box at T = 0, in J.

    ``method="ladder"`` (default) takes the cutoff limit numerically;
    ``method="images"`` uses the image-sum representation.
    """
    if method == "ladder":
        return _energy_ladder(box, field, levels, rtol, budget)
    if method == "images":
        e = image_sum_energy(box, field)
        return RenormalizedEnergy(e, 1e-13 * abs(e))
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# temperature


def thermal_correction(box: BoxGeometry, field, T, budget=TERM_BUDGET) -> float:
    """k_B T sum_modes ln(1 - exp(-hbar omega / k_B T)), in J."""
    if not T > 0:
        raise ValueError("temperature must be > 0")
    em = _field(field) is FieldKind.EM
    kt = const.K_B_EV * T
    d = const.HBARC_EV_NM / kt  # thermal length, nm
    _check_budget(box, d, XMAX, budget)
    s = box_mode_sum(box.sides, em, THERMAL, d, XMAX)
    return _ev_to_j(kt * s)


def subtraction_coefficients(box: BoxGeometry, field):
    """High-temperature coefficients (alpha1, alpha2, alpha3) in m^3, m^2, m."""
    v = box.volume * const.NM**3
    s2 = box.face_sum * const.NM**2
    s1 = box.edge_sum * const.NM
    if _field(field) is FieldKind.EM:
        return -v * math.pi**2 / 45.0, 0.0, math.pi / 12.0 * s1
    return -v * math.pi**2 / 90.0, const.ZETA3 / (4 * math.pi) * s2, -math.pi / 24.0 * s1


def subtraction_terms(box: BoxGeometry, field, T) -> float:
    """alpha1 (kT)^4/(hbar c)^3 + alpha2 (kT)^3/(hbar c)^2 + alpha3 (kT)^2/(hbar c), in J."""
    a1, a2, a3 = subtraction_coefficients(box, field)
    kt = const.K_B * T
    hc = const.HBARC_J_M
    return a1 * kt**4 / hc**3 + a2 * kt**3 / hc**2 + a3 * kt**2 / hc


def blackbody_free_energy_density(T, field=FieldKind.SCALAR) -> float:
    """Free energy density of blackbody radiation, J/m^3 (EM doubles the scalar value)."""
    if T < 0:
        raise ValueError("temperature must be >= 0")
    f = -math.pi**2 * (const.K_B * T) ** 4 / (90.0 * const.HBARC_J_M**3)
    return 2.0 * f if _field(field) is FieldKind.EM else f


@dataclass(frozen=True)
class FreeEnergy:
    value: float  # J
    error: float
    energy_T0: float
    thermal: float
    subtracted: float


def physical_free_energy(box: BoxGeometry, field, T, method="ladder", **kw) -> FreeEnergy:
    """Zero-point energy plus thermal correction minus the quantum high-T terms, in J."""
    if T < 0:
        raise ValueError("temperature must be >= 0")
    e0 = renormalized_energy_T0(box, field, method=method, **kw)
    if T == 0:
        return FreeEnergy(e0.value, e0.error, e0.value, 0.0, 0.0)
    dT = thermal_correction(box, field, T)
    sub = subtraction_terms(box, field, T)
    return FreeEnergy(e0.value + dT - sub, e0.error, e0.value, dT, sub)


def naive_free_energy(box: BoxGeometry, field, T, method="ladder", **kw) -> FreeEnergy:
    """Zero-point energy plus thermal correction without the high-T subtractions."""
    e0 = renormalized_energy_T0(box, field, method=method, **kw)
    dT = thermal_correction(box, field, T) if T > 0 else 0.0
    return FreeEnergy(e0.value + dT, e0.error, e0.value, dT, 0.0)


def _derivative(fn, x, rel_step):
    h = rel_step * x
    cache = {}

    def f(v):
        if v not in cache:
            cache[v] = fn(v)
        return cache[v].value

    noise = [0.0]

    def g(v):
        val = f(v)
        noise[0] = max(noise[0], cache[v].error)
        return val

    d = central_derivative(g, x, h)
    return Derivative(d.value, d.error + 2 * noise[0] / h)


def face_force(
    box: BoxGeometry, field, T, axis="x", method="ladder", rel_step=1e-3, rtol=1e-3, **kw
) -> ForceResult:
    """Force on the face normal to ``axis``, -dF/da_axis, in N.  Positive means outward."""
    i = _axis_index(axis)
    side = box.sides[i]
    d = _derivative(
        lambda s: physical_free_energy(box.with_side(i, s), field, T, method=method, **kw),
        side,
        rel_step,
    )
    value = -d.value / const.NM
    err = d.error / const.NM
    if not err <= rtol * abs(value) + 1e-300:
        raise ConvergenceError(f"face force derivative error {err:.3g} N on {value:.6g} N", value, err)
    return ForceResult(value, err)


def piston_force(
    pistoned: PistonedBox,
    field,
    T,
    definition="physical",
    method="ladder",
    rel_step=1e-3,
    rtol=1e-3,
    **kw,
) -> ForceResult:
    """Force on the partition, -d/da_z1 [F(section 1) + F(section 2)], in N.

    Positive values push the piston towards +z.  ``definition`` selects the
    physical free energy (with high-T subtractions) or the naive one; the two
    give the same force because the subtractions do not depend on the piston
    position.
    """
    free = physical_free_energy if definition == "physical" else naive_free_energy

    def total(z1):
        s1, s2 = pistoned.sections(z1)
        f1 = free(s1, field, T, method=method, **kw)
        f2 = free(s2, field, T, method=method, **kw)
        return FreeEnergy(f1.value + f2.value, f1.error + f2.error, 0.0, 0.0, 0.0)

    h_ref = min(pistoned.position, pistoned.box.az - pistoned.position)
    d = _derivative(total, pistoned.position, rel_step * h_ref / pistoned.position)
    value = -d.value / const.NM
    err = d.error / const.NM
    scale = abs(value) + abs(_face_scale(pistoned, field))
    if not err <= rtol * scale:
        raise ConvergenceError(f"piston force derivative error {err:.3g} N", value, err)
    return ForceResult(value, err)


def _face_scale(pistoned, field):
    # hbar c / a^2 sized reference used when the force itself is ~0 by symmetry
    a = min(pistoned.position, pistoned.box.az - pistoned.position) * const.NM
    return 1e-3 * const.HBARC_J_M / a**2


# ---------------------------------------------------------------------------
# ideal parallel plates


def _plates_bracket(t, tol=1e-17):
    # 1 + (45/pi^3) sum_l [coth(pi l t)/(t l)^3 + pi/((t l)^2 sinh^2(pi t l))] - 1/t^4
    # with coth = 1 + 2/(e^{2x} - 1) so that the remaining series decays exponentially
    total = const.ZETA3 / t**3
    l = 1
    while True:
        x = math.pi * l * t
        if x > 350:
            break
        em = math.expm1(2 * x)
        term = 2.0 / (em * (t * l) ** 3) + math.pi / ((t * l) ** 2 * math.sinh(x) ** 2)
        total += term
        if term < tol * total:
            break
        l += 1
    return 1.0 + 45.0 / math.pi**3 * total - 1.0 / t**4, l


def plates_free_energy_ideal(a, T) -> float:
    """Free energy per unit area (J/m^2) of two ideal-metal plates at separation a (nm)."""
    if not a > 0:
        raise ValueError("separation must be > 0")
    e0 = -math.pi**2 * const.HBARC_J_M / (720.0 * (a * const.NM) ** 3)
    if T == 0:
        return e0
    if T < 0:
        raise ValueError("temperature must be >= 0")
    t = const.effective_temperature(a) / T
    if t < 1.0:
        return _plates_high_temperature(a, T, t)
    bracket, _ = _plates_bracket(t)
    return e0 * bracket


def _plates_high_temperature(a, T, t, tol=1e-17):
    # Matsubara form: -(kT/(4 pi a^2)) [zeta3/2 + sum_n tau e^{n tau}/(n^2 (e^{n tau}-1)^2)
    # + 1/(n^3 (e^{n tau}-1))] with tau = 2 pi / t; every term is positive, so
    # unlike the low-temperature bracket nothing cancels when t is small
    tau = 2.0 * math.pi / t
    total = 0.5 * const.ZETA3
    n = 1
    while True:
        x = n * tau
        if x > 700:
            break
        em = math.expm1(x)
        term = tau * (em + 1.0) / (n * n * em * em) + 1.0 / (n**3 * em)
        total += term
        if term < tol * total:
            break
        n += 1
    return -const.K_B * T * total / (4.0 * math.pi * (a * const.NM) ** 2)


@dataclass(frozen=True)
class IdealPressure:
    value: float  # Pa
    low_temperature: bool
    expansion: float
    numeric: Optional[float] = None
    numeric_error: Optional[float] = None


def plates_pressure_ideal(a, T, method="auto") -> IdealPressure:
    """Pressure between ideal-metal plates (Pa, negative = attraction).

    The low-temperature expansion is used when T <= 0.3 T_eff (or when
    ``method="expansion"``); otherwise the free energy is differentiated
    numerically.  Both values are returned when computed.
    """
    p0 = -math.pi**2 * const.HBARC_J_M / (240.0 * (a * const.NM) ** 4)
    if T == 0:
        return IdealPressure(p0, True, p0, None, None)
    ratio = T / const.effective_temperature(a)
    low = ratio <= 0.3
    expansion = p0 * (1.0 + ratio**4 / 3.0)
    numeric = err = None
    if method in ("numeric", "both") or (method == "auto" and not low):
        d = central_derivative(lambda x: plates_free_energy_ideal(x, T), a, 1e-3 * a)
        numeric = -d.value / const.NM
        err = d.error / const.NM
    if method == "expansion" or (method == "auto" and low):
        value = expansion
    else:
        value = numeric
    return IdealPressure(value, low, expansion, numeric, err)
