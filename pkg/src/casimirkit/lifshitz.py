"""Lifshitz free energy, pressure and entropy for two identical thick plates.

Inputs use nm, K and eV.  Results are SI: J/m^2 for the free energy, Pa
for the pressure and J/(K m^2) for the entropy.  In the dimensionless
variables y = 2 a q and zeta = 2 a xi / c the free energy reads

    F = k_B T / (8 pi a^2) sum'_l int_{zeta_l}^inf y dy
            [ln(1 - r_TM^2 e^-y) + ln(1 - r_TE^2 e^-y)],

where the prime halves the l = 0 term.  That term uses analytic
zero-frequency reflection coefficients for every scheme.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy import integrate

from . import constants as const
from .errors import ConvergenceError
from .kernels import lifshitz_terms, pairwise_sum
from .materials import (
    DrudeModel,
    GeneralizedPlasmaModel,
    OpticalDataTable,
    PermittivityModel,
    ScreeningSpec,
    eval_from_table,
    screening_length,
    static_core_permittivity,
)
from .numerics import central_derivative, graded_panels

L_MAX = 400_000
# beyond this y the l = 0 integrands are below 1e-24
_Y_CUT = 60.0


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Standard:
    """Ordinary Fresnel coefficients evaluated with the full permittivity."""


@dataclass(frozen=True)
class Screened:
    """TM coefficient modified by carrier screening.

    Give either a :class:`ScreeningSpec` (the screening length is derived from
    it) or an explicit ``screening_length_nm`` together with ``eps_static``.
    """

    spec: Optional[ScreeningSpec] = None
    screening_length_nm: Optional[float] = None
    eps_static: Optional[float] = None

    def __post_init__(self):
        if self.spec is None and self.screening_length_nm is None:
            raise ValueError("Screened needs a ScreeningSpec or a screening length")
        if self.screening_length_nm is not None and not self.screening_length_nm > 0:
            raise ValueError("screening length must be > 0")

    def length(self) -> float:
        if self.screening_length_nm is not None:
            return float(self.screening_length_nm)
        return screening_length(self.spec)

    def static(self, material) -> float:
        if self.eps_static is not None:
            return float(self.eps_static)
        if self.spec is not None:
            return float(self.spec.eps_static)
        return static_core_permittivity(material)


STANDARD = Standard()
Scheme = Union[Standard, Screened]


@dataclass(frozen=True)
class PlatesConfig:
    """Two identical plates at separation ``a`` (nm) and temperature ``T`` (K)."""

    a: float
    T: float
    material: PermittivityModel
    scheme: Scheme = STANDARD
    rtol: float = 1e-9

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"separation a must be > 0 nm, got {self.a}")
        if not self.T > 0:
            raise ValueError(f"temperature T must be > 0 K, got {self.T}")
        if not 0 < self.rtol < 1:
            raise ValueError("rtol must lie in (0, 1)")
        if isinstance(self.scheme, Screened) and isinstance(self.material, OpticalDataTable):
            raise ValueError("the screened scheme needs a model with a separate free-carrier term")

    @property
    def zeta_step(self) -> float:
        """Spacing of zeta_l = 4 pi a k_B T l / (hbar c)."""
        return const.matsubara_step(self.a, self.T)

    @property
    def omega_c(self) -> float:
        """Characteristic frequency c / (2a) in eV."""
        return const.HBARC_EV_NM / (2.0 * self.a)

    def screening_context(self) -> Optional["ScreeningContext"]:
        if not isinstance(self.scheme, Screened):
            return None
        kappa_a = 2.0 * self.a / self.scheme.length()
        return ScreeningContext(kappa_a, self.scheme.static(self.material))

    def with_a(self, a):
        return replace(self, a=a)

    def with_T(self, T):
        return replace(self, T=T)


@dataclass(frozen=True)
class ScreeningContext:
    """kappa_a = 2 a / (screening length) and the static core permittivity."""

    kappa_a: float
    eps_static: float

    def __post_init__(self):
        if not self.kappa_a > 0:
            raise ValueError("kappa_a must be > 0")
        if not self.eps_static >= 1:
            raise ValueError("static permittivity must be >= 1")

    @property
    def beta_a(self) -> float:
        return 1.0 / self.kappa_a


@dataclass(frozen=True)
class ReflectionPair:
    r_tm: float
    r_te: float


# ---------------------------------------------------------------------------
# reflection coefficients


def _check_point(zeta, y):
    zeta = np.asarray(zeta, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(zeta < 0) or np.any(y < zeta):
        raise ValueError("reflection coefficients need y >= zeta >= 0")
    return zeta, y


def _root(zeta, y, eps_t):
    return np.sqrt(y * y + (eps_t - 1.0) * zeta * zeta)


def standard_tm(zeta, y, eps_t):
    zeta, y = _check_point(zeta, y)
    k = _root(zeta, y, eps_t)
    return (eps_t * y - k) / (eps_t * y + k)


def standard_te(zeta, y, eps_t):
    zeta, y = _check_point(zeta, y)
    k = _root(zeta, y, eps_t)
    return (y - k) / (y + k)


def _check_free(eps, eps_t):
    if np.any(np.asarray(eps_t) <= np.asarray(eps)):
        raise ValueError("screened coefficient needs eps_t > eps (a free-carrier part)")


def screened_tm(zeta, y, eps, eps_t, ctx: ScreeningContext):
    """TM coefficient with the screening term; ``eps`` is the core part, ``eps_t`` the total."""
    zeta, y = _check_point(zeta, y)
    _check_free(eps, eps_t)
    free = eps_t - eps
    eta = np.sqrt(y * y - zeta * zeta + ctx.kappa_a**2 * ctx.eps_static * eps_t / (eps * free))
    k = _root(zeta, y, eps_t)
    extra = (y * y - zeta * zeta) * free / (eta * eps)
    return (eps_t * y - k - extra) / (eps_t * y + k + extra)


def screening_z(zeta, y, eps, eps_t, eps_static):
    """First-order screening coefficient Z (non-negative for y > zeta)."""
    zeta, y = _check_point(zeta, y)
    _check_free(eps, eps_t)
    k = _root(zeta, y, eps_t)
    amp = np.sqrt(eps_t * (eps_t - eps) ** 3 / (eps_static * eps))
    return amp * y * (y * y - zeta * zeta) / (eps_t * y + k) ** 2


def perturbative_tm(zeta, y, eps, eps_t, beta_a, eps_static):
    """screened_tm expanded to first order in beta_a = 1/kappa_a."""
    return standard_tm(zeta, y, eps_t) - 2.0 * beta_a * screening_z(zeta, y, eps, eps_t, eps_static)


def reflection_pair(config: PlatesConfig, zeta, y) -> ReflectionPair:
    """Both coefficients for ``config`` at a point with zeta > 0."""
    if not zeta > 0:
        raise ValueError("use zero_frequency_coefficients for zeta = 0")
    xi = zeta * config.omega_c
    eps_t = float(config.material(xi))
    ctx = config.screening_context()
    if ctx is None:
        tm = standard_tm(zeta, y, eps_t)
    else:
        tm = screened_tm(zeta, y, float(config.material.core(xi)), eps_t, ctx)
    return ReflectionPair(float(tm), float(standard_te(zeta, y, eps_t)))


# ---------------------------------------------------------------------------
# zero frequency


def _reduced_plasma(config: PlatesConfig) -> float:
    return 2.0 * config.a * config.material.omega_p / const.HBARC_EV_NM


def _table_static(table: OpticalDataTable) -> float:
    # eps(i xi) is continuous at xi -> 0 when no Drude tail is attached
    return float(eval_from_table(table, 1e-9 * table.omega[0]))


def zero_frequency_coefficients(config: PlatesConfig):
    """(r_TM(0, y), r_TE(0, y)) as callables of y."""
    m = config.material
    ctx = config.screening_context()
    if isinstance(m, GeneralizedPlasmaModel):
        w = _reduced_plasma(config)

        def te(y):
            s = np.sqrt(y * y + w * w)
            return (y - s) / (y + s)

    else:
        # finite (eps - 1) zeta^2 -> 0 for Drude and tabulated data

        def te(y):
            return np.zeros_like(np.asarray(y, dtype=float))

    if ctx is not None:
        ec0 = static_core_permittivity(m)
        k2 = ctx.kappa_a**2 * ctx.eps_static / ec0

        def tm(y):
            eta = np.sqrt(y * y + k2)
            return (ec0 * eta - y) / (ec0 * eta + y)

    elif isinstance(m, OpticalDataTable) and m.tail is None:
        e0 = _table_static(m)
        r0 = (e0 - 1.0) / (e0 + 1.0)

        def tm(y):
            return np.full_like(np.asarray(y, dtype=float), r0)

    else:

        def tm(y):
            return np.ones_like(np.asarray(y, dtype=float))

    return tm, te


@dataclass(frozen=True)
class ZeroFrequencyTerms:
    """Dimensionless l = 0 integrals (before the 1/2 weight) and their errors."""

    tm: float
    te: float
    tm_pressure: float
    te_pressure: float
    error: float
    pressure_error: float


def _quad(f):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, _Y_CUT, epsabs=0.0, epsrel=1e-13, limit=400, points=(1.0, 5.0))
    return val, err + (_Y_CUT + 1.0) * math.exp(-_Y_CUT)


def zero_frequency_integrals(config: PlatesConfig) -> ZeroFrequencyTerms:
    """int_0^inf y ln(1 - r^2 e^-y) dy and int_0^inf y^2 r^2 / (e^y - r^2) dy."""
    tm, te = zero_frequency_coefficients(config)
    out = []
    errs = []
    for r, ideal, absent in (
        (tm, _tm_is_ideal(config), False),
        (te, False, _te_vanishes(config)),
    ):
        if absent:
            out.append((0.0, 0.0))
            errs.append((0.0, 0.0))
        elif ideal:
            out.append((-const.ZETA3, 2.0 * const.ZETA3))
            errs.append((0.0, 0.0))
        else:
            f, fe = _quad(lambda y: y * math.log1p(-float(r(y)) ** 2 * math.exp(-y)))
            p, pe = _quad(lambda y: y * y * float(r(y)) ** 2 / (math.exp(y) - float(r(y)) ** 2))
            out.append((f, p))
            errs.append((fe, pe))
    return ZeroFrequencyTerms(
        tm=out[0][0],
        te=out[1][0],
        tm_pressure=out[0][1],
        te_pressure=out[1][1],
        error=errs[0][0] + errs[1][0],
        pressure_error=errs[0][1] + errs[1][1],
    )


def _tm_is_ideal(config):
    m = config.material
    if config.screening_context() is not None:
        return False
    return not (isinstance(m, OpticalDataTable) and m.tail is None)


def _te_vanishes(config):
    return not isinstance(config.material, GeneralizedPlasmaModel)


# ---------------------------------------------------------------------------
# Matsubara sums


def _permittivities(config: PlatesConfig, zeta):
    """Total, free-carrier and core permittivity at the given zeta > 0."""
    m = config.material
    xi = zeta * config.omega_c
    eps_t = np.asarray(m(xi), dtype=float)
    if isinstance(m, OpticalDataTable):
        return eps_t, np.zeros_like(eps_t), eps_t
    core = np.asarray(m.core(xi), dtype=float)
    if isinstance(m, DrudeModel):
        free = m.omega_p**2 / (xi * (xi + m.gamma))
    else:
        free = m.omega_p**2 / (xi * xi)
    return eps_t, free, core


def _tail_bound(zeta, step):
    """Bound on sum_{l: zeta_l >= zeta} of both polarizations' |integrals|.

    Uses |ln(1 - r^2 e^-y)|, r^2/(e^y - r^2) <= e^-y/(1 - e^-step) and
    int_z^inf y^2 e^-y dy = (z^2 + 2z + 2) e^-z, which dominates both rows.
    """
    z = np.asarray(zeta, dtype=float)
    per_term = 2.0 * (z * z + 2 * z + 2) * np.exp(-z) / (-math.expm1(-step))
    # successive per-term bounds shrink by at least this ratio from here on
    q = (1.0 + step / z) ** 2 * math.exp(-step)
    return np.where(q < 1, per_term / (1.0 - np.minimum(q, 1 - 1e-300)), np.inf)


@dataclass(frozen=True)
class _Sums:
    step: float
    L: int
    free: np.ndarray  # per-l free-energy integrals, l = 1..L (TM + TE)
    press: np.ndarray
    free_tm: np.ndarray
    free_te: np.ndarray
    quad_free: float
    quad_press: float
    tail: float
    zero: ZeroFrequencyTerms


def _zeta_cut(step, target):
    """Smallest zeta_l whose tail bound is below ``target``."""
    l = max(1, int(math.ceil(2.0 / step)))
    while True:
        z = l * step
        if _tail_bound(z, step) <= target:
            return l
        l = int(l * 1.25) + 1
        if l > L_MAX:
            return None


def _matsubara_sums(config: PlatesConfig, rtol: float, use_numba=None) -> _Sums:
    step = config.zeta_step
    zero = zero_frequency_integrals(config)
    # a deliberately low guess of |sum'|: a tenth of the ideal-metal value 4 zeta(4)/step
    guess = max(0.5 * abs(zero.tm + zero.te), 0.1 * 4.33 / step)
    L = _zeta_cut(step, rtol * guess)
    for _ in range(2):
        if L is None:
            raise ConvergenceError(
                f"Matsubara tail bound not reached within {L_MAX} terms "
                f"(a={config.a} nm, T={config.T} K)"
            )
        zeta = step * np.arange(1, L + 1)
        tail = float(_tail_bound((L + 1) * step, step))
        eps_t, free, core = _permittivities(config, zeta)
        ctx = config.screening_context()
        screened = ctx is not None
        kappa = ctx.kappa_a if screened else 0.0
        eps_s = ctx.eps_static if screened else 1.0
        rows = []
        for n in (20, 10):
            t, w = graded_panels(zeta, n=n)
            rows.append(lifshitz_terms(zeta, eps_t, free, core, eps_s, kappa, screened, t, w, use_numba))
        fine, coarse = rows
        total = abs(0.5 * (zero.tm + zero.te) + pairwise_sum(fine[0] + fine[1]))
        if tail <= rtol * total:
            break
        L = _zeta_cut(step, rtol * total)
    else:
        raise ConvergenceError("Matsubara tail bound not reached", estimate=total, error=tail)
    return _Sums(
        step=step,
        L=L,
        free=fine[0] + fine[1],
        press=fine[2] + fine[3],
        free_tm=fine[0],
        free_te=fine[1],
        quad_free=float(np.sum(np.abs(fine[:2] - coarse[:2]))),
        quad_press=float(np.sum(np.abs(fine[2:] - coarse[2:]))),
        tail=tail,
        zero=zero,
    )


def _prefactor(config, power):
    """k_B T / (8 pi a^power) in SI."""
    return const.K_B * config.T / (8.0 * math.pi * (config.a * const.NM) ** power)


@dataclass(frozen=True, eq=False)
class FreeEnergyResult:
    """Free energy per unit area (J/m^2) with its error budget.

    ``terms`` holds the per-l contributions in J/m^2, l = 0 first and already
    carrying its 1/2 weight; ``zero_tm`` and ``zero_te`` split that l = 0 term.
    """

    value: float
    error: float
    L: int
    truncation_error: float
    quadrature_error: float
    terms: np.ndarray = field(repr=False)
    zero_tm: float = 0.0
    zero_te: float = 0.0


def free_energy(config: PlatesConfig, use_numba=None) -> FreeEnergyResult:
    s = _matsubara_sums(config, config.rtol, use_numba)
    pref = _prefactor(config, 2)
    z_tm = 0.5 * s.zero.tm * pref
    z_te = 0.5 * s.zero.te * pref
    terms = np.concatenate([[z_tm + z_te], pref * s.free])
    value = pairwise_sum(terms)
    trunc = pref * s.tail
    quad = pref * (s.quad_free + 0.5 * s.zero.error)
    # rounding of a long sum of same-sign terms
    rounding = 4 * np.finfo(float).eps * float(np.sum(np.abs(terms)))
    return FreeEnergyResult(
        value=value,
        error=trunc + quad + rounding,
        L=s.L,
        truncation_error=trunc,
        quadrature_error=quad,
        terms=terms,
        zero_tm=z_tm,
        zero_te=z_te,
    )


@dataclass(frozen=True)
class PressureResult:
    """Pressure in Pa (negative = attraction) from up to two independent paths."""

    value: float
    error: float
    analytic: Optional[float]
    analytic_error: Optional[float]
    finite_difference: Optional[float]
    finite_difference_error: Optional[float]

    @property
    def paths_agree(self) -> Optional[bool]:
        if self.analytic is None or self.finite_difference is None:
            return None
        gap = abs(self.analytic - self.finite_difference)
        return gap <= self.analytic_error + self.finite_difference_error


class PathDisagreement(ConvergenceError):
    """The two pressure paths differ by more than their combined errors."""


def analytic_pressure(config: PlatesConfig, use_numba=None):
    """-dF/da taken under the integral sign; returns (value, error) in Pa."""
    s = _matsubara_sums(config, config.rtol, use_numba)
    pref = _prefactor(config, 3)
    terms = np.concatenate([[0.5 * (s.zero.tm_pressure + s.zero.te_pressure)], s.press])
    value = -pref * pairwise_sum(terms)
    err = pref * (s.tail + s.quad_press + 0.5 * s.zero.pressure_error)
    err += 4 * np.finfo(float).eps * abs(value)
    return value, err


def finite_difference_pressure(config: PlatesConfig, rel_step=1e-2, use_numba=None):
    """Central difference of the free energy in a, with one Richardson step."""
    tight = replace(config, rtol=min(config.rtol, 1e-12))
    noise = [0.0]

    def f(a_nm):
        r = free_energy(tight.with_a(a_nm), use_numba)
        noise[0] = max(noise[0], r.error)
        return r.value

    h = rel_step * config.a
    d = central_derivative(f, config.a, h, levels=3)
    # per-nm -> per-m, plus the derivative noise from the evaluation errors
    value = -d.value / const.NM
    err = (d.error + 2 * noise[0] / (h / 4)) / const.NM
    return value, err


def pressure(config: PlatesConfig, paths="both", check=True, use_numba=None) -> PressureResult:
    """Casimir pressure in Pa.

    ``paths`` is ``"both"``, ``"analytic"`` or ``"finite-difference"``.  With
    both paths and ``check`` set, a disagreement beyond the combined error
    raises :class:`PathDisagreement`.
    """
    if paths not in ("both", "analytic", "finite-difference"):
        raise ValueError(f"unknown pressure path {paths!r}")
    an = fd = (None, None)
    if paths in ("both", "analytic"):
        an = analytic_pressure(config, use_numba)
    if paths in ("both", "finite-difference"):
        fd = finite_difference_pressure(config, use_numba=use_numba)
    value, error = an if an[0] is not None else fd
    res = PressureResult(value, error, an[0], an[1], fd[0], fd[1])
    if check and res.paths_agree is False:
        raise PathDisagreement(
            f"pressure paths disagree: {an[0]:.12g} vs {fd[0]:.12g} Pa",
            estimate=value,
            error=abs(an[0] - fd[0]),
        )
    return res


@dataclass(frozen=True)
class EntropyResult:
    value: float  # J / (K m^2)
    error: float


def entropy(config: PlatesConfig, rel_step=0.05, use_numba=None) -> EntropyResult:
    """S = -dF/dT by central differences at steps T/20 and T/40 plus Richardson."""
    if rel_step > 0.05:
        raise ValueError("entropy step must be at most T/20")
    tight = replace(config, rtol=min(config.rtol, 1e-13))
    noise = [0.0]

    def f(T):
        r = free_energy(tight.with_T(T), use_numba)
        noise[0] = max(noise[0], r.error)
        return r.value

    h = rel_step * config.T
    d = central_derivative(f, config.T, h)
    return EntropyResult(-d.value, d.error + 2 * noise[0] / (h / 2))


def nernst_limit_screened(a, omega_p) -> float:
    """Zero-temperature entropy (J/(K m^2)) left by the screened scheme.

    k_B/(16 pi a^2) int_0^inf y ln[1 - r_TE,gp(0, y)^2 e^-y] dy, negative
    for every omega_p > 0.
    """
    if not a > 0 or not omega_p > 0:
        raise ValueError("a and omega_p must be > 0")
    w = 2.0 * a * omega_p / const.HBARC_EV_NM

    def f(y):
        s = math.sqrt(y * y + w * w)
        r = (y - s) / (y + s)
        return y * math.log1p(-r * r * math.exp(-y))

    val, _ = _quad(f)
    return const.K_B / (16.0 * math.pi * (a * const.NM) ** 2) * val
