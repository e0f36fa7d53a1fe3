"""Proximity force approximation for sphere-plate and cylinder-plate setups.

Lengths are in nm.  Plate kernels map a gap z (nm) to an energy per unit
area (J/m^2) or a pressure (Pa).  Sphere results are in J and N; cylinder
results are per unit length, J/m and N/m.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Union

from scipy import integrate

from . import constants as const
from .boxes import plates_free_energy_ideal, plates_pressure_ideal
from .errors import ConvergenceError, ValidityWarning

# a/R above which first-order proximity results are flagged
VALIDITY_LIMIT = 0.1
# (1/5)(20/pi^2 - 7/12): first correction beyond PFA for a cylinder
CYLINDER_CORRECTION = (20.0 / math.pi**2 - 7.0 / 12.0) / 5.0

# sphere coefficients theta in F = F_PFA (1 + theta a/R); no analytic value exists
THETA_CATALOGUE = {
    "extrapolated": (1.4, "extrapolation of exact scalar and worldline results to small a/R"),
    "experimental-bound": (1.0, "experimental bound |theta| < 1"),
}


class Shape(str, Enum):
    SPHERE = "sphere"
    CYLINDER = "cylinder"


@dataclass(frozen=True)
class CurvedGeometry:
    """A sphere or cylinder of radius ``R`` at closest distance ``a`` from a plate."""

    shape: Shape
    a: float
    R: float

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not self.a > 0 or not self.R > 0:
            raise ValueError("a and R must be > 0")

    @classmethod
    def sphere(cls, a, R):
        return cls(Shape.SPHERE, a, R)

    @classmethod
    def cylinder(cls, a, R):
        return cls(Shape.CYLINDER, a, R)

    @property
    def ratio(self) -> float:
        return self.a / self.R

    @property
    def valid(self) -> bool:
        """PFA is trusted only at short separations, a/R <= 0.1."""
        return self.ratio <= VALIDITY_LIMIT


@dataclass(frozen=True)
class PFAResult:
    value: float
    error: float
    valid: bool
    heuristic: bool = False


def _warn_validity(geometry: CurvedGeometry):
    if not geometry.valid:
        warnings.warn(
            f"a/R = {geometry.ratio:.3g} exceeds {VALIDITY_LIMIT}; PFA is unreliable here",
            ValidityWarning,
            stacklevel=3,
        )


def _gap(geometry: CurvedGeometry, rho, profile):
    """Local gap (nm) at lateral distance rho (nm) from the closest point."""
    if profile == "paraboloid":
        return geometry.a + rho * rho / (2.0 * geometry.R)
    R = geometry.R
    # R - sqrt(R^2 - rho^2) without cancellation
    return geometry.a + rho * rho / (R + math.sqrt(max(R * R - rho * rho, 0.0)))


def _surface_integral(geometry, kernel, profile, rtol):
    if profile not in ("paraboloid", "cap"):
        raise ValueError(f"unknown surface profile {profile!r}")
    s = math.sqrt(2.0 * geometry.R * geometry.a)  # lateral scale of the near region
    sphere = geometry.shape is Shape.SPHERE

    def density(rho):
        val = kernel(_gap(geometry, rho, profile))
        return 2.0 * math.pi * rho * val if sphere else 2.0 * val

    if profile == "paraboloid":
        # rho = s tan(phi) maps the whole plane onto [0, pi/2)
        def f(phi):
            c = math.cos(phi)
            if c == 0.0:
                return 0.0
            return density(s * math.tan(phi)) * s / (c * c)

        breaks = [k * math.pi / 16 for k in range(9)]
    else:
        f = density
        breaks = [0.0] + [s * k for k in (1.0, 4.0, 16.0, 64.0) if s * k < geometry.R] + [geometry.R]
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            try:
                # outer pieces only need accuracy relative to the running total
                v, e = integrate.quad(f, lo, hi, epsabs=0.1 * rtol * abs(total), epsrel=rtol, limit=200)
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(f"PFA surface integral failed on [{lo:g}, {hi:g}]: {exc}")
            total += v
            err += e
    # area element in nm^2 (sphere) or nm (cylinder strip) -> m^2, m
    unit = const.NM**2 if sphere else const.NM
    return total * unit, err * unit


def pfa_energy(
    geometry: CurvedGeometry,
    plate_energy: Callable[[float], float],
    profile: str = "paraboloid",
    rtol: float = 1e-10,
    heuristic: bool = False,
) -> PFAResult:
    """U = int E(z) d sigma over the plate-facing surface.

    ``profile="paraboloid"`` uses the near-point gap a + rho^2/(2R) over the
    whole plane, the form for which the closed-form sphere and cylinder
    results are exact.  ``profile="cap"`` uses the true surface
    a + R - sqrt(R^2 - rho^2) cut off at rho = R; the two differ at O(a/R).
    """
    _warn_validity(geometry)
    value, err = _surface_integral(geometry, plate_energy, profile, rtol)
    return PFAResult(value, err, geometry.valid, heuristic)


def pfa_force(
    geometry: CurvedGeometry,
    plate_pressure: Callable[[float], float],
    profile: str = "paraboloid",
    rtol: float = 1e-10,
    heuristic: bool = False,
) -> PFAResult:
    """-dU/da as the surface integral of the plate pressure P(z)."""
    _warn_validity(geometry)
    value, err = _surface_integral(geometry, plate_pressure, profile, rtol)
    return PFAResult(value, err, geometry.valid, heuristic)


# ---------------------------------------------------------------------------
# plate kernels


def ideal_plate_energy(z):
    """-pi^2 hbar c / (720 z^3) in J/m^2, z in nm."""
    return -math.pi**2 * const.HBARC_J_M / (720.0 * (z * const.NM) ** 3)


def ideal_plate_pressure(z):
    """-pi^2 hbar c / (240 z^4) in Pa, z in nm."""
    return -math.pi**2 * const.HBARC_J_M / (240.0 * (z * const.NM) ** 4)


def ideal_plate_free_energy(T):
    """Kernel z -> ideal-metal free energy per area at temperature T (K)."""
    return lambda z: plates_free_energy_ideal(z, T)


def ideal_plate_thermal_pressure(T):
    return lambda z: plates_pressure_ideal(z, T).value


def lifshitz_kernels(material, T, scheme=None):
    """Cached (energy, pressure) kernels from the Lifshitz free energy.

    At T > 0 the kernels are free energies, so the resulting PFA numbers are
    heuristic: the proximity derivation is a zero-temperature argument.
    """
    from . import lifshitz

    scheme = lifshitz.STANDARD if scheme is None else scheme

    @lru_cache(maxsize=4096)
    def energy(z):
        return lifshitz.free_energy(lifshitz.PlatesConfig(z, T, material, scheme)).value

    @lru_cache(maxsize=4096)
    def pressure(z):
        cfg = lifshitz.PlatesConfig(z, T, material, scheme)
        return lifshitz.pressure(cfg, paths="analytic").value

    return energy, pressure


# ---------------------------------------------------------------------------
# closed forms


def _check(a, R):
    if not a > 0 or not R > 0:
        raise ValueError("a and R must be > 0")


def pfa_sphere_force(a, R) -> float:
    """2 pi R E(a) = -pi^3 hbar c R / (360 a^3), in N."""
    _check(a, R)
    return -math.pi**3 * const.HBARC_J_M * (R * const.NM) / (360.0 * (a * const.NM) ** 3)


def pfa_sphere_energy(a, R) -> float:
    """-pi^3 hbar c R / (720 a^2), in J."""
    _check(a, R)
    return -math.pi**3 * const.HBARC_J_M * (R * const.NM) / (720.0 * (a * const.NM) ** 2)


def pfa_cylinder_force(a, R) -> float:
    """(15 pi/16) sqrt(2R/a) E(a) = -(pi^3 / (384 sqrt 2)) sqrt(R/a) hbar c / a^3, in N/m."""
    _check(a, R)
    return 15.0 * math.pi / 16.0 * math.sqrt(2.0 * R / a) * ideal_plate_energy(a)


def pfa_cylinder_energy(a, R) -> float:
    """-(pi^3 / (960 sqrt 2)) sqrt(R) hbar c / a^(5/2), in J/m."""
    _check(a, R)
    am = a * const.NM
    return -math.pi**3 * const.HBARC_J_M * math.sqrt(R * const.NM) / (960.0 * math.sqrt(2.0) * am**2.5)


def beyond_pfa_cylinder_force(a, R) -> float:
    """Exact short-distance cylinder force F_PFA [1 - 0.2886 a/R], in N/m."""
    _check(a, R)
    if a / R > VALIDITY_LIMIT:
        warnings.warn(
            f"a/R = {a / R:.3g} exceeds {VALIDITY_LIMIT}; the first-order correction is unreliable",
            ValidityWarning,
            stacklevel=2,
        )
    return pfa_cylinder_force(a, R) * (1.0 - CYLINDER_CORRECTION * a / R)


def pfa_relative_error_cylinder(a, R) -> float:
    """|F_PFA - F| / |F_PFA| for the cylinder, 0.2886 a/R."""
    _check(a, R)
    return CYLINDER_CORRECTION * a / R


@dataclass(frozen=True)
class SphereForce:
    value: float
    theta: float
    provenance: str


def beyond_pfa_sphere_force(a, R, theta: Union[float, str]) -> SphereForce:
    """F_PFA (1 + theta a/R), in N.

    ``theta`` is required: a number, or a key of :data:`THETA_CATALOGUE`.
    """
    _check(a, R)
    if isinstance(theta, str):
        if theta not in THETA_CATALOGUE:
            raise ValueError(f"unknown theta entry {theta!r}; choose from {sorted(THETA_CATALOGUE)}")
        value, provenance = THETA_CATALOGUE[theta]
    else:
        value, provenance = float(theta), "user supplied"
    return SphereForce(pfa_sphere_force(a, R) * (1.0 + value * a / R), value, provenance)


def closed_form_energy(geometry: CurvedGeometry) -> float:
    if geometry.shape is Shape.SPHERE:
        return pfa_sphere_energy(geometry.a, geometry.R)
    return pfa_cylinder_energy(geometry.a, geometry.R)


def closed_form_force(geometry: CurvedGeometry) -> float:
    if geometry.shape is Shape.SPHERE:
        return pfa_sphere_force(geometry.a, geometry.R)
    return pfa_cylinder_force(geometry.a, geometry.R)


def curved_force(geometry: CurvedGeometry, theta: Optional[Union[float, str]] = None) -> float:
    """Best available ideal-metal force: beyond-PFA where known, PFA otherwise."""
    if geometry.shape is Shape.CYLINDER:
        return beyond_pfa_cylinder_force(geometry.a, geometry.R)
    if theta is None:
        return pfa_sphere_force(geometry.a, geometry.R)
    return beyond_pfa_sphere_force(geometry.a, geometry.R, theta).value
