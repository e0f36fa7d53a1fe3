"""Dielectric permittivities along the imaginary frequency axis.

All frequencies are photon energies in eV.  Every model is an immutable
dataclass; evaluation functions accept scalars or numpy arrays.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import special

from . import constants as const
from .errors import ZeroFrequencyError


@dataclass(frozen=True)
class Oscillator:
    """Core-electron oscillator: strength f (eV^2), resonance (eV), damping (eV)."""

    strength: float
    frequency: float
    damping: float = 0.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"oscillator frequency must be > 0, got {self.frequency}")
        if self.strength < 0 or self.damping < 0:
            raise ValueError("oscillator strength and damping must be >= 0")


@dataclass(frozen=True)
class GeneralizedPlasmaModel:
    omega_p: float
    oscillators: tuple = ()

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("plasma frequency must be > 0")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))

    def __call__(self, xi):
        return eval_generalized_plasma(self, xi)

    def core(self, xi):
        return eval_core_permittivity(self.oscillators, xi)


@dataclass(frozen=True)
class DrudeModel:
    omega_p: float
    gamma: float
    oscillators: tuple = ()

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("plasma frequency must be > 0")
        if not self.gamma > 0:
            raise ValueError("Drude relaxation must be > 0")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))

    def __call__(self, xi):
        return eval_drude(self, xi)

    def core(self, xi):
        return eval_core_permittivity(self.oscillators, xi)


@dataclass(frozen=True)
class OpticalDataTable:
    """Tabulated Im eps(omega) with a Drude extrapolation below the first sample.

    ``high_frequency`` is ``"truncate"`` (ignore everything above the last
    sample) or ``"power-law"`` (continue Im eps as a power law fitted to the
    last two samples).
    """

    omega: np.ndarray
    im_eps: np.ndarray
    tail: Optional[DrudeModel] = None
    high_frequency: str = "truncate"

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        e = np.asarray(self.im_eps, dtype=float)
        if w.ndim != 1 or w.shape != e.shape:
            raise ValueError("omega and im_eps must be 1-d arrays of equal length")
        if w.size < 2:
            raise ValueError("an optical table needs at least 2 samples")
        if np.any(np.diff(w) <= 0) or w[0] <= 0:
            raise ValueError("table frequencies must be positive and strictly increasing")
        if np.any(e < 0):
            raise ValueError("Im eps must be non-negative at every sample")
        if self.high_frequency not in ("truncate", "power-law"):
            raise ValueError(f"unknown high-frequency policy {self.high_frequency!r}")
        w.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "im_eps", e)

    def __call__(self, xi):
        return eval_from_table(self, xi)

    def __hash__(self):
        return hash((self.omega.tobytes(), self.im_eps.tobytes(), self.tail, self.high_frequency))

    def __eq__(self, other):
        if not isinstance(other, OpticalDataTable):
            return NotImplemented
        return (
            np.array_equal(self.omega, other.omega)
            and np.array_equal(self.im_eps, other.im_eps)
            and self.tail == other.tail
            and self.high_frequency == other.high_frequency
        )


PermittivityModel = Union[GeneralizedPlasmaModel, DrudeModel, OpticalDataTable]


@dataclass(frozen=True)
class CarrierParams:
    """Carrier density n (cm^-3) and mobility mu (cm^2 V^-1 s^-1)."""

    density: float
    mobility: float

    def __post_init__(self):
        if not (self.density > 0 and self.mobility > 0):
            raise ValueError("carrier density and mobility must be > 0")


class Statistics(str, Enum):
    MAXWELL_BOLTZMANN = "maxwell-boltzmann"
    FERMI_DIRAC = "fermi-dirac"


@dataclass(frozen=True)
class ScreeningSpec:
    statistics: Statistics
    density: float  # cm^-3
    eps_static: float = 1.0
    temperature: Optional[float] = None  # K, Maxwell-Boltzmann only
    fermi_energy: Optional[float] = None  # eV, Fermi-Dirac only

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        if not self.density > 0:
            raise ValueError("carrier density must be > 0")
        if self.eps_static < 1:
            raise ValueError("static permittivity must be >= 1")


def _xi(xi):
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise ValueError("imaginary frequency must be >= 0")
    return x


def _nonzero(x):
    if np.any(x == 0):
        raise ZeroFrequencyError(
            "model has a pole at xi = 0; use the analytic zero-frequency reflection limit"
        )


def _out(x, value):
    return float(value) if np.ndim(x) == 0 else value


def eval_core_permittivity(oscillators: Sequence[Oscillator], xi):
    """1 + sum_j f_j / (omega_j^2 + xi^2 + gamma_j xi)."""
    x = _xi(xi)
    eps = np.ones_like(x)
    for osc in oscillators:
        eps = eps + osc.strength / (osc.frequency**2 + x * x + osc.damping * x)
    return _out(x, eps)


def eval_generalized_plasma(model: GeneralizedPlasmaModel, xi):
    x = _xi(xi)
    _nonzero(x)
    return _out(x, eval_core_permittivity(model.oscillators, x) + model.omega_p**2 / (x * x))


def eval_drude(model: DrudeModel, xi):
    x = _xi(xi)
    _nonzero(x)
    free = model.omega_p**2 / (x * (x + model.gamma))
    return _out(x, eval_core_permittivity(model.oscillators, x) + free)


def conductivity_at_imaginary_freq(sigma0, gamma, xi):
    """Drude conductivity continued to imaginary frequency, sigma0 / (1 + xi/gamma)."""
    return sigma0 / (1.0 + np.asarray(xi, dtype=float) / gamma)


def derived_plasma_and_dc(params: CarrierParams):
    """Plasma frequency (eV) and dc conductivity (S/m) of a free-carrier gas.

    omega_p^2 = n e^2 / (eps0 m) is the SI form of 4 pi e^2 n / m.
    """
    n = params.density * 1e6  # m^-3
    omega_p = math.sqrt(n * const.E_CHARGE**2 / (const.EPS0 * const.M_E))
    sigma0 = params.mobility * 1e-4 * const.E_CHARGE * n
    return omega_p * const.HBAR / const.EV, sigma0


def einstein_diffusion(mobility, statistics, temperature=None, fermi_energy=None):
    """Diffusion coefficient D (m^2/s) from the Einstein relation, mobility in cm^2/(V s)."""
    mu = mobility * 1e-4
    statistics = Statistics(statistics)
    if statistics is Statistics.MAXWELL_BOLTZMANN:
        if temperature is None:
            raise ValueError("Maxwell-Boltzmann statistics needs a temperature")
        return mu * const.K_B * temperature / const.E_CHARGE
    if fermi_energy is None:
        raise ValueError("Fermi-Dirac statistics needs a Fermi energy")
    return mu * 2.0 * fermi_energy / 3.0  # E_F in eV is E_F/|e| in volts


def screening_length_general(eps_static, diffusion, sigma0):
    """R = sqrt(eps(0) D / (4 pi sigma(0))) in nm; SI inputs (m^2/s, S/m)."""
    return math.sqrt(const.EPS0 * eps_static * diffusion / sigma0) / const.NM


def screening_length(spec: ScreeningSpec) -> float:
    """Debye-Hueckel or Thomas-Fermi screening length in nm."""
    n = spec.density * 1e6
    if spec.statistics is Statistics.MAXWELL_BOLTZMANN:
        if spec.temperature is None:
            raise ValueError("Maxwell-Boltzmann screening needs a temperature")
        energy = const.K_B * spec.temperature
        r2 = const.EPS0 * spec.eps_static * energy / (const.E_CHARGE**2 * n)
    else:
        if spec.fermi_energy is None:
            raise ValueError("Fermi-Dirac screening needs a Fermi energy")
        energy = spec.fermi_energy * const.EV
        r2 = 2.0 * const.EPS0 * spec.eps_static * energy / (3.0 * const.E_CHARGE**2 * n)
    return math.sqrt(r2) / const.NM


def _drude_tail_integral(tail: DrudeModel, w0: float, x):
    # int_0^w0 omega * Im eps_D(omega) / (omega^2 + xi^2) d omega with
    # Im eps_D = wp^2 g / (omega (omega^2 + g^2)), by partial fractions.
    g = tail.gamma
    wp2 = tail.omega_p**2
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near = np.abs(x - g) < 1e-6 * g
    xs = x[~near]
    out[~near] = (np.arctan(w0 / g) / g - np.arctan(w0 / xs) / xs) / (xs * xs - g * g)
    if np.any(near):
        out[near] = w0 / (2 * g * g * (w0 * w0 + g * g)) + np.arctan(w0 / g) / (2 * g**3)
    return wp2 * g * out


def _power_law_exponent(table: OpticalDataTable):
    w1, w2 = table.omega[-2:]
    e1, e2 = table.im_eps[-2:]
    if e1 <= 0 or e2 <= 0:
        return None
    p = -math.log(e2 / e1) / math.log(w2 / w1)
    return p if p > 0 else None


def _high_tail_integral(table: OpticalDataTable, x):
    # int_W^inf omega * E (W/omega)^p / (omega^2 + xi^2)
    p = _power_law_exponent(table)
    if p is None:
        return np.zeros_like(x)
    W = table.omega[-1]
    E = table.im_eps[-1]
    return E / p * special.hyp2f1(1.0, p / 2.0, 1.0 + p / 2.0, -(x * x) / (W * W))


def eval_from_table(table: OpticalDataTable, xi):
    """Kramers-Kronig transform of tabulated Im eps onto the imaginary axis.

    eps(i xi) = 1 + (2/pi) int_0^inf omega Im eps(omega) / (omega^2 + xi^2) d omega,
    trapezoid on the tabulated grid plus a closed-form Drude tail below it.
    """
    x = _xi(xi)
    _nonzero(x)
    xs = np.atleast_1d(x)
    w = table.omega
    f = w[None, :] * table.im_eps[None, :] / (w[None, :] ** 2 + xs[:, None] ** 2)
    total = np.trapezoid(f, w, axis=1)
    if table.tail is not None:
        total = total + _drude_tail_integral(table.tail, w[0], xs)
    if table.high_frequency == "power-law":
        total = total + _high_tail_integral(table, xs)
    eps = 1.0 + 2.0 / math.pi * total
    return _out(x, eps.reshape(x.shape) if x.ndim else eps[0])


def table_truncation_bound(table: OpticalDataTable, xi):
    """Size of the power-law continuation dropped by the ``truncate`` policy."""
    xs = np.atleast_1d(_xi(xi))
    bound = 2.0 / math.pi * _high_tail_integral(table, xs)
    return _out(np.asarray(xi), bound if np.ndim(xi) else bound[0])


def static_core_permittivity(model: PermittivityModel) -> float:
    if isinstance(model, OpticalDataTable):
        raise ValueError("tabulated models have no separate core-electron part")
    return float(eval_core_permittivity(model.oscillators, 0.0))


# Representative numbers, not fitted values: the six oscillators below only
# mimic the interband structure of Au.  Load your own table for real work.
AU_OSCILLATORS = (
    Oscillator(strength=7.72, frequency=3.05, damping=0.75),
    Oscillator(strength=16.55, frequency=4.15, damping=1.85),
    Oscillator(strength=38.49, frequency=5.40, damping=1.95),
    Oscillator(strength=89.67, frequency=8.18, damping=1.70),
    Oscillator(strength=368.0, frequency=20.0, damping=5.0),
    Oscillator(strength=800.0, frequency=40.0, damping=10.0),
)
AU_OMEGA_P = 9.0
AU_GAMMA = 0.035
AU_DENSITY = 5.9e22


def au_preset(kind: str = "gp"):
    """Au-like model: ``"gp"`` (generalized plasma) or ``"drude"``."""
    if kind in ("gp", "plasma", "generalized-plasma"):
        return GeneralizedPlasmaModel(AU_OMEGA_P, AU_OSCILLATORS)
    if kind == "drude":
        return DrudeModel(AU_OMEGA_P, AU_GAMMA, AU_OSCILLATORS)
    raise ValueError(f"unknown Au preset {kind!r}")


def au_screening(eps_static: Optional[float] = None) -> ScreeningSpec:
    """Thomas-Fermi screening for Au with E_F = hbar omega_p."""
    if eps_static is None:
        eps_static = float(eval_core_permittivity(AU_OSCILLATORS, 0.0))
    return ScreeningSpec(
        Statistics.FERMI_DIRAC, AU_DENSITY, eps_static=eps_static, fermi_energy=AU_OMEGA_P
    )


def perfect_lattice_gamma(T, gamma_ref=AU_GAMMA, T_ref=300.0, theta_debye=165.0):
    """Relaxation (eV) of an impurity-free metal at temperature T (K).

    Linear in T above theta_D/4 and the Bloch-Grueneisen T^5 law below,
    matched at theta_D/4; it vanishes as T -> 0.
    """
    if T < 0:
        raise ValueError("temperature must be >= 0")
    knee = theta_debye / 4.0
    g_knee = gamma_ref * knee / T_ref
    if T >= knee:
        return gamma_ref * T / T_ref
    return g_knee * (T / knee) ** 5


def tabulate_im_eps(model, omega):
    """Im eps on the real frequency axis (eV) for a Drude model with oscillators.

    Handy for building optical tables whose Kramers-Kronig image is known.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("real frequencies must be > 0")
    im = np.zeros_like(w)
    if isinstance(model, DrudeModel):
        g = model.gamma
        im = im + model.omega_p**2 * g / (w * (w * w + g * g))
    for osc in model.oscillators:
        im = im + osc.strength * osc.damping * w / ((osc.frequency**2 - w * w) ** 2 + (osc.damping * w) ** 2)
    return im


def synthetic_table(model: DrudeModel, omega_min=0.05, omega_max=1000.0, n=4000, high_frequency="power-law"):
    """Log-spaced optical table sampled from ``model`` with its own Drude tail."""
    w = np.geomspace(omega_min, omega_max, n)
    tail = DrudeModel(model.omega_p, model.gamma)
    return OpticalDataTable(w, tabulate_im_eps(model, w), tail=tail, high_frequency=high_frequency)


def load_optical_table(path, tail: Optional[DrudeModel] = None, high_frequency="truncate"):
    """Read a two-column CSV (omega_eV, ImEps); ``#`` lines are comments."""
    rows = []
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if not rows and not header_seen:
                    header_seen = True
                    continue  # header line
                raise ValueError(f"{path}:{lineno}: expected two numeric columns")
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return OpticalDataTable(arr[:, 0], arr[:, 1], tail=tail, high_frequency=high_frequency)


def _oscillators_from(items):
    return tuple(
        Oscillator(float(o["strength"]), float(o["frequency"]), float(o.get("damping", 0.0)))
        for o in items
    )


def model_from_dict(d: dict, base_dir: Path = Path(".")) -> PermittivityModel:
    """Build a model from a preset document.

    Schema::

        {"model": "gp" | "drude" | "table",
         "omega_p": eV, "gamma": eV,
         "oscillators": [{"strength": eV^2, "frequency": eV, "damping": eV}, ...],
         "table": "file.csv", "high_frequency": "truncate" | "power-law",
         "tail": {"omega_p": eV, "gamma": eV}}
    """
    kind = d.get("model")
    osc = _oscillators_from(d.get("oscillators", ()))
    if kind in ("gp", "generalized-plasma"):
        return GeneralizedPlasmaModel(float(d["omega_p"]), osc)
    if kind == "drude":
        return DrudeModel(float(d["omega_p"]), float(d["gamma"]), osc)
    if kind == "table":
        tail = d.get("tail")
        tail_model = DrudeModel(float(tail["omega_p"]), float(tail["gamma"])) if tail else None
        return load_optical_table(
            base_dir / d["table"], tail=tail_model, high_frequency=d.get("high_frequency", "truncate")
        )
    raise ValueError(f"unknown model kind {kind!r}")


def load_material(path) -> PermittivityModel:
    path = Path(path)
    with open(path) as fh:
        return model_from_dict(json.load(fh), base_dir=path.parent)
