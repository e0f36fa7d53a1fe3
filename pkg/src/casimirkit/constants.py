"""Physical constants and unit conversions.

Internally frequencies and energies are in eV, lengths in nm and
temperatures in K.  Public results are returned in SI units (J, N, Pa,
J/m^2, J/(K m^2)).  Every conversion goes through the names below.
"""
import math

from scipy import constants as _c

HBAR = _c.hbar
C = _c.c
K_B = _c.k
E_CHARGE = _c.e
M_E = _c.m_e
EPS0 = _c.epsilon_0

EV = _c.e  # J per eV
NM = 1e-9  # m per nm

HBARC_EV_NM = HBAR * C / EV / NM  # 197.327 eV nm
HBARC_J_M = HBAR * C
K_B_EV = K_B / EV  # eV / K

ZETA3 = 1.2020569031595942


def thermal_energy_ev(T):
    return K_B_EV * T


def effective_temperature(a_nm):
    """T_eff defined by k_B T_eff = hbar c / (2 a)."""
    return HBARC_EV_NM / (2.0 * a_nm) / K_B_EV


def matsubara_step(a_nm, T):
    """Spacing of the dimensionless Matsubara frequencies, 4 pi a k_B T / (hbar c)."""
    return 4.0 * math.pi * a_nm * K_B_EV * T / HBARC_EV_NM
