"""Parsing of quantities with mandatory unit suffixes ("500nm", "1.5um", "300K")."""
from __future__ import annotations

import re

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATTERN = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-zµμ]+)\s*$")

LENGTH = {"nm": 1.0, "um": 1e3, "µm": 1e3, "μm": 1e3, "mm": 1e6, "m": 1e9}
TEMPERATURE = {"K": 1.0, "mK": 1e-3}
ENERGY = {"eV": 1.0, "meV": 1e-3}


class UnitError(ValueError):
    pass


def _parse(text, table, kind, field):
    if isinstance(text, (int, float)):
        raise UnitError(f"{field}: bare number {text!r}; a {kind} needs a unit ({', '.join(table)})")
    m = _PATTERN.match(str(text))
    if not m:
        raise UnitError(f"{field}: cannot read {text!r} as a {kind} with a unit suffix")
    value, unit = m.groups()
    if unit not in table:
        raise UnitError(f"{field}: unknown {kind} unit {unit!r} in {text!r}")
    return float(value) * table[unit]


def length_nm(text, field="length"):
    return _parse(text, LENGTH, "length", field)


def temperature_k(text, field="temperature"):
    return _parse(text, TEMPERATURE, "temperature", field)


def energy_ev(text, field="energy"):
    return _parse(text, ENERGY, "energy", field)


def dimensionless(text, field="value"):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UnitError(f"{field}: expected a plain number, got {text!r}") from None
