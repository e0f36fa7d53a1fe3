"""Command-line front end.

Every number the CLI prints comes from one call into ``boxes``, ``lifshitz``,
``pfa`` or ``stats``; this module only parses, schedules and writes.

Exit codes: 0 success, 2 configuration error, 3 ingestion error,
4 numerical non-convergence, 5 internal invariant breach.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, boxes, lifshitz, materials, pfa, stats
from .errors import CasimirError, ConvergenceError, TermBudgetExceeded
from .lifshitz import PathDisagreement
from .units import UnitError, dimensionless, length_nm, temperature_k

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGESTION = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5

WORKERS_ENV = "CASIMIRKIT_WORKERS"

COMMANDS = (
    "box-energy",
    "box-force",
    "piston-force",
    "plates-ideal",
    "lifshitz",
    "pfa",
    "entropy",
    "compare",
)

# the module operation behind each command
OPERATIONS = {
    "box-energy": (boxes.physical_free_energy,),
    "box-force": (boxes.face_force,),
    "piston-force": (boxes.piston_force,),
    "plates-ideal": (boxes.plates_free_energy_ideal, boxes.plates_pressure_ideal),
    "lifshitz": (lifshitz.free_energy, lifshitz.pressure),
    "pfa": (pfa.pfa_sphere_force, pfa.pfa_cylinder_force, pfa.beyond_pfa_cylinder_force,
            pfa.beyond_pfa_sphere_force, pfa.pfa_force),
    "entropy": (lifshitz.entropy,),
    "compare": (stats.compare,),
}


class CliError(Exception):
    code = EXIT_INTERNAL


class ConfigError(CliError):
    code = EXIT_CONFIG


class IngestionError(CliError):
    code = EXIT_INGESTION


class PointFailure(Exception):
    """A module error raised at one grid point; carries the exit code."""

    def __init__(self, point, code, message):
        super().__init__(point, code, message)
        self.point = point
        self.code = code
        self.message = message

    def __str__(self):
        return f"{self.message} [at {self.point}]"


# ---------------------------------------------------------------------------
# parameters


def _choice(*options):
    def parse(value, name):
        if value not in options:
            raise ConfigError(f"{name}: {value!r} is not one of {', '.join(options)}")
        return value

    return parse


def _length(value, name):
    v = length_nm(value, name)
    if not v > 0:
        raise ConfigError(f"{name}: must be > 0, got {value!r}")
    return v


def _temperature(value, name):
    v = temperature_k(value, name)
    if v < 0:
        raise ConfigError(f"{name}: must be >= 0 K, got {value!r}")
    return v


def _sides(value, name):
    parts = value if isinstance(value, (list, tuple)) else str(value).split(",")
    if len(parts) != 3:
        raise ConfigError(f"{name}: expected three comma-separated lengths, got {value!r}")
    return tuple(_length(p.strip() if isinstance(p, str) else p, name) for p in parts)


def _text(value, name):
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{name}: expected a non-empty string")
    return value


def _models(value, name):
    items = [value] if isinstance(value, str) else list(value)
    for item in items:
        _model_from_label(item, name)  # validate early
    return tuple(items)


def _level(value, name):
    v = dimensionless(value, name)
    if not 0 < v < 1:
        raise ConfigError(f"{name}: must lie in (0, 1)")
    return v


def _theta(value, name):
    if value in pfa.THETA_CATALOGUE:
        return value
    return dimensionless(value, name)


def _subranges(value, name):
    items = [value] if isinstance(value, str) else list(value)
    out = []
    for item in items:
        try:
            lo, hi = str(item).split(":")
        except ValueError:
            raise ConfigError(f"{name}: expected lo:hi, got {item!r}") from None
        lo, hi = _length(lo, name), _length(hi, name)
        if not lo < hi:
            raise ConfigError(f"{name}: lower end must be below upper end in {item!r}")
        out.append((lo, hi))
    return tuple(out)


def _path(value, name):
    p = Path(_text(value, name))
    if not p.is_file():
        raise IngestionError(f"{name}: file not found: {p}")
    return str(p)


# name -> (parser, default, commands)
PARAMS = {
    "a": (_length, None, ("box-energy", "box-force", "plates-ideal", "lifshitz", "entropy", "pfa")),
    "sides": (_sides, None, ("box-energy", "box-force", "piston-force")),
    "position": (_length, None, ("piston-force",)),
    "T": (_temperature, "0K", ("box-energy", "box-force", "piston-force", "plates-ideal", "pfa",
                               "lifshitz", "entropy")),
    "field": (_choice("em", "scalar"), "em", ("box-energy", "box-force", "piston-force")),
    "method": (_choice("ladder", "images"), "ladder", ("box-energy", "box-force", "piston-force")),
    "axis": (_choice("x", "y", "z"), "x", ("box-force",)),
    "definition": (_choice("physical", "naive"), "physical", ("piston-force",)),
    "model": (_models, ("gp",), ("lifshitz", "entropy")),
    "quantity": (_choice("free-energy", "pressure"), "free-energy", ("lifshitz",)),
    "geometry": (_choice("sphere", "cylinder"), "sphere", ("pfa",)),
    "R": (_length, None, ("pfa",)),
    "theta": (_theta, None, ("pfa",)),
    "plate_energy": (_text, "ideal", ("pfa",)),
    "series": (_path, None, ("compare",)),
    "band": (_path, None, ("compare",)),
    "level": (_level, 0.95, ("compare",)),
    "rule": (_choice("quadrature", "linear"), "quadrature", ("compare",)),
    "subrange": (_subranges, (), ("compare",)),
}
# lifshitz and entropy need a positive temperature
_T_POSITIVE = ("lifshitz", "entropy")
REQUIRED = {
    "box-energy": (("a", "sides"),),
    "box-force": (("a", "sides"),),
    "piston-force": (("sides",), ("position",)),
    "plates-ideal": (("a",),),
    "lifshitz": (("a",), ("T",)),
    "entropy": (("a",), ("T",)),
    "pfa": (("a",), ("R",)),
    "compare": (("series",), ("band",)),
}
SWEEPABLE = {"a": _length, "T": _temperature, "R": _length, "position": _length}


@dataclass(frozen=True)
class Sweep:
    name: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("sweep: count must be >= 1")
        if not self.start < self.stop:
            raise ConfigError("sweep: start must be below stop")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"sweep: spacing must be linear or log, got {self.spacing!r}")

    def values(self):
        if self.count == 1:
            return [self.start]
        if self.spacing == "log":
            return [float(v) for v in np.geomspace(self.start, self.stop, self.count)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]


def parse_sweep(text) -> Sweep:
    """``name=start:stop:count[:linear|log]``, e.g. ``a=0.5um:5um:10``."""
    try:
        name, spec = str(text).split("=", 1)
        parts = spec.split(":")
        start, stop, count = parts[:3]
        spacing = parts[3] if len(parts) > 3 else "linear"
        if len(parts) > 4:
            raise ValueError
    except ValueError:
        raise ConfigError(f"sweep: expected name=start:stop:count[:linear|log], got {text!r}") from None
    name = name.strip()
    if name not in SWEEPABLE:
        raise ConfigError(f"sweep: cannot sweep {name!r}; choose from {', '.join(SWEEPABLE)}")
    parse = SWEEPABLE[name]
    try:
        n = int(count)
    except ValueError:
        raise ConfigError(f"sweep: count must be an integer, got {count!r}") from None
    return Sweep(name, parse(start, f"sweep.{name}"), parse(stop, f"sweep.{name}"), n, spacing)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(hash=False)
    sweep: Optional[Sweep] = None
    output: Optional[str] = None
    format: str = "json"
    workers: int = 1
    include_timing: bool = False


def _parser():
    p = argparse.ArgumentParser(prog="casimirkit", description="Casimir effect calculations.")
    p.add_argument("command", nargs="?", help=" | ".join(COMMANDS))
    p.add_argument("--config", help="JSON file with default parameters")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--sweep", help="name=start:stop:count[:linear|log]")
    p.add_argument("--workers", type=int, help=f"worker processes (env {WORKERS_ENV})")
    p.add_argument("--include-timing", action="store_true", default=None,
                   help="add wall time to the JSON report (makes output non-reproducible)")
    p.add_argument("--a", help="separation or cube side, e.g. 500nm")
    p.add_argument("--sides", help="box sides, e.g. 1um,1um,2um")
    p.add_argument("--position", help="piston position along x")
    p.add_argument("--T", help="temperature, e.g. 300K")
    p.add_argument("--field", help="em | scalar")
    p.add_argument("--method", help="ladder | images")
    p.add_argument("--axis", help="x | y | z")
    p.add_argument("--definition", help="physical | naive")
    p.add_argument("--model", action="append",
                   help="gp | drude | screened | table:<csv> | file:<json> (repeatable)")
    p.add_argument("--quantity", help="free-energy | pressure")
    p.add_argument("--geometry", help="sphere | cylinder")
    p.add_argument("--R", help="radius of the curved body")
    p.add_argument("--theta", help="sphere beyond-PFA coefficient or catalogue key")
    p.add_argument("--plate-energy", dest="plate_energy", help="ideal | lifshitz:<model>")
    p.add_argument("--series", help="measurement series CSV")
    p.add_argument("--band", help="theory band CSV")
    p.add_argument("--level", help="confidence level")
    p.add_argument("--rule", help="quadrature | linear")
    p.add_argument("--subrange", action="append", help="lo:hi, repeatable")
    return p


def _attach_negative_values(argv):
    """Turn ``--a -5nm`` into ``--a=-5nm`` so the range check can report it."""
    out = []
    it = iter(argv)
    for tok in it:
        out.append(tok)
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is None:
                break
            if len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                out[-1] = f"{tok}={nxt}"
            else:
                out.append(nxt)
    return out


def _load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise IngestionError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise IngestionError(f"config: {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise IngestionError("config: top level must be a JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def parse_and_validate(argv, config_file=None) -> RunConfig:
    """Resolve flags over config file over defaults into a typed RunConfig."""
    parser = _parser()
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        if exc.code == 0:  # --help
            raise
        raise ConfigError("invalid command-line arguments") from None
    config_path = args.config or config_file
    conf = _load_config(config_path) if config_path else {}
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    merged = {**conf, **flags}

    command = merged.pop("command", None)
    if command is None:
        raise ConfigError("command: missing (give it on the command line or in the config)")
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}; choose from {', '.join(COMMANDS)}")

    fmt = merged.pop("format", "json")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: {fmt!r} is not csv or json")
    out = merged.pop("out", None)
    include_timing = bool(merged.pop("include_timing", False))
    workers = merged.pop("workers", None)
    if workers is None:
        workers = os.environ.get(WORKERS_ENV, 1)
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise ConfigError(f"workers: expected an integer, got {workers!r}") from None
    if workers < 1:
        raise ConfigError("workers: must be >= 1")
    sweep_text = merged.pop("sweep", None)
    sweep = parse_sweep(sweep_text) if sweep_text else None

    params = {}
    for name, value in merged.items():
        if name not in PARAMS:
            raise ConfigError(f"{name}: unknown parameter")
        parse, _, commands = PARAMS[name]
        if command not in commands:
            raise ConfigError(f"{name}: not used by {command}")
        try:
            params[name] = parse(value, name)
        except UnitError as exc:
            raise ConfigError(str(exc)) from None
    for name, (parse, default, commands) in PARAMS.items():
        if command in commands and name not in params and default is not None:
            params[name] = parse(default, name) if isinstance(default, str) else default
    if sweep is not None:
        if sweep.name not in PARAMS or command not in PARAMS[sweep.name][2]:
            raise ConfigError(f"sweep: {command} has no parameter {sweep.name!r}")
        if command == "compare":
            raise ConfigError("sweep: compare does not take a sweep")
        params[sweep.name] = sweep.start
    for group in REQUIRED[command]:
        if not any(g in params for g in group):
            raise ConfigError(f"{' or '.join(group)}: required by {command}")
    if command in _T_POSITIVE and not params["T"] > 0:
        raise ConfigError(f"T: {command} needs T > 0 K")
    if command == "pfa" and params["plate_energy"] != "ideal":
        kind, _, label = params["plate_energy"].partition(":")
        if kind != "lifshitz" or not label:
            raise ConfigError("plate_energy: expected ideal or lifshitz:<model>")
        _model_from_label(label, "plate_energy")
        if not params["T"] > 0:
            raise ConfigError("T: a Lifshitz plate kernel needs T > 0 K")
    return RunConfig(command, params, sweep, out, fmt, workers, include_timing)


# ---------------------------------------------------------------------------
# models


def _model_from_label(label, name="model"):
    """(material, scheme) for a model label."""
    kind, _, rest = str(label).partition(":")
    try:
        if kind in ("gp", "drude", "screened"):
            if rest not in ("", "au-preset"):
                raise ConfigError(f"{name}: only the au-preset variant exists for {kind!r}")
            if kind == "screened":
                return materials.au_preset("drude"), lifshitz.Screened(materials.au_screening())
            return materials.au_preset(kind), lifshitz.STANDARD
        if kind == "table":
            tail = materials.DrudeModel(materials.AU_OMEGA_P, materials.AU_GAMMA)
            return materials.load_optical_table(_path(rest, name), tail=tail), lifshitz.STANDARD
        if kind == "file":
            return materials.load_material(_path(rest, name)), lifshitz.STANDARD
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, CliError):
            raise
        raise IngestionError(f"{name}: cannot load {label!r}: {exc}") from None
    raise ConfigError(f"{name}: unknown model {label!r}")


# ---------------------------------------------------------------------------
# evaluation


def _box(params):
    if "sides" in params and "a" not in params:
        return boxes.BoxGeometry(*params["sides"])
    return boxes.BoxGeometry.cube(params["a"])


def _evaluate(command, params):
    """One grid point -> list of output rows (dicts)."""
    if command == "box-energy":
        box = _box(params)
        r = boxes.physical_free_energy(box, params["field"], params["T"], method=params["method"])
        return [{"field": params["field"], "ax_nm": box.ax, "ay_nm": box.ay, "az_nm": box.az,
                 "T_K": params["T"], "energy_J": r.value, "error_J": r.error}]
    if command == "box-force":
        box = _box(params)
        r = boxes.face_force(box, params["field"], params["T"], axis=params["axis"], method=params["method"])
        return [{"field": params["field"], "ax_nm": box.ax, "ay_nm": box.ay, "az_nm": box.az,
                 "T_K": params["T"], "axis": params["axis"], "force_N": r.value, "error_N": r.error}]
    if command == "piston-force":
        box = boxes.BoxGeometry(*params["sides"])
        pb = boxes.PistonedBox(box, params["position"])
        r = boxes.piston_force(pb, params["field"], params["T"], definition=params["definition"],
                               method=params["method"])
        return [{"field": params["field"], "ax_nm": box.ax, "ay_nm": box.ay, "az_nm": box.az,
                 "position_nm": params["position"], "T_K": params["T"],
                 "definition": params["definition"], "force_N": r.value, "error_N": r.error}]
    if command == "plates-ideal":
        a, T = params["a"], params["T"]
        p = boxes.plates_pressure_ideal(a, T)
        row = {"a_nm": a, "T_K": T, "free_energy_J_per_m2": boxes.plates_free_energy_ideal(a, T),
               "pressure_Pa": p.value}
        if p.numeric_error is not None:
            row["pressure_error_Pa"] = p.numeric_error
        return [row]
    if command in ("lifshitz", "entropy"):
        material, scheme = _model_from_label(params["model"])
        cfg = lifshitz.PlatesConfig(params["a"], params["T"], material, scheme)
        row = {"model": params["model"], "scheme": type(scheme).__name__.lower(),
               "a_nm": params["a"], "T_K": params["T"]}
        if command == "entropy":
            s = lifshitz.entropy(cfg)
            row.update(quantity="entropy", unit="J/(K m^2)", value=s.value, error=s.error)
        elif params["quantity"] == "pressure":
            p = lifshitz.pressure(cfg)
            row.update(quantity="pressure", unit="Pa", value=p.value, error=p.error)
        else:
            f = lifshitz.free_energy(cfg)
            row.update(quantity="free-energy", unit="J/m^2", value=f.value, error=f.error)
        return [row]
    if command == "pfa":
        return [_evaluate_pfa(params)]
    raise CliError(f"no evaluator for {command}")


def _evaluate_pfa(params):
    a, R = params["a"], params["R"]
    geom = pfa.CurvedGeometry(params["geometry"], a, R)
    unit = "N" if geom.shape is pfa.Shape.SPHERE else "N/m"
    row = {"geometry": params["geometry"], "a_nm": a, "R_nm": R, "T_K": params["T"],
           "plate_energy": params["plate_energy"], "unit": unit, "valid": geom.valid}
    if params["plate_energy"] == "ideal":
        if params["T"] > 0:
            res = pfa.pfa_force(geom, pfa.ideal_plate_thermal_pressure(params["T"]), heuristic=True)
            row.update(pfa_force=res.value, error=res.error, heuristic=True)
        elif geom.shape is pfa.Shape.SPHERE:
            row.update(pfa_force=pfa.pfa_sphere_force(a, R), heuristic=False)
        else:
            row.update(pfa_force=pfa.pfa_cylinder_force(a, R), heuristic=False)
        if params["T"] == 0:
            if geom.shape is pfa.Shape.CYLINDER:
                row["beyond_pfa_force"] = pfa.beyond_pfa_cylinder_force(a, R)
            elif "theta" in params:
                s = pfa.beyond_pfa_sphere_force(a, R, params["theta"])
                row.update(beyond_pfa_force=s.value, theta=s.theta, theta_source=s.provenance)
        return row
    label = params["plate_energy"].partition(":")[2]
    material, scheme = _model_from_label(label, "plate_energy")
    _, pressure = pfa.lifshitz_kernels(material, params["T"], scheme)
    res = pfa.pfa_force(geom, pressure, heuristic=True)
    row.update(pfa_force=res.value, error=res.error, heuristic=True)
    return row


def _describe(params, keys):
    return ", ".join(f"{k}={params[k]!r}" for k in keys if k in params)


def _run_point(task):
    command, params, keys = task
    try:
        return _evaluate(command, params)
    except PathDisagreement as exc:
        raise PointFailure(_describe(params, keys), EXIT_INTERNAL, str(exc)) from None
    except (ConvergenceError, TermBudgetExceeded) as exc:
        raise PointFailure(_describe(params, keys), EXIT_NUMERIC, str(exc)) from None
    except CliError as exc:
        raise PointFailure(_describe(params, keys), exc.code, str(exc)) from None
    except (ValueError, CasimirError) as exc:
        raise PointFailure(_describe(params, keys), EXIT_CONFIG, str(exc)) from None


@dataclass
class RunReport:
    command: str
    inputs: dict
    rows: list
    units: dict
    version: str = __version__
    wall_time: float = 0.0

    def to_dict(self, include_timing=False):
        doc = {"command": self.command, "inputs": self.inputs, "units": self.units,
               "rows": self.rows, "version": self.version}
        if include_timing:
            doc["wall_time_s"] = self.wall_time
        return doc


UNITS = {
    "lengths": "nm",
    "temperatures": "K",
    "energy_J": "J",
    "force_N": "N",
    "free_energy_J_per_m2": "J/m^2",
    "pressure_Pa": "Pa",
    "pfa_force": "N (sphere) or N/m (cylinder)",
    "value": "see the unit column",
}


def _tasks(config: RunConfig):
    grid = config.sweep.values() if config.sweep else [None]
    labels = config.params.get("model", (None,))
    keys = [k for k in ("model", "a", "T", "R", "position") if k in config.params]
    tasks = []
    for label in labels:
        for value in grid:
            p = dict(config.params)
            if label is not None:
                p["model"] = label
            if value is not None:
                p[config.sweep.name] = value
            tasks.append((config.command, p, keys))
    return tasks


def run_sweep(config: RunConfig) -> RunReport:
    """Evaluate the grid (optionally in parallel); rows keep grid order."""
    start = time.perf_counter()
    inputs = _echo(config)
    if config.command == "compare":
        doc = _compare(config)
        return RunReport("compare", inputs, [doc], {"values": "as in the input files"},
                         wall_time=time.perf_counter() - start)
    tasks = _tasks(config)
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_point, tasks))
    else:
        chunks = [_run_point(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return RunReport(config.command, inputs, rows, UNITS, wall_time=time.perf_counter() - start)


def _compare(config):
    try:
        series = stats.read_series(config.params["series"])
        band = stats.read_band(config.params["band"])
    except (OSError, ValueError, KeyError) as exc:
        raise IngestionError(f"compare: {exc}") from None
    try:
        return stats.compare(series, band, level=config.params["level"], rule=config.params["rule"],
                             subranges=config.params["subrange"])
    except ValueError as exc:
        raise IngestionError(f"compare: {exc}") from None


def _echo(config):
    out = {}
    for k, v in sorted(config.params.items()):
        out[k] = list(v) if isinstance(v, tuple) else v
    if config.sweep:
        s = config.sweep
        out["sweep"] = {"name": s.name, "start": s.start, "stop": s.stop, "count": s.count,
                        "spacing": s.spacing}
    return out


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(v):
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def render(report: RunReport, fmt="json", include_timing=False) -> str:
    if fmt == "json":
        return stats.verdict_json(_plain(report.to_dict(include_timing))) + "\n"
    if report.command == "compare":
        return _compare_csv(report.rows[0])
    columns = []
    for row in report.rows:
        for k in row:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in report.rows:
        w.writerow([_fmt(row[k]) if k in row else "" for k in columns])
    return buf.getvalue()


def _compare_csv(doc):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a_nm", "delta_tot", "band_overlap_agrees", "difference_agrees", "xi_over_mean"])
    rel = doc["relative_error"]
    bo = doc["band_overlap"]["points"]
    di = doc["difference_interval"]["points"]
    ag = doc["difference_interval"]["agreement"]
    for r, b, d, g in zip(rel, bo, di, ag):
        w.writerow([_fmt(r["a_nm"]), _fmt(r["delta_tot"]), _fmt(b["agrees"]), _fmt(d["agrees"]),
                    _fmt(g["ratio"])])
    return buf.getvalue()


def atomic_write(path, text):
    """Write via a temporary file in the same directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_and_validate(argv)
        report = run_sweep(config)
        text = render(report, config.format, config.include_timing)
        if config.output:
            atomic_write(config.output, text)
        else:
            sys.stdout.write(text)
        print(f"casimirkit: {len(report.rows)} row(s) in {report.wall_time:.2f} s", file=sys.stderr)
        return EXIT_OK
    except PointFailure as exc:
        print(f"casimirkit: error: {exc}", file=sys.stderr)
        return exc.code
    except CliError as exc:
        print(f"casimirkit: error: {exc}", file=sys.stderr)
        return exc.code
    except UnitError as exc:
        print(f"casimirkit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, TermBudgetExceeded) as exc:
        print(f"casimirkit: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # invariant breach
        print(f"casimirkit: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
