"""Run configuration files (YAML, ``schema_version: 1``).

Layout::

    schema_version: 1
    constants: {hbar: 1.0, mass: 0.5}
    grid:      {x_min: -120, x_max: 140, n: 8192}
    state:     {kind: gaussian, x0: 5, p0: 5, sigma_q: 1}
               # or {kind: tabulated, real: [...], imag: [...]} / {kind: tabulated, file: amps.csv}
    potential: {kind: square_barrier, height: 40, left: 12, right: 12.5}
               # free | harmonic {omega, center} | tabulated {values: [...]} / {file: v.csv}
    arrival:   {X: 15.0, t_start: 0.0, t_step: 0.01, t_samples: 601}
    evolution: {method: split, dt: 0.0005}   # method: exact (free only) | split

All quantities are in atomic units. Relative ``file`` entries resolve
against the config file's directory.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .propagate import EvolutionParams, Potential
from .qgrid import Grid, PhysicalConstants, WaveFunction
from .states import GaussianSpec, gaussian

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    constants: PhysicalConstants
    grid: Grid
    psi0: WaveFunction
    potential: Potential
    X: list[float]
    times: np.ndarray
    method: str
    dt: float
    raw: dict

    @property
    def params(self) -> EvolutionParams:
        return EvolutionParams(self.dt)


def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.get(name)
    if sec is None and not required:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a mapping")
    return sec


def _num(sec: dict, path: str, key: str, default=None, kind=float):
    if key not in sec:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    val = sec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
    if kind is int and int(val) != val:
        raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
    return kind(val)


def _table(sec: dict, path: str, key: str, base: Path | None, columns: int = 1) -> np.ndarray:
    if "file" in sec:
        f = Path(sec["file"])
        if not f.is_absolute() and base is not None:
            f = base / f
        try:
            data = np.loadtxt(f, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}.file: cannot read {f}: {exc}") from exc
        if data.shape[1] < columns:
            raise ConfigError(f"{path}.file: expected {columns} column(s)")
        return data[:, :columns]
    if key not in sec:
        raise ConfigError(f"{path}: needs '{key}' or 'file'")
    try:
        return np.asarray(sec[key], dtype=float).reshape(-1, 1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{key}: expected a list of numbers") from exc


def _wrap(path: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(doc: dict, base: Path | None = None) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    c = _section(doc, "constants", required=False)
    constants = _wrap(
        "constants", PhysicalConstants, _num(c, "constants", "hbar", 1.0), _num(c, "constants", "mass", 1.0)
    )

    g = _section(doc, "grid")
    grid = _wrap(
        "grid",
        Grid,
        _num(g, "grid", "x_min"),
        _num(g, "grid", "x_max"),
        _num(g, "grid", "n", kind=int),
        constants.hbar,
    )

    s = _section(doc, "state")
    kind = s.get("kind", "gaussian")
    if kind == "gaussian":
        spec = _wrap("state", GaussianSpec, _num(s, "state", "x0"), _num(s, "state", "p0"), _num(s, "state", "sigma_q"))
        psi0 = _wrap("state", gaussian, spec, grid, constants)
    elif kind == "tabulated":
        if "file" in s:
            tab = _table(s, "state", "real", base, columns=2)
            amps = tab[:, 0] + 1j * tab[:, 1]
        else:
            amps = _table(s, "state", "real", base)[:, 0].astype(complex)
            if "imag" in s:
                amps = amps + 1j * _table({"imag": s["imag"]}, "state", "imag", base)[:, 0]
        if amps.size != grid.n:
            raise ConfigError(f"state: {amps.size} amplitudes for a grid of {grid.n}")
        norm = np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dx)
        if not norm > 0:
            raise ConfigError("state: amplitudes are all zero")
        psi0 = WaveFunction(grid, amps / norm, 0.0, constants)
    else:
        raise ConfigError(f"state.kind: unknown kind {kind!r}")

    v = _section(doc, "potential", required=False) or {"kind": "free"}
    vkind = v.get("kind", "free")
    if vkind == "free":
        potential = Potential.free()
    elif vkind == "square_barrier":
        potential = _wrap(
            "potential",
            Potential.square_barrier,
            _num(v, "potential", "height"),
            _num(v, "potential", "left"),
            _num(v, "potential", "right"),
        )
    elif vkind == "harmonic":
        potential = _wrap(
            "potential", Potential.harmonic, _num(v, "potential", "omega"), _num(v, "potential", "center", 0.0)
        )
    elif vkind == "tabulated":
        values = _table(v, "potential", "values", base)[:, 0]
        if values.size != grid.n:
            raise ConfigError(f"potential: {values.size} values for a grid of {grid.n}")
        potential = Potential.tabulated(values)
    else:
        raise ConfigError(f"potential.kind: unknown kind {vkind!r}")

    a = _section(doc, "arrival")
    if "X" not in a:
        raise ConfigError("arrival.X: required")
    xs = a["X"] if isinstance(a["X"], list) else [a["X"]]
    X = [_num({"X": x}, "arrival", "X") for x in xs]
    if not X:
        raise ConfigError("arrival.X: empty list")
    for x in X:
        if not grid.contains(x):
            raise ConfigError(f"arrival.X: {x} outside grid [{grid.x_min}, {grid.x_max}]")
    t_start = _num(a, "arrival", "t_start", 0.0)
    t_step = _num(a, "arrival", "t_step")
    t_samples = _num(a, "arrival", "t_samples", kind=int)
    if not t_step > 0:
        raise ConfigError("arrival.t_step: must be positive")
    if t_samples < 1:
        raise ConfigError("arrival.t_samples: must be at least 1")
    times = t_start + t_step * np.arange(t_samples)

    e = _section(doc, "evolution", required=False)
    method = e.get("method", "exact" if potential.kind == "free" else "split")
    if method not in ("exact", "split"):
        raise ConfigError(f"evolution.method: expected 'exact' or 'split', got {method!r}")
    if method == "exact" and potential.kind != "free":
        raise ConfigError("evolution.method: 'exact' only applies to the free potential")
    dt = _num(e, "evolution", "dt", t_step)
    if not dt > 0:
        raise ConfigError("evolution.dt: must be positive")
    if method == "split":
        ratio = t_step / dt
        if abs(ratio - round(ratio)) > 1e-9 or abs(t_start / dt - round(t_start / dt)) > 1e-9:
            raise ConfigError("evolution.dt: t_start and t_step must be integer multiples of dt")

    raw = copy.deepcopy(doc)
    for name in ("state", "potential"):
        sec = raw.get(name)
        if isinstance(sec, dict) and "file" in sec and base is not None:
            sec["file"] = str((base / sec["file"]).resolve())
    return RunConfig(constants, grid, psi0, potential, X, times, method, dt, raw)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parse_config(doc, path.parent)


def preset_path(name: str) -> Path:
    return Path(str(resources.files("toa") / "presets" / f"{name}.yaml"))


def load_preset(name: str) -> RunConfig:
    return load_config(preset_path(name))
