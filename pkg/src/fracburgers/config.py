"""Line-oriented ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored.  Keys are typed; an unknown key,
a duplicate key or a value that does not parse raises ``ConfigError`` naming
the offending line.

Simulation keys::

    s, eps1, n, domain_length, dt ("auto" or a number), t_end,
    dealias_fraction, output_every, seed, scheme (ifrk4 | ifrk2), drift,
    cfl_safety, blowup_grad_fraction
    init = gaussian_bump | band_limited_random | steep_shock | constant | sine
    init.amplitude, init.width, init.center, init.max_mode, init.steepness,
    init.seed, init.mean, init.l2 (gaussian only; overrides amplitude)

Sweep keys (comma-separated lists expand into a grid)::

    sweep.s, sweep.eps1, sweep.seed
    sweep.tmin          start of the decay check window (default 0.1)
    sweep.alpha         Hoelder exponent (default: certified at sweep.rho)
    sweep.rho           contraction ratio for the default alpha (default 1/800)
    sweep.holder_times  times at which seminorms are reported (default t_end)
    sweep.min_sep_cells Hoelder separation floor in grid cells (default 4)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FracBurgersError, ParameterError
from .solver import InitialData, SolverConfig


class ConfigError(FracBurgersError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _parse_float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _parse_int(text):
    return int(text, 0)


def _parse_dt(text):
    return "auto" if text == "auto" else _parse_float(text)


def _parse_str(text):
    return text


def _list_of(parser):
    def parse(text):
        items = [p.strip() for p in text.split(",") if p.strip()]
        return [parser(p) for p in items]
    return parse


SOLVER_KEYS = {
    "s": _parse_float, "eps1": _parse_float, "n": _parse_int, "domain_length": _parse_float,
    "dt": _parse_dt, "t_end": _parse_float, "dealias_fraction": _parse_float,
    "output_every": _parse_int, "seed": _parse_int, "scheme": _parse_str, "drift": _parse_float,
    "cfl_safety": _parse_float, "blowup_grad_fraction": _parse_float,
}
INIT_KEYS = {
    "init": _parse_str, "init.amplitude": _parse_float, "init.width": _parse_float,
    "init.center": _parse_float, "init.max_mode": _parse_int, "init.steepness": _parse_float,
    "init.seed": _parse_int, "init.mean": _parse_float, "init.l2": _parse_float,
}
SWEEP_KEYS = {
    "sweep.s": _list_of(_parse_float), "sweep.eps1": _list_of(_parse_float),
    "sweep.seed": _list_of(_parse_int), "sweep.tmin": _parse_float, "sweep.alpha": _parse_float,
    "sweep.rho": _parse_float, "sweep.holder_times": _list_of(_parse_float),
    "sweep.min_sep_cells": _parse_int,
}


def parse_lines(text: str, schema: dict, source: str = "<config>") -> dict:
    out, seen = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno, source)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno, source)
        try:
            out[key] = schema[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r} for {key!r}: {exc}", lineno, source) from None
        seen[key] = lineno
    out["_lines"] = seen
    return out


@dataclass
class RunSpec:
    config: SolverConfig
    init: InitialData
    raw: dict = field(default_factory=dict)


def _build(values: dict, source: str) -> RunSpec:
    lines = values.get("_lines", {})
    solver_kw = {k: v for k, v in values.items() if k in SOLVER_KEYS}
    if "s" not in solver_kw:
        raise ConfigError("missing required key 's'", None, source)
    try:
        config = SolverConfig(**solver_kw)
    except ParameterError as exc:
        raise ConfigError(str(exc), _blame(str(exc), lines), source) from None
    init_kw = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("init.")}
    kind = values.get("init", "gaussian_bump")
    l2 = init_kw.pop("l2", None)
    try:
        if l2 is not None:
            if kind != "gaussian_bump":
                raise ParameterError("init.l2 applies to gaussian_bump only")
            base = InitialData.gaussian_with_l2(l2, init_kw.pop("width", 1.0), init_kw.pop("center", 0.0))
            init_kw.pop("amplitude", None)
            init = InitialData(kind, amplitude=base.amplitude, width=base.width, center=base.center, **init_kw)
        else:
            init = InitialData(kind, **init_kw)
    except ParameterError as exc:
        raise ConfigError(str(exc), lines.get("init"), source) from None
    return RunSpec(config, init, {k: v for k, v in values.items() if k != "_lines"})


def _blame(message: str, lines: dict):
    for key in sorted(lines, key=len, reverse=True):
        if message.startswith(key + " ") or f" {key} " in f" {message} ":
            return lines[key]
    return None


def parse_run_config(text: str, source: str = "<config>") -> RunSpec:
    return _build(parse_lines(text, {**SOLVER_KEYS, **INIT_KEYS}, source), source)


def load_run_config(path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_run_config(text, str(path))


@dataclass
class SweepSpec:
    base: dict
    s: list
    eps1: list
    seed: list
    tmin: float = 0.1
    alpha: float | None = None
    rho: float = 1.0 / 800.0
    holder_times: list | None = None
    min_sep_cells: int = 4
    source: str = "<config>"

    def grid(self) -> list:
        """Ordered (s, eps1, seed) triples."""
        return [(s, e, sd) for s in self.s for e in self.eps1 for sd in self.seed]

    def run_spec(self, s: float, eps1: float, seed: int) -> RunSpec:
        values = dict(self.base)
        values.update({"s": s, "eps1": eps1, "seed": seed})
        return _build(values, self.source)


def parse_sweep_config(text: str, source: str = "<config>") -> SweepSpec:
    values = parse_lines(text, {**SOLVER_KEYS, **INIT_KEYS, **SWEEP_KEYS}, source)
    lines = values.pop("_lines")
    base = {k: v for k, v in values.items() if not k.startswith("sweep.")}
    base["_lines"] = lines

    def pick(key, fallback):
        return values.get(f"sweep.{key}", [base[key]] if key in base else fallback)

    spec = SweepSpec(
        base=base,
        s=pick("s", []),
        eps1=pick("eps1", [0.0]),
        seed=pick("seed", [0]),
        tmin=values.get("sweep.tmin", 0.1),
        alpha=values.get("sweep.alpha"),
        rho=values.get("sweep.rho", 1.0 / 800.0),
        holder_times=values.get("sweep.holder_times"),
        min_sep_cells=values.get("sweep.min_sep_cells", 4),
        source=source,
    )
    if spec.tmin <= 0:
        raise ConfigError("sweep.tmin must be positive", lines.get("sweep.tmin"), source)
    if spec.min_sep_cells < 1:
        raise ConfigError("sweep.min_sep_cells must be >= 1", lines.get("sweep.min_sep_cells"), source)
    if spec.alpha is not None and not 0 < spec.alpha < 0.5:
        raise ConfigError("sweep.alpha must lie in (0, 1/2)", lines.get("sweep.alpha"), source)
    # validate each grid point up front so a bad value fails before any run starts
    for s, e, sd in spec.grid():
        spec.run_spec(s, e, sd)
    return spec


def load_sweep_config(path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_sweep_config(text, str(path))
