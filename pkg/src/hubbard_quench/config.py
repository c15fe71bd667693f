"""Run configuration: YAML file validated into frozen dataclasses.

All energies are in units of U and all times in units of 1/U.  Every
validation failure raises :class:`ConfigError` naming the offending field
and, when the field is present in the file, its line number.

Schema (all sections except ``model``, ``mode`` and ``params`` optional)::

    model: bose | fermi
    mode: analytic | ode | ed | thermal-scan | compare
    lattice:
      D: 3                      # dimension
      L: [6]                    # extents; required for finite grids and ED
      grid: thermodynamic       # thermodynamic | finite
      points_per_axis: 32       # thermodynamic grid resolution
    params:
      J_initial: 0.0            # must be 0: every run starts from the J = 0 state
      J_final: 0.14
      U: 1.0                    # must be 1
      a: 0.0                    # staggered field (fermi only)
    protocol: {kind: sudden, tau: 0.0}       # sudden | linear | tanh
    time: {t_end: 80, dt: 0.001, sample_dt: 0.1}
    separations: [[1, 0, 0]]
    observables: [depletion, hp, pp]
    thermal: {T_min: 0.01, T_max: 2.0, num: 200}
    tolerances: {invariant_drift: 1.0e-6, degeneracy: 1.0e-9}
    ed: {dimension_cap: 20000}
    output: {name: run, formats: [csv, json]}
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

MODES = ("analytic", "ode", "ed", "thermal-scan", "compare")
MODE_ALIASES = {"analytic-1/Z": "analytic", "ode-1/Z": "ode"}
MODELS = ("bose", "fermi")

ONSITE_OBSERVABLES = {
    ("bose", "analytic"): {"depletion"},
    ("bose", "ode"): {"depletion"},
    ("bose", "ed"): {"p0", "p1", "p2"},
    ("fermi", "analytic"): {"double_occupancy"},
    ("fermi", "ode"): {"double_occupancy"},
    ("fermi", "ed"): {"double_occupancy", "empty"},
}
PAIR_OBSERVABLES = {
    ("bose", "analytic"): {"hh", "hp", "ph", "pp", "bb"},
    ("bose", "ode"): {"hh", "hp", "ph", "pp", "bb"},
    ("bose", "ed"): {"bb", "nn", "parity"},
    ("fermi", "analytic"): {"symmetric_11", "mixed_10"},
    ("fermi", "ode"): {"symmetric_11", "mixed_10"},
    ("fermi", "ed"): {"szsz"},
}
# observables with both a 1/Z and an ED estimate
COMPARE_OBSERVABLES = {"bose": {"p0", "p2", "bb"}, "fermi": {"double_occupancy", "empty"}}


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = ""
        if field:
            where = f"field '{field}'"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class LatticeConfig:
    D: int = 1
    L: tuple[int, ...] | None = None
    grid: str = "thermodynamic"
    points_per_axis: int = 32


@dataclass(frozen=True)
class ParamsConfig:
    J_final: float
    J_initial: float = 0.0
    U: float = 1.0
    a: float = 0.0


@dataclass(frozen=True)
class ProtocolConfig:
    kind: str = "sudden"
    tau: float = 0.0


@dataclass(frozen=True)
class TimeConfig:
    t_end: float = 10.0
    dt: float = 1e-3
    sample_dt: float = 0.1

    def samples(self) -> int:
        return int(round(self.t_end / self.sample_dt))

    def times(self) -> np.ndarray:
        return np.arange(self.samples() + 1) * self.sample_dt


@dataclass(frozen=True)
class ThermalConfig:
    T_min: float = 0.01
    T_max: float = 2.0
    num: int = 200


@dataclass(frozen=True)
class Tolerances:
    invariant_drift: float = 1e-6
    degeneracy: float = 1e-9


@dataclass(frozen=True)
class EDConfig:
    dimension_cap: int = 20000


@dataclass(frozen=True)
class OutputConfig:
    name: str = "run"
    formats: tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    model: str
    mode: str
    params: ParamsConfig
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    separations: tuple[tuple[int, ...], ...] = ()
    observables: tuple[str, ...] = ()
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    ed: EDConfig = field(default_factory=EDConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_mode(self, mode: str) -> "RunConfig":
        return validate(dataclasses.replace(self, mode=mode))


SECTIONS = {
    "lattice": LatticeConfig,
    "params": ParamsConfig,
    "protocol": ProtocolConfig,
    "time": TimeConfig,
    "thermal": ThermalConfig,
    "tolerances": Tolerances,
    "ed": EDConfig,
    "output": OutputConfig,
}


def _line_map(node, prefix: str = "", out: dict | None = None) -> dict[str, int]:
    """Dotted field path -> 1-based line number, from a composed YAML node."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            out[path] = key.start_mark.line + 1
            _line_map(value, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            path = f"{prefix}[{i}]"
            out[path] = value.start_mark.line + 1
            _line_map(value, path, out)
    return out


class _Checker:
    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def fail(self, path: str, message: str):
        line = self.lines.get(path)
        if line is None and "." in path:
            line = self.lines.get(path.rsplit(".", 1)[0])
        raise ConfigError(message, path, line)

    def number(self, path: str, value, integer: bool = False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        if integer and not float(value).is_integer():
            self.fail(path, f"expected an integer, got {value!r}")
        if not math.isfinite(value):
            self.fail(path, f"must be finite, got {value!r}")
        return int(value) if integer else float(value)

    def section(self, name: str, cls, raw):
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            self.fail(name, "expected a mapping")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for key in raw:
            if key not in fields:
                self.fail(f"{name}.{key}", f"unknown field (allowed: {', '.join(fields)})")
        kwargs = {}
        for key, value in raw.items():
            path = f"{name}.{key}"
            default = fields[key].default
            if key == "L":
                if value is not None:
                    if not isinstance(value, list) or not value:
                        self.fail(path, "expected a non-empty list of extents")
                    value = tuple(self.number(f"{path}[{i}]", v, True) for i, v in enumerate(value))
            elif key == "formats":
                if not isinstance(value, list):
                    self.fail(path, "expected a list")
                value = tuple(str(v) for v in value)
            elif isinstance(default, bool):
                pass
            elif isinstance(default, int):
                value = self.number(path, value, integer=True)
            elif isinstance(default, float) or fields[key].default is dataclasses.MISSING:
                value = self.number(path, value)
            elif isinstance(default, str):
                if not isinstance(value, str):
                    self.fail(path, f"expected a string, got {value!r}")
            kwargs[key] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            missing = [f for f, fdef in fields.items()
                       if fdef.default is dataclasses.MISSING
                       and fdef.default_factory is dataclasses.MISSING and f not in kwargs]
            self.fail(f"{name}.{missing[0]}" if missing else name,
                      "required field is missing" if missing else str(exc))


def parse(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", "<file>",
                          mark.line + 1 if mark is not None else None) from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", "<file>", 1)
    chk = _Checker(_line_map(node))

    allowed = {"model", "mode", "separations", "observables", *SECTIONS}
    for key in raw:
        if key not in allowed:
            chk.fail(str(key), f"unknown section (allowed: {', '.join(sorted(allowed))})")
    for key in ("model", "mode", "params"):
        if key not in raw:
            raise ConfigError("required field is missing", key)

    kwargs: dict[str, Any] = {"model": raw["model"], "mode": raw["mode"]}
    for name, cls in SECTIONS.items():
        if name in raw:
            kwargs[name] = chk.section(name, cls, raw[name])

    seps = raw.get("separations", [])
    if not isinstance(seps, list):
        chk.fail("separations", "expected a list of integer vectors")
    parsed = []
    for i, d in enumerate(seps):
        path = f"separations[{i}]"
        if not isinstance(d, list) or not d:
            chk.fail(path, "expected a list of integers")
        parsed.append(tuple(chk.number(f"{path}[{j}]", x, True) for j, x in enumerate(d)))
    kwargs["separations"] = tuple(parsed)

    obs = raw.get("observables", [])
    if not isinstance(obs, list) or not all(isinstance(o, str) for o in obs):
        chk.fail("observables", "expected a list of names")
    kwargs["observables"] = tuple(obs)

    return validate(RunConfig(**kwargs), chk)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}", str(path)) from exc
    return parse(text)


def validate(cfg: RunConfig, chk: _Checker | None = None) -> RunConfig:
    """Cross-field checks; returns ``cfg`` with the mode alias resolved."""
    chk = chk or _Checker({})
    mode = MODE_ALIASES.get(cfg.mode, cfg.mode)
    if mode not in MODES:
        chk.fail("mode", f"unknown mode {cfg.mode!r} (allowed: {', '.join(MODES)})")
    if cfg.model not in MODELS:
        chk.fail("model", f"unknown model {cfg.model!r} (allowed: {', '.join(MODELS)})")
    cfg = dataclasses.replace(cfg, mode=mode)

    p = cfg.params
    if p.J_final < 0:
        chk.fail("params.J_final", f"hopping must be non-negative, got {p.J_final}")
    if p.J_initial < 0:
        chk.fail("params.J_initial", f"hopping must be non-negative, got {p.J_initial}")
    if p.J_initial != 0:
        chk.fail("params.J_initial", "runs start from the J = 0 product state; set J_initial: 0")
    if p.U != 1:
        chk.fail("params.U", "energies are in units of U, so U must be 1")
    if p.a < 0:
        chk.fail("params.a", f"staggered field must be non-negative, got {p.a}")
    if cfg.model == "bose" and p.a != 0:
        chk.fail("params.a", "the staggered field only applies to the fermi model")

    lat = cfg.lattice
    if lat.D < 1:
        chk.fail("lattice.D", f"dimension must be >= 1, got {lat.D}")
    if lat.grid not in ("thermodynamic", "finite"):
        chk.fail("lattice.grid", f"unknown grid {lat.grid!r} (allowed: thermodynamic, finite)")
    if lat.L is not None:
        if len(lat.L) != lat.D:
            chk.fail("lattice.L", f"expected {lat.D} extents, got {len(lat.L)}")
        if any(n < 2 for n in lat.L):
            chk.fail("lattice.L", f"every extent must be >= 2, got {list(lat.L)}")
    needs_L = mode in ("ed", "thermal-scan", "compare") or lat.grid == "finite"
    if needs_L and lat.L is None:
        chk.fail("lattice.L", f"mode {mode!r} with grid {lat.grid!r} needs lattice extents")
    if lat.points_per_axis < 2:
        chk.fail("lattice.points_per_axis", "must be >= 2")
    if cfg.model == "fermi" and lat.L is not None and any(n % 2 for n in lat.L):
        chk.fail("lattice.L", "the Neel state needs even extents (bipartite lattice)")

    pr = cfg.protocol
    if pr.kind not in ("sudden", "linear", "tanh"):
        chk.fail("protocol.kind", f"unknown protocol {pr.kind!r} (allowed: sudden, linear, tanh)")
    if pr.kind != "sudden" and pr.tau <= 0:
        chk.fail("protocol.tau", f"{pr.kind} ramp needs tau > 0")
    if pr.kind != "sudden" and mode in ("analytic", "ed", "compare", "thermal-scan"):
        chk.fail("protocol.kind", f"mode {mode!r} supports only sudden quenches")

    tm = cfg.time
    for name in ("t_end", "dt", "sample_dt"):
        if getattr(tm, name) <= 0:
            chk.fail(f"time.{name}", "must be positive")
    if abs(tm.t_end / tm.sample_dt - round(tm.t_end / tm.sample_dt)) > 1e-9:
        chk.fail("time.t_end", "must be a whole number of sample_dt steps")
    if mode in ("ode", "compare"):
        ratio = tm.sample_dt / tm.dt
        if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-9:
            chk.fail("time.sample_dt", "must be a whole multiple of the integration step dt")

    th = cfg.thermal
    if not 0 < th.T_min < th.T_max:
        chk.fail("thermal.T_min", "need 0 < T_min < T_max")
    if th.num < 2:
        chk.fail("thermal.num", "need at least 2 temperatures")

    for name in ("invariant_drift", "degeneracy"):
        if getattr(cfg.tolerances, name) <= 0:
            chk.fail(f"tolerances.{name}", "must be positive")
    if cfg.ed.dimension_cap < 1:
        chk.fail("ed.dimension_cap", "must be positive")

    out = cfg.output
    if not out.name or "/" in out.name or out.name.startswith("."):
        chk.fail("output.name", f"expected a plain file stem, got {out.name!r}")
    if not out.formats or any(f not in ("csv", "json") for f in out.formats):
        chk.fail("output.formats", "expected a non-empty subset of [csv, json]")

    for i, d in enumerate(cfg.separations):
        if len(d) != lat.D:
            chk.fail(f"separations[{i}]", f"expected {lat.D} components, got {len(d)}")

    if not cfg.observables:
        chk.fail("observables", "no observables requested (the output would be empty)")
    key_mode = "ed" if mode == "thermal-scan" else mode
    if mode == "compare":
        allowed_onsite = COMPARE_OBSERVABLES[cfg.model] - {"bb"}
        allowed_pair = COMPARE_OBSERVABLES[cfg.model] & {"bb"}
    else:
        allowed_onsite = ONSITE_OBSERVABLES[(cfg.model, key_mode)]
        allowed_pair = PAIR_OBSERVABLES[(cfg.model, key_mode)]
    for i, name in enumerate(cfg.observables):
        if name not in allowed_onsite | allowed_pair:
            allowed = ", ".join(sorted(allowed_onsite | allowed_pair))
            chk.fail(f"observables[{i}]",
                     f"{name!r} is not available for {cfg.model} in mode {mode!r} (allowed: {allowed})")
        if name in allowed_pair and not cfg.separations:
            chk.fail("separations", f"observable {name!r} needs at least one separation")
        if name in allowed_pair and cfg.model == "bose":
            for j, d in enumerate(cfg.separations):
                if not any(d):
                    chk.fail(f"separations[{j}]", f"{name!r} is defined for nonzero separations")
    if cfg.model == "fermi":
        for i, name in enumerate(cfg.observables):
            for j, d in enumerate(cfg.separations):
                odd = sum(d) % 2 == 1
                if (name == "symmetric_11" and odd) or (name == "mixed_10" and not odd):
                    chk.fail(f"separations[{j}]",
                             f"{name} does not connect the sublattices joined by {list(d)}")
    return cfg
