"""YAML experiment configuration with strict, line-anchored validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .control import ControllerGains
from .fas_model import Box, InputConstraintSet
from .plant import STATE_FIELDS, ActuatorLimits, PlantState, QuadrotorParams
from .synthesis import ParametricDesign, synthesize_gains
from .trajectory import SpiralSpec

MODES = ("synthesize", "simulate", "track", "roea")


class ConfigError(ValueError):
    pass


@dataclass
class SimulationSettings:
    horizon: float = 100.0
    dt: float = 1e-3
    hold: str = "zoh"
    on_singular: str = "raise"
    tail_window: float = 20.0


@dataclass
class RoeaSettings:
    subsystem: str = "psi"
    sampling: str = "grid"
    lower: list[float] = field(default_factory=lambda: [-0.03, -0.1])
    upper: list[float] = field(default_factory=lambda: [0.03, 0.1])
    points: int = 21
    n: int = 256
    seed: int = 0
    horizon: float = 10.0
    dt: float = 1e-3
    axes: list[int] | None = None
    base_state: PlantState = field(default_factory=PlantState)
    workers: int = 1


@dataclass
class OutputSettings:
    dir: str = "out"
    gains: str = "gains.json"
    csv: str = "trajectory.csv"
    summary: str = "summary.json"
    plot_script: str | None = "plot_tracking.py"
    roea: str = "roea.json"


@dataclass
class ExperimentConfig:
    mode: str = "track"
    quadrotor: QuadrotorParams = field(default_factory=QuadrotorParams)
    actuator_limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    constraints: InputConstraintSet = field(default_factory=InputConstraintSet)
    designs: dict[str, ParametricDesign] = field(default_factory=dict)
    explicit_gains: ControllerGains | None = None
    trajectory: SpiralSpec = field(default_factory=SpiralSpec)
    setpoint: dict[str, Any] = field(default_factory=lambda: {"z": 0.0, "psi": 0.0, "X": (0.0, 0.0)})
    initial_state: PlantState = field(default_factory=PlantState)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    roea: RoeaSettings = field(default_factory=RoeaSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    source: str = "<defaults>"

    def gains(self) -> ControllerGains:
        if self.explicit_gains is not None:
            return self.explicit_gains
        d = self.designs
        return ControllerGains.from_designs(d["z"], d["psi"], d["x"], d["y"])


def _line_index(node, path=()) -> dict[tuple, int]:
    """Map key paths to 1-based source lines."""
    out: dict[tuple, int] = {path: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            out[path + (key,)] = k.start_mark.line + 1
            out.update({p: ln for p, ln in _line_index(v, path + (key,)).items() if p != path + (key,)})
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_line_index(v, path + (i,)))
    return out


class _Reader:
    def __init__(self, source: str, lines: dict[tuple, int]):
        self.source = source
        self.lines = lines

    def fail(self, path: tuple, msg: str):
        p = path
        while p and p not in self.lines:
            p = p[:-1]
        line = self.lines.get(p, 1)
        dotted = ".".join(str(x) for x in path) or "<root>"
        raise ConfigError(f"{self.source}:{line}: {dotted}: {msg}")

    def mapping(self, data, path: tuple, allowed: set[str]) -> dict:
        if data is None:
            return {}
        if not isinstance(data, dict):
            self.fail(path, "expected a mapping")
        for k in data:
            if k not in allowed:
                self.fail(path + (k,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return data

    def number(self, data: dict, path: tuple, key: str, default):
        if key not in data:
            return default
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            self.fail(path + (key,), f"expected a finite number, got {v!r}")
        return float(v)

    def integer(self, data: dict, path: tuple, key: str, default):
        if key not in data:
            return default
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(path + (key,), f"expected an integer, got {v!r}")
        return v

    def numbers(self, data: dict, path: tuple, key: str, default, length: int | None = None):
        if key not in data:
            return default
        v = data[key]
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and np.isfinite(x) for x in v
        ):
            self.fail(path + (key,), f"expected a list of numbers, got {v!r}")
        if length is not None and len(v) != length:
            self.fail(path + (key,), f"expected {length} numbers, got {len(v)}")
        return [float(x) for x in v]

    def choice(self, data: dict, path: tuple, key: str, default, options):
        if key not in data:
            return default
        v = data[key]
        if v not in options:
            self.fail(path + (key,), f"must be one of {list(options)}, got {v!r}")
        return v

    def build(self, path: tuple, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, TypeError) as exc:
            self.fail(path, str(exc))


_DEFAULT_DESIGNS = {
    "z": {"Z": [1, 1], "F": [-4, -5]},
    "psi": {"Z": [1, 1], "F": [-4, -5]},
    "x": {"Z": [1, 1, 1, 1], "F": [-5, -6, -7, -8]},
    "y": {"Z": [1, 1, 1, 1], "F": [-5, -6, -7, -8]},
}
_ORDERS = {"z": 2, "psi": 2, "x": 4, "y": 4}


def _design(rd: _Reader, data, path) -> ParametricDesign:
    data = rd.mapping(data, path, {"Z", "F"})
    if "Z" not in data or "F" not in data:
        rd.fail(path, "design needs both Z and F")
    Z = data["Z"]
    F = data["F"]
    try:
        Zarr = np.atleast_2d(np.asarray(Z, dtype=float))
        Farr = np.asarray(F, dtype=float)
    except (ValueError, TypeError):
        rd.fail(path, "Z and F must be numeric")
    if Farr.ndim == 1:
        Farr = np.diag(Farr)
    m = _ORDERS[path[-1]]
    r = Zarr.shape[0]
    design = rd.build(path, ParametricDesign, Z=Zarr, F=Farr, m=m, r=r)
    rd.build(path + ("F",), synthesize_gains, design)  # reject singular V(Z, F) up front
    return design


def _box(rd: _Reader, data: dict, path: tuple, key: str, default: Box) -> Box:
    if key not in data:
        return default
    lo_hi = rd.numbers(data, path, key, None, length=2)
    return rd.build(path + (key,), Box, lo_hi[0], lo_hi[1])


def _state(rd: _Reader, data, path) -> PlantState:
    data = rd.mapping(data, path, set(STATE_FIELDS))
    vals = {k: rd.number(data, path, k, 0.0) for k in STATE_FIELDS}
    return PlantState(**vals)


TOP_KEYS = {
    "mode", "quadrotor", "actuator_limits", "constraints", "design", "gains", "trajectory",
    "setpoint", "initial_state", "simulation", "roea", "output",
}


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        raise ConfigError(f"{source}:{line}: invalid YAML: {getattr(exc, 'problem', exc)}") from None
    rd = _Reader(source, _line_index(node) if node is not None else {(): 1})
    data = rd.mapping(data, (), TOP_KEYS)
    cfg = ExperimentConfig(source=source)

    cfg.mode = rd.choice(data, (), "mode", cfg.mode, MODES)

    q = rd.mapping(data.get("quadrotor"), ("quadrotor",), {"m", "g", "Jx", "Jy", "Jz"})
    base = QuadrotorParams()
    cfg.quadrotor = rd.build(
        ("quadrotor",), QuadrotorParams,
        **{k: rd.number(q, ("quadrotor",), k, getattr(base, k)) for k in ("m", "g", "Jx", "Jy", "Jz")},
    )

    a = rd.mapping(data.get("actuator_limits"), ("actuator_limits",), {"T_min", "T_max", "tau_min", "tau_max"})
    al = ActuatorLimits()
    vals = {k: rd.number(a, ("actuator_limits",), k, getattr(al, k)) for k in ("T_min", "T_max", "tau_min", "tau_max")}
    if not vals["T_min"] < vals["T_max"]:
        rd.fail(("actuator_limits", "T_max"), f"T_max ({vals['T_max']}) must exceed T_min ({vals['T_min']})")
    if not vals["tau_min"] < vals["tau_max"]:
        rd.fail(("actuator_limits", "tau_max"),
                f"tau_max ({vals['tau_max']}) must exceed tau_min ({vals['tau_min']})")
    cfg.actuator_limits = ActuatorLimits(**vals)

    c = rd.mapping(data.get("constraints"), ("constraints",), {"u0", "u0_dot", "u0_ddot", "u1", "u2"})
    dc = InputConstraintSet()
    boxes = {k: _box(rd, c, ("constraints",), k, getattr(dc, k)) for k in ("u0", "u0_dot", "u0_ddot", "u1", "u2")}
    cfg.constraints = rd.build(("constraints", "u0"), InputConstraintSet, **boxes)

    d = rd.mapping(data.get("design"), ("design",), set(_DEFAULT_DESIGNS))
    cfg.designs = {
        k: _design(rd, d.get(k, _DEFAULT_DESIGNS[k]), ("design", k)) for k in _DEFAULT_DESIGNS
    }
    if data.get("gains") is not None:
        g = rd.mapping(data["gains"], ("gains",), {"A0", "A1", "A2x", "A2y"})
        for k in ("A0", "A1", "A2x", "A2y"):
            if k not in g:
                rd.fail(("gains",), f"explicit gains need A0, A1, A2x, A2y (missing {k})")
        cfg.explicit_gains = rd.build(
            ("gains",), ControllerGains,
            **{k: rd.numbers(g, ("gains",), k, None, length=2 if k in ("A0", "A1") else 4)
               for k in ("A0", "A1", "A2x", "A2y")},
        )

    t = rd.mapping(data.get("trajectory"), ("trajectory",),
                   {"radius", "omega", "climb_rate", "center", "yaw_amplitude", "yaw_rate"})
    ds = SpiralSpec()
    cfg.trajectory = rd.build(
        ("trajectory",), SpiralSpec,
        radius=rd.number(t, ("trajectory",), "radius", ds.radius),
        omega=rd.number(t, ("trajectory",), "omega", ds.omega),
        climb_rate=rd.number(t, ("trajectory",), "climb_rate", ds.climb_rate),
        center=tuple(rd.numbers(t, ("trajectory",), "center", list(ds.center), length=3)),
        yaw_amplitude=rd.number(t, ("trajectory",), "yaw_amplitude", ds.yaw_amplitude),
        yaw_rate=rd.number(t, ("trajectory",), "yaw_rate", ds.yaw_rate),
    )

    sp = rd.mapping(data.get("setpoint"), ("setpoint",), {"z", "psi", "X"})
    cfg.setpoint = {
        "z": rd.number(sp, ("setpoint",), "z", 0.0),
        "psi": rd.number(sp, ("setpoint",), "psi", 0.0),
        "X": tuple(rd.numbers(sp, ("setpoint",), "X", [0.0, 0.0], length=2)),
    }

    cfg.initial_state = _state(rd, data.get("initial_state"), ("initial_state",))

    s = rd.mapping(data.get("simulation"), ("simulation",), {"horizon", "dt", "hold", "on_singular", "tail_window"})
    dsim = SimulationSettings()
    sim = SimulationSettings(
        horizon=rd.number(s, ("simulation",), "horizon", dsim.horizon),
        dt=rd.number(s, ("simulation",), "dt", dsim.dt),
        hold=rd.choice(s, ("simulation",), "hold", dsim.hold, ("zoh", "stage")),
        on_singular=rd.choice(s, ("simulation",), "on_singular", dsim.on_singular, ("raise", "hold")),
        tail_window=rd.number(s, ("simulation",), "tail_window", dsim.tail_window),
    )
    for k in ("horizon", "dt"):
        if not getattr(sim, k) > 0:
            rd.fail(("simulation", k), "must be positive")
    if sim.tail_window < 0:
        rd.fail(("simulation", "tail_window"), "must be >= 0")
    cfg.simulation = sim

    r = rd.mapping(data.get("roea"), ("roea",), {
        "subsystem", "sampling", "lower", "upper", "points", "n", "seed", "horizon", "dt", "axes",
        "base_state", "workers",
    })
    dr = RoeaSettings()
    roea = RoeaSettings(
        subsystem=rd.choice(r, ("roea",), "subsystem", dr.subsystem, ("z", "psi", "X")),
        sampling=rd.choice(r, ("roea",), "sampling", dr.sampling, ("grid", "uniform")),
        lower=rd.numbers(r, ("roea",), "lower", dr.lower),
        upper=rd.numbers(r, ("roea",), "upper", dr.upper),
        points=rd.integer(r, ("roea",), "points", dr.points),
        n=rd.integer(r, ("roea",), "n", dr.n),
        seed=rd.integer(r, ("roea",), "seed", dr.seed),
        horizon=rd.number(r, ("roea",), "horizon", dr.horizon),
        dt=rd.number(r, ("roea",), "dt", dr.dt),
        axes=None,
        base_state=_state(rd, r.get("base_state"), ("roea", "base_state")),
        workers=rd.integer(r, ("roea",), "workers", dr.workers),
    )
    if "axes" in r:
        axes = r["axes"]
        if not isinstance(axes, list) or not all(x in STATE_FIELDS for x in axes):
            rd.fail(("roea", "axes"), f"expected a list of state names from {list(STATE_FIELDS)}")
        roea.axes = [STATE_FIELDS.index(x) for x in axes]
    if len(roea.lower) != len(roea.upper):
        rd.fail(("roea", "upper"), "lower and upper must have the same length")
    if any(lo > hi for lo, hi in zip(roea.lower, roea.upper)):
        rd.fail(("roea", "upper"), "every lower bound must be <= its upper bound")
    if roea.subsystem in ("z", "psi") and len(roea.lower) != 2:
        rd.fail(("roea", "lower"), "z/psi sampling needs 2 bounds (error, error rate)")
    if roea.subsystem == "X":
        n_axes = len(roea.axes) if roea.axes is not None else 4
        if len(roea.lower) != n_axes:
            rd.fail(("roea", "lower"), f"X sampling needs one bound per axis ({n_axes})")
    if roea.points < 1 or roea.n < 1 or roea.workers < 1:
        rd.fail(("roea",), "points, n and workers must be >= 1")
    if not (roea.horizon > 0 and roea.dt > 0):
        rd.fail(("roea",), "horizon and dt must be positive")
    cfg.roea = roea

    o = rd.mapping(data.get("output"), ("output",), {"dir", "gains", "csv", "summary", "plot_script", "roea"})
    do = OutputSettings()
    out = OutputSettings()
    for k in ("dir", "gains", "csv", "summary", "plot_script", "roea"):
        if k in o:
            v = o[k]
            if v is not None and not isinstance(v, str):
                rd.fail(("output", k), f"expected a path string, got {v!r}")
            if v is None and k != "plot_script":
                rd.fail(("output", k), "may not be null")
            setattr(out, k, v)
        else:
            setattr(out, k, getattr(do, k))
    cfg.output = out
    return cfg


def builtin_config_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("ucfas.configs").iterdir() if p.name.endswith(".yaml"))


def resolve_config_path(name: str) -> Path | Any:
    p = Path(name)
    if p.exists():
        return p
    stem = name[:-5] if name.endswith(".yaml") else name
    if stem in builtin_config_names():
        return resources.files("ucfas.configs") / f"{stem}.yaml"
    raise ConfigError(f"{name}: no such file or built-in config (built-ins: {', '.join(builtin_config_names())})")


def load_config(name: str) -> ExperimentConfig:
    path = resolve_config_path(name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{name}: cannot read config: {exc}") from None
    return parse_config(text, source=str(name))
