"""Scenario configuration: ``key = value`` documents and named presets.

A document is a sequence of lines ``namespace.key = value``. ``#`` starts a
comment, blank lines are ignored, vectors are comma separated and a single
number is broadcast to every component. Unknown keys, malformed values and
constraint violations raise ``ConfigError`` carrying the line number.

Example::

    plant.kind = linear
    limits.u_max = 5
    limits.u_min = -6,-6,-6,-6,-6,-6
    gains.eps1 = 0.1
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["ConfigError", "ScenarioConfig", "parse_config", "load_preset", "PRESETS"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


Vector = tuple  # marker type for comma-separated float vectors


@dataclass
class PlantConfig:
    kind: str = "linear"
    q0: Vector = (0.0,) * 6
    # linear variant
    points: int = 3
    jacobian_scale: float = 3.0
    jacobian_coupling: float = 0.25
    jacobian_variation: float = 0.0
    jacobian_frequency: float = 0.1
    # chain variant
    nodes: int = 20
    length: float = 0.4
    stretch_stiffness: float = 20.0
    bend_stiffness: float = 0.02
    pretension: float = 0.1


@dataclass
class FeaturesConfig:
    map: str = "subsample"
    p: int = 6


@dataclass
class SimConfig:
    dt: float = 1e-3
    duration: float = 10.0
    seed: int = 0
    threshold: float = 1e-2
    truth_every: int = 1


@dataclass
class LimitsConfig:
    u_min: Vector = (-6.0,) * 6
    u_max: Vector = (5.0,) * 6


@dataclass
class GainsConfig:
    eps1: float = 0.1
    eps2: float = 0.1
    gamma1: float = 1.0
    gamma2: float = 1.0
    pinv_damping: float = 1e-6
    sigma_guard1: Optional[float] = None
    sigma_guard2: Optional[float] = None
    v_guard: float = 1e-6
    filter_cutoff: float = 20.0


@dataclass
class TargetConfig:
    kind: str = "constant"
    q: Optional[Vector] = None
    offset: Vector = (0.0,)
    amplitude: Vector = (0.0,)
    frequency: float = 0.1


@dataclass
class EstimatorConfig:
    init_noise: float = 0.2
    init_fd_step: float = 1e-2


@dataclass
class ScenarioConfig:
    plant: PlantConfig = field(default_factory=PlantConfig)
    features: FeaturesConfig = field(default_factory=FeaturesConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    gains: GainsConfig = field(default_factory=GainsConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)

    def set(self, key: str, text: str, line: Optional[int] = None) -> None:
        """Assign ``key`` from its textual value, without cross-field validation."""
        section_name, _, name = key.partition(".")
        section = getattr(self, section_name, None) if name else None
        if section is None or not dataclasses.is_dataclass(section):
            raise ConfigError(f"unknown key {key!r}", line)
        types = {f.name: f.type for f in dataclasses.fields(section)}
        if name not in types:
            raise ConfigError(f"unknown key {key!r}", line)
        setattr(section, name, _convert(key, types[name], text, line))

    def copy(self) -> "ScenarioConfig":
        return dataclasses.replace(
            self, **{f.name: dataclasses.replace(getattr(self, f.name))
                     for f in dataclasses.fields(self)}
        )

    def validate(self) -> "ScenarioConfig":
        """Check cross-field constraints; returns ``self``."""
        _validate(self)
        return self

    def to_text(self) -> str:
        lines = []
        for section in dataclasses.fields(self):
            obj = getattr(self, section.name)
            for f in dataclasses.fields(obj):
                value = getattr(obj, f.name)
                if value is None:
                    continue
                if isinstance(value, tuple):
                    value = ",".join(repr(float(x)) for x in value)
                lines.append(f"{section.name}.{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _convert(key: str, typ: str, text: str, line):
    text = text.strip()
    optional = typ.startswith("Optional[")
    base = typ[len("Optional["):-1] if optional else typ
    if optional and text.lower() in ("", "none", "auto"):
        return None
    try:
        if base == "float":
            return float(text)
        if base == "int":
            return int(text)
        if base == "str":
            if not text:
                raise ValueError("empty string")
            return text
        if base == "Vector":
            return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {base}", line) from None
    raise AssertionError(f"unhandled field type {typ}")


def _broadcast(values, n: int, key: str) -> tuple:
    if len(values) == 1:
        return tuple(values) * n
    if len(values) != n:
        raise ConfigError(f"{key} needs 1 or {n} values, got {len(values)}")
    return tuple(values)


def _validate(cfg: ScenarioConfig) -> None:
    def positive(section, *names):
        obj = getattr(cfg, section)
        for name in names:
            value = getattr(obj, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{section}.{name} must be positive, got {value}")

    if cfg.plant.kind not in ("linear", "chain"):
        raise ConfigError(f"plant.kind must be 'linear' or 'chain', got {cfg.plant.kind!r}")
    if cfg.features.map not in ("subsample", "fourier"):
        raise ConfigError(f"features.map must be 'subsample' or 'fourier', got {cfg.features.map!r}")
    if cfg.target.kind not in ("constant", "sinusoid"):
        raise ConfigError(f"target.kind must be 'constant' or 'sinusoid', got {cfg.target.kind!r}")
    positive("sim", "dt", "threshold", "truth_every")
    positive("gains", "eps1", "eps2", "gamma1", "gamma2", "pinv_damping", "sigma_guard1",
             "sigma_guard2", "v_guard", "filter_cutoff")
    positive("plant", "points", "nodes", "length", "stretch_stiffness", "bend_stiffness")
    positive("estimator", "init_fd_step")
    if cfg.sim.duration < 0 or not math.isfinite(cfg.sim.duration):
        raise ConfigError(f"sim.duration must be finite and >= 0, got {cfg.sim.duration}")
    if 0 < cfg.sim.duration < cfg.sim.dt:
        raise ConfigError("sim.duration must be 0 or at least sim.dt")
    if cfg.estimator.init_noise < 0:
        raise ConfigError("estimator.init_noise must be >= 0")
    p = cfg.features.p
    if p < 2 or p % 2:
        raise ConfigError(f"features.p must be a positive even number, got {p}")
    n_points = cfg.plant.points if cfg.plant.kind == "linear" else cfg.plant.nodes
    if cfg.plant.kind == "linear" and n_points < 3:
        raise ConfigError("plant.points must be at least 3")
    if p > 2 * n_points:
        raise ConfigError(f"features.p={p} exceeds twice the number of centerline points")
    cfg.plant.q0 = _broadcast(cfg.plant.q0, 6, "plant.q0")
    if cfg.target.q is not None:
        cfg.target.q = _broadcast(cfg.target.q, 6, "target.q")
    cfg.target.offset = _broadcast(cfg.target.offset, p, "target.offset")
    cfg.target.amplitude = _broadcast(cfg.target.amplitude, p, "target.amplitude")
    cfg.limits.u_min = _broadcast(cfg.limits.u_min, 6, "limits.u_min")
    cfg.limits.u_max = _broadcast(cfg.limits.u_max, 6, "limits.u_max")
    if any(x >= 0 for x in cfg.limits.u_min):
        raise ConfigError("limits.u_min must be negative on every axis")
    if any(x <= 0 for x in cfg.limits.u_max):
        raise ConfigError("limits.u_max must be positive on every axis")
    for section in dataclasses.fields(cfg):
        obj = getattr(cfg, section.name)
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            values = value if isinstance(value, tuple) else (value,)
            if any(isinstance(x, float) and not math.isfinite(x) for x in values):
                raise ConfigError(f"{section.name}.{f.name} must be finite")


def parse_config(text: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Parse a ``key = value`` document on top of ``base`` (defaults if omitted)."""
    cfg = ScenarioConfig() if base is None else base.copy()
    assigned = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key in assigned:
            raise ConfigError(f"{key} already set on line {assigned[key]}", lineno)
        assigned[key] = lineno
        cfg.set(key, value, lineno)
    try:
        return cfg.validate()
    except ConfigError as exc:
        if exc.line is not None:
            raise
        # attribute the failure to the line that set the offending key, if any
        for key, lineno in assigned.items():
            if key in str(exc):
                raise ConfigError(str(exc), lineno) from None
        raise


PRESETS = {
    "fig1-saturation": """
        # smooth vs hard saturation of v(t) = 10 sin(2t), u_max = 5, u_min = -6
        limits.u_max = 5
        limits.u_min = -6
        sim.duration = 6.283185307179586
    """,
    "regulation-linear": """
        plant.kind = linear
        features.map = subsample
        features.p = 6
        target.kind = constant
        target.offset = 6,-4,5,3,-4.5,3.5
        estimator.init_noise = 0.2
    """,
    "tracking-linear": """
        plant.kind = linear
        plant.jacobian_variation = 0.1
        plant.jacobian_frequency = 0.05
        target.kind = sinusoid
        target.offset = 6,-4,5,3,-4,3
        target.amplitude = 3
        target.frequency = 0.1
    """,
    "regulation-chain": """
        plant.kind = chain
        features.map = fourier
        features.p = 6
        target.q = 0.03,-0.04,0.05,0,0,0
        sim.truth_every = 50
    """,
}


def load_preset(name: str) -> ScenarioConfig:
    try:
        text = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return parse_config(text)
