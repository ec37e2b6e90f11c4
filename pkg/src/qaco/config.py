"""Line-oriented ``key = value`` experiment configs.

Example::

    # Table 1 instance
    n = 8
    weights = 21, 18, 16, 11, 5, 2, 11, 14
    iterations = 200
    evaporation_policy = period:3
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .classical import AcoParams
from .engine import (
    GUARD_MODES,
    MARKING_MODES,
    STOP_RULES,
    EngineModes,
    InstanceError,
    ProblemInstance,
    _as_weight,
    parse_policy,
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class ExperimentConfig:
    n: int
    weights: tuple[float, ...]
    iterations: int
    box_qubits: int = 4
    evaporation_policy: str = "none"
    evaporation_period: int = 1
    guard_mode: str = "corrected"
    marking_mode: str = "flag_z"
    stop_rule: str = "first_full"
    grover_iterations: int = 1
    shots: int = 8192
    seed: int = 0
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.1
    r0: float = 0.5
    q_deposit: float = 1.0
    ants: int = 100
    aco_iterations: int = 200
    output_dir: str = "out"
    source: str = field(default="", repr=False)

    @property
    def modes(self) -> EngineModes:
        return EngineModes(
            evaporation_policy=self.evaporation_policy,
            evaporation_period=self.evaporation_period,
            guard_mode=self.guard_mode,
            marking_mode=self.marking_mode,
            stop_rule=self.stop_rule,
            grover_iterations=self.grover_iterations,
        )

    def instance(self) -> ProblemInstance:
        return ProblemInstance(self.n, self.weights, self.iterations, self.box_qubits, self.modes)

    def aco_params(self) -> AcoParams:
        return AcoParams(
            alpha=self.alpha,
            beta=self.beta,
            rho=self.rho,
            r0=self.r0,
            q_deposit=self.q_deposit,
            ants_per_iteration=self.ants,
            iterations=self.aco_iterations,
            seed=self.seed,
        )


def _int(v: str) -> int:
    return int(v)


def _nonneg_int(v: str) -> int:
    i = int(v)
    if i < 0:
        raise ValueError("must be >= 0")
    return i


def _pos_int(v: str) -> int:
    i = int(v)
    if i < 1:
        raise ValueError("must be >= 1")
    return i


def _choice(options):
    def conv(v: str) -> str:
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return conv


def _weights(v: str) -> tuple[float, ...]:
    try:
        return tuple(_as_weight(w.strip()) for w in v.split(",") if w.strip())
    except InstanceError as exc:
        raise ValueError(str(exc)) from None


_PARSERS = {
    "n": _int,
    "weights": _weights,
    "iterations": _pos_int,
    "box_qubits": _int,
    "guard_mode": _choice(GUARD_MODES),
    "marking_mode": _choice(MARKING_MODES),
    "stop_rule": _choice(STOP_RULES),
    "grover_iterations": _nonneg_int,
    "shots": _pos_int,
    "seed": _int,
    "alpha": float,
    "beta": float,
    "rho": float,
    "r0": float,
    "q_deposit": float,
    "ants": _pos_int,
    "aco_iterations": _pos_int,
    "output_dir": str,
}
_REQUIRED = ("n", "weights", "iterations")


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in where:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        where[key] = lineno
        if key == "evaporation_policy":
            try:
                values["evaporation_policy"], values["evaporation_period"] = parse_policy(value)
            except InstanceError as exc:
                raise ConfigError(str(exc), lineno) from None
            continue
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if len(values["weights"]) != values["n"]:
        raise ConfigError(
            f"{len(values['weights'])} weights given but n = {values['n']}", where["weights"]
        )
    cfg = ExperimentConfig(**values, source=text)
    try:
        cfg.instance()
        cfg.aco_params()
    except (InstanceError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def preset_path(name: str) -> Path:
    """Path of a bundled preset, e.g. ``preset_path('table1')``."""
    name = name if name.endswith(".cfg") else f"{name}.cfg"
    return Path(str(resources.files("qaco") / "presets" / name))


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig) if f.name != "source"]
