"""Scenario configuration: every knob of one simulated co-carrying trial."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .aci import AciGains
from .coupling import PRESETS as COUPLING_PRESETS
from .coupling import CouplingModel, FtNoise
from .errors import ConfigurationError
from .hqp import DampingSchedule, HqpWeights
from .human import PathScript, build_experiment_path
from .kinematics import N_DOF, RobotModel

CONTROLLERS = ("aci", "admittance_only")
DEFAULT_SPEED_LIMITS = (0.5, 0.5, 0.5) + (1.0,) * 6


@dataclass(frozen=True)
class MocapConfig:
    """Hand-velocity measurement: noise [m/s] and delay [s], rounded to whole periods."""

    sigma: float = 0.005
    latency: float = 0.06
    seed: int = 2

    def __post_init__(self):
        if not (self.sigma >= 0.0 and np.isfinite(self.sigma)):
            raise ConfigurationError("mocap sigma must be non-negative")
        if not (self.latency >= 0.0 and np.isfinite(self.latency)):
            raise ConfigurationError("mocap latency must be non-negative")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "latency", float(self.latency))
        object.__setattr__(self, "seed", int(self.seed))

    def latency_steps(self, dt: float) -> int:
        return int(round(self.latency / dt))


@dataclass(frozen=True)
class HumanConfig:
    force_cap: float = 40.0
    bandwidth: float = 20.0
    align_tol: float = 0.05

    def __post_init__(self):
        for name in ("force_cap", "bandwidth", "align_tol"):
            value = float(getattr(self, name))
            if not (value > 0.0 and np.isfinite(value)):
                raise ConfigurationError(f"human {name} must be positive")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "experiment"
    preset: str = "experiment_object"
    controller: str = "aci"
    dt: float = 1e-3
    max_duration: float = 90.0
    settle_time: float = 2.0
    robot: RobotModel = field(default_factory=RobotModel)
    q0: tuple | None = None
    weights: HqpWeights = field(default_factory=HqpWeights)
    damping: DampingSchedule = field(default_factory=DampingSchedule)
    speed_limits: tuple = DEFAULT_SPEED_LIMITS
    aci: AciGains = field(default_factory=AciGains)
    coupling: CouplingModel = field(default_factory=CouplingModel)
    ft: FtNoise = field(default_factory=FtNoise)
    mocap: MocapConfig = field(default_factory=MocapConfig)
    human: HumanConfig = field(default_factory=HumanConfig)
    path: PathScript = field(default_factory=build_experiment_path)

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ConfigurationError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        for name in ("dt", "max_duration"):
            value = float(getattr(self, name))
            if not (value > 0.0 and np.isfinite(value)):
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)!r}")
            object.__setattr__(self, name, value)
        if self.settle_time < 0.0:
            raise ConfigurationError("settle_time must be non-negative")
        object.__setattr__(self, "settle_time", float(self.settle_time))
        q0 = self.weights.q_def if self.q0 is None else self.q0
        q0 = tuple(float(v) for v in q0)
        if len(q0) != N_DOF:
            raise ConfigurationError(f"q0 needs {N_DOF} entries")
        object.__setattr__(self, "q0", q0)
        if self.weights.m != N_DOF:
            raise ConfigurationError(f"weights must be sized for {N_DOF} joints")
        limits = tuple(float(v) for v in self.speed_limits)
        if len(limits) != N_DOF or min(limits) <= 0.0:
            raise ConfigurationError(f"speed_limits needs {N_DOF} positive entries")
        object.__setattr__(self, "speed_limits", limits)

    @property
    def n_steps(self) -> int:
        return int(round(self.max_duration / self.dt))

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        """Reseed both sensors from one integer (F/T gets ``seed``, MoCap ``seed + 1``)."""
        return replace(self, ft=replace(self.ft, seed=int(seed)), mocap=replace(self.mocap, seed=int(seed) + 1))


PRESET_NAMES = tuple(COUPLING_PRESETS)


def preset(name: str, **overrides) -> ScenarioConfig:
    """Scenario for one of the built-in objects, carried along the experiment path."""
    if name not in COUPLING_PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    base = ScenarioConfig(name=name, preset=name, coupling=COUPLING_PRESETS[name])
    return replace(base, **overrides) if overrides else base
