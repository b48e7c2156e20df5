"""Force law of the carried object and the simulated wrist F/T sensor.

Each object is a set of linear spring-dampers along object axes: the major
axis points from the robot grasp to the human hand at engagement, the first
lateral axis is horizontal and the second is (close to) vertical. Stiffness
along the major axis depends on whether the object is stretched or
compressed; a rope only acts when taut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

KINDS = ("rigid_rod", "rope", "anisotropic")


def object_frame(rest_vector) -> np.ndarray:
    """Rows are the major, horizontal-lateral and vertical-lateral unit axes."""
    r = np.asarray(rest_vector, dtype=float)
    n = np.linalg.norm(r)
    if n < 1e-12:
        return np.eye(3)
    e1 = r / n
    e2 = np.cross([0.0, 0.0, 1.0], e1)
    if np.linalg.norm(e2) < 1e-9:
        e2 = np.cross(e1, [1.0, 0.0, 0.0])
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    return np.vstack([e1, e2, e3])


def _pair(name, value):
    if np.ndim(value) == 0:
        value = (value, value)
    value = tuple(float(v) for v in value)
    if len(value) != 2:
        raise ConfigurationError(f"{name} must be a scalar or a (horizontal, vertical) pair")
    return value


def _triple(name, value):
    if np.ndim(value) == 0:
        value = (value,) * 3
    value = tuple(float(v) for v in value)
    if len(value) != 3:
        raise ConfigurationError(f"{name} must be a scalar or 3 per-axis values")
    return value


@dataclass(frozen=True)
class CouplingModel:
    """Object linking the human hand point to the robot grasp point.

    ``stiffness_lateral`` and ``damping`` may be scalars; they are expanded
    to (horizontal, vertical) and per-axis tuples respectively.
    ``grasp_compliance`` [m/N] is a spring in series with every stiffness.
    ``slack`` [m] is extra rope length beyond the engagement distance, so a
    loose rope only becomes taut once the hand moves that much farther away.
    """

    kind: str = "anisotropic"
    rest_vector: tuple = (1.0, 0.0, 0.0)
    stiffness_tension: float = 3000.0
    stiffness_compression: float = 250.0
    stiffness_lateral: tuple = (40.0, 20.0)
    damping: tuple = (10.0, 10.0, 10.0)
    grasp_compliance: float = 5e-4
    slack: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"coupling kind must be one of {KINDS}, got {self.kind!r}")
        rest = tuple(float(v) for v in self.rest_vector)
        if len(rest) != 3 or not np.all(np.isfinite(rest)):
            raise ConfigurationError("rest_vector must be 3 finite numbers")
        if self.kind != "rigid_rod" and np.linalg.norm(rest) < 1e-12:
            raise ConfigurationError(f"{self.kind} coupling needs a non-zero rest_vector")
        object.__setattr__(self, "rest_vector", rest)
        object.__setattr__(self, "stiffness_tension", float(self.stiffness_tension))
        object.__setattr__(self, "stiffness_compression", float(self.stiffness_compression))
        object.__setattr__(self, "stiffness_lateral", _pair("stiffness_lateral", self.stiffness_lateral))
        object.__setattr__(self, "damping", _triple("damping", self.damping))
        object.__setattr__(self, "grasp_compliance", float(self.grasp_compliance))
        object.__setattr__(self, "slack", float(self.slack))
        values = (
            self.stiffness_tension,
            self.stiffness_compression,
            *self.stiffness_lateral,
            *self.damping,
            self.grasp_compliance,
            self.slack,
        )
        if not all(np.isfinite(v) and v >= 0.0 for v in values):
            raise ConfigurationError("stiffness, damping and compliance must be finite and non-negative")
        if self.kind == "rope" and (self.stiffness_compression != 0.0 or any(self.stiffness_lateral)):
            raise ConfigurationError("a rope has zero compression and lateral stiffness")
        if self.kind != "rope" and self.slack != 0.0:
            raise ConfigurationError("only a rope can have slack")
        object.__setattr__(self, "_frame", object_frame(rest))

    def effective(self, k: float) -> float:
        """Stiffness ``k`` in series with the grasp compliance."""
        if k == 0.0:
            return 0.0
        return k / (1.0 + k * self.grasp_compliance)


def object_force(model: CouplingModel, p_h, p_r, v_h, v_r) -> np.ndarray:
    """Force exerted by the object on the robot grasp point (world frame)."""
    d = np.asarray(p_h, dtype=float) - np.asarray(p_r, dtype=float)
    d_dot = np.asarray(v_h, dtype=float) - np.asarray(v_r, dtype=float)
    if model.kind == "rope":
        return _rope_force(model, d, d_dot)

    E = model._frame
    e = E @ (d - np.asarray(model.rest_vector))
    e_dot = E @ d_dot
    k_major = model.stiffness_tension if e[0] > 0.0 else model.stiffness_compression
    k = np.array(
        [
            model.effective(k_major),
            model.effective(model.stiffness_lateral[0]),
            model.effective(model.stiffness_lateral[1]),
        ]
    )
    f_local = k * e + np.asarray(model.damping) * e_dot
    return E.T @ f_local


def _rope_force(model: CouplingModel, d: np.ndarray, d_dot: np.ndarray) -> np.ndarray:
    length = math.hypot(*model.rest_vector) + model.slack
    dist = math.hypot(*d)
    if dist <= length:
        return np.zeros(3)
    u = d / dist
    # a rope can pull but never push, damping included
    tension = model.effective(model.stiffness_tension) * (dist - length) + model.damping[0] * (u @ d_dot)
    return max(tension, 0.0) * u


@dataclass(frozen=True)
class FtNoise:
    sigma: tuple = (0.5, 0.5, 0.5)
    bias: tuple = (0.0, 0.0, 0.0)
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sigma", _triple("sigma", self.sigma))
        object.__setattr__(self, "bias", _triple("bias", self.bias))
        if min(self.sigma) < 0.0:
            raise ConfigurationError("F/T noise sigma must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))


def ft_measure(F, noise: FtNoise, rng: np.random.Generator) -> np.ndarray:
    """Biased, noisy reading of the true force ``F``; draws 3 normals from ``rng``."""
    return np.asarray(F, dtype=float) + np.asarray(noise.bias) + np.asarray(noise.sigma) * rng.standard_normal(3)


PRESETS = {
    "experiment_object": CouplingModel(),
    "rope": CouplingModel(
        kind="rope",
        stiffness_tension=500.0,
        stiffness_compression=0.0,
        stiffness_lateral=(0.0, 0.0),
        damping=(5.0, 0.0, 0.0),
        grasp_compliance=0.0,
        slack=0.2,
    ),
    "aluminum_profile": CouplingModel(
        kind="rigid_rod",
        stiffness_tension=8000.0,
        stiffness_compression=8000.0,
        stiffness_lateral=(8000.0, 8000.0),
        damping=(60.0, 60.0, 60.0),
        grasp_compliance=0.0,
    ),
}
