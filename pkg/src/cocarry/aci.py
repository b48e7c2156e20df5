"""Adaptive collaborative interface: admittance filter plus reference generator.

The admittance filter turns the measured interaction force into a velocity.
The reference generator compares how far the admittance velocity and the
measured human-hand velocity travelled over a sliding window; the resulting
adaptive index ``alpha`` (0 for a rigid object, 1 for a fully deformable
one) sets how much of the hand velocity is added to the reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError
from .kinematics import Pose


@dataclass
class AdmittanceState:
    M: tuple = (6.0, 6.0, 6.0)
    D: tuple = (30.0, 30.0, 30.0)
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.M = tuple(float(x) for x in self.M)
        self.D = tuple(float(x) for x in self.D)
        if len(self.M) != 3 or len(self.D) != 3:
            raise ConfigurationError("admittance mass and damping need 3 diagonal entries")
        if min(self.M) <= 0.0 or min(self.D) <= 0.0:
            raise ConfigurationError("admittance mass and damping must be positive")
        self.v = np.array(self.v, dtype=float).reshape(3)
        self._cache = (None, None, None)

    def _decay(self, dt: float):
        if self._cache[0] != dt:
            a = np.exp(-np.asarray(self.D) / np.asarray(self.M) * dt)
            self._cache = (dt, a, (1.0 - a) / np.asarray(self.D))
        return self._cache[1], self._cache[2]


def admittance_step(state: AdmittanceState, F_H, dt: float) -> np.ndarray:
    """Advance ``M v' + D v = F`` by ``dt`` with a zero-order hold on ``F``."""
    if not dt > 0.0:
        raise ConfigurationError("dt must be positive")
    F = np.asarray(F_H, dtype=float)
    if not math.isfinite(F.sum()):
        raise NumericError("non-finite interaction force")
    a, b = state._decay(dt)
    state.v = a * state.v + b * F
    return state.v.copy()


@dataclass
class AdaptiveWindow:
    """Sliding window of admittance and hand velocities.

    Below ``motion_floor`` of hand travel inside the window the index keeps
    its last value instead of evaluating an ill-conditioned ratio.
    """

    W_l: float = 0.25
    dt: float = 1e-3
    epsilon: float = 1e-6
    motion_floor: float = 1e-3
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.W_l > 0.0 and self.dt > 0.0):
            raise ConfigurationError("window length and dt must be positive")
        if self.epsilon <= 0.0 or self.motion_floor < 0.0:
            raise ConfigurationError("epsilon must be positive and motion_floor non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in [0, 1]")
        self.size = max(1, int(round(self.W_l / self.dt)))
        self._adm = np.zeros((self.size, 3))
        self._hum = np.zeros((self.size, 3))
        self._head = 0
        self.count = 0

    def push(self, v_adm, v_h) -> None:
        self._adm[self._head] = v_adm
        self._hum[self._head] = v_h
        self._head = (self._head + 1) % self.size
        self.count = min(self.count + 1, self.size)

    def integrals(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Rectangle-rule integrals of both velocities over the stored window."""
        return self._adm.sum(axis=0) * dt, self._hum.sum(axis=0) * dt


def adaptive_index(window: AdaptiveWindow, dt: float) -> float:
    if window.count == 0:
        raise ConfigurationError("adaptive index needs at least one sample")
    int_adm, int_h = window.integrals(dt)
    travel_h = math.hypot(*int_h)
    if travel_h < window.motion_floor:
        return window.alpha
    alpha = 1.0 - math.hypot(*int_adm) / (travel_h + window.epsilon)
    window.alpha = max(alpha, 0.0)
    return window.alpha


def reference_velocity(v_adm, alpha: float, v_h) -> np.ndarray:
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha must lie in [0, 1]")
    return np.asarray(v_adm, dtype=float) + alpha * np.asarray(v_h, dtype=float)


@dataclass(frozen=True)
class ReferenceState:
    x_d: Pose
    xdot_d: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        xdot = np.asarray(self.xdot_d, dtype=float).reshape(6)
        if np.any(xdot[3:] != 0.0):
            raise ConfigurationError("reference twist must have zero angular part")
        object.__setattr__(self, "xdot_d", xdot)


def integrate_reference(ref: ReferenceState, v_d, dt: float) -> ReferenceState:
    """Advance the reference position by ``v_d dt``; orientation is never touched."""
    if not dt > 0.0:
        raise ConfigurationError("dt must be positive")
    v_d = np.asarray(v_d, dtype=float)
    xdot = np.zeros(6)
    xdot[:3] = v_d
    return ReferenceState(ref.x_d.translated(v_d * dt), xdot)


@dataclass(frozen=True)
class AciGains:
    M_adm: tuple = (6.0, 6.0, 6.0)
    D_adm: tuple = (30.0, 30.0, 30.0)
    window: float = 0.25
    epsilon: float = 1e-6
    motion_floor: float = 1e-3

    def __post_init__(self):
        for name in ("M_adm", "D_adm"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 3 or min(values) <= 0.0 or not np.all(np.isfinite(values)):
                raise ConfigurationError(f"{name} needs 3 positive entries")
            object.__setattr__(self, name, values)
        if not self.window > 0.0:
            raise ConfigurationError("window must be positive")
        if not self.epsilon > 0.0:
            raise ConfigurationError("epsilon must be positive")
        if self.motion_floor < 0.0:
            raise ConfigurationError("motion_floor must be non-negative")


class InteractionController:
    """Admittance filter and reference generator in one per-run object.

    With ``adaptive=False`` alpha is pinned to zero, which is the plain
    admittance controller used as the baseline.
    """

    def __init__(self, gains: AciGains, x0: Pose, dt: float, adaptive: bool = True):
        self.adaptive = adaptive
        self.dt = dt
        self.admittance = AdmittanceState(gains.M_adm, gains.D_adm)
        self.window = AdaptiveWindow(gains.window, dt, gains.epsilon, gains.motion_floor)
        self.reference = ReferenceState(x0)
        self.alpha = 0.0
        self.v_d = np.zeros(3)

    def step(self, F_H, v_h) -> ReferenceState:
        v_adm = admittance_step(self.admittance, F_H, self.dt)
        if self.adaptive:
            self.window.push(v_adm, v_h)
            self.alpha = adaptive_index(self.window, self.dt)
        self.v_d = reference_velocity(v_adm, self.alpha, v_h)
        self.reference = integrate_reference(self.reference, self.v_d, self.dt)
        return self.reference
