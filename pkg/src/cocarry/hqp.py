"""Two-level whole-body velocity controller.

Level 1 is a weighted damped least-squares Cartesian tracking task; level 2
pulls the arm toward a default posture and is projected into the null space
of level 1 through the same damped weighted generalized inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConfigurationError, NumericError
from .kinematics import (
    N_ARM,
    N_BASE,
    N_DOF,
    Pose,
    RobotModel,
    _chain,
    _check_q,
    _jacobian_from_chain,
    rotation_error,
)

# defaults: K, W1, W2, W3 as used on the real platform
DEFAULT_K = (1.0, 1.0, 1.0, 0.1, 0.1, 0.1)
DEFAULT_W1 = tuple(100.0 * w for w in (10.0, 10.0, 10.0, 5.0, 5.0, 5.0))
DEFAULT_W2 = (3.0,) * N_DOF
DEFAULT_W3 = (0.0,) * N_BASE + (1.0,) * N_ARM
DEFAULT_Q_DEF = (0.0, 0.0, 0.0, 0.0, -1.4, 1.5, -0.1, np.pi / 2, 0.0)


def _diag_tuple(name, values, size, strict):
    values = tuple(float(v) for v in values)
    if len(values) != size:
        raise ConfigurationError(f"{name} needs {size} diagonal entries, got {len(values)}")
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite")
    if strict and np.any(arr <= 0.0):
        raise ConfigurationError(f"{name} must be positive definite")
    if not strict and np.any(arr < 0.0):
        raise ConfigurationError(f"{name} must be positive semidefinite")
    return values


@dataclass(frozen=True)
class HqpWeights:
    """Diagonal gains, stored as tuples of the diagonal entries."""

    K: tuple = DEFAULT_K
    W1: tuple = DEFAULT_W1
    W2: tuple = DEFAULT_W2
    W3: tuple = DEFAULT_W3
    q_def: tuple = DEFAULT_Q_DEF
    posture_gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "K", _diag_tuple("K", self.K, 6, True))
        object.__setattr__(self, "W1", _diag_tuple("W1", self.W1, 6, True))
        m = len(self.W2)
        object.__setattr__(self, "W2", _diag_tuple("W2", self.W2, m, True))
        object.__setattr__(self, "W3", _diag_tuple("W3", self.W3, m, False))
        q_def = tuple(float(v) for v in self.q_def)
        if len(q_def) != m or not np.all(np.isfinite(q_def)):
            raise ConfigurationError(f"q_def needs {m} finite entries")
        object.__setattr__(self, "q_def", q_def)
        if not (self.posture_gain > 0.0 and np.isfinite(self.posture_gain)):
            raise ConfigurationError("posture_gain must be positive")
        object.__setattr__(self, "posture_gain", float(self.posture_gain))

    @property
    def m(self) -> int:
        return len(self.W2)


@dataclass(frozen=True)
class DampingSchedule:
    k_min: float = 0.1
    k_max: float = 1.0
    w0: float = 0.0075

    def __post_init__(self):
        if not (0.0 < self.k_min <= self.k_max) or not np.isfinite(self.k_max):
            raise ConfigurationError("damping schedule needs 0 < k_min <= k_max")
        if not (self.w0 > 0.0 and np.isfinite(self.w0)):
            raise ConfigurationError("damping schedule needs w0 > 0")


def damping_factor(w: float, sched: DampingSchedule) -> float:
    """Quadratic ramp from ``k_max`` at ``w = 0`` to ``k_min`` at ``w >= w0``."""
    if w < 0.0:
        raise ConfigurationError("manipulability must be non-negative")
    if w >= sched.w0:
        return sched.k_min
    r = 1.0 - w / sched.w0
    return sched.k_min + (sched.k_max - sched.k_min) * r * r


class _DampedInverse:
    """Cholesky factor of ``J^T W1 J + k^2 W2`` shared by both priority levels."""

    def __init__(self, J, weights: HqpWeights, k: float):
        if not k > 0.0:
            raise ConfigurationError("damping factor k must be positive")
        J = np.asarray(J, dtype=float)
        if not math.isfinite(J.sum()):
            raise NumericError("non-finite Jacobian")
        self.J = J
        self.W1 = np.asarray(weights.W1)
        JtW1 = J.T * self.W1
        H = JtW1 @ J + np.diag((k * k) * np.asarray(weights.W2))
        try:
            self.factor = cho_factor(H, check_finite=False)
        except LinAlgError as exc:
            raise NumericError(f"Hessian factorization failed: {exc}") from exc
        self.JtW1 = JtW1

    def apply(self, task: np.ndarray) -> np.ndarray:
        """``J^+ task``."""
        return cho_solve(self.factor, self.JtW1 @ task, check_finite=False)

    def project(self, v: np.ndarray) -> np.ndarray:
        """``(I - J^+ J) v``."""
        return v - self.apply(self.J @ v)


def solve_primary(J, xdot_d, e, weights: HqpWeights, k: float) -> np.ndarray:
    """Minimizer of ``||xdot_d + K e - J qdot||^2_W1 + ||k qdot||^2_W2``."""
    task = np.asarray(xdot_d, dtype=float) + np.asarray(weights.K) * np.asarray(e, dtype=float)
    if not np.all(np.isfinite(task)):
        raise NumericError("non-finite task velocity")
    return _DampedInverse(J, weights, k).apply(task)


def primary_objective(J, xdot_d, e, weights: HqpWeights, k: float, qdot) -> float:
    r = np.asarray(xdot_d) + np.asarray(weights.K) * np.asarray(e) - np.asarray(J) @ qdot
    return float(r @ (np.asarray(weights.W1) * r) + k * k * qdot @ (np.asarray(weights.W2) * qdot))


def secondary_velocity(q, weights: HqpWeights) -> np.ndarray:
    """Scaled negative gradient of ``||q_def - q||^2_W3``."""
    q = np.asarray(q, dtype=float)
    if q.shape != (weights.m,):
        raise ConfigurationError(f"q must have {weights.m} entries")
    return weights.posture_gain * 2.0 * np.asarray(weights.W3) * (np.asarray(weights.q_def) - q)


def nullspace_project(J, weights: HqpWeights, k: float, qdot2) -> np.ndarray:
    return _DampedInverse(J, weights, k).project(np.asarray(qdot2, dtype=float))


@dataclass
class WholeBodyCommand:
    qdot: np.ndarray
    qdot_primary: np.ndarray
    qdot_secondary: np.ndarray
    k: float
    manipulability: float
    J: np.ndarray
    pose_position: np.ndarray
    pose_rotation: np.ndarray


def wholebody_command(
    model: RobotModel, q, x_d: Pose, xdot_d, weights: HqpWeights, sched: DampingSchedule, chain=None
) -> WholeBodyCommand:
    """One controller evaluation, keeping the intermediates the simulator logs.

    ``chain`` may carry a precomputed ``_chain(model, q)`` for the same ``q``.
    """
    q = _check_q(q)
    origins, axes, R, p = _chain(model, q) if chain is None else chain
    J = _jacobian_from_chain(q, origins, axes, p)
    # the arm block differs from the flange Jacobian by a unit-determinant change of frame
    w = abs(float(np.linalg.det(J[:, N_BASE:])))
    k = damping_factor(w, sched)

    e = np.empty(6)
    e[:3] = x_d.position - p
    e[3:] = rotation_error(x_d.rotation, R)
    task = np.asarray(xdot_d, dtype=float) + np.asarray(weights.K) * e
    if not math.isfinite(task.sum()):
        raise NumericError("non-finite task velocity")

    inv = _DampedInverse(J, weights, k)
    qdot1 = inv.apply(task)
    qdot2 = inv.project(secondary_velocity(q, weights))
    return WholeBodyCommand(qdot1 + qdot2, qdot1, qdot2, k, w, J, p, R)


def wholebody_step(model: RobotModel, q, x_d: Pose, xdot_d, weights: HqpWeights, sched: DampingSchedule) -> np.ndarray:
    """Desired whole-body joint velocities for reference pose ``x_d`` and twist ``xdot_d``."""
    return wholebody_command(model, q, x_d, xdot_d, weights, sched).qdot


def saturate(qdot: np.ndarray, limits: np.ndarray) -> tuple[np.ndarray, bool]:
    """Uniformly scale ``qdot`` so every joint respects its speed limit.

    Uniform scaling keeps the commanded direction, so the Cartesian task is
    slowed down rather than distorted.
    """
    ratio = float(np.max(np.abs(qdot) / limits))
    if ratio <= 1.0:
        return qdot, False
    return qdot / ratio, True
