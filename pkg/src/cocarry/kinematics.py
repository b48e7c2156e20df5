"""Kinematics of an omni-directional planar base carrying a 6R arm.

Generalized coordinates are ``q = [x, y, yaw, q1..q6]``. The arm is described
with standard Denavit-Hartenberg parameters; every quantity returned here is
expressed in the world frame unless noted otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.spatial.transform import Rotation

from .errors import ConfigurationError

N_BASE = 3
N_ARM = 6
N_DOF = N_BASE + N_ARM

# UR16e standard DH parameters (a, d, alpha)
UR16E_A = (0.0, -0.4784, -0.36, 0.0, 0.0, 0.0)
UR16E_D = (0.1807, 0.0, 0.0, 0.17415, 0.11985, 0.11655)
UR16E_ALPHA = (np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0)


def _rpy_matrix(rpy) -> np.ndarray:
    return Rotation.from_euler("xyz", rpy).as_matrix()


def _homogeneous(position, rpy) -> np.ndarray:
    T = np.eye(4)
    T[:3, :3] = _rpy_matrix(rpy)
    T[:3, 3] = position
    return T


@dataclass(frozen=True)
class RobotModel:
    """Mobile manipulator geometry.

    ``base_mount`` places the arm root in the base frame and ``tool`` places
    the grasp point relative to the flange; both are (position, roll-pitch-yaw)
    pairs so the model stays hashable and comparable.
    """

    dh_a: tuple = UR16E_A
    dh_d: tuple = UR16E_D
    dh_alpha: tuple = UR16E_ALPHA
    mount_position: tuple = (0.0, 0.0, 0.5)
    mount_rpy: tuple = (0.0, 0.0, np.pi)
    tool_position: tuple = (0.0, 0.0, 0.15)
    tool_rpy: tuple = (0.0, 0.0, 0.0)
    _mount: np.ndarray = field(init=False, repr=False, compare=False)
    _tool: np.ndarray = field(init=False, repr=False, compare=False)
    _dh: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("dh_a", "dh_d", "dh_alpha"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != N_ARM:
                raise ConfigurationError(f"{name} needs {N_ARM} entries, got {len(values)}")
            if not np.all(np.isfinite(values)):
                raise ConfigurationError(f"{name} must be finite")
            object.__setattr__(self, name, values)
        for name in ("mount_position", "mount_rpy", "tool_position", "tool_rpy"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 3 or not np.all(np.isfinite(values)):
                raise ConfigurationError(f"{name} must be 3 finite numbers")
            object.__setattr__(self, name, values)
        object.__setattr__(self, "_mount", _homogeneous(self.mount_position, self.mount_rpy))
        object.__setattr__(self, "_tool", _homogeneous(self.tool_position, self.tool_rpy))
        dh = np.array([(a, d, math.cos(al), math.sin(al)) for a, d, al in zip(self.dh_a, self.dh_d, self.dh_alpha)])
        dh.flags.writeable = False
        object.__setattr__(self, "_dh", dh)

    @property
    def n_b(self) -> int:
        return N_BASE

    @property
    def n_a(self) -> int:
        return N_ARM

    @property
    def m(self) -> int:
        return N_DOF

    @property
    def base_mount(self) -> np.ndarray:
        return self._mount.copy()

    @property
    def tool_transform(self) -> np.ndarray:
        return self._tool.copy()


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    quaternion: np.ndarray  # scalar-last (x, y, z, w)
    _R: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        quat = np.asarray(self.quaternion, dtype=float).reshape(4)
        if abs(np.linalg.norm(quat) - 1.0) > 1e-9:
            raise ConfigurationError("pose quaternion must have unit norm")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "quaternion", quat)

    @classmethod
    def from_matrix(cls, R: np.ndarray, p: np.ndarray) -> "Pose":
        """``R`` must be a proper rotation; it is kept as the cached matrix."""
        R = np.ascontiguousarray(R, dtype=float)
        return cls(p, _matrix_to_quat(R), R.copy())

    def translated(self, dp) -> "Pose":
        """Same orientation (bit for bit), position shifted by ``dp``."""
        return Pose(self.position + dp, self.quaternion, self._R)

    @property
    def rotation(self) -> np.ndarray:
        if self._R is None:
            object.__setattr__(self, "_R", Rotation.from_quat(self.quaternion).as_matrix())
        return self._R

    def as_vector(self) -> np.ndarray:
        """Position followed by the rotation vector."""
        return np.concatenate([self.position, Rotation.from_quat(self.quaternion).as_rotvec()])


@njit(cache=True)
def _matrix_to_quat(R):
    """Scalar-last unit quaternion of a rotation matrix (Shepperd's method), ``w >= 0``."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    q = np.empty(4)
    if tr >= max(R[0, 0], R[1, 1], R[2, 2]):
        s = 2.0 * math.sqrt(1.0 + tr)
        q[3] = 0.25 * s
        q[0] = (R[2, 1] - R[1, 2]) / s
        q[1] = (R[0, 2] - R[2, 0]) / s
        q[2] = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q[3] = (R[2, 1] - R[1, 2]) / s
        q[0] = 0.25 * s
        q[1] = (R[0, 1] + R[1, 0]) / s
        q[2] = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q[3] = (R[0, 2] - R[2, 0]) / s
        q[0] = (R[0, 1] + R[1, 0]) / s
        q[1] = 0.25 * s
        q[2] = (R[1, 2] + R[2, 1]) / s
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q[3] = (R[1, 0] - R[0, 1]) / s
        q[0] = (R[0, 2] + R[2, 0]) / s
        q[1] = (R[1, 2] + R[2, 1]) / s
        q[2] = 0.25 * s
    if q[3] < 0.0:
        q = -q
    return q / math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2)


def _check_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (N_DOF,):
        raise ConfigurationError(f"joint vector must have shape ({N_DOF},), got {q.shape}")
    return q


@njit(cache=True)
def _dh_walk(theta, dh, R, p):
    """DH chain walk; ``dh`` rows are ``(a, d, cos alpha, sin alpha)``."""
    n = dh.shape[0]
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    R = R.copy()
    p = p.copy()
    for i in range(n):
        a, d, ca, sa = dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3]
        origins[i] = p
        axes[i] = R[:, 2]
        ct, st = math.cos(theta[i]), math.sin(theta[i])
        Ri = np.array([[ct, -st * ca, st * sa], [st, ct * ca, -ct * sa], [0.0, sa, ca]])
        p = p + R @ np.array([a * ct, a * st, d])
        R = R @ Ri
    return origins, axes, R, p


def _arm_chain(model: RobotModel, theta, R: np.ndarray, p: np.ndarray):
    """Walk the DH chain from root frame ``(R, p)`` to the flange.

    Returns ``(origins, axes, R, p)``; ``origins[i]``/``axes[i]`` belong to
    the frame preceding arm joint ``i``.
    """
    return _dh_walk(np.ascontiguousarray(theta, dtype=float), model._dh, np.ascontiguousarray(R), np.asarray(p, dtype=float))


def _chain(model: RobotModel, q: np.ndarray):
    """World-frame arm joint origins/axes and the grasp frame ``(R, p)``."""
    c, s = math.cos(q[2]), math.sin(q[2])
    R_base = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    mount = model._mount
    origins, axes, R, p = _arm_chain(
        model, q[N_BASE:], R_base @ mount[:3, :3], np.array([q[0], q[1], 0.0]) + R_base @ mount[:3, 3]
    )
    tool = model._tool
    return origins, axes, R @ tool[:3, :3], p + R @ tool[:3, 3]


def forward_kinematics(model: RobotModel, q) -> Pose:
    """Grasp-point pose in the world frame."""
    _, _, R, p = _chain(model, _check_q(q))
    return Pose.from_matrix(R, p)


@njit(cache=True)
def _arm_columns(origins, axes, p):
    """Geometric Jacobian columns ``[z x (p - o); z]`` of the revolute joints."""
    n = origins.shape[0]
    J = np.empty((6, n))
    for i in range(n):
        rx, ry, rz = p[0] - origins[i, 0], p[1] - origins[i, 1], p[2] - origins[i, 2]
        zx, zy, zz = axes[i, 0], axes[i, 1], axes[i, 2]
        J[0, i] = zy * rz - zz * ry
        J[1, i] = zz * rx - zx * rz
        J[2, i] = zx * ry - zy * rx
        J[3, i] = zx
        J[4, i] = zy
        J[5, i] = zz
    return J


def _jacobian_from_chain(q, origins, axes, p) -> np.ndarray:
    J = np.zeros((6, N_DOF))
    J[0, 0] = 1.0
    J[1, 1] = 1.0
    # yaw column: z x (p - base origin)
    J[0, 2] = -(p[1] - q[1])
    J[1, 2] = p[0] - q[0]
    J[5, 2] = 1.0
    J[:, N_BASE:] = _arm_columns(origins, axes, p)
    return J


def whole_body_jacobian(model: RobotModel, q) -> np.ndarray:
    """6 x 9 map from ``q_dot`` to the grasp twist ``[v; omega]`` in the world frame."""
    q = _check_q(q)
    origins, axes, _, p = _chain(model, q)
    return _jacobian_from_chain(q, origins, axes, p)


def arm_jacobian(model: RobotModel, q) -> np.ndarray:
    """6 x 6 geometric Jacobian of the arm alone, at the flange, in the arm-root frame."""
    q = _check_q(q)
    origins, axes, _, p = _arm_chain(model, q[N_BASE:], np.eye(3), np.zeros(3))
    return _arm_columns(origins, axes, p)


def manipulability(J: np.ndarray) -> float:
    """Yoshikawa index ``sqrt(det(J J^T))``.

    Square ``J`` uses ``|det J|`` and wide ``J`` the product of singular
    values; both stay accurate near a singularity, where forming ``J J^T``
    would square the rounding error.
    """
    J = np.asarray(J, dtype=float)
    rows, cols = J.shape
    if rows > cols:
        return 0.0
    if rows == cols:
        return abs(float(np.linalg.det(J)))
    return float(np.prod(np.linalg.svd(J, compute_uv=False)))


def arm_manipulability(model: RobotModel, q) -> float:
    return manipulability(arm_jacobian(model, q))


def rotation_vector(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix, angle in ``[0, pi]``."""
    v = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    cos = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)
    sin = math.sqrt(v @ v)
    if cos < -0.9:
        # near pi the skew part loses precision; go through the quaternion
        quat = Rotation.from_matrix(R).as_quat()
        if quat[3] < 0.0:
            quat = -quat
        s = np.linalg.norm(quat[:3])
        return 2.0 * math.atan2(s, quat[3]) * quat[:3] / s
    if sin < 1e-12:
        return v
    return math.atan2(sin, cos) * v / sin


def rotation_error(R_d: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Rotation vector of ``R_d @ R.T``: the shortest rotation taking ``R`` onto ``R_d``."""
    return rotation_vector(R_d @ R.T)


def pose_error(x_d: Pose, x: Pose) -> np.ndarray:
    """``[p_d - p; rotvec(R_d R^T)]`` for use in ``K (x_d - x)``."""
    err = np.empty(6)
    err[:3] = x_d.position - x.position
    err[3:] = rotation_error(x_d.rotation, x.rotation)
    return err
