"""Fixed-step closed loop: human -> object -> sensors -> ACI -> whole-body controller.

One call to :func:`step` is one control period. The robot is a pure velocity
integrator, so joint positions are advanced with explicit Euler.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .aci import InteractionController
from .config import ScenarioConfig
from .coupling import ft_measure, object_force
from .errors import NumericError
from .hqp import saturate, wholebody_command
from .human import HumanState, human_step, mocap_buffer, mocap_measure
from .kinematics import _chain, forward_kinematics, rotation_vector

log = logging.getLogger(__name__)


def _xyz(prefix):
    return tuple(f"{prefix}_{a}" for a in "xyz")


COLUMNS = (
    ("t",)
    + tuple(f"q{i}" for i in range(9))
    + _xyz("grasp")
    + ("grasp_rx", "grasp_ry", "grasp_rz")
    + _xyz("xd")
    + _xyz("v_adm")
    + _xyz("v_h")
    + ("alpha",)
    + _xyz("v_d")
    + _xyz("F_H")
    + _xyz("F_obj")
    + _xyz("hand")
    + _xyz("hand_v")
    + _xyz("robot")
    + ("misalignment", "k", "manipulability", "saturated", "complete", "paused")
)
LABEL_COLUMN = "interval"
_INDEX = {name: i for i, name in enumerate(COLUMNS)}


@dataclass
class SimLog:
    """Per-step time series; ``labels[i]`` is the interval of record ``i`` ('' after completion)."""

    data: np.ndarray
    labels: np.ndarray
    dt: float
    controller: str = "aci"
    max_duration: float = float("nan")
    error: str | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, _INDEX[name]]

    def vec(self, prefix: str) -> np.ndarray:
        """N x 3 block for a vector channel, e.g. ``vec('hand')``."""
        i = _INDEX[f"{prefix}_x"]
        return self.data[:, i : i + 3]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS + (LABEL_COLUMN,))
        for row, label in zip(self.data.tolist(), self.labels.tolist()):
            writer.writerow([repr(v) for v in row] + [label])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dt: float | None = None, **kwargs) -> "SimLog":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != COLUMNS + (LABEL_COLUMN,):
            raise ValueError("CSV header does not match the log schema")
        rows = list(reader)
        data = np.array([[float(v) for v in r[:-1]] for r in rows]).reshape(-1, len(COLUMNS))
        labels = np.array([r[-1] for r in rows], dtype=object)
        if dt is None:
            dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else float(data[0, 0])
        return cls(data, labels, dt, **kwargs)

    @classmethod
    def from_channels(cls, dt: float, labels=None, **channels) -> "SimLog":
        """Build a log from a subset of channels; the rest are zero-filled.

        Vector channels may be given by prefix (``hand=Nx3``); time is filled
        in as ``(i + 1) dt`` when not supplied.
        """
        n = len(next(iter(channels.values())))
        data = np.zeros((n, len(COLUMNS)))
        data[:, 0] = dt * np.arange(1, n + 1)
        for name, values in channels.items():
            values = np.asarray(values, dtype=float)
            if name in _INDEX:
                data[:, _INDEX[name]] = values
            else:
                i = _INDEX[f"{name}_x"]
                data[:, i : i + 3] = values
        if labels is None:
            labels = ["segment"] * n
        return cls(data, np.asarray(labels, dtype=object), dt)


@dataclass
class SimState:
    config: ScenarioConfig
    q: np.ndarray
    qdot: np.ndarray
    human: HumanState
    controller: InteractionController
    rng_ft: np.random.Generator
    rng_mocap: np.random.Generator
    mocap_buf: object
    mocap_steps: int
    grasp_p: np.ndarray
    grasp_v: np.ndarray
    F_obj: np.ndarray
    rest: np.ndarray
    chain: tuple = None
    k_step: int = 0
    completed_step: int | None = None
    records: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def t(self) -> float:
        return self.k_step * self.config.dt


def init_state(config: ScenarioConfig) -> SimState:
    q = np.array(config.q0)
    x0 = forward_kinematics(config.robot, q)
    rest = np.asarray(config.coupling.rest_vector)
    human = HumanState(
        position=x0.position + rest,
        force_cap=config.human.force_cap,
        bandwidth=config.human.bandwidth,
        align_tol=config.human.align_tol,
    )
    ctrl = InteractionController(config.aci, x0, config.dt, adaptive=config.controller == "aci")
    return SimState(
        config=config,
        q=q,
        qdot=np.zeros_like(q),
        human=human,
        controller=ctrl,
        rng_ft=np.random.default_rng(config.ft.seed),
        rng_mocap=np.random.default_rng(config.mocap.seed),
        mocap_buf=mocap_buffer(config.mocap.latency_steps(config.dt)),
        mocap_steps=config.mocap.latency_steps(config.dt),
        grasp_p=x0.position.copy(),
        grasp_v=np.zeros(3),
        F_obj=np.zeros(3),
        rest=rest,
    )


def step(state: SimState, config: ScenarioConfig | None = None) -> SimState:
    """Advance the closed loop by one control period and append a log record."""
    cfg = config or state.config
    dt = cfg.dt
    t = state.t
    h = state.human

    misalignment = math.hypot(*(h.position - state.grasp_p - state.rest))
    label = "" if h.phase == "done" else h.label(cfg.path)
    human_step(h, cfg.path, t, -state.F_obj, dt, misalignment)
    if h.completed_at is not None and state.completed_step is None:
        state.completed_step = state.k_step

    F_obj = object_force(cfg.coupling, h.position, state.grasp_p, h.velocity, state.grasp_v)
    F_H = ft_measure(F_obj, cfg.ft, state.rng_ft)
    v_h = mocap_measure(h.velocity, cfg.mocap.sigma, state.mocap_steps, state.rng_mocap, state.mocap_buf)

    ctrl = state.controller
    ref = ctrl.step(F_H, v_h)
    cmd = wholebody_command(cfg.robot, state.q, ref.x_d, ref.xdot_d, cfg.weights, cfg.damping, state.chain)
    qdot, saturated = saturate(cmd.qdot, np.asarray(cfg.speed_limits))
    if not math.isfinite(qdot.sum()):
        raise NumericError(f"non-finite joint velocity at t={t:.3f}")

    state.q = state.q + qdot * dt
    state.qdot = qdot
    state.chain = _chain(cfg.robot, state.q)
    _, _, R, p = state.chain
    state.grasp_v = (p - state.grasp_p) / dt
    state.grasp_p = p
    state.F_obj = F_obj
    state.k_step += 1

    rec = np.concatenate(
        [
            [state.t],
            state.q,
            p,
            rotation_vector(R),
            ref.x_d.position,
            ctrl.admittance.v,
            v_h,
            [ctrl.alpha],
            ctrl.v_d,
            F_H,
            F_obj,
            h.position,
            h.velocity,
            p,
            [misalignment, cmd.k, cmd.manipulability, float(saturated), float(h.phase == "done"), float(h.paused)],
        ]
    )
    state.records.append(rec)
    state.labels.append(label)
    return state


def _finish(state: SimState, error: str | None = None) -> SimLog:
    cfg = state.config
    data = np.array(state.records) if state.records else np.zeros((0, len(COLUMNS)))
    return SimLog(
        data=data,
        labels=np.array(state.labels, dtype=object),
        dt=cfg.dt,
        controller=cfg.controller,
        max_duration=cfg.max_duration,
        error=error,
        meta={"scenario": cfg.name, "preset": cfg.preset},
    )


def run_scenario(config: ScenarioConfig) -> SimLog:
    """Run until the script completes plus ``settle_time``, or until ``max_duration``.

    A numeric failure stops the run; the log up to the failing step is
    returned with ``error`` set.
    """
    state = init_state(config)
    settle_steps = int(round(config.settle_time / config.dt))
    n_max = config.n_steps
    try:
        while state.k_step < n_max:
            step(state)
            if state.completed_step is not None and state.k_step - state.completed_step > settle_steps:
                break
    except NumericError as exc:
        log.error("run %s aborted: %s", config.name, exc)
        return _finish(state, str(exc))
    return _finish(state)
