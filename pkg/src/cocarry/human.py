"""Scripted human partner and motion-capture measurement model.

The human follows a list of minimum-jerk segments. Progress along the script
slows down as the object pushes back on the hand and stops entirely at
``force_cap``; after each segment the human dwells and only starts the next
one once the object is realigned (human-robot offset back near its value at
engagement).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

LABELS = ("lowering_lifting", "pulling", "sideways_right", "pushing", "sideways_left")


@dataclass(frozen=True)
class Segment:
    displacement: tuple
    duration: float
    label: str

    def __post_init__(self):
        disp = tuple(float(v) for v in self.displacement)
        if len(disp) != 3 or not np.all(np.isfinite(disp)):
            raise ConfigurationError("segment displacement must be 3 finite numbers")
        object.__setattr__(self, "displacement", disp)
        if not self.duration > 0.0:
            raise ConfigurationError("segment duration must be positive")
        object.__setattr__(self, "duration", float(self.duration))
        if not isinstance(self.label, str) or not self.label:
            raise ConfigurationError("segment label must be a non-empty string")


@dataclass(frozen=True)
class PathScript:
    segments: tuple
    dwell: float = 1.0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise ConfigurationError("path script needs at least one segment")
        object.__setattr__(self, "segments", segs)
        if self.dwell < 0.0:
            raise ConfigurationError("dwell must be non-negative")
        object.__setattr__(self, "dwell", float(self.dwell))

    @property
    def net_displacement(self) -> np.ndarray:
        return np.sum([s.displacement for s in self.segments], axis=0)

    @property
    def nominal_duration(self) -> float:
        return sum(s.duration for s in self.segments) + self.dwell * len(self.segments)


def build_experiment_path(
    square_side: float = 1.0,
    vertical_drop: float = 0.3,
    segment_time: float = 3.0,
    dwell: float = 1.0,
    pull_direction=(1.0, 0.0, 0.0),
) -> PathScript:
    """Down-up movement followed by a closed square: pull, right, push, left.

    ``pull_direction`` points from the robot toward the human; the human faces
    the robot, so their right is ``up x pull_direction``.
    """
    if min(square_side, vertical_drop, segment_time) <= 0.0:
        raise ConfigurationError("path dimensions and segment time must be positive")
    pull = np.asarray(pull_direction, dtype=float)
    pull = pull / np.linalg.norm(pull)
    right = np.cross([0.0, 0.0, 1.0], pull)
    down = (0.0, 0.0, -vertical_drop)
    up = (0.0, 0.0, vertical_drop)
    rows = [
        (down, "lowering_lifting"),
        (up, "lowering_lifting"),
        (square_side * pull, "pulling"),
        (square_side * right, "sideways_right"),
        (-square_side * pull, "pushing"),
        (-square_side * right, "sideways_left"),
    ]
    return PathScript(tuple(Segment(tuple(d), segment_time, label) for d, label in rows), dwell)


def minjerk_eval(p0, p1, T: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-jerk position and velocity; clamped (zero velocity) outside ``[0, T]``."""
    p0 = np.asarray(p0, dtype=float)
    delta = np.asarray(p1, dtype=float) - p0
    if t <= 0.0:
        return p0.copy(), np.zeros(3)
    if t >= T:
        return p0 + delta, np.zeros(3)
    s = t / T
    shape = s**3 * (10.0 + s * (-15.0 + 6.0 * s))
    rate = 30.0 * s**2 * (1.0 - s) ** 2 / T
    return p0 + delta * shape, delta * rate


@dataclass
class HumanState:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    force_cap: float = 40.0
    bandwidth: float = 20.0
    align_tol: float = 0.05
    segment: int = 0
    clock: float = 0.0
    phase: str = "move"  # move | dwell | done
    dwell_clock: float = 0.0
    start: np.ndarray = None
    completed_at: float | None = None
    paused: bool = False

    def __post_init__(self):
        self.position = np.array(self.position, dtype=float).reshape(3)
        self.velocity = np.array(self.velocity, dtype=float).reshape(3)
        if self.start is None:
            self.start = self.position.copy()
        if not self.force_cap > 0.0:
            raise ConfigurationError("force_cap must be positive")
        if not self.bandwidth > 0.0:
            raise ConfigurationError("tracking bandwidth must be positive")

    def label(self, script: PathScript) -> str:
        return script.segments[min(self.segment, len(script.segments) - 1)].label

    def segment_origin(self, script: PathScript) -> np.ndarray:
        done = script.segments[: self.segment]
        return self.start + np.sum([s.displacement for s in done], axis=0) if done else self.start.copy()


def progress_rate(force: float, cap: float) -> float:
    """Fraction of nominal speed the human keeps under an object force ``force``."""
    r = force / cap
    return 0.0 if r >= 1.0 else 1.0 - r * r


def human_step(
    state: HumanState, script: PathScript, t: float, F_on_human, dt: float, misalignment: float = 0.0
) -> HumanState:
    """Advance the human by one period.

    ``t`` is the absolute simulation time (used to stamp completion) and
    ``misalignment`` the current deviation of the human-robot offset from its
    engagement value, which gates the start of the next segment.
    """
    if not dt > 0.0:
        raise ConfigurationError("dt must be positive")
    if state.phase == "done":
        state.velocity = np.zeros(3)
        return state

    rate = progress_rate(math.hypot(*F_on_human), state.force_cap)
    state.paused = rate == 0.0
    seg = script.segments[state.segment]
    origin = state.segment_origin(script)
    target = origin + np.asarray(seg.displacement)

    if state.phase == "move":
        p_old, _ = minjerk_eval(origin, target, seg.duration, state.clock)
        state.clock = min(state.clock + rate * dt, seg.duration)
        p_new, _ = minjerk_eval(origin, target, seg.duration, state.clock)
        if state.clock >= seg.duration:
            state.phase = "dwell"
            state.dwell_clock = 0.0
    else:
        p_old = p_new = target

    # feedforward is the nominal step itself, so a hand on the nominal stays on it exactly
    state.velocity = (p_new - p_old) / dt + rate * state.bandwidth * (p_old - state.position)
    state.position = state.position + state.velocity * dt

    if state.phase == "dwell":
        state.dwell_clock += dt
        last = state.segment == len(script.segments) - 1
        if state.dwell_clock >= script.dwell - 1e-12 and misalignment <= state.align_tol:
            if last:
                state.phase = "done"
                state.completed_at = t + dt
            else:
                state.segment += 1
                state.clock = 0.0
                state.phase = "move"
    return state


def mocap_measure(v_h_true, noise_sigma: float, latency_steps: int, rng: np.random.Generator, buffer: deque) -> np.ndarray:
    """Delay ``v_h_true`` by ``latency_steps`` periods and add Gaussian noise.

    ``buffer`` holds the in-flight samples and must be created by
    :func:`mocap_buffer` with the same latency.
    """
    if latency_steps < 0:
        raise ConfigurationError("latency must be non-negative")
    buffer.append(np.array(v_h_true, dtype=float))
    delayed = buffer.popleft()
    return delayed + noise_sigma * rng.standard_normal(3)


def mocap_buffer(latency_steps: int, initial=(0.0, 0.0, 0.0)) -> deque:
    return deque(np.array(initial, dtype=float) for _ in range(latency_steps))
