"""Run evaluation: completion time, alignment, per-interval statistics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import AnalysisError
from .sim import SimLog


class CompletionTime(NamedTuple):
    t_c: float
    complete: bool


def completion_time(log: SimLog) -> CompletionTime:
    """Time from the start of the run to the completion of the last segment.

    A run that never completes reports its full duration (the timeout) with
    ``complete=False``.
    """
    if len(log) == 0:
        raise AnalysisError("empty log")
    t0 = log.t[0] - log.dt
    done = np.flatnonzero(log["complete"] > 0.5)
    if done.size:
        return CompletionTime(float(log.t[done[0]] - t0), True)
    return CompletionTime(float(log.t[-1] - t0), False)


def _task_slice(log: SimLog) -> slice:
    done = np.flatnonzero(log["complete"] > 0.5)
    return slice(0, done[0] + 1) if done.size else slice(0, len(log))


def alignment_metric(log: SimLog, whole_log: bool = False) -> float:
    """Time-averaged drift of the robot-minus-human offset from its first value.

    Rectangle rule at the log rate; by default the average stops at task
    completion so the settling tail does not dilute it.
    """
    sl = slice(0, len(log)) if whole_log else _task_slice(log)
    rel = log.vec("robot")[sl] - log.vec("hand")[sl]
    dev = np.linalg.norm(rel - rel[0], axis=1)
    return float(np.sum(dev) * log.dt / (len(dev) * log.dt))


def effort_proxy(log: SimLog) -> float:
    """Integrated object force on the human hand, a stand-in for muscular effort."""
    sl = _task_slice(log)
    return float(np.sum(np.linalg.norm(log.vec("F_obj")[sl], axis=1)) * log.dt)


def steady_mask(log: SimLog, speed_fraction: float = 0.5) -> np.ndarray:
    """Records where the true hand speed is at least ``speed_fraction`` of its interval peak.

    This selects the middle of each movement and drops onsets, stops and
    dwells, where the window ratio is dominated by lags and noise.
    """
    if not 0.0 < speed_fraction <= 1.0:
        raise AnalysisError("speed_fraction must lie in (0, 1]")
    labels = np.asarray(log.labels, dtype=object)
    speed = np.linalg.norm(log.vec("hand_v"), axis=1)
    mask = np.zeros(len(log), dtype=bool)
    for label in dict.fromkeys(labels.tolist()):
        if not label:
            continue
        m = labels == label
        peak = speed[m].max()
        if peak > 0.0:
            mask |= m & (speed >= speed_fraction * peak)
    return mask


def steady_alpha(log: SimLog, speed_fraction: float = 0.5) -> float:
    """Mean adaptive index over the steady part of every movement."""
    mask = steady_mask(log, speed_fraction)
    if not mask.any():
        raise AnalysisError("log has no steady movement")
    return float(log["alpha"][mask].mean())


@dataclass(frozen=True)
class IntervalStats:
    n: int
    alpha_mean: float
    alpha_std: float
    force_mean: float
    force_std: float


@dataclass
class IntervalReport:
    controller: str
    intervals: dict
    t_c: float
    complete: bool
    d_am: float
    effort_proxy: float
    n_unlabeled: int = 0
    meta: dict = field(default_factory=dict)

    def as_summary(self) -> str:
        """``key: value`` lines, one block per interval."""
        lines = [
            f"controller: {self.controller}",
            f"complete: {str(self.complete).lower()}",
            f"t_c: {self.t_c:.6f}",
            f"d_am: {self.d_am:.9f}",
            f"effort_proxy_Ns: {self.effort_proxy:.6f}",
            f"unlabeled_records: {self.n_unlabeled}",
        ]
        for label, st in self.intervals.items():
            lines += [
                "",
                f"[{label}]",
                f"records: {st.n}",
                f"alpha_mean: {st.alpha_mean:.9f}",
                f"alpha_std: {st.alpha_std:.9f}",
                f"force_mean: {st.force_mean:.9f}",
                f"force_std: {st.force_std:.9f}",
            ]
        return "\n".join(lines) + "\n"

    def as_table(self) -> str:
        rows = ["interval,records,alpha_mean,alpha_std,force_mean,force_std"]
        for label, st in self.intervals.items():
            rows.append(f"{label},{st.n},{st.alpha_mean!r},{st.alpha_std!r},{st.force_mean!r},{st.force_std!r}")
        return "\n".join(rows) + "\n"


def interval_stats(log: SimLog) -> IntervalReport:
    labels = np.asarray(log.labels, dtype=object)
    alpha = log["alpha"]
    force = np.linalg.norm(log.vec("F_H"), axis=1)
    intervals = {}
    for label in dict.fromkeys(labels.tolist()):
        if not label:
            continue
        mask = labels == label
        intervals[label] = IntervalStats(
            n=int(mask.sum()),
            alpha_mean=float(alpha[mask].mean()),
            alpha_std=float(alpha[mask].std()),
            force_mean=float(force[mask].mean()),
            force_std=float(force[mask].std()),
        )
    t_c, complete = completion_time(log)
    return IntervalReport(
        controller=log.controller,
        intervals=intervals,
        t_c=t_c,
        complete=complete,
        d_am=alignment_metric(log),
        effort_proxy=effort_proxy(log),
        n_unlabeled=int(sum(1 for x in labels if not x)),
        meta=dict(log.meta),
    )


@dataclass
class Comparison:
    """Paired differences ``a - b`` between two runs of the same scenario."""

    controllers: tuple
    d_t_c: float
    d_d_am: float
    d_effort: float
    d_force_mean: dict
    d_alpha_mean: dict
    complete: tuple

    @staticmethod
    def _sign(x: float) -> str:
        return "+" if x > 0 else "-" if x < 0 else "0"

    def as_summary(self) -> str:
        a, b = self.controllers
        lines = [
            f"delta: {a} - {b}",
            f"complete_{a}: {str(self.complete[0]).lower()}",
            f"complete_{b}: {str(self.complete[1]).lower()}",
            f"d_t_c: {self.d_t_c:.6f} ({self._sign(self.d_t_c)})",
            f"d_d_am: {self.d_d_am:.9f} ({self._sign(self.d_d_am)})",
            f"d_effort_proxy: {self.d_effort:.6f} ({self._sign(self.d_effort)})",
        ]
        for label in self.d_force_mean:
            f, al = self.d_force_mean[label], self.d_alpha_mean[label]
            lines += [
                "",
                f"[{label}]",
                f"d_force_mean: {f:.9f} ({self._sign(f)})",
                f"d_alpha_mean: {al:.9f} ({self._sign(al)})",
            ]
        return "\n".join(lines) + "\n"


def compare_controllers(report_a: IntervalReport, report_b: IntervalReport) -> Comparison:
    if set(report_a.intervals) != set(report_b.intervals):
        raise AnalysisError(
            f"interval sets differ: {sorted(report_a.intervals)} vs {sorted(report_b.intervals)}"
        )
    labels = list(report_a.intervals)
    return Comparison(
        controllers=(report_a.controller, report_b.controller),
        d_t_c=report_a.t_c - report_b.t_c,
        d_d_am=report_a.d_am - report_b.d_am,
        d_effort=report_a.effort_proxy - report_b.effort_proxy,
        d_force_mean={k: report_a.intervals[k].force_mean - report_b.intervals[k].force_mean for k in labels},
        d_alpha_mean={k: report_a.intervals[k].alpha_mean - report_b.intervals[k].alpha_mean for k in labels},
        complete=(report_a.complete, report_b.complete),
    )
