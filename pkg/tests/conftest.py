"""Shared fixtures: cached full-simulation runs and the acceptance summary."""
from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import HealthCheck, settings

from cocarry.config import preset
from cocarry.sim import run_scenario

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_RUNS = {}
ACCEPTANCE_LINES = []


def simulate(name: str, controller: str = "aci", dt: float | None = None, seed: int | None = None):
    """Run a preset once per session; later calls return the same log object."""
    key = (name, controller, dt, seed)
    if key not in _RUNS:
        cfg = preset(name, controller=controller)
        if dt is not None:
            cfg = replace(cfg, dt=dt)
        if seed is not None:
            cfg = cfg.with_seed(seed)
        _RUNS[key] = run_scenario(cfg)
    return _RUNS[key]


@pytest.fixture(scope="session")
def runs():
    return simulate


def record_acceptance(number: int, title: str, checks) -> None:
    """Log one PASS/FAIL line for an acceptance criterion, then assert it."""
    failed = [desc for desc, ok in checks if not ok]
    status = "FAIL" if failed else "PASS"
    detail = "; ".join(desc for desc, _ in checks)
    line = f"{status} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert not failed, f"criterion {number} failed: " + "; ".join(failed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
