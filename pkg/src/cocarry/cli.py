"""``cocarry`` command line: run, compare or validate a scenario file.

Exit codes: 0 success, 1 failed or incomplete run (and any reported error),
2 bad usage.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .config import ScenarioConfig
from .errors import AnalysisError, ConfigurationError
from .metrics import compare_controllers, interval_stats
from .scenario import dumps, load
from .sim import SimLog, run_scenario

log = logging.getLogger("cocarry")

CONTROLLER_ALIASES = {"aci": "aci", "admittance": "admittance_only", "admittance_only": "admittance_only"}


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory and rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0.0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64 - 1:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cocarry", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{run,compare,validate}")

    def common(p, controller: bool):
        p.add_argument("scenario", type=Path, help="scenario TOML file")
        p.add_argument("--seed", type=_seed, help="reseed both sensors (F/T gets SEED, MoCap SEED+1)")
        p.add_argument("--dt", type=_positive_float, help="override the control period [s]")
        if controller:
            p.add_argument("--controller", choices=sorted(CONTROLLER_ALIASES), help="override the controller")

    p_run = sub.add_parser("run", help="simulate one scenario and write its log and summary")
    common(p_run, controller=True)
    p_run.add_argument("--out", type=Path, required=True, help="output directory")

    p_cmp = sub.add_parser("compare", help="run ACI and admittance-only on the same scenario and seeds")
    common(p_cmp, controller=False)
    p_cmp.add_argument("--out", type=Path, required=True, help="output directory")

    p_val = sub.add_parser("validate", help="parse a scenario and print the resolved configuration")
    common(p_val, controller=True)
    return parser


def resolve(args) -> ScenarioConfig:
    cfg = load(args.scenario)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if getattr(args, "controller", None):
        cfg = replace(cfg, controller=CONTROLLER_ALIASES[args.controller])
    return cfg


def _stem(cfg: ScenarioConfig) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in cfg.name) or "scenario"


def _prepare_out(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_run(out: Path, cfg: ScenarioConfig, lg: SimLog) -> str:
    report = interval_stats(lg)
    stem = f"{_stem(cfg)}_{cfg.controller}"
    summary = report.as_summary()
    if lg.error:
        summary += f"error: {lg.error}\n"
    atomic_write(out / f"{stem}.csv", lg.to_csv())
    atomic_write(out / f"{stem}_summary.txt", summary)
    return stem


def cmd_run(args) -> int:
    cfg = resolve(args)
    out = _prepare_out(args.out)
    lg = run_scenario(cfg)
    stem = _write_run(out, cfg, lg)
    ok = lg.error is None and interval_stats(lg).complete
    print(f"{stem}: {'complete' if ok else 'INCOMPLETE'} ({len(lg)} steps) -> {out}")
    return 0 if ok else 1


def cmd_compare(args) -> int:
    cfg = resolve(args)
    out = _prepare_out(args.out)
    reports, ok = [], True
    for controller in ("aci", "admittance_only"):
        run_cfg = replace(cfg, controller=controller)
        lg = run_scenario(run_cfg)
        _write_run(out, run_cfg, lg)
        reports.append(interval_stats(lg))
        ok &= lg.error is None
    comparison = compare_controllers(*reports)
    atomic_write(out / f"{_stem(cfg)}_comparison.txt", comparison.as_summary())
    print(comparison.as_summary(), end="")
    # an admittance-only timeout is a legitimate outcome of a comparison
    return 0 if ok and reports[0].complete else 1


def cmd_validate(args) -> int:
    cfg = resolve(args)
    sys.stdout.write(dumps(cfg))
    return 0


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command in ("run", "compare") and not args.scenario.is_file():
        print(f"cocarry: error: scenario file not found: {args.scenario}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, AnalysisError, OSError) as exc:
        print(f"cocarry: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
