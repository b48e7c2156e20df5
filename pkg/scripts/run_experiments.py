"""Run every built-in preset under both controllers over several seeds and print a table.

    python3 scripts/run_experiments.py --seeds 1 2 3 --csv results.csv
"""
from __future__ import annotations

import argparse
import csv
import sys

from cocarry.config import PRESET_NAMES, preset
from cocarry.metrics import interval_stats, steady_alpha
from cocarry.sim import run_scenario

FIELDS = ("preset", "controller", "seed", "complete", "t_c", "d_am", "steady_alpha", "interval", "alpha_mean", "force_mean")


def rows_for(name: str, controller: str, seed: int):
    log = run_scenario(preset(name, controller=controller).with_seed(seed))
    report = interval_stats(log)
    common = dict(
        preset=name,
        controller=controller,
        seed=seed,
        complete=report.complete,
        t_c=round(report.t_c, 3),
        d_am=round(report.d_am, 5),
        steady_alpha=round(steady_alpha(log), 4),
    )
    for label, st in report.intervals.items():
        yield dict(common, interval=label, alpha_mean=round(st.alpha_mean, 4), force_mean=round(st.force_mean, 3))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--presets", nargs="+", default=list(PRESET_NAMES), choices=PRESET_NAMES)
    parser.add_argument("--seeds", nargs="+", type=int, default=[1])
    parser.add_argument("--csv", help="also write the table to this file")
    args = parser.parse_args(argv)

    rows = []
    for name in args.presets:
        for seed in args.seeds:
            for controller in ("aci", "admittance_only"):
                rows.extend(rows_for(name, controller, seed))
                print(f"done {name} {controller} seed={seed}", file=sys.stderr)

    writer = csv.DictWriter(sys.stdout, FIELDS)
    writer.writeheader()
    writer.writerows(rows)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            out = csv.DictWriter(fh, FIELDS)
            out.writeheader()
            out.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
