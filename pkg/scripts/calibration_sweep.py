"""Sweep experiment-object stiffness and MoCap latency; report interval alpha and force ordering.

This is the sweep used to pick the experiment_object defaults. Each row is
one ACI run plus one admittance-only run with the same seeds.

    python3 scripts/calibration_sweep.py --compression 150 250 400 --latency 0.04 0.06
"""
from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import replace

from cocarry.config import preset
from cocarry.metrics import interval_stats
from cocarry.sim import run_scenario

ORDER = ("pulling", "pushing", "sideways_right", "lowering_lifting")


def evaluate(compression: float, lateral: float, latency: float, seed: int) -> str:
    base = preset("experiment_object").with_seed(seed)
    cfg = replace(
        base,
        coupling=replace(base.coupling, stiffness_compression=compression, stiffness_lateral=(lateral, lateral / 2)),
        mocap=replace(base.mocap, latency=latency),
    )
    aci = interval_stats(run_scenario(cfg))
    adm = interval_stats(run_scenario(replace(cfg, controller="admittance_only")))
    a = {k: v.alpha_mean for k, v in aci.intervals.items()}
    ordered = all(a[x] < a[y] for x, y in zip(ORDER, ORDER[1:]))
    force_lower = [aci.intervals[k].force_mean < adm.intervals[k].force_mean for k in aci.intervals]
    alphas = " ".join(f"{a[k]:.2f}" for k in aci.intervals)
    return (
        f"{compression:8.0f} {lateral:6.0f} {latency:6.3f} | {alphas} | ordered={ordered} "
        f"F_lower={''.join('y' if f else 'n' for f in force_lower)} "
        f"dt_c={aci.t_c - adm.t_c:+.2f} dD_AM={aci.d_am - adm.d_am:+.4f}"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--compression", nargs="+", type=float, default=[150.0, 250.0, 400.0])
    parser.add_argument("--lateral", nargs="+", type=float, default=[40.0])
    parser.add_argument("--latency", nargs="+", type=float, default=[0.06])
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)
    print("compression lateral latency | alpha per interval | checks")
    for c, k, lat in itertools.product(args.compression, args.lateral, args.latency):
        print(evaluate(c, k, lat, args.seed), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
