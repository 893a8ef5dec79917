#!/usr/bin/env python3
"""Generate CSV data for the standard sweep and comparison experiments.

Each experiment writes ``<name>.csv`` into the output directory.  Sweeps
(fig2..fig6) have the ``scdg sweep`` columns plus ``v1``/``v2`` when several
value settings share a file; comparisons (fig7..fig9) have one row per
(swept value, strategy).  Ranges are wide enough to cross every regime
change along each axis.

    python scripts/run_figures.py --out-dir results
    python scripts/run_figures.py --only fig5 fig9 --trials 2000
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from scdg import GameParams
from scdg.harness import COMPARE_COLUMNS, SWEEP_COLUMNS, SweepSpec, run_compare, run_sweep, write_csv

VALUE_SETTINGS = {"v1>v2": (2.0, 1.0), "v1<v2": (1.0, 2.0), "v1=v2": (1.0, 1.0)}


def gp(c1, c2, tau, theta1, theta2, v1=1.0, v2=1.0):
    return GameParams(c1=c1, c2=c2, tau=tau, v1=v1, v2=v2, theta1=theta1, theta2=theta2)


# name -> (base params, swept field, from, to, vary values?)
SWEEPS = {
    "fig2": (gp(800.0, 200.0, 200.0, 50, 100), "c2", 200.0, 4000.0, True),
    "fig3": (gp(1500.0, 300.0, 200.0, 250, 10), "theta2", 10, 500, False),
    "fig4": (gp(100.0, 300.0, 3500.0, 200, 200), "c1", 100.0, 10000.0, True),
    "fig5": (gp(500.0, 150.0, 1000.0, 10, 200), "theta1", 10, 500, False),
    "fig6": (gp(150.0, 1200.0, 1000.0, 10, 200), "theta1", 10, 500, False),
}

COMPARISONS = {
    "fig7a": (gp(800.0, 200.0, 200.0, 100, 100), "c2", 200.0, 2000.0),
    "fig7b": (gp(800.0, 400.0, 200.0, 100, 10), "theta2", 10, 500),
    "fig8a": (gp(100.0, 1000.0, 3500.0, 200, 200), "c1", 100.0, 10000.0),
    "fig8b": (gp(150.0, 1200.0, 1000.0, 10, 200), "theta1", 10, 500),
    "fig9": (gp(500.0, 150.0, 1000.0, 10, 200), "theta1", 10, 500),
}


def run_sweep_figure(name: str, steps: int) -> str:
    base, field, lo, hi, vary = SWEEPS[name]
    settings = VALUE_SETTINGS.items() if vary else [("", (base.v1, base.v2))]
    rows = []
    for label, (v1, v2) in settings:
        spec = SweepSpec(dataclasses.replace(base, v1=v1, v2=v2), field, lo, hi, steps)
        for row in run_sweep(spec):
            row.update(values=label, v1=v1, v2=v2)
            rows.append(row)
    columns = (["values", "v1", "v2"] if vary else []) + SWEEP_COLUMNS
    return write_csv(rows, columns)


def run_compare_figure(name: str, steps: int, trials: int, seed: int) -> str:
    base, field, lo, hi = COMPARISONS[name]
    points = np.linspace(lo, hi, steps)
    rows = []
    for x in points:
        value = int(round(x)) if field.startswith("theta") else float(x)
        report = run_compare(dataclasses.replace(base, **{field: value}), trials, seed)
        for row in report.rows():
            row["swept_value"] = value
            rows.append(row)
    return write_csv(rows, ["swept_value"] + COMPARE_COLUMNS)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    parser.add_argument("--steps", type=int, default=25, help="points per sweep")
    parser.add_argument("--compare-steps", type=int, default=10, help="points per comparison")
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--only", nargs="*", choices=sorted(SWEEPS) + sorted(COMPARISONS))
    args = parser.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    names = args.only or sorted(SWEEPS) + sorted(COMPARISONS)
    for name in names:
        start = time.perf_counter()
        if name in SWEEPS:
            text = run_sweep_figure(name, args.steps)
        else:
            text = run_compare_figure(name, args.compare_steps, args.trials, args.seed)
        path = args.out_dir / f"{name}.csv"
        path.write_text(text, newline="\n")
        print(f"{name}: {path} ({time.perf_counter() - start:.1f} s)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
