"""Experiment drivers and the ``scdg`` command line.

Subcommands: ``solve`` (one instance), ``sweep`` (one parameter varied,
CSV row per value), ``compare`` (no transfer vs random transfer vs
equilibrium transfer), ``oracle-check`` (closed forms against grid search).

Exit codes: 0 ok, 2 bad input, 3 an oracle check failed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .blotto import PayoffMode
from .oracle import (
    OracleConfig,
    argmax_batch,
    grid_argmax_to,
    grid_best_transfer,
    replace_mode,
    stage1_deviation,
    stage2_deviation,
)
from .params import DomainError, GameParams, RegimeTag, ToAllocation, Transfers, classify_regime, validate
from .spne import (
    Provenance,
    SpneSolution,
    counterfactual,
    expected_utilities,
    solve,
    to_best_allocation,
)

SWEEPABLE = ("c1", "c2", "tau", "theta1", "theta2", "v1", "v2")
SOLUTION_COLUMNS = ["regime", "r12", "r21", "tau1", "tau2", "psi1", "psi2", "psiT",
                    "sc_sum", "provenance"]
SWEEP_COLUMNS = ["swept_value"] + SOLUTION_COLUMNS + ["error"]
COMPARE_COLUMNS = ["strategy", "analytic", "n_trials", "seed", "sc_sum", "sc_sum_stderr",
                   "psi1", "psi2", "psiT", "direction_dist", "amount_dist"]
DIRECTION_DIST = "uniform{1->2,2->1}"
AMOUNT_DIST = "uniform[0,c_donor)"

EXIT_OK, EXIT_DOMAIN, EXIT_ORACLE = 0, 2, 3


def worker_count() -> int:
    raw = os.environ.get("SCDG_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"SCDG_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"SCDG_THREADS must be a positive integer, got {raw!r}")
    return value


def _map(fn, items: list, workers: Optional[int] = None) -> list:
    # results come back in input order whatever the scheduling
    workers = workers or worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(rows: Iterable[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


# -- solve ---------------------------------------------------------------------

def run_solve(params: GameParams, mode: PayoffMode = PayoffMode.LARGE_N,
              cfg: Optional[OracleConfig] = None) -> SpneSolution:
    return solve(validate(params), mode, cfg=cfg)


# -- sweep ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: GameParams
    swept: str
    start: float
    stop: float
    steps: int
    mode: PayoffMode = PayoffMode.LARGE_N

    def __post_init__(self):
        if self.swept not in SWEEPABLE:
            raise DomainError(f"cannot sweep {self.swept!r}; choose from {', '.join(SWEEPABLE)}")
        if not self.start < self.stop:
            raise DomainError(f"sweep needs from < to, got {self.start} >= {self.stop}")
        if self.steps < 2:
            raise DomainError(f"steps must be >= 2, got {self.steps}")

    def values(self) -> list:
        raw = np.linspace(self.start, self.stop, self.steps)
        if self.swept.startswith("theta"):
            return [int(round(x)) for x in raw]
        return [float(x) for x in raw]


def _sweep_point(spec: SweepSpec, value, cfg: Optional[OracleConfig]) -> dict:
    row = {"swept_value": value}
    try:
        params = validate(dataclasses.replace(spec.base, **{spec.swept: value}))
        row.update(solve(params, spec.mode, cfg=cfg).record())
        row["error"] = ""
    except DomainError as exc:
        row["error"] = str(exc)
    return row


def run_sweep(spec: SweepSpec, cfg: Optional[OracleConfig] = None,
              workers: Optional[int] = None) -> list[dict]:
    """One solved row per swept value, ascending; invalid points carry ``error``."""
    return _map(lambda v: _sweep_point(spec, v, cfg), spec.values(), workers)


# -- compare -------------------------------------------------------------------

@dataclass(frozen=True)
class StrategyResult:
    strategy: str
    sc_sum: float
    psi1: float
    psi2: float
    psiT: float
    sc_sum_stderr: float = 0.0
    analytic: bool = True


@dataclass(frozen=True)
class ComparisonReport:
    no_transfer: StrategyResult
    random_transfer: StrategyResult
    spne: StrategyResult
    n_trials: int
    seed: int

    def rows(self) -> list[dict]:
        out = []
        for res in (self.no_transfer, self.random_transfer, self.spne):
            row = dataclasses.asdict(res)
            row.update(n_trials=self.n_trials if not res.analytic else 1, seed=self.seed,
                       direction_dist=DIRECTION_DIST, amount_dist=AMOUNT_DIST)
            out.append(row)
        return out


def trial_draw(seed: int, index: int) -> tuple[bool, float]:
    """(transfer goes 1->2, fraction of the donor budget) for one trial.

    Each trial owns a counter-based stream keyed by (seed, index), so the
    draw does not depend on how trials are scheduled.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    u = np.random.Generator(np.random.Philox(ss)).random(2)
    return bool(u[0] < 0.5), float(u[1])


def random_transfers(params: GameParams, seed: int, indices: Iterable[int]) -> list[Transfers]:
    out = []
    for i in indices:
        from_one, frac = trial_draw(seed, i)
        if from_one:
            out.append(Transfers.from_params(params, r12=frac * params.c1))
        else:
            out.append(Transfers.from_params(params, r21=frac * params.c2))
    return out


def batch_utilities(params: GameParams, transfers: list[Transfers], numeric: bool,
                    mode: PayoffMode, cfg: OracleConfig) -> np.ndarray:
    """(n, 3) array of utilities with the attacker best-responding to each transfer."""
    allocations: list[Optional[ToAllocation]] = [None] * len(transfers)
    pending = []
    for k, t in enumerate(transfers):
        if not numeric:
            regime = classify_regime(params, t)
            if regime.classified:
                allocations[k] = to_best_allocation(t.d1, t.d2, params, regime)
                continue
        pending.append(k)
    if pending:
        grid_mode = PayoffMode.FULL if numeric else PayoffMode.LARGE_N
        t1, _ = argmax_batch([transfers[k].d1 for k in pending], [transfers[k].d2 for k in pending],
                             params, replace_mode(cfg, grid_mode), zoom=True)
        for k, tau1 in zip(pending, t1):
            allocations[k] = ToAllocation(float(tau1), params.tau - float(tau1))
    eval_mode = PayoffMode.FULL if numeric else mode
    return np.array([expected_utilities(params, t, a, eval_mode)
                     for t, a in zip(transfers, allocations)])


def _result(name: str, psi: tuple, stderr: float = 0.0, analytic: bool = True) -> StrategyResult:
    psi1, psi2, psiT = psi
    return StrategyResult(name, psi1 + psi2, psi1, psi2, psiT, stderr, analytic)


def run_compare(params: GameParams, n_trials: int, seed: int,
                mode: PayoffMode = PayoffMode.LARGE_N, cfg: Optional[OracleConfig] = None,
                workers: Optional[int] = None, chunk: int = 1000) -> ComparisonReport:
    """No transfer vs uniformly random transfer vs the equilibrium transfer.

    The attacker responds to the baseline transfers with the same model
    that produced the equilibrium (closed forms for ClosedForm solutions,
    full-payoff grid for Numeric ones), so the three rows are comparable.
    """
    validate(params)
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")
    if not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    cfg = cfg or OracleConfig()
    sol = solve(params, mode, cfg=cfg)
    numeric = sol.provenance is Provenance.NUMERIC

    base = counterfactual(params, sol, mode=mode, cfg=cfg)

    def run_chunk(start: int) -> np.ndarray:
        idx = range(start, min(start + chunk, n_trials))
        return batch_utilities(params, random_transfers(params, seed, idx), numeric, mode, cfg)

    parts = _map(run_chunk, list(range(0, n_trials, chunk)), workers)
    psi = np.concatenate(parts)
    sc = psi[:, 0] + psi[:, 1]
    mean = [math.fsum(psi[:, j]) / n_trials for j in range(3)]
    sc_mean = math.fsum(sc) / n_trials
    stderr = (math.sqrt(math.fsum((sc - sc_mean) ** 2) / (n_trials - 1) / n_trials)
              if n_trials > 1 else 0.0)
    random_res = StrategyResult("RandomTransfer", sc_mean, mean[0], mean[1], mean[2],
                                stderr, analytic=False)
    return ComparisonReport(
        no_transfer=_result("NoTransfer", base),
        random_transfer=random_res,
        spne=_result("Spne", (sol.psi1, sol.psi2, sol.psiT)),
        n_trials=n_trials,
        seed=seed,
    )


# -- oracle-check --------------------------------------------------------------

def run_oracle_check(params: GameParams, cfg: Optional[OracleConfig] = None,
                     mode: PayoffMode = PayoffMode.LARGE_N) -> list[dict]:
    """Closed-form solution against brute force; one row per check."""
    validate(params)
    cfg = cfg or OracleConfig()
    tol = cfg.tolerance(params)
    sol = solve(params, mode, cfg=cfg)
    rows = []

    def check(name, closed, oracle, tolerance, diff=None):
        diff = abs(closed - oracle) if diff is None else diff
        rows.append({"check": name, "provenance": sol.provenance.value, "closed_form": closed,
                     "oracle": oracle, "difference": diff, "tolerance": tolerance,
                     "passed": bool(diff <= tolerance)})

    if sol.provenance is Provenance.CLOSED_FORM:
        lcfg = replace_mode(cfg, PayoffMode.LARGE_N)
        d1, d2 = sol.transfers.d1, sol.transfers.d2
        step = params.tau / (cfg.grid_points - 1)
        t_grid, v_grid = grid_argmax_to(d1, d2, params, lcfg)
        v_closed = params.total_value - sum(
            expected_utilities(params, sol.transfers, sol.allocation, PayoffMode.LARGE_N)[:2])
        if sol.regime.detail != "indifferent":
            check("stage2_tau1", sol.allocation.tau1, t_grid, step)
        check("stage2_psiT", v_closed, v_grid, tol)

        search = grid_best_transfer(params, lcfg)
        r_closed = sol.transfers.amount
        if r_closed > 0:
            direction = sol.transfers.direction
            ds = search.by_direction[direction]
            r_step = float(ds.r_grid[1] - ds.r_grid[0])
            oracle_r = ds.plateau_end if sol.regime.tag is RegimeTag.T3 else ds.r_star
            check(f"stage1_r_{direction}", r_closed, oracle_r, r_step)
        else:
            check("stage1_r", 0.0, search.r_star, 0.0)
        check("stage1_deviation", 0.0, 0.0, tol,
              diff=max(0.0, stage1_deviation(params, sol, cfg=lcfg)))
    check("stage2_deviation", 0.0, 0.0, tol, diff=max(0.0, stage2_deviation(params, sol)))
    if sol.provenance is Provenance.NUMERIC:
        check("stage1_deviation", 0.0, 0.0, tol,
              diff=max(0.0, stage1_deviation(params, sol, grid_points=cfg.grid_points, cfg=cfg,
                                             require_acceptance=True)))
    return rows


# -- CLI -----------------------------------------------------------------------

def _add_game_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c1", type=float, required=True, help="physical-layer defender budget")
    p.add_argument("--c2", type=float, required=True, help="cyber-social defender budget")
    p.add_argument("--tau", type=float, required=True, help="attacker budget")
    p.add_argument("--v1", type=float, default=1.0)
    p.add_argument("--v2", type=float, default=1.0)
    p.add_argument("--theta1", type=int, required=True, help="physical battlefields")
    p.add_argument("--theta2", type=int, required=True, help="cyber-social battlefields")
    p.add_argument("--mode", choices=[m.value for m in PayoffMode], default="large-n")
    p.add_argument("--out", default="-", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scdg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="equilibrium of one instance")
    _add_game_args(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("sweep", help="vary one parameter")
    _add_game_args(p)
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("compare", help="no / random / equilibrium transfer")
    _add_game_args(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("oracle-check", help="closed forms against grid search")
    _add_game_args(p)
    p.add_argument("--grid-points", type=int, default=2001)
    p.add_argument("--tol", type=float, default=None,
                   help="absolute tolerance (default 1e-6 of total game value)")
    return parser


def _params(ns) -> GameParams:
    return GameParams(c1=ns.c1, c2=ns.c2, tau=ns.tau, v1=ns.v1, v2=ns.v2,
                      theta1=ns.theta1, theta2=ns.theta2)


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def main(argv: Optional[list[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    mode = PayoffMode(ns.mode)
    try:
        if ns.command == "solve":
            sol = run_solve(_params(ns), mode)
            record = sol.record()
            if ns.format == "json":
                text = json.dumps(record) + "\n"
            else:
                text = write_csv([record], SOLUTION_COLUMNS)
            _emit(text, ns.out)
        elif ns.command == "sweep":
            spec = SweepSpec(_params(ns), ns.param, ns.start, ns.stop, ns.steps, mode)
            _emit(write_csv(run_sweep(spec), SWEEP_COLUMNS), ns.out)
        elif ns.command == "compare":
            report = run_compare(_params(ns), ns.trials, ns.seed, mode)
            _emit(write_csv(report.rows(), COMPARE_COLUMNS), ns.out)
        elif ns.command == "oracle-check":
            cfg = OracleConfig(grid_points=ns.grid_points, tol_abs=ns.tol)
            rows = run_oracle_check(_params(ns), cfg, mode)
            _emit(write_csv(rows, ["check", "provenance", "closed_form", "oracle",
                                   "difference", "tolerance", "passed"]), ns.out)
            if not all(r["passed"] for r in rows):
                failed = ", ".join(r["check"] for r in rows if not r["passed"])
                print(f"scdg: oracle disagreement: {failed}", file=sys.stderr)
                return EXIT_ORACLE
    except DomainError as exc:
        print(f"scdg: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK
