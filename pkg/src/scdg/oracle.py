"""Brute-force grid validators and the numeric fallback solver.

Nothing here uses derivatives: the attacker's split and the defenders'
transfer are found by evaluating payoffs on grids.  The optional zoom
passes re-grid the bracket around the coarse argmax, which keeps nested
searches (transfer over attacker response) from inheriting the inner
grid's quantisation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blotto import PayoffMode, attacker_payoff_array, defender_payoff_array
from .params import UNCLASSIFIED, DomainError, GameParams, ToAllocation, Transfers
from .spne import Provenance, SpneSolution, expected_utilities, specs, stage_two_response

_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class OracleConfig:
    grid_points: int = 2001
    tol_abs: Optional[float] = None  # None -> 1e-6 of the game's total value
    mode: PayoffMode = PayoffMode.LARGE_N
    zoom_levels: int = 3
    zoom_points: int = 101

    def __post_init__(self):
        if self.grid_points < 101 or self.grid_points % 2 == 0:
            raise DomainError(f"grid_points must be odd and >= 101, got {self.grid_points}")
        if self.tol_abs is not None and not self.tol_abs > 0:
            raise DomainError(f"tol_abs must be positive, got {self.tol_abs}")
        if self.zoom_levels < 0:
            raise DomainError("zoom_levels must be non-negative")
        if self.zoom_points < 3 or self.zoom_points % 2 == 0:
            raise DomainError("zoom_points must be odd and >= 3")

    def tolerance(self, params: GameParams) -> float:
        if self.tol_abs is not None:
            return self.tol_abs
        return 1e-6 * params.total_value


def replace_mode(cfg: OracleConfig, mode: PayoffMode) -> OracleConfig:
    return cfg if cfg.mode is mode else dataclasses.replace(cfg, mode=mode)


def _attacker_value(t1, d1, d2, tau, spec1, spec2, mode):
    return (attacker_payoff_array(t1, d1, spec1, mode)
            + attacker_payoff_array(tau - t1, d2, spec2, mode))


def argmax_batch(d1s, d2s, params: GameParams, cfg: OracleConfig,
                 zoom: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Grid-optimal tau1 and attacker value for each endowment pair.

    Ties go to the smallest tau1.  With ``zoom`` the bracket around each
    row's argmax is re-gridded ``cfg.zoom_levels`` times; a zoomed point
    replaces the incumbent only if strictly better.
    """
    d1s = np.atleast_1d(np.asarray(d1s, dtype=float))
    d2s = np.atleast_1d(np.asarray(d2s, dtype=float))
    tau = params.tau
    spec1, spec2 = specs(params)
    n = cfg.grid_points
    grid = np.linspace(0.0, tau, n)
    best_t = np.empty_like(d1s)
    best_v = np.empty_like(d1s)
    rows = max(1, _CHUNK_CELLS // n)
    for start in range(0, d1s.size, rows):
        sl = slice(start, start + rows)
        d1 = d1s[sl, None]
        d2 = d2s[sl, None]
        values = _attacker_value(grid[None, :], d1, d2, tau, spec1, spec2, cfg.mode)
        k = values.argmax(axis=1)
        t = grid[k]
        v = values[np.arange(k.size), k]
        if zoom and tau > 0:
            lo = grid[np.maximum(k - 1, 0)]
            hi = grid[np.minimum(k + 1, n - 1)]
            u = np.linspace(0.0, 1.0, cfg.zoom_points)
            for _ in range(cfg.zoom_levels):
                pts = lo[:, None] + (hi - lo)[:, None] * u[None, :]
                pts[:, -1] = hi
                pts = np.clip(pts, 0.0, tau)
                zv = _attacker_value(pts, d1, d2, tau, spec1, spec2, cfg.mode)
                j = zv.argmax(axis=1)
                rows_idx = np.arange(j.size)
                cand_t = pts[rows_idx, j]
                cand_v = zv[rows_idx, j]
                better = (cand_v > v) | ((cand_v == v) & (cand_t < t))
                t = np.where(better, cand_t, t)
                v = np.where(better, cand_v, v)
                jl = np.maximum(j - 1, 0)
                jh = np.minimum(j + 1, cfg.zoom_points - 1)
                lo, hi = pts[rows_idx, jl], pts[rows_idx, jh]
        best_t[sl] = t
        best_v[sl] = v
    return best_t, best_v


def grid_argmax_to(d1: float, d2: float, params: GameParams, cfg: OracleConfig = OracleConfig(),
                   *, zoom: bool = False) -> tuple[float, float]:
    """(tau1_star, psiT_star) by direct maximisation over a grid on [0, tau]."""
    if d1 < 0 or d2 < 0:
        raise DomainError("endowments must be non-negative")
    t, v = argmax_batch([d1], [d2], params, cfg, zoom=zoom)
    return float(t[0]), float(v[0])


@dataclass(frozen=True)
class DirectionSearch:
    """Donor sweep for one transfer direction."""

    direction: str
    r_grid: np.ndarray
    tau1: np.ndarray
    psi_donor: np.ndarray
    psi_recipient: np.ndarray
    feasible: np.ndarray
    index: int               # constrained optimum
    unconstrained_index: int

    @property
    def r_star(self) -> float:
        return float(self.r_grid[self.index])

    @property
    def donor_gain(self) -> float:
        return float(self.psi_donor[self.index] - self.psi_donor[0])

    @property
    def recipient_gain(self) -> float:
        return float(self.psi_recipient[self.index] - self.psi_recipient[0])

    @property
    def plateau_end(self) -> float:
        """Largest grid transfer that leaves the donor at its r=0 payoff."""
        flat = np.nonzero(self.psi_donor == self.psi_donor[0])[0]
        gaps = np.nonzero(np.diff(flat) > 1)[0]
        end = flat[gaps[0]] if gaps.size else flat[-1]
        return float(self.r_grid[end])


@dataclass(frozen=True)
class TransferSearch:
    direction: Optional[str]
    r_star: float
    psi_donor_curve: Optional[np.ndarray]
    by_direction: dict = field(default_factory=dict)

    def chosen(self) -> Optional[DirectionSearch]:
        return self.by_direction.get(self.direction)


def _lexi_best(donor: np.ndarray, recipient: np.ndarray, mask: np.ndarray) -> int:
    # max donor payoff, then max recipient payoff, then smallest r
    idx = np.nonzero(mask)[0]
    top = donor[idx].max()
    idx = idx[donor[idx] == top]
    top_r = recipient[idx].max()
    return int(idx[recipient[idx] == top_r][0])


def search_direction(params: GameParams, from_one: bool, cfg: OracleConfig) -> DirectionSearch:
    c_donor = params.c1 if from_one else params.c2
    n = cfg.grid_points
    r = np.linspace(0.0, c_donor, n, endpoint=False) if c_donor > 0 else np.zeros(1)
    if from_one:
        d1, d2 = params.c1 - r, params.c2 + r
    else:
        d1, d2 = params.c1 + r, params.c2 - r
    t1, _ = argmax_batch(d1, d2, params, cfg, zoom=True)
    spec1, spec2 = specs(params)
    psi1 = defender_payoff_array(t1, d1, spec1, cfg.mode)
    psi2 = defender_payoff_array(params.tau - t1, d2, spec2, cfg.mode)
    donor, recipient = (psi1, psi2) if from_one else (psi2, psi1)
    feasible = recipient >= recipient[0]
    return DirectionSearch(
        direction="1->2" if from_one else "2->1",
        r_grid=r, tau1=t1, psi_donor=donor, psi_recipient=recipient, feasible=feasible,
        index=_lexi_best(donor, recipient, feasible),
        unconstrained_index=_lexi_best(donor, recipient, np.ones_like(feasible)),
    )


def grid_best_transfer(params: GameParams, cfg: OracleConfig = OracleConfig()) -> TransferSearch:
    """Donor-optimal transfer that the recipient accepts, found on a grid.

    Each direction is swept over [0, c_donor); the attacker re-optimises at
    every grid transfer.  A direction is used only if it is a Pareto
    improvement over no transfer; between two such directions the larger
    (donor gain, recipient gain) wins.
    """
    searches = {s.direction: s for s in (search_direction(params, True, cfg),
                                         search_direction(params, False, cfg))}
    best = None
    for s in searches.values():
        gain = (s.donor_gain, s.recipient_gain)
        if gain > (0.0, 0.0) and s.donor_gain >= 0 and (best is None or gain > best[0]):
            best = (gain, s)
    if best is None:
        return TransferSearch(None, 0.0, None, searches)
    s = best[1]
    return TransferSearch(s.direction, s.r_star, s.psi_donor, searches)


def numeric_spne(params: GameParams, cfg: OracleConfig = OracleConfig()) -> SpneSolution:
    """Two-level grid backward induction on the full payoff."""
    cfg = replace_mode(cfg, PayoffMode.FULL)
    if params.tau == 0:
        transfers = Transfers.none(params)
        allocation = ToAllocation(0.0, 0.0)
        psi = expected_utilities(params, transfers, allocation, PayoffMode.FULL)
        return SpneSolution(UNCLASSIFIED, transfers, allocation, *psi, Provenance.NUMERIC)
    search = grid_best_transfer(params, cfg)
    chosen = search.chosen()
    if chosen is None:
        transfers = Transfers.none(params)
        tau1 = float(search.by_direction["1->2"].tau1[0])
    else:
        transfers = Transfers.from_params(
            params, **{"r12" if chosen.direction == "1->2" else "r21": chosen.r_star})
        tau1 = float(chosen.tau1[chosen.index])
    allocation = ToAllocation(tau1, params.tau - tau1)
    psi = expected_utilities(params, transfers, allocation, PayoffMode.FULL)
    diagnostics = {
        "unconstrained_r": {k: float(s.r_grid[s.unconstrained_index])
                            for k, s in search.by_direction.items()},
    }
    return SpneSolution(UNCLASSIFIED, transfers, allocation, *psi, Provenance.NUMERIC,
                        diagnostics)


# -- one-stage-deviation checks ------------------------------------------------

def stage2_deviation(params: GameParams, solution: SpneSolution,
                     grid_points: int = 2001) -> float:
    """Largest attacker gain from re-splitting on a grid, holding transfers fixed."""
    mode = PayoffMode.FULL if solution.provenance is Provenance.NUMERIC else PayoffMode.LARGE_N
    spec1, spec2 = specs(params)
    d1, d2, tau = solution.transfers.d1, solution.transfers.d2, params.tau
    grid = np.linspace(0.0, tau, grid_points)
    values = _attacker_value(grid, d1, d2, tau, spec1, spec2, mode)
    own = _attacker_value(np.array([solution.allocation.tau1]), d1, d2, tau, spec1, spec2, mode)
    return float(values.max() - own[0])


def stage1_deviation(params: GameParams, solution: SpneSolution, grid_points: int = 1001,
                     cfg: OracleConfig = OracleConfig(),
                     require_acceptance: bool = False) -> float:
    """Largest gain any donor gets from a different transfer on a grid.

    The donor of a nonzero equilibrium transfer is checked; with no transfer
    both agencies are checked as potential donors.  The attacker
    re-optimises at every grid point the way ``solution`` was produced.
    With ``require_acceptance`` only transfers that leave the recipient no
    worse off than without any transfer count as deviations.
    """
    numeric = solution.provenance is Provenance.NUMERIC
    mode = PayoffMode.FULL if numeric else PayoffMode.LARGE_N
    if solution.transfers.r12 > 0:
        donors = (1,)
    elif solution.transfers.r21 > 0:
        donors = (2,)
    else:
        donors = (1, 2)
    own = expected_utilities(params, solution.transfers, solution.allocation, mode)
    worst = -np.inf
    for i in donors:
        c = params.c1 if i == 1 else params.c2
        if c == 0:
            continue
        base = None
        for r in np.linspace(0.0, c, grid_points, endpoint=False):
            t = Transfers.from_params(params, **{"r12" if i == 1 else "r21": float(r)})
            alloc = stage_two_response(params, t, numeric=numeric, cfg=cfg)
            psi = expected_utilities(params, t, alloc, mode)
            if base is None:
                base = psi
            if require_acceptance and psi[2 - i] < base[2 - i]:
                continue
            worst = max(worst, psi[i - 1] - own[i - 1])
    return float(worst)
