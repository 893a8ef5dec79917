"""Backward induction for the three-stage game.

Stage 3 is a pair of Blotto games whose equilibrium values come from
:mod:`scdg.blotto`.  Stage 2 is the attacker splitting its budget across
the two games; stage 1 is the net budget transfer between the defenders.
Closed forms cover the regimes recognised by :func:`classify_regime`;
everything else is handed to the grid solver in :mod:`scdg.oracle`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .blotto import CbgSpec, PayoffMode, defender_payoff
from .params import (
    UNCLASSIFIED,
    GameParams,
    Regime,
    RegimeTag,
    ToAllocation,
    Transfers,
    attack_preference,
    classify_regime,
    t4_split,
    t5_split,
    validate,
)

DEFAULT_EPS = 1e-6


class RegimeError(ValueError):
    """A closed form was requested for an unclassified instance."""


class Provenance(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    NUMERIC = "Numeric"


@dataclass(frozen=True)
class SpneSolution:
    regime: Regime
    transfers: Transfers
    allocation: ToAllocation
    psi1: float
    psi2: float
    psiT: float
    provenance: Provenance
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def sc_sum(self) -> float:
        return self.psi1 + self.psi2

    def record(self) -> dict:
        """Flat field mapping used by the CSV and JSON writers."""
        return {
            "regime": str(self.regime),
            "r12": self.transfers.r12,
            "r21": self.transfers.r21,
            "d1": self.transfers.d1,
            "d2": self.transfers.d2,
            "tau1": self.allocation.tau1,
            "tau2": self.allocation.tau2,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "psiT": self.psiT,
            "sc_sum": self.sc_sum,
            "provenance": self.provenance.value,
        }


def specs(params: GameParams) -> tuple[CbgSpec, CbgSpec]:
    return CbgSpec(params.theta1, params.v1), CbgSpec(params.theta2, params.v2)


def to_best_allocation(d1: float, d2: float, params: GameParams, regime: Regime) -> ToAllocation:
    """Attacker's stage-2 split under the closed form for ``regime``."""
    tau, phi1, phi2 = params.tau, params.phi1, params.phi2
    tag = regime.tag
    if tag is RegimeTag.T3:
        pref = attack_preference(phi1, d1, phi2, d2)
        if pref > 0:
            return ToAllocation(tau, 0.0)
        if pref < 0:
            return ToAllocation(0.0, tau)
        # attacker is indifferent; any split is optimal, take the proportional one
        total = d1 + d2
        return ToAllocation(tau * d1 / total, tau * d2 / total)
    if tag is RegimeTag.T4:
        return ToAllocation(*t4_split(tau, d1, d2, phi1, phi2))
    if tag is RegimeTag.T5:
        return ToAllocation(*t5_split(tau, d1, d2, phi1, phi2))
    if tag is RegimeTag.T5M:
        t2, t1 = t5_split(tau, d2, d1, phi2, phi1)
        return ToAllocation(t1, t2)
    raise RegimeError("no closed-form allocation for an unclassified instance")


# Transfer formulas, written for donor "a" and recipient "b".  The mirrored
# direction calls the same function with the layers exchanged.

def t3_bound(c_a: float, c_b: float, phi_a: float, phi_b: float) -> float:
    """Supremum of transfers a -> b that keep the attacker on layer b."""
    return (phi_b * c_a - phi_a * c_b) / (phi_a + phi_b)


def t4_condition(c_a: float, c_b: float, phi_a: float, phi_b: float) -> bool:
    return (c_a - c_b) / (2 * math.sqrt(c_a * c_b)) > math.sqrt(phi_a / phi_b)


def t4_amount(c_a: float, c_b: float, phi_a: float, phi_b: float) -> float:
    return (c_a - c_b) / 2 - (c_a + c_b) / 2 * math.sqrt(phi_a / (phi_a + phi_b))


def t5_condition(c_a: float, c_b: float, phi_a: float, phi_b: float, tau: float) -> bool:
    return (c_a + c_b) / (2 * tau) > math.sqrt(phi_a * c_b / (phi_b * c_a))


def t5_amount(c_a: float, c_b: float, phi_a: float, phi_b: float, tau: float) -> float:
    xi = phi_b * (c_a + c_b) ** 2 / (4 * phi_a * tau ** 2)
    return (xi * c_a - c_b) / (1 + xi)


def _directed(params: GameParams, from_one: bool, amount: float) -> Transfers:
    if from_one:
        return Transfers.from_params(params, r12=amount)
    return Transfers.from_params(params, r21=amount)


def spne_transfer(params: GameParams, eps: float = DEFAULT_EPS) -> tuple[Transfers, Regime]:
    """Stage-1 equilibrium transfer and the regime it leads to.

    The regime is read off the pre-transfer budgets; a nonzero candidate
    transfer is kept only if the post-transfer endowments still fall in the
    same regime, otherwise the result is (no transfer, Unclassified).
    """
    zero = Transfers.none(params)
    pre = classify_regime(params, zero)
    if not pre.classified:
        return zero, UNCLASSIFIED

    c1, c2, tau = params.c1, params.c2, params.tau
    phi1, phi2 = params.phi1, params.phi2
    candidate = zero
    if pre.tag is RegimeTag.T3:
        pref = attack_preference(phi1, c1, phi2, c2)
        if pref < 0:
            candidate = _directed(params, True, (1 - eps) * t3_bound(c1, c2, phi1, phi2))
        elif pref > 0:
            candidate = _directed(params, False, (1 - eps) * t3_bound(c2, c1, phi2, phi1))
    elif pre.tag is RegimeTag.T4:
        if t4_condition(c1, c2, phi1, phi2):
            candidate = _directed(params, True, t4_amount(c1, c2, phi1, phi2))
        elif t4_condition(c2, c1, phi2, phi1):
            candidate = _directed(params, False, t4_amount(c2, c1, phi2, phi1))
    elif pre.tag is RegimeTag.T5:
        if t5_condition(c1, c2, phi1, phi2, tau):
            candidate = _directed(params, True, t5_amount(c1, c2, phi1, phi2, tau))
    elif pre.tag is RegimeTag.T5M:
        if t5_condition(c2, c1, phi2, phi1, tau):
            candidate = _directed(params, False, t5_amount(c2, c1, phi2, phi1, tau))

    if candidate.amount == 0:
        return zero, pre
    post = classify_regime(params, candidate)
    if post.tag is not pre.tag:
        return zero, UNCLASSIFIED
    return candidate, post


def expected_utilities(params: GameParams, transfers: Transfers, allocation: ToAllocation,
                       mode: PayoffMode = PayoffMode.LARGE_N) -> tuple[float, float, float]:
    """(psi1, psi2, psiT) at the Blotto equilibria of both layers."""
    spec1, spec2 = specs(params)
    psi1 = defender_payoff(allocation.tau1, transfers.d1, spec1, mode)
    psi2 = defender_payoff(allocation.tau2, transfers.d2, spec2, mode)
    psiT = params.total_value - (psi1 + psi2)
    return psi1, psi2, psiT


def stage_two_response(params: GameParams, transfers: Transfers, *, numeric: bool = False,
                       cfg=None) -> ToAllocation:
    """Attacker best response to a given transfer.

    Closed form when the endowments classify and ``numeric`` is false;
    otherwise a refined grid search (large-n payoffs, or the full payoff
    when ``numeric`` is set).
    """
    if not numeric:
        regime = classify_regime(params, transfers)
        if regime.classified:
            return to_best_allocation(transfers.d1, transfers.d2, params, regime)
    from . import oracle

    cfg = cfg or oracle.OracleConfig()
    mode = PayoffMode.FULL if numeric else PayoffMode.LARGE_N
    tau1, _ = oracle.grid_argmax_to(transfers.d1, transfers.d2, params,
                                    oracle.replace_mode(cfg, mode), zoom=True)
    return ToAllocation(tau1, params.tau - tau1)


def solve(params: GameParams, mode: PayoffMode = PayoffMode.LARGE_N, *,
          eps: float = DEFAULT_EPS, cfg=None) -> SpneSolution:
    """Full equilibrium: transfer, attacker split and expected utilities."""
    validate(params)
    transfers, regime = spne_transfer(params, eps)
    if not regime.classified:
        from . import oracle

        return oracle.numeric_spne(params, cfg or oracle.OracleConfig())
    allocation = to_best_allocation(transfers.d1, transfers.d2, params, regime)
    psi1, psi2, psiT = expected_utilities(params, transfers, allocation, mode)
    return SpneSolution(regime, transfers, allocation, psi1, psi2, psiT, Provenance.CLOSED_FORM)


def counterfactual(params: GameParams, solution: SpneSolution,
                   transfers: Optional[Transfers] = None,
                   mode: PayoffMode = PayoffMode.LARGE_N, cfg=None) -> tuple[float, float, float]:
    """Utilities if ``transfers`` (default: none) replaced the equilibrium transfer.

    The attacker re-optimises with the same machinery that produced
    ``solution``: closed forms for ClosedForm solutions, the full-payoff
    grid for Numeric ones.
    """
    transfers = transfers or Transfers.none(params)
    numeric = solution.provenance is Provenance.NUMERIC
    allocation = stage_two_response(params, transfers, numeric=numeric, cfg=cfg)
    return expected_utilities(params, transfers, allocation,
                              PayoffMode.FULL if numeric else mode)
