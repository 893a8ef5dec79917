"""Equilibrium solver for a two-defender, one-attacker budget game played
over two parallel Colonel Blotto contests."""

from .blotto import CbgSpec, PayoffMode, attacker_payoff, defender_payoff
from .oracle import OracleConfig, grid_argmax_to, grid_best_transfer, numeric_spne
from .params import (
    DomainError,
    GameParams,
    Regime,
    RegimeTag,
    ToAllocation,
    Transfers,
    classify_regime,
    validate,
)
from .spne import (
    Provenance,
    RegimeError,
    SpneSolution,
    expected_utilities,
    solve,
    spne_transfer,
    to_best_allocation,
)

__all__ = [
    "CbgSpec", "PayoffMode", "attacker_payoff", "defender_payoff",
    "OracleConfig", "grid_argmax_to", "grid_best_transfer", "numeric_spne",
    "DomainError", "GameParams", "Regime", "RegimeTag", "ToAllocation", "Transfers",
    "classify_regime", "validate",
    "Provenance", "RegimeError", "SpneSolution", "expected_utilities", "solve",
    "spne_transfer", "to_best_allocation",
]
