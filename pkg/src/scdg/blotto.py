"""Equilibrium payoffs of a continuous two-player Colonel Blotto game.

Only the equilibrium *value* is computed, never the mixed strategies.  The
payoff depends on the budgets through the ratio rho = defense / attack:

* ``FULL``   -- the eight-band payoff of the general game.  The weak-defender
  half (rho < 1) is evaluated directly; the strong half uses the game's
  self-duality U(attack, defense) = phi - U(defense, attack).
* ``LARGE_N`` -- the many-battlefield limit, phi*rho/2 below parity and
  phi - phi/(2 rho) above it.

Scalar functions use ``math``; the ``*_array`` variants perform the same
floating-point operations on numpy arrays and return identical values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import DomainError


class PayoffMode(enum.Enum):
    FULL = "full"
    LARGE_N = "large-n"


@dataclass(frozen=True)
class CbgSpec:
    theta: int
    v: float

    def __post_init__(self):
        if isinstance(self.theta, bool) or not isinstance(self.theta, (int, np.integer)):
            raise DomainError(f"theta must be an integer, got {self.theta!r}")
        if self.theta < 3:
            raise DomainError(f"theta must be >= 3, got {self.theta}")
        if not (math.isfinite(self.v) and self.v > 0):
            raise DomainError(f"v must be positive and finite, got {self.v!r}")

    @property
    def phi(self) -> float:
        return self.theta * self.v


def _check_budget(name: str, x: float) -> None:
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    if x < 0:
        raise DomainError(f"{name} must be non-negative, got {x!r}")


def weak_share(rho: float, theta: int) -> float:
    """Fraction of phi won by the weaker side, for rho = weak/strong in [0, 1]."""
    if rho < 1 / theta:
        return 0.0
    if rho < 1 / (theta - 1):
        denom = 1 - (theta - 1) * rho
        q = rho / denom if denom > 0 else math.inf
        if not math.isfinite(q):
            # rounding pushed us onto the next band's left edge
            return 2 / theta ** 2
        beta = math.ceil(q)
        return (2 * beta - 2) / (beta * theta ** 2)
    if rho < 2 / theta:
        return 2 / theta - 2 / (theta ** 2 * rho)
    return rho / 2


def _canonical(u, phi):
    # round u so that u + (phi - u) == phi holds exactly in floating point
    return phi - (phi - u)


def defender_payoff(attack: float, defense: float, spec: CbgSpec,
                    mode: PayoffMode = PayoffMode.LARGE_N) -> float:
    _check_budget("attack", attack)
    _check_budget("defense", defense)
    return _canonical(_raw_defender_payoff(attack, defense, spec, mode), spec.phi)


def _raw_defender_payoff(attack, defense, spec, mode):
    phi = spec.phi
    if attack == 0 and defense == 0:
        return phi / 2
    if defense < attack:
        rho = defense / attack
        if mode is PayoffMode.LARGE_N:
            return phi * rho / 2
        return phi * weak_share(rho, spec.theta)
    rho = attack / defense
    if mode is PayoffMode.LARGE_N:
        return phi - phi * rho / 2
    return phi - phi * weak_share(rho, spec.theta)


def attacker_payoff(attack: float, defense: float, spec: CbgSpec,
                    mode: PayoffMode = PayoffMode.LARGE_N) -> float:
    return spec.phi - defender_payoff(attack, defense, spec, mode)


def weak_share_array(rho: np.ndarray, theta: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    out = np.asarray(rho / 2)
    m3 = rho < 2 / theta
    r3 = rho[m3]
    with np.errstate(divide="ignore", over="ignore"):
        out[m3] = 2 / theta - 2 / (theta ** 2 * r3)
    m2 = rho < 1 / (theta - 1)
    r2 = rho[m2]
    denom = 1 - (theta - 1) * r2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = np.where(denom > 0, r2 / np.where(denom > 0, denom, 1.0), np.inf)
        finite = np.isfinite(q)
        beta = np.ceil(np.where(finite, q, 1.0))
        # beta = 0 only at rho = 0, which the first band overwrites below
        out[m2] = np.where(finite, (2 * beta - 2) / (beta * theta ** 2), 2 / theta ** 2)
    out[rho < 1 / theta] = 0.0
    return out


def defender_payoff_array(attack, defense, spec: CbgSpec,
                          mode: PayoffMode = PayoffMode.LARGE_N) -> np.ndarray:
    """Vectorized :func:`defender_payoff`; inputs broadcast, no validation."""
    attack, defense = np.broadcast_arrays(np.asarray(attack, dtype=float),
                                          np.asarray(defense, dtype=float))
    phi = spec.phi
    weak = defense < attack
    strong = ~weak
    rho = np.empty(attack.shape)
    rho[weak] = defense[weak] / attack[weak]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho[strong] = attack[strong] / defense[strong]
    if mode is PayoffMode.LARGE_N:
        out = np.asarray(phi * rho / 2)
    else:
        out = np.asarray(phi * weak_share_array(rho, spec.theta))
    out[strong] = phi - out[strong]
    out[(attack == 0) & (defense == 0)] = phi / 2
    return _canonical(out, phi)


def attacker_payoff_array(attack, defense, spec: CbgSpec,
                          mode: PayoffMode = PayoffMode.LARGE_N) -> np.ndarray:
    return spec.phi - defender_payoff_array(attack, defense, spec, mode)
