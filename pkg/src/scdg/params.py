"""Game parameters, stage-1/stage-2 action records and regime classification.

A Smart City Defense Game instance is fixed by two defender budgets, one
attacker budget, and the size and per-target value of each layer's Blotto
game.  Everything here is an immutable value; classification is a pure
function of (params, transfers).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

# relative slack applied to every strict inequality in the regime bands
BAND_RTOL = 1e-12


class DomainError(ValueError):
    """Raised when an input violates a model assumption."""


@dataclass(frozen=True)
class GameParams:
    c1: float
    c2: float
    tau: float
    v1: float
    v2: float
    theta1: int
    theta2: int

    @property
    def phi1(self) -> float:
        """Total value of the physical Blotto game."""
        return self.theta1 * self.v1

    @property
    def phi2(self) -> float:
        """Total value of the cyber-social Blotto game."""
        return self.theta2 * self.v2

    @property
    def total_value(self) -> float:
        return self.phi1 + self.phi2

    def swapped(self) -> "GameParams":
        """The same game with the two defender layers exchanged."""
        return GameParams(
            c1=self.c2, c2=self.c1, tau=self.tau,
            v1=self.v2, v2=self.v1, theta1=self.theta2, theta2=self.theta1,
        )


def validate(params: GameParams) -> GameParams:
    """Return ``params`` unchanged or raise DomainError naming the bad field."""
    for name in ("c1", "c2", "tau", "v1", "v2"):
        value = getattr(params, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(f"{name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    for name in ("c1", "c2", "tau"):
        if getattr(params, name) < 0:
            raise DomainError(f"{name} must be non-negative, got {getattr(params, name)!r}")
    for name in ("v1", "v2"):
        if getattr(params, name) <= 0:
            raise DomainError(f"{name} must be positive, got {getattr(params, name)!r}")
    for name in ("theta1", "theta2"):
        value = getattr(params, name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise DomainError(f"{name} must be an integer, got {value!r}")
        if value < 3:
            raise DomainError(f"{name} must be >= 3, got {value}")
    if params.c1 == 0 and params.c2 == 0 and params.tau == 0:
        raise DomainError("at least one of c1, c2, tau must be positive")
    return params


@dataclass(frozen=True)
class Transfers:
    """Net stage-1 transfer and the endowments it produces.

    Build through :meth:`from_params`, which nets out opposing transfers and
    computes the endowments.
    """

    r12: float
    r21: float
    d1: float
    d2: float

    def __post_init__(self):
        if self.r12 < 0 or self.r21 < 0:
            raise DomainError("transfers must be non-negative")
        if self.r12 > 0 and self.r21 > 0:
            raise DomainError("at most one transfer direction may be nonzero")
        if self.d1 < 0 or self.d2 < 0:
            raise DomainError(f"endowments must be non-negative, got d1={self.d1}, d2={self.d2}")

    @classmethod
    def from_params(cls, params: GameParams, r12: float = 0.0, r21: float = 0.0) -> "Transfers":
        if r12 < 0 or r21 < 0:
            raise DomainError("transfers must be non-negative")
        net = r12 - r21
        r12, r21 = (net, 0.0) if net >= 0 else (0.0, -net)
        if r12 > params.c1 or r21 > params.c2:
            raise DomainError("a transfer cannot exceed the donor's budget")
        d1 = params.c1 - r12 + r21
        d2 = params.c2 - r21 + r12
        return cls(r12=float(r12), r21=float(r21), d1=float(d1), d2=float(d2))

    @classmethod
    def none(cls, params: GameParams) -> "Transfers":
        return cls.from_params(params)

    @property
    def amount(self) -> float:
        return max(self.r12, self.r21)

    @property
    def direction(self) -> Optional[str]:
        if self.r12 > 0:
            return "1->2"
        if self.r21 > 0:
            return "2->1"
        return None

    def swapped(self) -> "Transfers":
        return Transfers(r12=self.r21, r21=self.r12, d1=self.d2, d2=self.d1)


@dataclass(frozen=True)
class ToAllocation:
    """Attacker budget split between the physical and cyber-social games."""

    tau1: float
    tau2: float

    def __post_init__(self):
        if self.tau1 < 0 or self.tau2 < 0:
            raise DomainError(f"allocation must be non-negative, got ({self.tau1}, {self.tau2})")

    def total_matches(self, tau: float) -> bool:
        return abs(self.tau1 + self.tau2 - tau) <= 1e-9 * max(1.0, tau)

    def swapped(self) -> "ToAllocation":
        return ToAllocation(tau1=self.tau2, tau2=self.tau1)


class RegimeTag(enum.Enum):
    T3 = "T3"
    T4 = "T4"
    T5 = "T5"
    T5M = "T5M"
    UNCLASSIFIED = "Unclassified"


# T3 sub-tags: which layer the attacker concentrates on
TARGETS_PHYSICAL = "attacker-targets-physical"
TARGETS_SOCIAL = "attacker-targets-social"
INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    detail: Optional[str] = None

    @property
    def classified(self) -> bool:
        return self.tag is not RegimeTag.UNCLASSIFIED

    def __str__(self) -> str:
        return self.tag.value if self.detail is None else f"{self.tag.value}:{self.detail}"


UNCLASSIFIED = Regime(RegimeTag.UNCLASSIFIED)


def ratio(num: float, den: float) -> float:
    """num/den with x/0 = inf for x > 0 and 0/0 = nan."""
    if den == 0:
        return math.inf if num > 0 else math.nan
    return num / den


def in_band(x: float, lo: float, hi: float) -> bool:
    """Strict lo < x < hi, shrunk by BAND_RTOL so boundary values fall outside."""
    if not math.isfinite(x):
        return False
    return x > lo * (1 + BAND_RTOL) and x < hi * (1 - BAND_RTOL)


def attack_preference(phi1: float, d1: float, phi2: float, d2: float) -> int:
    """Sign of phi1/d1 - phi2/d2 (0 within BAND_RTOL).

    Cross-multiplied so zero endowments need no special case.
    """
    a = phi1 * d2
    b = phi2 * d1
    if abs(a - b) <= BAND_RTOL * max(a, b):
        return 0
    return 1 if a > b else -1


def t3_detail(params: GameParams, d1: float, d2: float) -> str:
    pref = attack_preference(params.phi1, d1, params.phi2, d2)
    return {1: TARGETS_PHYSICAL, -1: TARGETS_SOCIAL, 0: INDIFFERENT}[pref]


def t4_split(tau: float, d1: float, d2: float, phi1: float, phi2: float) -> tuple[float, float]:
    """Interior optimum when the attacker outguns both layers.

    tau1 = tau / (1 + sqrt(phi2 d2 / (phi1 d1))), written with one weight per
    layer so the swapped instance reproduces the split bit for bit.
    """
    w1 = math.sqrt(phi1 * d1)
    w2 = math.sqrt(phi2 * d2)
    total = w1 + w2
    return tau * w1 / total, tau * w2 / total


def t5_split(tau: float, d_strong: float, d_weak: float,
             phi_strong: float, phi_weak: float) -> tuple[float, float]:
    """(attack on strong layer, attack on weak layer) at the interior optimum.

    The weak layer receives delta = sqrt(phi_weak * d_strong * d_weak / phi_strong).
    """
    delta = math.sqrt(phi_weak * d_strong * d_weak / phi_strong)
    return tau - delta, delta


def _t4_holds(params: GameParams, d1: float, d2: float) -> bool:
    tau = params.tau
    if not d1 + d2 < tau or d1 <= 0 or d2 <= 0:
        return False
    t1, t2 = t4_split(tau, d1, d2, params.phi1, params.phi2)
    return (in_band(ratio(d1, t1), 2 / params.theta1, 1.0)
            and in_band(ratio(d2, t2), 2 / params.theta2, 1.0))


def _t5_holds(tau: float, d_strong: float, d_weak: float, phi_strong: float, phi_weak: float,
              theta_strong: int, theta_weak: int) -> bool:
    if d_strong <= 0 or d_weak <= 0:
        return False
    t_strong, t_weak = t5_split(tau, d_strong, d_weak, phi_strong, phi_weak)
    if t_strong <= 0:
        return False
    return (in_band(ratio(t_strong, d_strong), 2 / theta_strong, 1.0)
            and in_band(ratio(d_weak, t_weak), 2 / theta_weak, 1.0))


def classify_regime(params: GameParams, transfers: Transfers) -> Regime:
    """Which equilibrium family governs the attacker's stage-2 choice.

    Checks are made at the post-transfer endowments, in the order
    T3, T4, T5, T5M; anything else is Unclassified.
    """
    tau, d1, d2 = params.tau, transfers.d1, transfers.d2
    if (in_band(ratio(tau, d1), 2 / params.theta1, 1.0)
            and in_band(ratio(tau, d2), 2 / params.theta2, 1.0)):
        return Regime(RegimeTag.T3, t3_detail(params, d1, d2))
    if _t4_holds(params, d1, d2):
        return Regime(RegimeTag.T4)
    if _t5_holds(tau, d1, d2, params.phi1, params.phi2, params.theta1, params.theta2):
        return Regime(RegimeTag.T5)
    if _t5_holds(tau, d2, d1, params.phi2, params.phi1, params.theta2, params.theta1):
        return Regime(RegimeTag.T5M)
    return UNCLASSIFIED
