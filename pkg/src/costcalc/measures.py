"""Potential-outcome risks and the standard effect measures.

All functions are agnostic to the numeric type: floats give floats,
``fractions.Fraction`` inputs give exact rationals.  Ratio measures whose
denominator vanishes are returned as :class:`Undefined` instead of ``nan``
or ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Union


@dataclass(frozen=True)
class Undefined:
    """Marker for a quantity whose defining denominator is zero."""

    reason: str

    def __str__(self) -> str:
        return "undefined"


Value = Union[Real, Undefined]


def is_defined(value) -> bool:
    return not isinstance(value, Undefined)


def _check_probability(name: str, value) -> None:
    if not 0 <= value <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class RiskPair:
    """Counterfactual risks of one population.

    ``p0`` is Pr(Y^{a=0}=1), the risk without treatment; ``p1`` is
    Pr(Y^{a=1}=1), the risk under treatment.
    """

    p0: Real
    p1: Real

    def __post_init__(self):
        _check_probability("p0", self.p0)
        _check_probability("p1", self.p1)

    def recoded(self) -> "RiskPair":
        """Risks of the complementary outcome (events and non-events swapped)."""
        return RiskPair(1 - self.p0, 1 - self.p1)


@dataclass(frozen=True)
class ArmCounts:
    events: int
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError(f"arm total must be positive, got {self.total}")
        if not 0 <= self.events <= self.total:
            raise ValueError(
                f"events must lie in [0, total], got {self.events}/{self.total}"
            )


@dataclass(frozen=True)
class EffectSummary:
    rd: Real
    rr_minus: Value
    rr_plus: Value
    odds_ratio: Value

    def as_dict(self) -> dict:
        return {
            "rd": self.rd,
            "rr_minus": self.rr_minus,
            "rr_plus": self.rr_plus,
            "odds_ratio": self.odds_ratio,
        }


def risk_difference(p0, p1):
    return p1 - p0


def rr_minus(p0, p1) -> Value:
    """Ratio of event risks, treated over untreated."""
    if p0 == 0:
        return Undefined("degenerate: baseline risk is 0")
    return p1 / p0


def rr_plus(p0, p1) -> Value:
    """Ratio of non-event risks, treated over untreated."""
    if p0 == 1:
        return Undefined("degenerate: baseline risk is 1")
    return (1 - p1) / (1 - p0)


def odds_ratio(p0, p1) -> Value:
    if p0 in (0, 1) or p1 in (0, 1):
        return Undefined("degenerate: a risk equals 0 or 1")
    return (p1 / (1 - p1)) / (p0 / (1 - p0))


def measures_from_risks(r: RiskPair) -> EffectSummary:
    return EffectSummary(
        rd=risk_difference(r.p0, r.p1),
        rr_minus=rr_minus(r.p0, r.p1),
        rr_plus=rr_plus(r.p0, r.p1),
        odds_ratio=odds_ratio(r.p0, r.p1),
    )


def risks_from_counts(treated: ArmCounts, control: ArmCounts, exact: bool = False) -> RiskPair:
    """Point estimates of (p0, p1) from trial arm summaries.

    With ``exact=True`` the risks are returned as ``Fraction`` values.
    """
    if exact:
        from fractions import Fraction

        return RiskPair(
            Fraction(control.events, control.total),
            Fraction(treated.events, treated.total),
        )
    return RiskPair(control.events / control.total, treated.events / treated.total)
