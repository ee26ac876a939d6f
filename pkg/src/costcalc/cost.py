"""Response-type distributions and the COST parameters.

Four deterministic response types partition a population:

=============  ===========  ===========
type           Y^{a=0}      Y^{a=1}
=============  ===========  ===========
doomed         1            1
causal         0            1
preventative   1            0
immune         0            0
=============  ===========  ===========

``g``/``h`` describe introducing treatment into an untreated population and
``i``/``j`` describe removing it from a fully treated one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from typing import Sequence

from .measures import RiskPair, Undefined, Value, is_defined

NORMALIZATION_TOL = 1e-12
COLLAPSE_TOL = 1e-12

# parameter -> (numerator type, types making up the conditioning event)
PARAMETERS = {
    "g": ("doomed", ("doomed", "preventative")),
    "h": ("immune", ("immune", "causal")),
    "i": ("doomed", ("doomed", "causal")),
    "j": ("immune", ("immune", "preventative")),
}

_CONDITIONING_EVENT = {
    "g": "Y^{a=0}=1",
    "h": "Y^{a=0}=0",
    "i": "Y^{a=1}=1",
    "j": "Y^{a=1}=0",
}


@dataclass(frozen=True)
class ResponseTypeDistribution:
    doomed: Real
    causal: Real
    preventative: Real
    immune: Real

    def __post_init__(self):
        for name in ("doomed", "causal", "preventative", "immune"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        total = self.doomed + self.causal + self.preventative + self.immune
        if abs(total - 1) > NORMALIZATION_TOL:
            raise ValueError(f"response-type probabilities sum to {total!r}, not 1")

    @classmethod
    def normalized(cls, doomed, causal, preventative, immune) -> "ResponseTypeDistribution":
        """Rescale nonnegative weights to sum to one (for rounded user input)."""
        total = doomed + causal + preventative + immune
        if total <= 0:
            raise ValueError("response-type weights must have a positive sum")
        return cls(doomed / total, causal / total, preventative / total, immune / total)

    def as_tuple(self) -> tuple:
        return (self.doomed, self.causal, self.preventative, self.immune)


@dataclass(frozen=True)
class CostIntroduce:
    g: Value
    h: Value


@dataclass(frozen=True)
class CostRemove:
    i: Value
    j: Value


def _conditional(d: ResponseTypeDistribution, param: str) -> Value:
    numerator, event = PARAMETERS[param]
    mass = sum(getattr(d, t) for t in event)
    if mass == 0:
        return Undefined(f"{param} undefined: Pr({_CONDITIONING_EVENT[param]}) = 0")
    return getattr(d, numerator) / mass


def risks_from_distribution(d: ResponseTypeDistribution) -> RiskPair:
    return RiskPair(d.doomed + d.preventative, d.doomed + d.causal)


def cost_introduce(d: ResponseTypeDistribution) -> CostIntroduce:
    return CostIntroduce(_conditional(d, "g"), _conditional(d, "h"))


def cost_remove(d: ResponseTypeDistribution) -> CostRemove:
    return CostRemove(_conditional(d, "i"), _conditional(d, "j"))


def recode_outcome(d: ResponseTypeDistribution) -> ResponseTypeDistribution:
    """Distribution after swapping the event with its complement."""
    return ResponseTypeDistribution(
        doomed=d.immune, causal=d.preventative, preventative=d.causal, immune=d.doomed
    )


def recode_exposure(d: ResponseTypeDistribution) -> ResponseTypeDistribution:
    """Distribution after swapping the treated and untreated levels."""
    return ResponseTypeDistribution(
        doomed=d.doomed, causal=d.preventative, preventative=d.causal, immune=d.immune
    )


@dataclass(frozen=True)
class CollapsibilityStratum:
    label: str
    dist: ResponseTypeDistribution
    prevalence: Real


class CollapsibilityError(ArithmeticError):
    """The weighted stratum average disagrees with the pooled parameter."""


@dataclass(frozen=True)
class CollapseReport:
    pooled: ResponseTypeDistribution
    introduce: CostIntroduce
    remove: CostRemove
    weighted: dict
    weights: dict
    uncollapsible: dict = field(default_factory=dict)

    @property
    def max_discrepancy(self):
        gaps = [
            abs(self.weighted[p] - getattr(self.introduce if p in "gh" else self.remove, p))
            for p in PARAMETERS
            if p not in self.uncollapsible
        ]
        return max(gaps, default=0)


def mixture(strata: Sequence[CollapsibilityStratum]) -> ResponseTypeDistribution:
    parts = [0, 0, 0, 0]
    for s in strata:
        for k, value in enumerate(s.dist.as_tuple()):
            parts[k] += s.prevalence * value
    return ResponseTypeDistribution(*parts)


def collapse_cost(
    strata: Sequence[CollapsibilityStratum], tol: float = COLLAPSE_TOL
) -> CollapseReport:
    """Marginal COST parameters over a stratified population, computed twice.

    Once from the pooled mixture, once as the average of stratum-specific
    parameters weighted by Pr(V=v | conditioning event).  A parameter whose
    marginal conditioning event has probability zero is reported in
    ``uncollapsible``; strata with an empty conditioning event carry zero
    weight and are skipped.
    """
    if not strata:
        raise ValueError("at least one stratum is required")
    prevalence = sum(s.prevalence for s in strata)
    if abs(prevalence - 1) > NORMALIZATION_TOL:
        raise ValueError(f"stratum prevalences sum to {prevalence!r}, not 1")

    pooled = mixture(strata)
    introduce = cost_introduce(pooled)
    remove = cost_remove(pooled)
    weighted, weights, uncollapsible = {}, {}, {}
    for param, (_, event) in PARAMETERS.items():
        masses = [s.prevalence * sum(getattr(s.dist, t) for t in event) for s in strata]
        total = sum(masses)
        if total == 0:
            reason = f"empty conditioning event {_CONDITIONING_EVENT[param]} in every stratum"
            uncollapsible[param] = reason
            weighted[param] = Undefined(reason)
            weights[param] = tuple(Undefined(reason) for _ in strata)
            continue
        w = tuple(m / total for m in masses)
        acc = 0
        for s, wv in zip(strata, w):
            if wv != 0:
                acc += _conditional(s.dist, param) * wv
        weights[param] = w
        weighted[param] = acc / sum(w)

    report = CollapseReport(pooled, introduce, remove, weighted, weights, uncollapsible)
    for param in PARAMETERS:
        if param in uncollapsible:
            continue
        marginal = getattr(introduce if param in "gh" else remove, param)
        if not is_defined(marginal) or abs(marginal - weighted[param]) > tol:
            raise CollapsibilityError(
                f"{param}: pooled {marginal!r} != weighted {weighted[param]!r}"
            )
    return report
