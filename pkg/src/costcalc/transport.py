"""Identification of COST parameters and transport of effects between populations.

Monotonicity is always a caller assertion.  Observed risks are only checked
for contradicting it; it is never inferred from data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from numbers import Real
from typing import Iterable

from .cost import CostIntroduce, CostRemove
from .measures import RiskPair, Undefined, Value, is_defined, measures_from_risks

DEFAULT_NEAR_MONOTONICITY_RATIO = 10.0


class IdentificationError(ValueError):
    """A COST parameter cannot be identified from the given risks."""


class MonotonicityViolation(IdentificationError):
    """Observed risks contradict the asserted direction of monotonicity."""


class Monotonicity(str, enum.Enum):
    NON_INCREASING = "non_increasing"  # no causal individuals, H = 1
    NON_DECREASING = "non_decreasing"  # no preventative individuals, G = 1
    NONE = "none"


@dataclass(frozen=True)
class TransportResult:
    """A predicted risk together with the near-monotonicity diagnostic.

    ``monotone_term`` is ``g*t0`` (``i*t1`` for removal) and
    ``nonmonotone_term`` is ``(1-h)*(1-t0)`` (``(1-j)*(1-t1)``); the
    approximation ``RR ~ COST parameter`` is good when the first dominates.
    """

    predicted_risk: Real
    parameters_used: tuple
    assumption: Monotonicity
    monotone_term: Real
    nonmonotone_term: Real

    @property
    def near_monotonicity_margin(self):
        return self.monotone_term - self.nonmonotone_term

    @property
    def near_monotonicity_ratio(self):
        if self.nonmonotone_term == 0:
            return math.inf
        return self.monotone_term / self.nonmonotone_term


def predict_risk(base, keep, switch_complement):
    """Risk in the other arm: ``base*keep + (1-base)*(1-switch_complement)``.

    Works elementwise on numpy arrays as well as on scalars.
    """
    return base * keep + (1 - base) * (1 - switch_complement)


# -- identification -------------------------------------------------------


def identify_g_under_decrease(r: RiskPair):
    """G = RR(-) when treatment never causes the event."""
    if r.p0 == 0:
        raise IdentificationError("G is undefined when the baseline risk is 0")
    if r.p1 > r.p0:
        raise MonotonicityViolation(
            f"p1={r.p1} > p0={r.p0} contradicts non-increasing monotonicity"
        )
    return r.p1 / r.p0


def identify_h_under_increase(r: RiskPair):
    """H = RR(+) when treatment never prevents the event."""
    if r.p0 == 1:
        raise IdentificationError("H is undefined when the baseline risk is 1")
    if r.p1 < r.p0:
        raise MonotonicityViolation(
            f"p1={r.p1} < p0={r.p0} contradicts non-decreasing monotonicity"
        )
    return (1 - r.p1) / (1 - r.p0)


def identify_i_under_increase(r: RiskPair):
    if r.p1 == 0:
        raise IdentificationError("I is undefined when the risk under treatment is 0")
    if r.p1 < r.p0:
        raise MonotonicityViolation(
            f"p1={r.p1} < p0={r.p0} contradicts non-decreasing monotonicity"
        )
    return r.p0 / r.p1


def identify_j_under_decrease(r: RiskPair):
    if r.p1 == 1:
        raise IdentificationError("J is undefined when the risk under treatment is 1")
    if r.p1 > r.p0:
        raise MonotonicityViolation(
            f"p1={r.p1} > p0={r.p0} contradicts non-increasing monotonicity"
        )
    return (1 - r.p0) / (1 - r.p1)


# -- prediction -----------------------------------------------------------


def _require(value, name):
    if not is_defined(value):
        raise ValueError(f"{name} is undefined: {value.reason}")
    if not 0 <= value <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _used(first, second, first_name, second_name):
    if second == 1:
        return (first_name,)
    if first == 1:
        return (second_name,)
    return (first_name, second_name)


def _assumption_of(first, second, direction_if_second_one, direction_if_first_one):
    if second == 1:
        return direction_if_second_one
    if first == 1:
        return direction_if_first_one
    return Monotonicity.NONE


def predict_introduce(params: CostIntroduce, t0) -> TransportResult:
    """Risk under treatment in a population with baseline risk ``t0``."""
    g = _require(params.g, "g")
    h = _require(params.h, "h")
    if not 0 <= t0 <= 1:
        raise ValueError(f"t0 must lie in [0, 1], got {t0!r}")
    risk = predict_risk(t0, g, h)
    return TransportResult(
        risk,
        _used(g, h, "G", "H"),
        _assumption_of(g, h, Monotonicity.NON_INCREASING, Monotonicity.NON_DECREASING),
        g * t0,
        (1 - h) * (1 - t0),
    )


def predict_remove(params: CostRemove, t1) -> TransportResult:
    """Risk without treatment in a fully treated population with risk ``t1``."""
    i = _require(params.i, "i")
    j = _require(params.j, "j")
    if not 0 <= t1 <= 1:
        raise ValueError(f"t1 must lie in [0, 1], got {t1!r}")
    risk = predict_risk(t1, i, j)
    # J = 1 means removing treatment never creates events: treatment is
    # non-increasing.  I = 1 means it never removes them.
    return TransportResult(
        risk,
        _used(i, j, "I", "J"),
        _assumption_of(i, j, Monotonicity.NON_DECREASING, Monotonicity.NON_INCREASING),
        i * t1,
        (1 - j) * (1 - t1),
    )


def transport_rr(source: RiskPair, t0, assumption) -> TransportResult:
    """Identify G or H in the source population and predict the target risk.

    ``non_increasing`` gives ``t0 * RR(-)``; ``non_decreasing`` gives
    ``1 - (1 - t0) * RR(+)``.
    """
    assumption = Monotonicity(assumption)
    if assumption is Monotonicity.NON_INCREASING:
        params, used = CostIntroduce(identify_g_under_decrease(source), 1), ("G",)
    elif assumption is Monotonicity.NON_DECREASING:
        params, used = CostIntroduce(1, identify_h_under_increase(source)), ("H",)
    else:
        raise IdentificationError(
            "without monotonicity, supply (g, h) explicitly and use predict_introduce"
        )
    return replace(predict_introduce(params, t0), assumption=assumption, parameters_used=used)


def transport_rr_remove(source: RiskPair, t1, assumption) -> TransportResult:
    """Removal-direction analogue of :func:`transport_rr` (I or J identified)."""
    assumption = Monotonicity(assumption)
    if assumption is Monotonicity.NON_DECREASING:
        params, used = CostRemove(identify_i_under_increase(source), 1), ("I",)
    elif assumption is Monotonicity.NON_INCREASING:
        params, used = CostRemove(1, identify_j_under_decrease(source)), ("J",)
    else:
        raise IdentificationError(
            "without monotonicity, supply (i, j) explicitly and use predict_remove"
        )
    return replace(predict_remove(params, t1), assumption=assumption, parameters_used=used)


# -- comparison mode ------------------------------------------------------


@dataclass(frozen=True)
class MeasurePrediction:
    """Target risk under treatment obtained by holding one measure fixed.

    ``raw`` is the unclamped value; ``predicted`` is clamped into [0, 1]
    and ``clamped`` records whether that changed anything.
    """

    measure: str
    effect: Value
    raw: Value
    predicted: Value
    clamped: bool


def _clamp(measure, effect, raw) -> MeasurePrediction:
    if not is_defined(raw):
        return MeasurePrediction(measure, effect, raw, raw, False)
    predicted = min(max(raw, 0), 1)
    return MeasurePrediction(measure, effect, raw, predicted, predicted != raw)


def compare_measures(source: RiskPair, t0, assumption=None) -> list:
    """Predictions from RR(-), RR(+), RD, OR and, if an assumption is given, COST."""
    summary = measures_from_risks(source)
    rows = []

    effect = summary.rr_minus
    raw = t0 * effect if is_defined(effect) else effect
    rows.append(_clamp("rr_minus", effect, raw))

    effect = summary.rr_plus
    raw = 1 - (1 - t0) * effect if is_defined(effect) else effect
    rows.append(_clamp("rr_plus", effect, raw))

    rows.append(_clamp("rd", summary.rd, t0 + summary.rd))

    effect = summary.odds_ratio
    if not is_defined(effect):
        raw = effect
    elif t0 == 1:
        raw = 1
    else:
        odds = effect * t0 / (1 - t0)
        raw = odds / (1 + odds)
    rows.append(_clamp("odds_ratio", effect, raw))

    if assumption is not None and Monotonicity(assumption) is not Monotonicity.NONE:
        result = transport_rr(source, t0, assumption)
        used = result.parameters_used[0]
        effect = (
            identify_g_under_decrease(source)
            if used == "G"
            else identify_h_under_increase(source)
        )
        rows.append(_clamp("cost", effect, result.predicted_risk))
    return rows


# -- bias under non-monotonicity -------------------------------------------


@dataclass(frozen=True)
class BiasReport:
    """Error of transporting a risk ratio when (G, H) is shared but H < 1.

    For ``scale="rr_plus"`` every field refers to the complementary outcome:
    the report is the RR(-) analysis after recoding the outcome, so ``h``
    holds the original G and the risks are non-event risks.
    """

    g: Real
    h: Real
    s0: Real
    t0: Real
    f: Real
    naive_prediction: Real
    true_risk: Real
    bias: Real
    rr_study: Real
    rr_target: Value
    scale: str = "rr_minus"

    @property
    def closed_form(self):
        return (self.f - 1) * (1 - self.h)

    @property
    def direction(self) -> str:
        """Sign of the bias, decided exactly from the closed form."""
        if self.f == 1 or self.h == 1:
            return "none"
        return "over" if self.f > 1 else "under"


def bias_under_nonmonotonicity(g, h, s0, t0, scale: str = "rr_minus") -> BiasReport:
    if scale == "rr_plus":
        return replace(bias_under_nonmonotonicity(h, g, 1 - s0, 1 - t0), scale="rr_plus")
    if scale != "rr_minus":
        raise ValueError(f"scale must be 'rr_minus' or 'rr_plus', got {scale!r}")
    for name, value in (("g", g), ("h", h), ("s0", s0), ("t0", t0)):
        if not 0 <= value <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    if s0 == 0:
        raise ValueError("study baseline risk s0 must be positive")

    f = t0 / s0
    s1 = predict_risk(s0, g, h)
    true = predict_risk(t0, g, h)
    # t0 * s1 / s0 rearranged so the h = 1 and f = 1 cases cancel exactly
    naive = t0 * g + f * (1 - s0) * (1 - h)
    return BiasReport(
        g=g,
        h=h,
        s0=s0,
        t0=t0,
        f=f,
        naive_prediction=naive,
        true_risk=true,
        bias=naive - true,
        rr_study=s1 / s0,
        rr_target=true / t0 if t0 != 0 else Undefined("degenerate: target baseline risk is 0"),
    )


def bias_surface(g, h_grid: Iterable, f_grid: Iterable, s0=0.005) -> list:
    """Bias reports over a (h, f) grid at study baseline risk ``s0``.

    Each target baseline risk is ``f * s0``, so ``f`` may not exceed ``1/s0``.
    """
    h_values = list(h_grid)
    f_values = list(f_grid)
    rows = []
    for h in h_values:
        for f in f_values:
            if not f > 0:
                raise ValueError(f"f must be positive, got {f!r}")
            t0 = f * s0
            if t0 > 1:
                raise ValueError(f"f={f!r} with s0={s0!r} gives a target risk above 1")
            rows.append(bias_under_nonmonotonicity(g, h, s0, t0))
    return rows
