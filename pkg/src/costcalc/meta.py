"""Deviation-based heterogeneity across studies and the rare-outcome RD check.

Pooling is deliberately simple: the measure computed on counts summed over
studies, unless the caller supplies the pooled value.  Counts are handled
as exact rationals so that a study sitting exactly on the pooled value is
recognised as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Mapping, Sequence

from .measures import ArmCounts, RiskPair, is_defined, rr_minus, rr_plus

SCALES = ("rr_minus", "rr_plus", "rd")
COMPRESSION_EPS = 0.02
MAX_EXHAUSTIVE_ARM = 10_000


def _rd(p0, p1):
    return p1 - p0


_MEASURE: dict = {"rr_minus": rr_minus, "rr_plus": rr_plus, "rd": _rd}


def measure(scale: str) -> Callable:
    try:
        return _MEASURE[scale]
    except KeyError:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}") from None


@dataclass(frozen=True)
class StudyRecord:
    id: str
    treated: ArmCounts
    control: ArmCounts

    def risks(self) -> RiskPair:
        return RiskPair(
            Fraction(self.control.events, self.control.total),
            Fraction(self.treated.events, self.treated.total),
        )

    def estimate(self, scale: str):
        r = self.risks()
        return measure(scale)(r.p0, r.p1)


def pool_studies(studies: Sequence[StudyRecord], scale: str):
    """Measure on counts summed over all studies (exact rational)."""
    if not studies:
        raise ValueError("at least one study is required")
    pooled = StudyRecord(
        "pooled",
        ArmCounts(sum(s.treated.events for s in studies), sum(s.treated.total for s in studies)),
        ArmCounts(sum(s.control.events for s in studies), sum(s.control.total for s in studies)),
    )
    return pooled.estimate(scale)


# -- switched outcomes ---------------------------------------------------------


@dataclass(frozen=True)
class SwitchResult:
    """Fewest outcome flips whose reachable estimates bracket the target.

    ``allocation`` is the (treated events, control events) state achieving
    it, chosen as the one with estimate closest to the target.
    """

    study: str
    scale: str
    target: Real
    flips: int | None
    proportion: Real | None
    allocation: tuple | None
    reachable: bool


def _side(value, target) -> int:
    return (value > target) - (value < target)


def _evaluate(scale, e1, n1, e0, n0):
    return measure(scale)(Fraction(e0, n0), Fraction(e1, n1))


def _result(study, scale, target, best) -> SwitchResult:
    total = study.treated.total + study.control.total
    if best is None:
        return SwitchResult(study.id, scale, target, None, None, None, False)
    k, _, e1, e0 = best
    return SwitchResult(study.id, scale, target, k, Fraction(k, total), (e1, e0), True)


def switched_proportion_exhaustive(study: StudyRecord, target, scale: str) -> SwitchResult:
    """Brute force over every reachable (treated, control) event-count state."""
    n1, n0 = study.treated.total, study.control.total
    if max(n1, n0) > MAX_EXHAUSTIVE_ARM:
        raise ValueError(f"exhaustive search is limited to arms of {MAX_EXHAUSTIVE_ARM}")
    e1, e0 = study.treated.events, study.control.events
    target = Fraction(target)
    current = study.estimate(scale)
    start = _side(current, target) if is_defined(current) else None
    best = None
    for a in range(n1 + 1):
        for b in range(n0 + 1):
            value = _evaluate(scale, a, n1, b, n0)
            if not is_defined(value):
                continue
            side = _side(value, target)
            if start is not None and side == start and side != 0:
                continue
            k = abs(a - e1) + abs(b - e0)
            key = (k, abs(value - target), a, b)
            if best is None or key < best:
                best = key
    return _result(study, scale, target, best)


def _direction(scale: str) -> tuple:
    """Sign of the measure's change when treated / control events increase."""
    return (-1, 1) if scale == "rr_plus" else (1, -1)


def switched_proportion(study: StudyRecord, target, scale: str) -> SwitchResult:
    """Minimal switched outcomes for the study estimate to reach ``target``.

    Every measure is monotone in each arm's event count, so crossing the
    target from one side only ever moves treated and control counts in the
    fixed directions that push the estimate toward it.  For each number of
    treated flips the smallest sufficient number of control flips is found
    by bisection.
    """
    n1, n0 = study.treated.total, study.control.total
    e1, e0 = study.treated.events, study.control.events
    target = Fraction(target)
    current = study.estimate(scale)
    if not is_defined(current):
        # undefined start: any defined state is a candidate
        return switched_proportion_exhaustive(study, target, scale)
    start = _side(current, target)
    if start == 0:
        return _result(study, scale, target, (0, 0, e1, e0))

    d1, d0 = _direction(scale)
    # move each count so the estimate moves by -start
    step1 = -start * d1
    step0 = -start * d0
    limit1 = (n1 - e1) if step1 > 0 else e1
    limit0 = (n0 - e0) if step0 > 0 else e0

    def value_at(a, b):
        return _evaluate(scale, e1 + step1 * a, n1, e0 + step0 * b, n0)

    def crosses(a, b):
        value = value_at(a, b)
        return is_defined(value) and _side(value, target) != start

    # a ratio can become undefined only at the far end of the control range
    while limit0 > 0 and not is_defined(value_at(0, limit0)):
        limit0 -= 1

    k_min = None
    for a in range(limit1 + 1):
        if k_min is not None and a >= k_min:
            break
        if not crosses(a, limit0):
            continue
        lo, hi = 0, limit0
        while lo < hi:
            mid = (lo + hi) // 2
            if crosses(a, mid):
                hi = mid
            else:
                lo = mid + 1
        if k_min is None or a + lo < k_min:
            k_min = a + lo
    if k_min is None:
        return _result(study, scale, target, None)
    return _result(study, scale, target, _closest_at(study, scale, target, start, k_min))


def _closest_at(study, scale, target, start, k):
    """Among all states exactly ``k`` flips away, the crossing one nearest the target."""
    n1, n0 = study.treated.total, study.control.total
    e1, e0 = study.treated.events, study.control.events
    best = None
    for d1 in range(-k, k + 1):
        rest = k - abs(d1)
        for d0 in {-rest, rest}:
            a1, b0 = e1 + d1, e0 + d0
            if not (0 <= a1 <= n1 and 0 <= b0 <= n0):
                continue
            value = _evaluate(scale, a1, n1, b0, n0)
            if not is_defined(value) or _side(value, target) == start:
                continue
            key = (k, abs(value - target), a1, b0)
            if best is None or key < best:
                best = key
    return best


# -- deviations ----------------------------------------------------------------


@dataclass(frozen=True)
class HeterogeneityReport:
    pooled: Mapping
    deviations: Mapping
    skipped: Mapping
    switched: Mapping
    rr_plus_compressed: bool
    compression_eps: float = COMPRESSION_EPS


def scale_deviations(
    studies: Sequence[StudyRecord],
    pooled: Mapping | None = None,
    scales: Sequence[str] = SCALES,
    switched: bool = True,
    eps: float = COMPRESSION_EPS,
) -> HeterogeneityReport:
    """Absolute deviation of each study from the pooled value on each scale.

    ``pooled`` overrides the summed-count pooling per scale.  Studies whose
    estimate is degenerate on a scale are listed in ``skipped``.  The RR(+)
    compression flag is raised when every defined RR(+) estimate lies in
    [1 - eps, 1].
    """
    if not studies:
        raise ValueError("at least one study is required")
    pooled_values = {}
    for scale in scales:
        value = (pooled or {}).get(scale)
        pooled_values[scale] = pool_studies(studies, scale) if value is None else value

    deviations = {s.id: {} for s in studies}
    skipped = {s.id: {} for s in studies}
    switches = {s.id: {} for s in studies}
    for scale in scales:
        target = pooled_values[scale]
        for study in studies:
            estimate = study.estimate(scale)
            if not is_defined(estimate):
                skipped[study.id][scale] = estimate.reason
                continue
            if not is_defined(target):
                skipped[study.id][scale] = f"pooled value undefined: {target.reason}"
                continue
            deviations[study.id][scale] = abs(estimate - Fraction(target))
            if switched:
                switches[study.id][scale] = switched_proportion(study, target, scale)

    plus = [s.estimate("rr_plus") for s in studies]
    plus = [v for v in plus if is_defined(v)]
    compressed = bool(plus) and all(1 - Fraction(eps) <= v <= 1 for v in plus)
    return HeterogeneityReport(pooled_values, deviations, skipped, switches, compressed, eps)


# -- rare-outcome substitution -------------------------------------------------


@dataclass(frozen=True)
class RdSubstitution:
    rd_s: Real
    rd_t: Real
    discrepancy: Real
    remainder: Real
    bound: Real
    within_bound: bool


def rd_substitution_check(s: RiskPair, t: RiskPair, tol: float = 1e-12) -> RdSubstitution:
    """How far RD differs between two populations that share RR(+).

    ``remainder`` is the product term ``p0_t*p1_s - p0_s*p1_t`` neglected when
    equal RR(+) is read as equal RD; it equals ``RD_s - RD_t`` exactly.
    """
    plus_s, plus_t = rr_plus(s.p0, s.p1), rr_plus(t.p0, t.p1)
    if not (is_defined(plus_s) and is_defined(plus_t)):
        raise ValueError("RR(+) is undefined for a population with baseline risk 1")
    if abs(plus_s - plus_t) > tol:
        raise ValueError(f"RR(+) differs between populations: {plus_s!r} vs {plus_t!r}")
    rd_s, rd_t = s.p1 - s.p0, t.p1 - t.p0
    remainder = t.p0 * s.p1 - s.p0 * t.p1
    top = max(s.p0, s.p1, t.p0, t.p1)
    bound = 2 * top * top
    discrepancy = abs(rd_s - rd_t)
    return RdSubstitution(rd_s, rd_t, discrepancy, remainder, bound, discrepancy <= bound)
