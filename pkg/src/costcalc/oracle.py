"""Exhaustive finite-population verification in exact rational arithmetic.

A :class:`FinitePopulation` is an integer count of each response type.
:func:`verify` runs one proposition over every population (or pair of
populations) within the given bounds, feeding exact ``Fraction`` risks
through the library's own identification, transport and bias code and
comparing against quantities counted directly from the population.
Nothing here uses a tolerance.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from math import comb
from typing import Callable, Iterator

from . import mechanism
from .cost import (
    CollapsibilityStratum,
    ResponseTypeDistribution,
    collapse_cost,
    cost_introduce,
    cost_remove,
    recode_exposure,
    recode_outcome,
)
from .measures import RiskPair, is_defined, rr_minus, rr_plus
from .meta import rd_substitution_check
from .transport import (
    IdentificationError,
    bias_under_nonmonotonicity,
    identify_g_under_decrease,
    identify_h_under_increase,
    transport_rr,
)

PROPOSITIONS = (
    "P1",
    "P2",
    "P3",
    "P4",
    "P5",
    "P6",
    "P7",
    "P8",
    "collapsibility",
    "symmetry-outcome",
    "symmetry-exposure",
)


@dataclass(frozen=True, order=True)
class FinitePopulation:
    n_doomed: int
    n_causal: int
    n_preventative: int
    n_immune: int

    def __post_init__(self):
        if min(self.counts) < 0:
            raise ValueError("response-type counts must be nonnegative")
        if self.size == 0:
            raise ValueError("population must be nonempty")

    @property
    def counts(self) -> tuple:
        return (self.n_doomed, self.n_causal, self.n_preventative, self.n_immune)

    @property
    def size(self) -> int:
        return sum(self.counts)

    @cached_property
    def p0(self) -> Fraction:
        return Fraction(self.n_doomed + self.n_preventative, self.size)

    @cached_property
    def p1(self) -> Fraction:
        return Fraction(self.n_doomed + self.n_causal, self.size)

    @cached_property
    def _risks(self) -> RiskPair:
        return RiskPair(self.p0, self.p1)

    def risks(self) -> RiskPair:
        return self._risks

    def distribution(self) -> ResponseTypeDistribution:
        return ResponseTypeDistribution(*(Fraction(c, self.size) for c in self.counts))

    @cached_property
    def _counted(self) -> dict:
        d, c, p, i = self.counts
        pairs = {"g": (d, d + p), "h": (i, i + c), "i": (d, d + c), "j": (i, i + p)}
        return {k: Fraction(num, den) if den else None for k, (num, den) in pairs.items()}

    def counted(self, param: str):
        """Parameter counted straight from the roster; None when undefined."""
        return self._counted[param]

    def add(self, causal: int = 0, preventative: int = 0) -> "FinitePopulation":
        d, c, p, i = self.counts
        return FinitePopulation(d, c + causal, p + preventative, i)


def count_populations(n_max: int) -> int:
    return sum(comb(n + 3, 3) for n in range(1, n_max + 1))


_TYPES = ("doomed", "causal", "preventative", "immune")


def enumerate_populations(n_max: int, absent: str | None = None) -> Iterator[FinitePopulation]:
    """Every composition of every N in 1..n_max into four ordered parts.

    ``absent`` names a response type held at zero, which enumerates the
    monotone populations directly instead of filtering the full stream.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if absent is None:
        for n in range(1, n_max + 1):
            for d in range(n + 1):
                for c in range(n - d + 1):
                    for p in range(n - d - c + 1):
                        yield FinitePopulation(d, c, p, n - d - c - p)
        return
    slot = _TYPES.index(absent)
    for n in range(1, n_max + 1):
        for a in range(n + 1):
            for b in range(n - a + 1):
                counts = [a, b, n - a - b]
                counts.insert(slot, 0)
                yield FinitePopulation(*counts)


@dataclass(frozen=True)
class PropositionCheck:
    proposition: str
    universe: dict
    passed: bool
    checked: int
    witness: tuple | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "proposition": self.proposition,
            "universe": self.universe,
            "result": "pass" if self.passed else "fail",
            "checked": self.checked,
            "witness": [_witness(w) for w in self.witness] if self.witness else None,
            "detail": self.detail,
        }


def _witness(w):
    if isinstance(w, FinitePopulation):
        return list(w.counts)
    if isinstance(w, mechanism.MechanismPopulation):
        return [
            {"population": i.population, "x": i.x, "z": i.z, "y0": i.y0, "y1": i.y1}
            for i in w.individuals
        ]
    return repr(w)


@dataclass
class _Tally:
    proposition: str
    universe: dict
    checked: int = 0
    witness: tuple | None = None
    detail: str = ""

    def fail(self, witness, detail) -> bool:
        if self.witness is None:
            self.witness = witness
            self.detail = detail
        return False

    def result(self) -> PropositionCheck:
        return PropositionCheck(
            self.proposition,
            self.universe,
            self.witness is None,
            self.checked,
            self.witness,
            self.detail,
        )


# -- single-population checks ---------------------------------------------------


def _verify_identification(n_max, inject, absent, identify, param, tally):
    """Identified parameter equals the counted one on every monotone population."""
    for pop in enumerate_populations(n_max, absent):
        pop = inject(pop)
        counted = pop.counted(param)
        if counted is None:
            continue
        tally.checked += 1
        try:
            identified = identify(pop.risks())
        except IdentificationError as exc:
            tally.fail((pop,), f"identification rejected the population: {exc}")
            return
        if identified != counted:
            tally.fail((pop,), f"identified {identified} != counted {counted}")
            return


# -- pair checks ------------------------------------------------------------------


def _groups(pops, key: Callable) -> dict:
    """Group populations by ``key``, keeping one representative per risk pair.

    Every pair check depends on a population only through its risks and the
    group key, so populations with identical risks are checked once and
    counted with their multiplicity.
    """
    out: dict = {}
    for pop in pops:
        k = key(pop)
        if k is None:
            continue
        reps = out.setdefault(k, {})
        r = (pop.p0, pop.p1)
        if r in reps:
            reps[r][1] += 1
        else:
            reps[r] = [pop, 1]
    return {k: [tuple(v) for v in reps.values()] for k, reps in out.items()}


def _pairs(groups: dict, limit: int | None, seed: int | None):
    """(study, target, multiplicity) over all ordered pairs within each group,
    or over a seeded sample of ``limit`` pairs."""
    if limit is None:
        for members in groups.values():
            for (s, ms), (t, mt) in itertools.product(members, repeat=2):
                yield s, t, ms * mt
        return
    rng = random.Random(seed)
    keys = sorted(groups, key=repr)
    for _ in range(limit):
        members = groups[rng.choice(keys)]
        yield rng.choice(members)[0], rng.choice(members)[0], 1


def _verify_transport(n_max, inject, absent, assumption, ratio, tally, limit, seed):
    """Shared (G, H) plus monotonicity: transported risk equals the target's."""
    pops = [inject(p) for p in enumerate_populations(n_max, absent)]
    groups = _groups(pops, lambda p: (p.counted("g"), p.counted("h")))
    for s, t, weight in _pairs(groups, limit, seed):
        if None in (s.counted("g"), s.counted("h")):
            continue
        tally.checked += weight
        try:
            predicted = transport_rr(s.risks(), t.p0, assumption).predicted_risk
        except IdentificationError as exc:
            tally.fail((s, t), f"identification rejected the study population: {exc}")
            return
        rs, rt = ratio(s.p0, s.p1), ratio(t.p0, t.p1)
        if predicted != t.p1:
            tally.fail((s, t), f"transported risk {predicted} != target risk {t.p1}")
            return
        if is_defined(rt) and rs != rt:
            tally.fail((s, t), f"study ratio {rs} != target ratio {rt}")
            return


def _verify_bias(n_max, scale, tally, limit, seed):
    """Shared (G, H): bias of RR transport is (F-1)(1-H), with the stated sign."""
    pops = list(enumerate_populations(n_max))
    groups = _groups(
        pops,
        lambda p: None
        if None in (p.counted("g"), p.counted("h"))
        else (p.counted("g"), p.counted("h")),
    )
    for s, t, weight in _pairs(groups, limit, seed):
        g, h = s.counted("g"), s.counted("h")
        if scale == "rr_minus":
            if s.p0 == 0:
                continue
            naive = t.p0 * s.p1 / s.p0
            true, f, h_role = t.p1, t.p0 / s.p0, h
        else:
            if s.p0 == 1:
                continue
            # complementary-outcome risks
            naive = (1 - t.p0) * (1 - s.p1) / (1 - s.p0)
            true, f, h_role = 1 - t.p1, (1 - t.p0) / (1 - s.p0), g
        tally.checked += weight
        report = bias_under_nonmonotonicity(g, h, s.p0, t.p0, scale=scale)
        expected = (f - 1) * (1 - h_role)
        if report.naive_prediction != naive or report.true_risk != true:
            tally.fail((s, t), "naive or true risk disagrees with counting")
            return
        if report.bias != naive - true or report.bias != expected:
            tally.fail((s, t), f"bias {report.bias} != (F-1)(1-H) = {expected}")
            return
        sign = (report.bias > 0) - (report.bias < 0)
        stated = 0 if (f == 1 or h_role == 1) else (1 if f > 1 else -1)
        if sign != stated:
            tally.fail((s, t), f"bias sign {sign} contradicts stated direction {stated}")
            return


def _verify_rd_substitution(n_max, rare, tally, limit, seed):
    pops = [
        p for p in enumerate_populations(n_max) if max(p.p0, p.p1) <= rare and p.p0 < 1
    ]
    groups = _groups(pops, lambda p: rr_plus(p.p0, p.p1))
    for s, t, weight in _pairs(groups, limit, seed):
        tally.checked += weight
        check = rd_substitution_check(s.risks(), t.risks(), tol=0)
        if check.discrepancy > 2 * rare * rare:
            tally.fail((s, t), f"|RD_s - RD_t| = {check.discrepancy} > 2r^2")
            return
        if check.remainder != check.rd_s - check.rd_t:
            tally.fail((s, t), "product-term remainder does not equal RD_s - RD_t")
            return


def _verify_collapsibility(n_max, tally):
    pops = list(enumerate_populations(n_max))
    for a, b in itertools.combinations_with_replacement(pops, 2):
        n = a.size + b.size
        strata = [
            CollapsibilityStratum("v1", a.distribution(), Fraction(a.size, n)),
            CollapsibilityStratum("v2", b.distribution(), Fraction(b.size, n)),
        ]
        tally.checked += 1
        report = collapse_cost(strata, tol=0)
        pooled = FinitePopulation(*(x + y for x, y in zip(a.counts, b.counts)))
        for param in "ghij":
            counted = pooled.counted(param)
            if counted is None:
                if param not in report.uncollapsible:
                    tally.fail((a, b), f"{param} should be reported uncollapsible")
                    return
                continue
            if report.weighted[param] != counted:
                tally.fail((a, b), f"weighted {param} {report.weighted[param]} != {counted}")
                return


def _same(a, b) -> bool:
    if not is_defined(a) or not is_defined(b):
        return not is_defined(a) and not is_defined(b)
    return a == b


def _verify_symmetry(n_max, which, tally):
    for pop in enumerate_populations(n_max):
        d = pop.distribution()
        tally.checked += 1
        ci, cr = cost_introduce(d), cost_remove(d)
        if which == "outcome":
            e = recode_outcome(d)
            new = cost_introduce(e)
            ok = _same(new.g, ci.h) and _same(new.h, ci.g) and recode_outcome(e) == d
        else:
            e = recode_exposure(d)
            ei, er = cost_introduce(e), cost_remove(e)
            ok = (
                _same(ei.g, cr.i)
                and _same(ei.h, cr.j)
                and _same(er.i, ci.g)
                and _same(er.j, ci.h)
                and recode_exposure(e) == d
            )
        if not ok:
            tally.fail((pop,), f"{which} recoding does not permute the parameters")
            return


def _verify_mechanism(max_size, tally):
    for cond in ("C3", "C4", "C5", "C6"):
        if cond in ("C3", "C4"):
            cs = mechanism.ConditionSet(x=cond)
        else:
            cs = mechanism.ConditionSet(x=None, z=cond)
        check = mechanism.verify_shared_parameter(cs, max_size)
        tally.checked += check.checked
        if not check.passed:
            tally.fail(check.witness, f"{cond}: {check.parameter} differs between populations")
            return


def verify(
    proposition: str,
    n_max: int = 60,
    *,
    pair_n_max: int = 24,
    symmetry_n_max: int = 24,
    inject_violation: int = 0,
    rare: Fraction = Fraction(1, 5),
    stratum_n_max: int = 6,
    mechanism_size: int = 20,
    sample_pairs: int | None = None,
    seed: int | None = 0,
) -> PropositionCheck:
    """Check one proposition exhaustively within the given bounds.

    ``n_max`` bounds the single-population universes of P1 and P4,
    ``symmetry_n_max`` those of the recoding checks, and
    ``pair_n_max`` pair universes (P2, P3, P5, P6, P8).  Pairs are enumerated
    in full unless ``sample_pairs`` asks for a seeded sample instead.
    ``inject_violation`` adds that many individuals of the type the
    proposition's monotonicity excludes (causal for P1 and P2, preventative
    for P4 and P5) to every population: a negative control that should fail.
    Other propositions ignore it.
    """
    pairs = {"pair_n_max": pair_n_max}
    if sample_pairs:
        pairs.update(sample_pairs=sample_pairs, seed=seed)
    universe = {
        "P2": pairs, "P3": pairs, "P5": pairs, "P6": pairs,
        "P8": {**pairs, "rare": str(rare)},
        "P7": {"max_size": mechanism_size},
        "collapsibility": {"stratum_n_max": stratum_n_max},
        "symmetry-outcome": {"n_max": symmetry_n_max},
        "symmetry-exposure": {"n_max": symmetry_n_max},
    }.get(proposition, {"n_max": n_max})
    if inject_violation and proposition in ("P1", "P2", "P4", "P5"):
        universe = {**universe, "inject_violation": inject_violation}
    tally = _Tally(proposition, universe)

    def add_causal(p):
        return p.add(causal=inject_violation)

    def add_prev(p):
        return p.add(preventative=inject_violation)

    if proposition == "P1":
        _verify_identification(
            n_max, add_causal, "causal", identify_g_under_decrease, "g", tally
        )
    elif proposition == "P4":
        _verify_identification(
            n_max, add_prev, "preventative", identify_h_under_increase, "h", tally
        )
    elif proposition == "P2":
        _verify_transport(
            pair_n_max, add_causal, "causal", "non_increasing", rr_minus, tally, sample_pairs, seed
        )
    elif proposition == "P5":
        _verify_transport(
            pair_n_max, add_prev, "preventative", "non_decreasing", rr_plus, tally, sample_pairs, seed
        )
    elif proposition in ("P3", "P6"):
        scale = "rr_minus" if proposition == "P3" else "rr_plus"
        _verify_bias(pair_n_max, scale, tally, sample_pairs, seed)
    elif proposition == "P7":
        _verify_mechanism(mechanism_size, tally)
    elif proposition == "P8":
        _verify_rd_substitution(pair_n_max, Fraction(rare), tally, sample_pairs, seed)
    elif proposition == "collapsibility":
        _verify_collapsibility(stratum_n_max, tally)
    elif proposition == "symmetry-outcome":
        _verify_symmetry(symmetry_n_max, "outcome", tally)
    elif proposition == "symmetry-exposure":
        _verify_symmetry(symmetry_n_max, "exposure", tally)
    else:
        raise ValueError(f"unknown proposition {proposition!r}; choose from {PROPOSITIONS}")
    return tally.result()


def verify_all(**bounds) -> list:
    return [verify(p, **bounds) for p in PROPOSITIONS]
