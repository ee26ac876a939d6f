"""Attribute-driven generative model for equality of COST parameters.

An unmeasured attribute ``x`` (protective type) and/or ``z`` (harmful type)
decides how each individual responds to treatment.  Every individual carries
the full table of joint counterfactuals ``Y^{a,x}`` (or ``Y^{a,x,z}``); the
realized potential outcomes are read off at the individual's own attribute
values.  Populations are explicit finite rosters so every claim can be
checked by counting.

Conditions, for attribute ``x`` (``z`` uses 5/6 with the same letters):

* ``C1``  attribute distribution is the same in every population
* ``C2``  treatment has no effect when the attribute is absent
* ``3a``  x has no effect without treatment      ``4a``  ... with treatment
* ``3b``  x prevents the outcome under treatment ``4b``  x causes it without
* ``3c``  x independent of Y^{a=0}               ``4c``  x independent of Y^{a=1}
* ``5b``  z causes the outcome under treatment   ``6b``  z prevents it without

Under C1, C2, 3a-c the parameter G equals Pr(x=0) in every population; under
C1, C2, 4a-c it is J that equals Pr(x=0).  For ``z`` the shared parameter is
H (5a-c) or I (6a-c), equal to Pr(z=0).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cost import (
    CostIntroduce,
    CostRemove,
    ResponseTypeDistribution,
    cost_introduce,
    cost_remove,
)
from .measures import is_defined

NONE, PROTECTIVE, HARMFUL = "none", "protective", "harmful"
EFFECTS = (NONE, PROTECTIVE, HARMFUL)
U_OF_EFFECT = {NONE: 0, PROTECTIVE: 1, HARMFUL: 2}

# single-attribute condition -> (attribute, pairing, shared parameter)
_SINGLE = {
    "C3": ("x", "introduce", "g"),
    "C4": ("x", "remove", "j"),
    "C5": ("z", "introduce", "h"),
    "C6": ("z", "remove", "i"),
}

MAX_EXACT_SIZE = 1_000_000


@dataclass(frozen=True)
class ConditionSet:
    """Which conditions the attributes are meant to satisfy.

    Only the coherent pairings (C3 with C5, C4 with C6) are accepted when
    both attributes are present.
    """

    x: str | None = "C3"
    z: str | None = None

    def __post_init__(self):
        if self.x not in (None, "C3", "C4"):
            raise ValueError(f"x conditions must be C3 or C4, got {self.x!r}")
        if self.z not in (None, "C5", "C6"):
            raise ValueError(f"z conditions must be C5 or C6, got {self.z!r}")
        if self.x is None and self.z is None:
            raise ValueError("at least one attribute is required")
        if self.x and self.z and (self.x, self.z) not in (("C3", "C5"), ("C4", "C6")):
            raise ValueError(
                f"incoherent attribute conditions {self.x} with {self.z}; "
                "use C3 with C5 or C4 with C6"
            )

    @property
    def attributes(self) -> tuple:
        return tuple(a for a, c in (("x", self.x), ("z", self.z)) if c)

    @property
    def joint(self) -> bool:
        return len(self.attributes) == 2

    @property
    def pairing(self) -> str:
        """``introduce`` when Y^{a=0} is attribute-free, ``remove`` when Y^{a=1} is."""
        return _SINGLE[self.x or self.z][1]

    @property
    def shared_parameter(self) -> str | None:
        if self.joint:
            return None
        return _SINGLE[self.x or self.z][2]

    def condition_ids(self) -> tuple:
        if self.joint:
            return ("C1", "joint-a", "joint-c", "cells")
        number = (self.x or self.z)[1]
        return ("C1", "C2", number + "a", number + "b", number + "c")

    def cells(self) -> list:
        return list(itertools.product((0, 1), repeat=len(self.attributes)))

    def default_effect_map(self) -> dict:
        if not self.joint:
            effect = PROTECTIVE if self.x else HARMFUL
            return {(0,): NONE, (1,): effect}
        # a harmful reaction supersedes susceptibility when both are present
        return {(0, 0): NONE, (1, 0): PROTECTIVE, (0, 1): HARMFUL, (1, 1): HARMFUL}


@dataclass(frozen=True)
class MechanismIndividual:
    """One person: attribute values and the table of joint counterfactuals.

    ``y_table`` maps ``(a, *cell)`` to the outcome, where ``cell`` lists the
    present attributes in ``(x, z)`` order.
    """

    population: str
    x: int | None
    z: int | None
    y_table: Mapping

    @property
    def cell(self) -> tuple:
        return tuple(v for v in (self.x, self.z) if v is not None)

    def y(self, a: int, cell: tuple | None = None) -> int:
        return self.y_table[(a, *(self.cell if cell is None else cell))]

    @property
    def y0(self) -> int:
        return self.y(0)

    @property
    def y1(self) -> int:
        return self.y(1)

    def attribute(self, name: str) -> int:
        return getattr(self, name)

    def with_outcome(self, key: tuple, value: int) -> "MechanismIndividual":
        table = dict(self.y_table)
        table[key] = value
        return replace(self, y_table=table)

    def with_attribute(self, name: str, value: int) -> "MechanismIndividual":
        return replace(self, **{name: value})


@dataclass(frozen=True)
class MechanismPopulation:
    individuals: tuple
    condition_set: ConditionSet
    effect_map: Mapping = field(default_factory=dict)
    seed: int | None = None

    @property
    def population_ids(self) -> tuple:
        return tuple(sorted({ind.population for ind in self.individuals}))

    def members(self, population_id: str) -> list:
        return [ind for ind in self.individuals if ind.population == population_id]

    def sizes(self) -> dict:
        return dict(sorted(Counter(ind.population for ind in self.individuals).items()))

    def replace_individual(self, index: int, new: MechanismIndividual) -> "MechanismPopulation":
        people = list(self.individuals)
        people[index] = new
        return replace(self, individuals=tuple(people))

    def __add__(self, other: "MechanismPopulation") -> "MechanismPopulation":
        if other.condition_set != self.condition_set:
            raise ValueError("cannot merge populations built under different conditions")
        return replace(self, individuals=self.individuals + other.individuals)


@dataclass(frozen=True)
class PopulationLaw:
    """Law of one population: latent risk bit and independent attributes.

    ``latent_risk`` is Pr(w=1) for the latent bit ``w`` that fixes the
    attribute-free arm (Y^{a=0} under C3/C5, Y^{a=1} under C4/C6).
    """

    latent_risk: Fraction
    attributes: Mapping


@dataclass(frozen=True)
class MechanismSpec:
    condition_set: ConditionSet
    laws: Mapping
    effect_map: Mapping | None = None
    mode: str = "exhaustive"
    n: int | None = None
    seed: int | None = None


def y_table_for(w: int, cs: ConditionSet, effect_map: Mapping) -> dict:
    table = {}
    for cell in cs.cells():
        effect = effect_map[cell]
        free, forced = (0, 1) if cs.pairing == "introduce" else (1, 0)
        table[(free, *cell)] = w
        if effect == NONE:
            table[(forced, *cell)] = w
        elif cs.pairing == "introduce":
            table[(forced, *cell)] = 0 if effect == PROTECTIVE else 1
        else:
            table[(forced, *cell)] = 1 if effect == PROTECTIVE else 0
    return table


def _individual(pid, w, attrs, cs, effect_map) -> MechanismIndividual:
    return MechanismIndividual(
        population=pid,
        x=attrs.get("x"),
        z=attrs.get("z"),
        y_table=y_table_for(w, cs, effect_map),
    )


def _validate_effect_map(cs: ConditionSet, effect_map: Mapping) -> dict:
    effect_map = {tuple(k): v for k, v in effect_map.items()}
    if set(effect_map) != set(cs.cells()):
        raise ValueError(f"effect map must cover exactly the cells {cs.cells()}")
    for cell, effect in effect_map.items():
        if effect not in EFFECTS:
            raise ValueError(f"cell {cell}: effect must be one of {EFFECTS}, got {effect!r}")
    return effect_map


def _exact_roster(pid, law: PopulationLaw, cs, effect_map) -> list:
    factors = [Fraction(law.latent_risk)] + [Fraction(law.attributes[a]) for a in cs.attributes]
    size = math.prod(f.denominator for f in factors)
    if size > MAX_EXACT_SIZE:
        raise ValueError(f"exact construction needs {size} individuals; use monte_carlo mode")
    ranges = [range(f.denominator) for f in factors]
    people = []
    for idx in itertools.product(*ranges):
        bits = [int(i < f.numerator) for i, f in zip(idx, factors)]
        attrs = dict(zip(cs.attributes, bits[1:]))
        people.append(_individual(pid, bits[0], attrs, cs, effect_map))
    return people


def _sampled_roster(pid, law, cs, effect_map, n, rng) -> list:
    w = rng.random(n) < float(law.latent_risk)
    draws = {a: rng.random(n) < float(law.attributes[a]) for a in cs.attributes}
    return [
        _individual(pid, int(w[k]), {a: int(draws[a][k]) for a in cs.attributes}, cs, effect_map)
        for k in range(n)
    ]


def build_population(spec: MechanismSpec) -> MechanismPopulation:
    """Construct a roster satisfying the requested conditions by design.

    ``exhaustive`` mode lays out the full product grid of the latent bit and
    the attributes, which makes every independence condition hold exactly at
    count level.  ``monte_carlo`` draws ``n`` individuals per population with
    a seeded generator; independence then only holds in expectation.
    """
    cs = spec.condition_set
    effect_map = _validate_effect_map(cs, spec.effect_map or cs.default_effect_map())
    if not spec.laws:
        raise ValueError("at least one population law is required")
    attribute_laws = set()
    for pid, law in spec.laws.items():
        missing = set(cs.attributes) - set(law.attributes)
        if missing:
            raise ValueError(f"population {pid}: no probability for {sorted(missing)}")
        for value in [law.latent_risk, *law.attributes.values()]:
            if not 0 <= value <= 1:
                raise ValueError(f"population {pid}: probabilities must lie in [0, 1]")
        attribute_laws.add(tuple(Fraction(law.attributes[a]) for a in cs.attributes))
    if len(attribute_laws) > 1:
        raise ValueError("condition C1 requires the same attribute law in every population")

    people = []
    if spec.mode == "exhaustive":
        for pid, law in sorted(spec.laws.items()):
            people.extend(_exact_roster(pid, law, cs, effect_map))
    elif spec.mode == "monte_carlo":
        if not spec.n or spec.n < 1:
            raise ValueError("monte_carlo mode needs a positive n")
        rng = np.random.default_rng(spec.seed)
        for pid, law in sorted(spec.laws.items()):
            people.extend(_sampled_roster(pid, law, cs, effect_map, spec.n, rng))
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'monte_carlo', got {spec.mode!r}")
    return MechanismPopulation(tuple(people), cs, effect_map, spec.seed)


# -- condition checks --------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    passed: bool
    counterexamples: tuple = ()
    detail: str = ""


@dataclass(frozen=True)
class ConditionReport:
    results: Mapping

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    @property
    def failed(self) -> frozenset:
        return frozenset(k for k, r in self.results.items() if not r.passed)


def _per_individual(pop, name, predicate, detail) -> ConditionResult:
    bad = tuple(k for k, ind in enumerate(pop.individuals) if not predicate(ind))
    return ConditionResult(name, not bad, bad, detail if bad else "")


def _equal_attribute_law(pop, name) -> ConditionResult:
    cs = pop.condition_set
    laws = {}
    for pid in pop.population_ids:
        members = pop.members(pid)
        counts = Counter(ind.cell for ind in members)
        laws[pid] = {c: Fraction(counts[c], len(members)) for c in cs.cells()}
    distinct = {tuple(sorted(v.items())) for v in laws.values()}
    if len(distinct) <= 1:
        return ConditionResult(name, True)
    shown = "; ".join(
        f"{pid}: " + ", ".join(f"{cell}={share}" for cell, share in law.items())
        for pid, law in sorted(laws.items())
    )
    return ConditionResult(
        name, False, tuple(sorted(laws)), f"attribute distributions differ: {shown}"
    )


def _independent(pop, name, key_attr, arm) -> ConditionResult:
    """Exact count-level independence of ``key_attr`` and Y^{a=arm} per population."""
    bad = []
    for pid in pop.population_ids:
        members = pop.members(pid)
        n = len(members)
        keys = Counter(key_attr(ind) for ind in members)
        ys = Counter(ind.y(arm) for ind in members)
        joint = Counter((key_attr(ind), ind.y(arm)) for ind in members)
        if any(joint[(k, y)] * n != keys[k] * ys[y] for k in keys for y in ys):
            bad.append(pid)
    detail = f"attribute not independent of Y^{{a={arm}}} in {bad}" if bad else ""
    return ConditionResult(name, not bad, tuple(bad), detail)


def check_conditions(pop: MechanismPopulation, cs: ConditionSet | None = None) -> ConditionReport:
    """Evaluate every condition of ``cs`` on ``pop``.

    Pointwise conditions list the indices of failing individuals; the
    independence conditions list the failing population ids.
    """
    cs = cs or pop.condition_set
    results = {}
    results["C1"] = _equal_attribute_law(pop, "C1")
    if cs.joint:
        free = 0 if cs.pairing == "introduce" else 1
        cells = cs.cells()
        results["joint-a"] = _per_individual(
            pop,
            "joint-a",
            lambda ind: len({ind.y(free, c) for c in cells}) == 1,
            f"attributes change Y^{{a={free}}}",
        )
        results["joint-c"] = _independent(pop, "joint-c", lambda ind: ind.cell, free)
        results["cells"] = _check_cells(pop, cs, pop.effect_map)
        return ConditionReport(results)

    attr = cs.attributes[0]
    number = (cs.x or cs.z)[1]
    forced_arm, forced_value = {
        "3": (1, 0),
        "4": (0, 1),
        "5": (1, 1),
        "6": (0, 0),
    }[number]
    free_arm = 1 - forced_arm
    absent, present = (0,), (1,)
    results["C2"] = _per_individual(
        pop,
        "C2",
        lambda ind: ind.y(0, absent) == ind.y(1, absent),
        f"treatment changes the outcome when {attr}=0",
    )
    results[number + "a"] = _per_individual(
        pop,
        number + "a",
        lambda ind: ind.y(free_arm, absent) == ind.y(free_arm, present),
        f"{attr} changes Y^{{a={free_arm}}}",
    )
    results[number + "b"] = _per_individual(
        pop,
        number + "b",
        lambda ind: ind.y(forced_arm, present) == forced_value,
        f"Y^{{a={forced_arm},{attr}=1}} != {forced_value}",
    )
    results[number + "c"] = _independent(
        pop, number + "c", lambda ind: ind.attribute(attr), free_arm
    )
    return ConditionReport(results)


def _cell_effects(pop, cs) -> dict:
    """Effects each cell is consistent with, across every individual's table."""
    forced = 1 if cs.pairing == "introduce" else 0
    free = 1 - forced
    possible = {}
    for cell in cs.cells():
        ok = set(EFFECTS)
        for ind in pop.individuals:
            y_forced, y_free = ind.y(forced, cell), ind.y(free, cell)
            if y_forced != y_free:
                ok.discard(NONE)
            protective_value = 0 if cs.pairing == "introduce" else 1
            if y_forced != protective_value:
                ok.discard(PROTECTIVE)
            if y_forced != 1 - protective_value:
                ok.discard(HARMFUL)
        possible[cell] = ok
    return possible


def _check_cells(pop, cs, effect_map) -> ConditionResult:
    possible = _cell_effects(pop, cs)
    bad = []
    for cell in cs.cells():
        wanted = effect_map.get(cell) if effect_map else None
        if not possible[cell] or (wanted is not None and wanted not in possible[cell]):
            bad.append(cell)
    detail = f"cells with mixed or mismatched effects: {bad}" if bad else ""
    return ConditionResult("cells", not bad, tuple(bad), detail)


# -- exact parameters --------------------------------------------------------


@dataclass(frozen=True)
class MechanismCost:
    distribution: ResponseTypeDistribution
    introduce: CostIntroduce
    remove: CostRemove

    def parameter(self, name: str):
        return getattr(self.introduce if name in "gh" else self.remove, name)


def response_distribution(individuals: Sequence[MechanismIndividual]) -> ResponseTypeDistribution:
    if not individuals:
        raise ValueError("population is empty")
    n = len(individuals)
    counts = Counter((ind.y0, ind.y1) for ind in individuals)
    return ResponseTypeDistribution(
        doomed=Fraction(counts[(1, 1)], n),
        causal=Fraction(counts[(0, 1)], n),
        preventative=Fraction(counts[(1, 0)], n),
        immune=Fraction(counts[(0, 0)], n),
    )


def cost_from_mechanism(pop: MechanismPopulation, population_id: str) -> MechanismCost:
    members = pop.members(population_id)
    if not members:
        raise ValueError(f"population {population_id!r} has no individuals")
    d = response_distribution(members)
    return MechanismCost(d, cost_introduce(d), cost_remove(d))


def attribute_share(pop: MechanismPopulation, population_id: str, attr: str, value: int = 0):
    members = pop.members(population_id)
    return Fraction(sum(ind.attribute(attr) == value for ind in members), len(members))


# -- U strata ----------------------------------------------------------------


@dataclass(frozen=True)
class UStrataReport:
    population: str
    counts: tuple
    probabilities: tuple
    first: object  # G (introduce) or I (remove)
    second: object  # H (introduce) or J (remove)
    complement_identity: bool
    stated_identity: bool


def assign_u_strata(pop: MechanismPopulation, effect_map: Mapping | None = None) -> dict:
    """U strata per population with exact COST parameters.

    U=0 marks cells where treatment has no effect, U=1 cells forcing the
    protective outcome and U=2 cells forcing the harmful one (Y^{a=1}=0 and
    Y^{a=1}=1 under the introduce pairing).  Counting establishes
    ``G = 1 - Pr(U=1)`` and ``H = 1 - Pr(U=2)`` (``J = 1 - Pr(U=1)``,
    ``I = 1 - Pr(U=2)`` for the remove pairing); ``stated_identity`` records
    whether the uncomplemented form ``G = Pr(U=1)``, ``H = Pr(U=2)`` happens
    to hold as well.
    """
    cs = pop.condition_set
    effect_map = _validate_effect_map(cs, effect_map or pop.effect_map or cs.default_effect_map())
    possible = _cell_effects(pop, cs)
    for cell, effect in effect_map.items():
        if effect not in possible[cell]:
            raise ValueError(
                f"cell {cell} has mixed effect directions; declared {effect!r}, "
                f"consistent with {sorted(possible[cell]) or 'nothing'}"
            )
    reports = {}
    for pid in pop.population_ids:
        members = pop.members(pid)
        n = len(members)
        u = Counter(U_OF_EFFECT[effect_map[ind.cell]] for ind in members)
        counts = (u[0], u[1], u[2])
        probs = tuple(Fraction(c, n) for c in counts)
        cost = cost_from_mechanism(pop, pid)
        if cs.pairing == "introduce":
            first, second = cost.introduce.g, cost.introduce.h
            first_u, second_u = probs[1], probs[2]
        else:
            first, second = cost.remove.i, cost.remove.j
            first_u, second_u = probs[2], probs[1]
        complement = (not is_defined(first) or first == 1 - first_u) and (
            not is_defined(second) or second == 1 - second_u
        )
        stated = (
            cs.pairing == "introduce"
            and is_defined(first)
            and is_defined(second)
            and first == probs[1]
            and second == probs[2]
        )
        reports[pid] = UStrataReport(pid, counts, probs, first, second, complement, stated)
    return reports


# -- exhaustive verification of the shared-parameter result ----------------------


def enumerate_rosters(cs: ConditionSet, max_size: int, population_id: str = "s") -> Iterable:
    """Every single-attribute roster of at most ``max_size`` individuals
    satisfying C2 and the a-c conditions, up to relabelling of individuals.

    A roster is fixed by the counts of (latent bit, attribute) combinations;
    the c condition keeps only count vectors with exact independence.
    """
    if cs.joint:
        raise ValueError("roster enumeration supports a single attribute")
    effect_map = cs.default_effect_map()
    attr = cs.attributes[0]
    for n in range(1, max_size + 1):
        for n00 in range(n + 1):
            for n01 in range(n - n00 + 1):
                for n10 in range(n - n00 - n01 + 1):
                    n11 = n - n00 - n01 - n10
                    # independence of the attribute and the latent bit
                    if n11 * n != (n01 + n11) * (n10 + n11):
                        continue
                    people = []
                    for (w, a), count in (((0, 0), n00), ((0, 1), n01), ((1, 0), n10), ((1, 1), n11)):
                        ind = _individual(population_id, w, {attr: a}, cs, effect_map)
                        people.extend([ind] * count)
                    yield MechanismPopulation(tuple(people), cs, effect_map)


@dataclass(frozen=True)
class SharedParameterCheck:
    condition_set: ConditionSet
    parameter: str
    max_size: int
    checked: int
    passed: bool
    witness: tuple | None = None


def _relabel(pop: MechanismPopulation, population_id: str) -> MechanismPopulation:
    return replace(
        pop, individuals=tuple(replace(i, population=population_id) for i in pop.individuals)
    )


def verify_shared_parameter(cs: ConditionSet, max_size: int = 20) -> SharedParameterCheck:
    """All roster pairs with equal attribute law and unequal latent risk share
    the condition set's parameter, and it equals the share with attribute 0."""
    param = cs.shared_parameter
    attr = cs.attributes[0]
    groups: dict = {}
    for roster in enumerate_rosters(cs, max_size):
        share = attribute_share(roster, "s", attr, 0)
        value = cost_from_mechanism(roster, "s").parameter(param)
        if not is_defined(value):
            continue
        latent = Fraction(
            sum(ind.y(0 if cs.pairing == "introduce" else 1) for ind in roster.individuals),
            len(roster.individuals),
        )
        groups.setdefault(share, []).append((latent, value, roster))
    checked = 0
    for share, members in groups.items():
        for (ls, vs, rs), (lt, vt, rt) in itertools.product(members, repeat=2):
            if ls == lt:
                continue
            checked += 1
            if not (vs == vt == share):
                witness = (rs, _relabel(rt, "t"))
                return SharedParameterCheck(cs, param, max_size, checked, False, witness)
    return SharedParameterCheck(cs, param, max_size, checked, True)


def _mutations(pop: MechanismPopulation, population_id: str):
    """Single-individual edits plus attribute swaps between two members."""
    cs = pop.condition_set
    attr = cs.attributes[0]
    idx = [k for k, ind in enumerate(pop.individuals) if ind.population == population_id]
    seen = set()
    for k in idx:
        ind = pop.individuals[k]
        signature = (ind.attribute(attr), tuple(sorted(ind.y_table.items())))
        if signature in seen:
            continue
        seen.add(signature)
        yield f"flip {attr} of individual {k}", pop.replace_individual(
            k, ind.with_attribute(attr, 1 - ind.attribute(attr))
        )
        for key in sorted(ind.y_table):
            yield f"flip Y{key} of individual {k}", pop.replace_individual(
                k, ind.with_outcome(key, 1 - ind.y_table[key])
            )
    for k, m in itertools.combinations(idx, 2):
        a, b = pop.individuals[k], pop.individuals[m]
        if a.attribute(attr) != b.attribute(attr) and a.y_table != b.y_table:
            swapped = pop.replace_individual(k, a.with_attribute(attr, b.attribute(attr)))
            swapped = swapped.replace_individual(m, b.with_attribute(attr, a.attribute(attr)))
            yield f"swap {attr} of individuals {k} and {m}", swapped


@dataclass(frozen=True)
class NegativeControl:
    condition: str
    found: bool
    description: str = ""
    population: MechanismPopulation | None = None
    values: tuple = ()


def negative_controls(cs: ConditionSet, max_size: int = 6) -> dict:
    """Search for single-condition violations that break the shared parameter.

    Starting from every valid roster pair (s, t) with equal attribute law
    and unequal latent risk, each mutation of s is kept as a witness for
    condition ``c`` when ``c`` is the only failing condition and the
    parameter differs between s and t.  Conditions without a witness are
    reported with ``found=False``; the search is exhaustive over its bounds.
    """
    param = cs.shared_parameter
    attr = cs.attributes[0]
    rosters = list(enumerate_rosters(cs, max_size))
    found: dict = {}
    wanted = set(cs.condition_ids())
    for rs, rt in itertools.product(rosters, repeat=2):
        if wanted <= set(found):
            break
        if attribute_share(rs, "s", attr) != attribute_share(rt, "s", attr):
            continue
        base = rs + _relabel(rt, "t")
        vt = cost_from_mechanism(base, "t").parameter(param)
        if not is_defined(vt):
            continue
        for description, mutated in _mutations(base, "s"):
            failed = check_conditions(mutated).failed
            if len(failed) != 1:
                continue
            (condition,) = failed
            if condition in found:
                continue
            vs = cost_from_mechanism(mutated, "s").parameter(param)
            if is_defined(vs) and vs != vt:
                found[condition] = NegativeControl(condition, True, description, mutated, (vs, vt))
    return {
        c: found.get(c, NegativeControl(c, False, f"no single-condition witness within size {max_size}"))
        for c in cs.condition_ids()
    }


def mechanism_report(pop: MechanismPopulation) -> dict:
    """Plain-data summary: sizes, conditions, exact parameters, U strata."""
    cs = pop.condition_set
    conditions = check_conditions(pop)
    out = {
        "conditions": {"x": cs.x, "z": cs.z},
        "seed": pop.seed,
        "sizes": pop.sizes(),
        "condition_checks": {
            k: {"passed": r.passed, "detail": r.detail} for k, r in conditions.results.items()
        },
        "populations": {},
    }
    for pid in pop.population_ids:
        cost = cost_from_mechanism(pop, pid)
        out["populations"][pid] = {
            "distribution": dict(zip(("doomed", "causal", "preventative", "immune"), cost.distribution.as_tuple())),
            "g": cost.introduce.g,
            "h": cost.introduce.h,
            "i": cost.remove.i,
            "j": cost.remove.j,
            "attribute_share_0": {a: attribute_share(pop, pid, a, 0) for a in cs.attributes},
        }
    if cs.joint:
        for pid, rep in assign_u_strata(pop).items():
            out["populations"][pid]["u_probabilities"] = rep.probabilities
            out["populations"][pid]["u_complement_identity"] = rep.complement_identity
            out["populations"][pid]["u_stated_identity"] = rep.stated_identity
    return out
