from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from costcalc.cost import (
    CollapsibilityError,
    CollapsibilityStratum,
    ResponseTypeDistribution,
    collapse_cost,
    cost_introduce,
    cost_remove,
    mixture,
    recode_exposure,
    recode_outcome,
    risks_from_distribution,
)
from costcalc.measures import is_defined
from costcalc.oracle import FinitePopulation

D = ResponseTypeDistribution
EXAMPLE = D(0.1, 0.05, 0.02, 0.83)
MONOTONE_UP = D(0.02, 0.01, 0, 0.97)


@st.composite
def distributions(draw):
    counts = draw(st.lists(st.integers(0, 50), min_size=4, max_size=4).filter(any))
    return FinitePopulation(*counts).distribution()


def test_distribution_validation():
    with pytest.raises(ValueError):
        D(0.5, 0.5, 0.5, 0)
    with pytest.raises(ValueError):
        D(-0.1, 0.5, 0.3, 0.3)
    d = D.normalized(1, 1, 1, 2)
    assert d.as_tuple() == (0.2, 0.2, 0.2, 0.4)


def test_risks_from_distribution_examples():
    r = risks_from_distribution(EXAMPLE)
    assert r.p0 == pytest.approx(0.12) and r.p1 == pytest.approx(0.15)
    r = risks_from_distribution(D(0, 0, 0, 1))
    assert (r.p0, r.p1) == (0, 0)
    r = risks_from_distribution(MONOTONE_UP)
    assert (r.p0, r.p1) == pytest.approx((0.02, 0.03))


def test_cost_introduce_examples():
    c = cost_introduce(EXAMPLE)
    assert c.g == pytest.approx(0.1 / 0.12) and c.h == pytest.approx(0.83 / 0.88)
    c = cost_introduce(MONOTONE_UP)
    assert c.g == 1 and c.h == pytest.approx(0.97 / 0.98)
    c = cost_introduce(D(0, 0, 0, 1))
    assert not is_defined(c.g) and c.h == 1
    assert "Y^{a=0}=1" in c.g.reason


def test_cost_remove_examples():
    c = cost_remove(EXAMPLE)
    assert c.i == pytest.approx(2 / 3) and c.j == pytest.approx(0.83 / 0.85)
    c = cost_remove(MONOTONE_UP)
    assert c.i == pytest.approx(2 / 3) and c.j == 1
    c = cost_remove(D(0.5, 0, 0, 0.5))
    assert (c.i, c.j) == (1, 1)


def test_recode_outcome_examples():
    e = recode_outcome(EXAMPLE)
    assert e.as_tuple() == (0.83, 0.02, 0.05, 0.1)
    c = cost_introduce(e)
    assert (c.g, c.h) == pytest.approx((0.83 / 0.88, 0.1 / 0.12))
    flat = D(0.25, 0.25, 0.25, 0.25)
    assert recode_outcome(flat) == flat
    e = recode_outcome(MONOTONE_UP)
    assert e.as_tuple() == (0.97, 0, 0.01, 0.02)
    assert cost_introduce(e).g == pytest.approx(cost_introduce(MONOTONE_UP).h)


def test_recode_exposure_examples():
    e = recode_exposure(EXAMPLE)
    assert e.as_tuple() == (0.1, 0.02, 0.05, 0.83)
    c, old = cost_introduce(e), cost_remove(EXAMPLE)
    assert (c.g, c.h) == pytest.approx((old.i, old.j))
    e = recode_exposure(MONOTONE_UP)
    assert e.as_tuple() == (0.02, 0, 0.01, 0.97)
    assert cost_introduce(e).h == 1  # now monotone decreasing
    null = D(0.5, 0, 0, 0.5)
    assert recode_exposure(null) == null


def test_collapse_two_strata_example():
    v1, v2 = D(0.1, 0.05, 0.02, 0.83), D(0.3, 0.1, 0.05, 0.55)
    report = collapse_cost(
        [CollapsibilityStratum("v1", v1, 0.5), CollapsibilityStratum("v2", v2, 0.5)]
    )
    expected = (0.5 * 0.12 * (0.1 / 0.12) + 0.5 * 0.35 * (0.3 / 0.35)) / (0.5 * 0.12 + 0.5 * 0.35)
    assert report.weighted["g"] == pytest.approx(expected, abs=1e-12)
    # counting oracle: pooled roster (10,5,2,83) + (30,10,5,55)
    pooled = FinitePopulation(40, 15, 7, 138)
    assert pooled.counted("g") == Fraction(40, 47)
    assert report.introduce.g == pytest.approx(40 / 47, abs=1e-12)
    assert report.weights["g"] == pytest.approx((0.12 / 0.47, 0.35 / 0.47))


def test_collapse_identical_strata():
    s = [CollapsibilityStratum(str(k), EXAMPLE, 0.25) for k in range(4)]
    report = collapse_cost(s)
    for p, v in (("g", 0.1 / 0.12), ("h", 0.83 / 0.88), ("i", 2 / 3), ("j", 0.83 / 0.85)):
        assert report.weighted[p] == pytest.approx(v, abs=1e-12)


def test_collapse_equal_g_different_baselines():
    a = D(Fraction(2, 10), 0, Fraction(2, 10), Fraction(6, 10))  # p0 = 0.4, g = 1/2
    b = D(Fraction(1, 20), Fraction(1, 10), Fraction(1, 20), Fraction(8, 10))  # p0 = 0.1, g = 1/2
    report = collapse_cost(
        [CollapsibilityStratum("a", a, Fraction(1, 3)), CollapsibilityStratum("b", b, Fraction(2, 3))],
        tol=0,
    )
    assert report.introduce.g == report.weighted["g"] == Fraction(1, 2)
    assert report.max_discrepancy == 0


def test_collapse_reports_uncollapsible_parameter():
    # nobody has Y^{a=0}=1 anywhere: g has no conditioning event
    s = [
        CollapsibilityStratum("a", D(0, 0.5, 0, 0.5), 0.5),
        CollapsibilityStratum("b", D(0, 0.2, 0, 0.8), 0.5),
    ]
    report = collapse_cost(s)
    assert set(report.uncollapsible) == {"g"}
    assert "Y^{a=0}=1" in report.uncollapsible["g"]


def test_collapse_skips_zero_weight_stratum():
    s = [
        CollapsibilityStratum("a", D(0, 0, 0, 1), 0.5),
        CollapsibilityStratum("b", D(0.2, 0, 0.2, 0.6), 0.5),
    ]
    report = collapse_cost(s)
    assert report.weights["g"] == (0, 1)
    assert report.weighted["g"] == pytest.approx(0.5)


def test_collapse_rejects_bad_prevalence():
    with pytest.raises(ValueError):
        collapse_cost([CollapsibilityStratum("a", EXAMPLE, 0.6)])
    with pytest.raises(ValueError):
        collapse_cost([])


def test_collapsibility_error_is_arithmetic_error():
    assert issubclass(CollapsibilityError, ArithmeticError)


@given(distributions())
def test_risk_identity_via_parameters(d):
    r, c = risks_from_distribution(d), cost_introduce(d)
    if is_defined(c.g) and is_defined(c.h):
        assert r.p1 == r.p0 * c.g + (1 - r.p0) * (1 - c.h)


@given(distributions())
def test_recodings_are_involutions(d):
    assert recode_outcome(recode_outcome(d)) == d
    assert recode_exposure(recode_exposure(d)) == d


@given(distributions())
def test_monotonicity_correspondence(d):
    c = cost_introduce(d)
    if is_defined(c.g):
        assert (c.g == 1) == (d.preventative == 0)
    if is_defined(c.h):
        assert (c.h == 1) == (d.causal == 0)


def test_collapsibility_random_float_strata():
    rng = np.random.default_rng(7)
    for _ in range(500):
        k = rng.integers(2, 6)
        prev = rng.dirichlet(np.ones(k))
        strata = [
            CollapsibilityStratum(str(v), D(*rng.dirichlet(np.ones(4))), float(prev[v]))
            for v in range(k)
        ]
        report = collapse_cost(strata)
        assert report.max_discrepancy <= 1e-12
        assert mixture(strata) == report.pooled
