from fractions import Fraction as F
from math import comb

import pytest

from costcalc.cost import cost_introduce, cost_remove
from costcalc.measures import RiskPair
from costcalc.meta import rd_substitution_check
from costcalc.oracle import (
    PROPOSITIONS,
    FinitePopulation,
    count_populations,
    enumerate_populations,
    verify,
    verify_all,
)
from costcalc.transport import bias_under_nonmonotonicity, predict_remove


def test_enumeration_counts():
    assert len(list(enumerate_populations(1))) == 4
    assert len(list(enumerate_populations(2))) == 14
    pops = list(enumerate_populations(6))
    assert len(pops) == len(set(pops)) == count_populations(6)
    assert sum(1 for p in pops if p.size == 6) == comb(9, 3)


def test_enumeration_n60_stream_completes():
    assert count_populations(60) == comb(64, 4) - 1 == 635_375
    assert sum(1 for _ in enumerate_populations(60)) == 635_375


def test_enumerate_monotone_subset():
    full = {p for p in enumerate_populations(8) if p.n_causal == 0}
    assert set(enumerate_populations(8, absent="causal")) == full


def test_enumeration_rejects_zero_bound():
    with pytest.raises(ValueError):
        list(enumerate_populations(0))


def test_finite_population_counts():
    p = FinitePopulation(1, 2, 3, 4)
    assert (p.p0, p.p1) == (F(4, 10), F(3, 10))
    assert p.counted("g") == F(1, 4) and p.counted("h") == F(4, 6)
    assert FinitePopulation(0, 0, 0, 1).counted("g") is None
    assert p.add(causal=1).counts == (1, 3, 3, 4)
    with pytest.raises(ValueError):
        FinitePopulation(0, 0, 0, 0)
    with pytest.raises(ValueError):
        FinitePopulation(-1, 1, 0, 0)


def test_derived_examples_recounted():
    pop = FinitePopulation(10, 5, 2, 83)  # (0.1, 0.05, 0.02, 0.83) per hundred
    d = pop.distribution()
    assert cost_introduce(d).g == pop.counted("g") == F(5, 6)
    assert cost_introduce(d).h == pop.counted("h") == F(83, 88)
    assert cost_remove(d).i == pop.counted("i") == F(2, 3)
    assert cost_remove(d).j == pop.counted("j") == F(83, 85)
    # monotone increase from 2% to 3% risk
    pop = FinitePopulation(2, 1, 0, 97)
    assert pop.risks() == RiskPair(F(1, 50), F(3, 100))
    assert pop.counted("h") == F(97, 98) and pop.counted("i") == F(2, 3)
    # the removal example inverts 10% -> 15%
    assert predict_remove_exact(F(2, 3), 1, F(15, 100)) == F(1, 10)
    # bias surface cell h = 0.99, f = 10
    b = bias_under_nonmonotonicity(F(1, 20), F(99, 100), F(1, 200), F(1, 20))
    assert b.bias == F(9, 100)
    # non-rare RD substitution example
    c = rd_substitution_check(RiskPair(F(1, 5), F(2, 5)), RiskPair(F(1, 2), F(5, 8)), tol=0)
    assert c.discrepancy == F(3, 40)


def predict_remove_exact(i, j, t1):
    from costcalc.cost import CostRemove

    return predict_remove(CostRemove(i, j), t1).predicted_risk


@pytest.mark.parametrize("prop", ["P1", "P4"])
def test_identification_props(prop):
    r = verify(prop, n_max=30)
    assert r.passed and r.checked > 0 and r.witness is None


@pytest.mark.parametrize("prop", ["P2", "P5"])
def test_transport_props_small(prop):
    r = verify(prop, pair_n_max=14)
    assert r.passed and r.checked > 0


@pytest.mark.parametrize("prop", ["P1", "P2", "P4", "P5"])
def test_injected_violation_yields_witness(prop):
    r = verify(prop, n_max=20, pair_n_max=12, inject_violation=1)
    assert not r.passed
    assert r.witness and all(isinstance(w, FinitePopulation) for w in r.witness)
    assert r.universe["inject_violation"] == 1
    d = r.as_dict()
    assert d["result"] == "fail" and isinstance(d["witness"][0], list)


@pytest.mark.parametrize("prop", ["P3", "P6"])
def test_bias_props_exhaustive_small(prop):
    r = verify(prop, pair_n_max=12)
    assert r.passed and r.checked > 0


def test_bias_sign_sampled_to_n40():
    r = verify("P3", pair_n_max=40, sample_pairs=20_000, seed=5)
    assert r.passed and r.checked == 20_000
    assert r.universe == {"pair_n_max": 40, "sample_pairs": 20_000, "seed": 5}


def test_rd_substitution_prop():
    r = verify("P8", pair_n_max=20)
    assert r.passed and r.universe["rare"] == "1/5"


def test_collapsibility_and_symmetry():
    assert verify("collapsibility", stratum_n_max=4).passed
    assert verify("symmetry-outcome", symmetry_n_max=15).passed
    assert verify("symmetry-exposure", symmetry_n_max=15).passed


def test_mechanism_prop():
    r = verify("P7", mechanism_size=10)
    assert r.passed and r.universe == {"max_size": 10}


def test_unknown_proposition():
    with pytest.raises(ValueError):
        verify("P9")


def test_verify_all_small_bounds():
    results = verify_all(
        n_max=10, pair_n_max=6, symmetry_n_max=6, stratum_n_max=3, mechanism_size=6
    )
    assert [r.proposition for r in results] == list(PROPOSITIONS)
    assert all(r.passed for r in results)
