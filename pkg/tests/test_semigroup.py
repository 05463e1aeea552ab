import random

import pytest

from multigerm.germs import ComponentGerm, Multigerm, random_a_change
from multigerm.semigroup import (
    IncompleteSemigroupError,
    determinacy_bound,
    gap_data,
    invariant_pair,
    value_semigroup,
)
from oracles import achieved_orders, grid_orders, random_component_strings


def comp(*coords, N=12):
    return ComponentGerm.from_strings(coords, N)


@pytest.mark.parametrize("coords, k, gaps", [
    (("t^2", "t^3"), 0, (1,)),
    (("t^3", "t^4"), 1, (1, 2, 5)),
    (("t^3", "t^4"), 0, (1, 2, 5)),
    (("t^2", "t^4+t^5"), 1, (1, 3)),
    (("t^2", "t^4+t^5"), 0, (1, 3)),
])
def test_worked_gap_sets(coords, k, gaps):
    S = value_semigroup(comp(*coords), k)
    assert S.complete
    assert gap_data(S).gaps == gaps


def test_s0_contains_zero():
    assert 0 in value_semigroup(comp("t^2", "t^3"), 0).achieved
    assert 0 not in value_semigroup(comp("t^2", "t^3"), 1).achieved


@pytest.mark.parametrize("coords, pair", [
    (("t^2", "t^5"), (2, 5)),
    (("t", "0"), (1, "NoQ")),
    (("t^3", "t^4+t^5"), (3, 4)),
] + [(("t^2", f"t^{2 * m + 1}"), (2, 2 * m + 1)) for m in range(1, 5)])
def test_invariant_pair(coords, pair):
    assert invariant_pair(comp(*coords)).as_tuple() == pair


@pytest.mark.parametrize("coords, k, bound", [
    (("t^2", "t^3"), 1, 1),
    (("t^3", "t^4"), 1, 5),
    (("t^2", "t^7"), 1, 5),
])
def test_determinacy_bound(coords, k, bound):
    assert determinacy_bound(comp(*coords), k) == bound


def test_determinacy_bound_errors():
    with pytest.raises(ValueError, match="n >= 2"):
        determinacy_bound(comp("t^2"), 1)
    with pytest.raises(IncompleteSemigroupError):
        determinacy_bound(comp("t^4", "t^9", N=10), 1)
    with pytest.raises(ValueError):
        value_semigroup(comp("t^2", "t^3", N=6), 0, order_bound=7)


def test_random_components_match_rank_oracle():
    rng = random.Random(2024)
    for _ in range(20):
        n, p = rng.choice([2, 3]), rng.randint(1, 4)
        cs = random_component_strings(rng, n, p, 12)
        c = ComponentGerm.from_strings(cs, 12)
        for k in (0, 1, 2):
            S = value_semigroup(c, k)
            top = S.conductor if S.complete else 13
            assert {a for a in S.achieved if a < top} == {a for a in achieved_orders(cs, k, 12) if a < top}, cs


def test_small_grid_orders_are_achieved():
    rng = random.Random(7)
    for _ in range(5):
        cs = random_component_strings(rng, 2, rng.randint(2, 4), 10)
        S = value_semigroup(ComponentGerm.from_strings(cs, 10), 1)
        assert grid_orders(cs, 10) <= set(S.achieved)


def test_filtration_is_decreasing():
    rng = random.Random(5)
    for _ in range(10):
        cs = random_component_strings(rng, 3, rng.randint(1, 4), 12)
        c = ComponentGerm.from_strings(cs, 12)
        prev = set(value_semigroup(c, 0).achieved)
        for k in range(1, 4):
            cur = set(value_semigroup(c, k).achieved)
            assert cur <= prev
            prev = cur


def test_closure_under_addition():
    S = value_semigroup(comp("t^3", "t^5+t^7", N=16), 0)
    for a in S.achieved:
        for b in S.achieved:
            if a + b <= S.bound:
                assert a + b in S


def test_semigroup_is_a_invariant():
    rng = random.Random(9)
    F = Multigerm.parse("((t^3,t^4+t^5,t^7))", 12)
    want = value_semigroup(F.components[0], 1).achieved
    for _ in range(5):
        G = random_a_change(F, rng)
        assert value_semigroup(G.components[0], 1).achieved == want
