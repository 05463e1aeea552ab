import random

import pytest

from multigerm.germs import Multigerm, random_a_change
from multigerm.transversal import complete_transversal, reduce_step, transversal_scan


def mg(text, N):
    return Multigerm.parse(text, N)


def test_line_and_cusp_in_three_space():
    tr = complete_transversal(mg("((t,0,0),(0,t^3,0))", 3), 3)
    assert tr.level == 4
    assert tr.spans([mg("((0,0,0),(t^4,0,0))", 4), mg("((0,0,0),(0,0,t^4))", 4)])
    assert tr.to_json()["basis"] == ["(t^4, 0, 0)_2", "(0, 0, t^4)_2"]


def test_line_and_cusp_in_general_position():
    tr = complete_transversal(mg("((t,0,0),(t^2,t^3,0))", 3), 3)
    assert tr.spans([mg("((0,0,0),(0,t^4,0))", 4), mg("((0,0,0),(0,0,t^4))", 4)])


def test_axes_are_one_determined():
    F = mg("((t,0),(0,t))", 7)
    for m in range(1, 7):
        assert complete_transversal(F, m).is_trivial
    assert all(t.is_trivial for t in transversal_scan(F, 2, 6))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_line_and_cusp_scan(m):
    F = mg(f"((t,0),(t^2,t^{2 * m + 1}))", 4 * m + 2)
    scan = {t.level: t for t in transversal_scan(F, 2 * m + 2, 4 * m + 2)}
    for L, t in scan.items():
        if L % 2 or L > 4 * m:
            assert t.is_trivial, L
        else:
            assert t.to_json()["basis"] == [f"(0, t^{L})_2"]


def test_line_and_tacnode_branch_trivial_at_seven_and_eight():
    F = mg("((t,0),(t^3,t^4))", 8)
    assert [t.is_trivial for t in transversal_scan(F, 7, 8)] == [True, True]


def test_complement_dimension_identity():
    F = mg("((t,0,0),(t^2,t^5,0),(0,t^3,t^4))", 8)
    kn = F.k * F.ambient_dim
    for t in transversal_scan(F, 2, 8):
        assert t.slice_rank + t.dim == kn == t.slice_dim


def test_transversal_dimension_is_a_invariant():
    rng = random.Random(3)
    F = mg("((t,0,0),(0,t^3,t^5))", 8)
    want = [t.dim for t in transversal_scan(F, 2, 7)]
    for _ in range(3):
        G = random_a_change(F, rng)
        assert [t.dim for t in transversal_scan(G, 2, 7)] == want


def test_reduce_step():
    F = mg("((t,0),(t^2,t^3))", 3)
    step = reduce_step(mg("((t,0),(t^2,t^3+5t^4))", 4), F)
    assert step.t == mg("((0,0),(0,5t^4))", 4)
    assert reduce_step(F.pad(4), F).is_zero
    # t * f' on the cusp is a tangent direction
    assert reduce_step(mg("((t,0),(t^2+2t^4,t^3))", 4), F).is_zero


def test_reduce_step_requires_matching_jets():
    with pytest.raises(ValueError):
        reduce_step(mg("((t,0),(t^2,t^4))", 4), mg("((t,0),(t^2,t^3))", 3))


def test_level_errors():
    with pytest.raises(ValueError):
        complete_transversal(mg("((t,0))", 3), 0)
    with pytest.raises(ValueError):
        transversal_scan(mg("((t,0))", 3), 1, 3)
