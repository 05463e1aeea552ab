import pytest

from multigerm.classify import library_family
from multigerm.germs import Multigerm
from multigerm.mather import mather_check, merge_parameter
from multigerm.tangent import AffineFamily, GroupFilter


def mg(text, N):
    return Multigerm.parse(text, N)


def one_parameter(base, direction, N, **kw):
    return AffineFamily(mg(base, N), (mg(direction, N),), **kw)


def test_line_and_space_curve_merge():
    X = one_parameter("((t,0,0),(t^5,t^3,t^4))", "((0,0,0),(0,0,t^5))", 5, points=((0,), (1,)), nonzero=False)
    rep = mather_check(X, 5)
    assert rep.contained and rep.constant_rank
    assert rep.ranks == [24, 24]


def test_plane_branch_merge():
    X = one_parameter("((t^3,t^5+t^6))", "((0,t^9))", 9, nonzero=False)
    res = merge_parameter(X, 9)
    assert not res.refused
    assert res.merged == mg("((t^3,t^5+t^6))", 9)
    assert len(set(res.report.ranks)) == 1


def test_higher_term_merge():
    X = one_parameter("((t^4,t^3))", "((t^8,0))", 8, nonzero=False)
    assert merge_parameter(X, 8).merged == mg("((t^4,t^3))", 8)


def test_pair_of_cusps_refused():
    lf = library_family("F2.1")
    rep = mather_check(lf.family, 3)
    assert not rep.contained
    assert rep.witness_vector == "(0, t^3)_2"
    res = merge_parameter(lf.family, 3)
    assert res.refused and "tangent" in res.reason


def test_single_point():
    rep = mather_check(AffineFamily(mg("((t,0),(0,t))", 3)), 3)
    assert rep.contained and rep.constant_rank


def test_merge_uses_one_when_zero_is_excluded():
    X = one_parameter("((t^3,t^5+t^6))", "((0,t^9))", 9, excluded=(0,))
    assert merge_parameter(X, 9).parameter == 1


def test_errors():
    X = AffineFamily(mg("((t^2,t^3))", 4), (mg("((0,t^4))", 4), mg("((0,2t^4))", 4)))
    with pytest.raises(ValueError):
        mather_check(X, 4)
    with pytest.raises(ValueError):
        mather_check(one_parameter("((t^2,t^3))", "((0,t^4))", 4), 4, samples=1)
    with pytest.raises(ValueError):
        merge_parameter(AffineFamily(mg("((t^2,t^3))", 4)), 4)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_verdict_stable_under_resampling(seed):
    X = one_parameter("((t^3,t^5+t^6))", "((0,t^9))", 9, nonzero=False)
    assert mather_check(X, 9, seed=seed).single_orbit
    assert not mather_check(library_family("F2.1").family, 3, seed=seed).contained


def test_subgroup_filter():
    X = one_parameter("((t^3,t^5+t^6))", "((0,t^9))", 9, nonzero=False)
    assert mather_check(X, 9, GroupFilter.a_r(1)).contained
