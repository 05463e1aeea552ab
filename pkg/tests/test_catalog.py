import copy
import itertools
import json
import random
from importlib import resources

import pytest

from multigerm.catalog import (
    CATALOG_ENV,
    Catalog,
    CatalogError,
    ConstraintViolation,
    default_catalog,
    fingerprint,
    instantiate,
    load_catalog,
)
from multigerm.germs import Multigerm, random_a_change

C = default_catalog()


def mg(text, N):
    return Multigerm.parse(text, N)


def test_instantiate_examples():
    assert instantiate("1.2.3", {"m": 1, "n": 2}).germ == mg("((t,0,0),(t^2,t^3,t^4))", 5)
    assert instantiate("3.1", {"n": 3}).germ == mg("((t,0,0),(0,t,0),(0,0,t))", 2)
    inst = instantiate("1.2.1", {"m": 2})
    assert inst.determinacy == 8 and inst.germ.truncation == 9


def test_instantiate_errors():
    with pytest.raises(ConstraintViolation, match="'m < n < 2m' violated by m=1, n=3"):
        instantiate("1.2.2", {"m": 1, "n": 3})
    with pytest.raises(ConstraintViolation, match="excluded case 'n == l == 2m - 1'"):
        instantiate("1.3.11", {"m": 2, "n": 3, "l": 3})
    with pytest.raises(CatalogError, match="unknown catalog entry"):
        instantiate("9.9", {})
    with pytest.raises(CatalogError, match="expected parameters"):
        instantiate("1.2.1", {})


def test_duplicate_assignments_are_refused():
    with pytest.raises(ConstraintViolation) as err:
        instantiate("2.1.4", {"m": 1, "n": 1})
    assert err.value.duplicate_of == "2.1.3"
    assert instantiate("2.1.4", {"m": 1, "n": 1}, allow_duplicates=True).germ.k == 2
    assert C["2.1.4"].duplicate_of({"m": 1, "n": 1}) == "2.1.3"
    assert {"m": 1, "n": 1} not in C.assignments("2.1.4", 20)


def test_enumerate():
    assert [i.params for i in C.enumerate("1.2.1", 9)] == [{"m": 1}, {"m": 2}, {"m": 3}]
    assert [str(i.germ.components[1]) for i in C.enumerate("1.2.1", 9)] == ["(t^2, t^3)", "(t^2, t^5)", "(t^2, t^7)"]
    assert all(i.params["m"] <= i.params["n"] for i in C.enumerate("2.1.1", 14))
    assert C.enumerate("1.2.1", 1) == []


def test_every_entry_instantiates_three_times():
    for e in C:
        assigns = C.smallest(e.id, 3)
        assert assigns, e.id
        for p in assigns:
            inst = C.instantiate(e.id, p)
            assert inst.germ.k >= 1


def test_catalog_size_and_parts():
    assert len(C) == 145
    assert set(C.parts()) >= {"1.1", "1.2", "1.3", "1.4", "2.1", "2.2", "3", "4.1", "4.2", "5"}


def test_fingerprint_examples():
    axes = C.instantiate("1.1.1").germ.pad(4)
    tangent_pair = mg("((t,0),(t,t^2))", 4)
    a, b = fingerprint(axes, 3), fingerprint(tangent_pair, 3)
    assert a.branches == b.branches and a.orbit != b.orbit
    assert fingerprint(mg("((t,0),(t^2,t^3))", 6), 5) != fingerprint(mg("((t,0),(t^2,t^5))", 6), 5)
    G3 = mg("((t,0,0),(0,t,0),(0,0,t))", 3)
    assert fingerprint(G3, 3) == fingerprint(mg("((0,t,0),(0,0,t),(t,0,0))", 3), 3)
    with pytest.raises(ValueError):
        fingerprint(mg("((t,0),(0,0))", 3), 3)


def test_fingerprint_is_a_invariant():
    rng = random.Random(17)
    F = C.instantiate("4.1.4", {"n": 2}).germ.pad(6)
    want = fingerprint(F, 5)
    for _ in range(4):
        assert fingerprint(random_a_change(F, rng), 5) == want


def _data():
    return json.loads(resources.files("multigerm").joinpath("data/catalog.json").read_text())


def test_schema_validation(tmp_path):
    data = _data()
    broken = copy.deepcopy(data)
    del broken["entries"][0]["components"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(broken))
    with pytest.raises(CatalogError):
        load_catalog(path)
    with pytest.raises(CatalogError):
        Catalog({"format": "x"})


def test_catalog_path_from_environment(tmp_path, monkeypatch):
    data = _data()
    data["entries"] = [e for e in data["entries"] if e["id"] == "1.2.1"]
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data))
    monkeypatch.setenv(CATALOG_ENV, str(path))
    assert len(load_catalog()) == 1


def test_parameters_never_exceed_weight():
    # assignments() and smallest() rely on this to bound their search
    for e in C:
        if not e.params:
            continue
        for values in itertools.product(*[range(lo, lo + 12) for _, lo in e.params]):
            env = dict(zip(e.param_names, values))
            if e.admissible(env):
                assert max(values) <= e.weight(env), (e.id, env)
