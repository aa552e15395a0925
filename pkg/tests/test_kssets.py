import copy
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from oneshot.errors import InputError
from oneshot.hypergraph import independence_number, ks_colourable
from oneshot.kssets import (
    TransversalSearch,
    VectorSet,
    _data,
    adjacency_text,
    check_refutation,
    complete_basis,
    completion_closure,
    is_ks_basis_set,
    ks_basis_set_search,
    load_builtin,
    max_disjoint_bases,
    orthogonality_scenario,
    transversal_search,
    verify_conway_kochen,
)

vec3 = st.tuples(*[st.integers(-4, 4)] * 3).filter(any)


@pytest.fixture(scope="module")
def ck31():
    return load_builtin("ck31")


@pytest.fixture(scope="module")
def report():
    return verify_conway_kochen()


def test_vector_set_rejects_parallel_and_zero():
    with pytest.raises(InputError, match="parallel"):
        VectorSet(3, {"a": [1, 2, 0], "b": [-2, -4, 0]})
    with pytest.raises(InputError):
        VectorSet(3, {"a": [0, 0, 0]})


def test_standard_basis_scenario():
    S = orthogonality_scenario(VectorSet(3, {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1], "w": [1, 1, 0]}))
    assert S.bases == (("x", "y", "z"),)
    # w is orthogonal only to z, and (1,-1,0) is missing
    assert [set(b) for b in S.incomplete] == [{"z", "w"}]


@given(vec3, vec3)
def test_cross_product_completion(u, v):
    # make v orthogonal to u by Gram-Schmidt over the rationals
    uu = sum(a * a for a in u)
    uv = sum(a * b for a, b in zip(u, v))
    w = [Fraction(b) * uu - Fraction(a) * uv for a, b in zip(u, v)]
    if not any(w):
        return
    c = complete_basis([u, w])
    assert any(c)
    assert sum(a * b for a, b in zip(c, u)) == 0 and sum(a * b for a, b in zip(c, w)) == 0


def test_completion_examples():
    assert complete_basis([[1, 0, 0], [0, 1, 0]]) in ((0, 0, 1), (0, 0, -1))
    c = complete_basis([[1, 2, -1], [1, 0, 1]])
    assert c in ((1, -1, -1), (-1, 1, 1))
    c4 = complete_basis([[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, -1, 0]])
    assert c4 in ((0, 0, 0, 1), (0, 0, 0, -1))
    with pytest.raises(InputError, match="not-orthogonal"):
        complete_basis([[1, 1, 0], [1, 0, 0]])
    with pytest.raises(InputError):
        complete_basis([[1, 0, 0]])


def test_closure_is_idempotent(ck31):
    final, log = completion_closure(ck31.vectors)
    assert [(st.rays, st.complete_bases) for st in log] == [(51, 37), (55, 41)]
    again, more = completion_closure(final)
    assert more == [] and set(again.ids) == set(final.ids)


def test_closure_stage_limit(ck31):
    with pytest.raises(Exception) as info:
        completion_closure(ck31.vectors, max_stages=1)
    assert "stage" in str(info.value)


def test_ck31_counts(ck31):
    assert len(ck31.hypergraph.vertices) == 31
    assert len(ck31.bases) == 17 and len(ck31.incomplete) == 20
    assert independence_number(ck31.orthogonality_graph())[0] == 11
    assert adjacency_text(ck31) == _data("ck31.json")["adjacency_text"]


def test_ck31_disjoint_families(ck31):
    size, count, found = max_disjoint_bases(ck31)
    assert (size, count) == (13, 98)
    for fam in found:
        labels, bases, _ = ck31.measurement_bases()
        sets = [set(bases[labels.index(l)]) for l in fam]
        assert all(not (a & b) for a, b in combinations(sets, 2))


def test_ck31_has_no_ks_basis_set(ck31):
    res = ks_basis_set_search(ck31, 12)
    assert res.best is None and res.families_checked == 722


def test_refutation_checker():
    S = orthogonality_scenario(
        VectorSet(3, {"a": [1, 0, 0], "b": [0, 1, 0], "c": [0, 0, 1], "d": [0, 1, 1], "e": [0, 1, -1]})
    )
    found = transversal_search(S, [("a", "b", "c")])
    assert not found.refuted and check_refutation(S, found) is False
    # a and b are orthogonal, so picking one from each singleton is impossible
    res = transversal_search(S, [("a",), ("b", "c")])
    assert res.refuted and check_refutation(S, res)
    # the checker re-derives closed branches, so leaves are hints it verifies
    assert check_refutation(S, TransversalSearch(res.family, None, ()))
    # false dead ends are rejected: d is not orthogonal to b
    assert not check_refutation(S, TransversalSearch((("d",), ("b", "c")), None, ((("d",), 1),)))
    # a real dead end does not hide the open branch through d
    assert not check_refutation(S, TransversalSearch((("a", "d"), ("b", "c")), None, ((("a",), 1),)))


def test_peres_dotted_bases_are_a_ks_basis_set():
    # six disjoint bases but alpha = 5, so no pairwise non-orthogonal pick exists
    S = load_builtin("peres24")
    assert not ks_colourable(S.hypergraph)[0]
    res = transversal_search(S, list(S.dotted))
    assert res.refuted and check_refutation(S, res)
    assert is_ks_basis_set(S, list(S.dotted))


def test_conway_kochen_claims_pass(report):
    assert report.passed, report.to_text()
    assert report.stages == [(31, 17, 20), (51, 37, 4), (55, 41, 0)]
    assert report.alpha == {"initial": 11, "final": 25}
    assert report.max_disjoint["final"] == {"size": 13, "count": 736}
    assert "PASS" in report.to_text() and report.to_json()["passed"] is True


def test_deleting_a_listed_completion_ray_is_caught():
    data = copy.deepcopy(_data("ck31.json"))
    del data["completion_stages"][0]["rays"]["47"]
    rep = verify_conway_kochen(data)
    assert not rep.passed
    assert rep.first_failure().name == "stage-1 completion count"


def test_perturbed_ray_is_caught():
    data = copy.deepcopy(_data("ck31.json"))
    data["rays"]["1"] = [-1, 3, 1]
    rep = verify_conway_kochen(data)
    assert not rep.passed and rep.first_failure().name == "complete bases"
    with pytest.raises(Exception):
        rep.raise_for_failure()


def test_peres_builtin_structure():
    S = load_builtin("peres24")
    assert len(S.hypergraph.vertices) == 24 and len(S.bases) == 24 and len(S.dotted) == 6
    assert S.hypergraph.edge_labels[-6:] == tuple(f"m{i}" for i in range(1, 7))


def test_unknown_builtin():
    with pytest.raises(InputError):
        load_builtin("cega18")


def test_vector_set_json(tmp_path, ck31):
    p = tmp_path / "rays.json"
    p.write_text(__import__("json").dumps(ck31.vectors.to_json()))
    assert VectorSet.load(p).rays == ck31.vectors.rays
