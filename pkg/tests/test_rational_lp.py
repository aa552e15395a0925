from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from oneshot.errors import InputError
from oneshot.lp import FeasibleTableau, maximize
from oneshot.polytope import enumerate_vertices, nullspace, polytope_vertices
from oneshot.hypergraph import Hypergraph
from oneshot.rational import fraction_str, jsonable, lcm_of_denominators, primitive, to_fraction


def test_to_fraction_forms():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(2) == 2
    assert to_fraction("0.25") == Fraction(1, 4)
    with pytest.raises(InputError):
        to_fraction("x/y")


def test_fraction_str_always_num_den():
    assert fraction_str(Fraction(5, 6)) == "5/6"
    assert fraction_str(Fraction(1)) == "1/1"


def test_primitive_and_lcm():
    assert primitive([Fraction(1, 2), Fraction(-1, 3), 0]) == (3, -2, 0)
    assert lcm_of_denominators([Fraction(1, 4), Fraction(1, 6)]) == 12


def test_jsonable_nests():
    out = jsonable({"a": [Fraction(1, 3), (1, 2)], "b": {"c": Fraction(2)}})
    assert out == {"a": ["1/3", [1, 2]], "b": {"c": "2/1"}}


small_lp = st.integers(2, 5).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-3, 3), min_size=n, max_size=n),
        st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n), min_size=1, max_size=3),
        st.lists(st.integers(1, 4), min_size=3, max_size=3),
    )
)


@given(small_lp)
def test_lp_matches_floating_solver(data):
    # nonnegative constraint rows with a positive rhs: always feasible when a row has a nonzero,
    # bounded when every column appears in some row
    c, A, b = data
    b = b[: len(A)]
    A = [row if any(row) else [1] * len(row) for row in A]
    res = maximize(c, A, b)
    ref = linprog(-np.array(c, float), A_eq=np.array(A, float), b_eq=np.array(b, float), bounds=(0, None), method="highs")
    if ref.status == 2:
        assert res.status == "infeasible"
    elif ref.status == 3:
        assert res.status == "unbounded"
    else:
        assert res.status == "optimal"
        assert abs(float(res.value) + ref.fun) < 1e-7
        assert all(sum(Fraction(a) * x for a, x in zip(row, res.x)) == bi for row, bi in zip(A, b))


def test_tableau_reuse_for_several_objectives():
    T = FeasibleTableau([[1, 1, 1]], [1])
    assert T.maximize([1, 0, 0]).value == 1
    assert T.maximize([0, 2, 1]).value == 2
    assert T.maximize([-1, -1, -1]).value == -1


def test_nullspace_is_orthogonal():
    rows = [[1, 2, 3], [0, 1, 1]]
    for v in nullspace(rows, 3):
        assert all(sum(Fraction(a) * x for a, x in zip(r, v)) == 0 for r in rows)


def _brute_vertices(A, b, n):
    """Basic feasible solutions by trying every column support."""
    from itertools import combinations

    A = np.array(A, dtype=float)
    out = set()
    for k in range(1, n + 1):
        for cols in combinations(range(n), k):
            sub = A[:, cols]
            if np.linalg.matrix_rank(sub) < k:
                continue
            x, *_ = np.linalg.lstsq(sub, np.array(b, float), rcond=None)
            if np.allclose(sub @ x, b) and (x > -1e-9).all():
                full = np.zeros(n)
                full[list(cols)] = x
                out.add(tuple(np.round(full, 9)))
    return out


@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=3), min_size=1, max_size=5))))
def test_vertex_enumeration_matches_basis_enumeration(data):
    n, edges = data
    uncovered = set(range(n)) - set().union(*edges)
    if uncovered:
        edges = edges + [uncovered]
    A = [[1 if j in e else 0 for j in range(n)] for e in edges]
    b = [1] * len(A)
    exact = enumerate_vertices(A, b, n)
    got = {tuple(round(float(x), 9) for x in v) for v in exact}
    assert got == _brute_vertices(A, b, n)
    for v in exact:
        assert all(sum(a * x for a, x in zip(row, v)) == 1 for row in A)


def test_polytope_vertices_of_a_triangle_edge_set():
    H = Hypergraph("abc", [("a", "b"), ("b", "c")])
    verts = polytope_vertices(H)
    assert sorted(tuple(v.assignment[k] for k in "abc") for v in verts) == [(0, 1, 0), (1, 0, 1)]


def test_uncovered_variable_is_unbounded():
    with pytest.raises(InputError, match="unbounded"):
        enumerate_vertices([[1, 0, 0]], [1], 3)
