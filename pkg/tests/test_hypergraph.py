from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from oneshot.errors import BudgetExceeded, InputError
from oneshot.hypergraph import (
    Hypergraph,
    SimpleGraph,
    all_maximum_independent_sets,
    disjoint,
    independence_number,
    is_exact_colouring,
    ks_colourable,
    orthogonality_graph,
    regularity,
)

graphs = st.integers(1, 14).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
)


def _graph(n, pairs):
    return SimpleGraph(range(n), [(u, v) for u, v in pairs if u != v])


def _nx_alpha(G):
    H = nx.Graph()
    H.add_nodes_from(G.vertices)
    H.add_edges_from(tuple(e) for e in G.edges)
    return max(len(c) for c in nx.find_cliques(nx.complement(H)))


@given(graphs)
def test_alpha_matches_networkx(data):
    G = _graph(*data)
    size, wit = independence_number(G)
    assert size == _nx_alpha(G)
    assert len(wit) == size and G.is_independent(wit)


@given(graphs)
def test_all_maximum_sets_counted(data):
    G = _graph(*data)
    size, count, found = all_maximum_independent_sets(G)
    H = nx.Graph()
    H.add_nodes_from(G.vertices)
    H.add_edges_from((u, v) for u, v in combinations(G.vertices, 2) if not G.adjacent(u, v))
    maxima = {frozenset(c) for c in nx.find_cliques(H) if len(c) == size}
    assert count == len(maxima)
    assert {frozenset(f) for f in found} <= maxima


def test_alpha_of_empty_and_complete():
    assert independence_number(SimpleGraph("abc", []))[0] == 3
    assert independence_number(SimpleGraph("abc", [("a", "b"), ("b", "c"), ("a", "c")]))[0] == 1


def test_alpha_budget():
    G = SimpleGraph(range(30), [(i, i + 1) for i in range(29)])
    with pytest.raises(BudgetExceeded):
        independence_number(G, budget=2)


hypergraphs = st.integers(1, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=4), min_size=1, max_size=10, unique_by=frozenset))
)


def _brute_ks(n, edges):
    for bits in range(1 << n):
        if all(sum(bits >> v & 1 for v in e) == 1 for e in edges):
            return True
    return False


@given(hypergraphs)
def test_ks_colourable_matches_exhaustive(data):
    n, edges = data
    H = Hypergraph(range(n), edges)
    ok, col = ks_colourable(H)
    assert ok == _brute_ks(n, edges)
    if ok:
        assert is_exact_colouring(H, col)


def test_odd_cycle_of_pairs_is_not_colourable():
    H = Hypergraph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    assert ks_colourable(H) == (False, None)


def test_orthogonality_graph_joins_edge_members():
    H = Hypergraph("abcd", [("a", "b", "c"), ("c", "d")])
    G = orthogonality_graph(H)
    assert G.adjacent("a", "c") and G.adjacent("c", "d") and not G.adjacent("a", "d")


def test_regularity_and_disjoint():
    # vertex degree, as with k outputs reachable from every channel input
    assert regularity(Hypergraph("abcd", [("a", "b"), ("c", "d")])) == 1
    assert regularity(Hypergraph("abcd", [("a", "b"), ("c", "d"), ("a", "c"), ("b", "d")])) == 2
    assert regularity(Hypergraph("abc", [("a", "b"), ("b", "c")])) is None
    assert disjoint([("a", "b"), ("c",)]) and not disjoint([("a", "b"), ("b",)])


@pytest.mark.parametrize(
    "verts, edges, msg",
    [("ab", [()], "empty"), ("ab", [("a", "z")], "unknown"), ("ab", [("a",), ("a",)], "duplicate"), ("aa", [], "duplicate")],
)
def test_hypergraph_rejects_bad_input(verts, edges, msg):
    with pytest.raises(InputError, match=msg):
        Hypergraph(verts, edges)


def test_json_round_trip():
    H = Hypergraph("abc", [("a", "b"), ("b", "c")], ["y0", "y1"])
    assert Hypergraph.from_json(H.to_json()) == H
