"""Hypergraphs, orthogonality graphs, independence numbers and KS-colourings.

Vertices are opaque string ids. Internally every structure maps them to dense
integer indices in vertex order and works on Python-int bitmasks, which keeps
the searches deterministic: whenever several optimal witnesses exist, the one
returned is the lexicographically smallest in vertex order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .errors import BudgetExceeded, InputError

DEFAULT_NODE_BUDGET = 10**9


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Hypergraph:
    """Vertices plus an ordered list of hyperedges (vertex subsets).

    Hyperedges are stored as tuples sorted in vertex order. ``edge_labels``
    names the hyperedges (channel outputs, basis names); it defaults to
    ``e0, e1, ...``.
    """

    vertices: tuple[str, ...]
    hyperedges: tuple[tuple[str, ...], ...]
    edge_labels: tuple[str, ...] = ()
    index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, vertices: Iterable, hyperedges: Iterable[Iterable], edge_labels: Iterable | None = None):
        verts = tuple(str(v) for v in vertices)
        if len(set(verts)) != len(verts):
            raise InputError("duplicate vertex ids")
        index = {v: i for i, v in enumerate(verts)}
        edges = []
        seen = set()
        for raw in hyperedges:
            members = {str(v) for v in raw}
            if not members:
                raise InputError("empty hyperedge")
            unknown = members - index.keys()
            if unknown:
                raise InputError(f"hyperedge references unknown vertices {sorted(unknown)}")
            key = frozenset(members)
            if key in seen:
                raise InputError(f"duplicate hyperedge {sorted(members, key=index.get)}")
            seen.add(key)
            edges.append(tuple(sorted(members, key=index.get)))
        labels = tuple(str(x) for x in edge_labels) if edge_labels is not None else tuple(f"e{i}" for i in range(len(edges)))
        if len(labels) != len(edges) or len(set(labels)) != len(labels):
            raise InputError("edge_labels must be unique and match the number of hyperedges")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "hyperedges", tuple(edges))
        object.__setattr__(self, "edge_labels", labels)
        object.__setattr__(self, "index", index)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge_masks(self) -> list[int]:
        return [sum(1 << self.index[v] for v in e) for e in self.hyperedges]

    def degree(self, v: str) -> int:
        return sum(1 for e in self.hyperedges if v in e)

    def uncovered_vertices(self) -> list[str]:
        covered = set().union(*self.hyperedges) if self.hyperedges else set()
        return [v for v in self.vertices if v not in covered]

    def violations(self) -> list[str]:
        """Soft invariant check: vertices outside every hyperedge."""
        return [f"vertex {v!r} lies in no hyperedge" for v in self.uncovered_vertices()]

    def edge(self, label: str) -> tuple[str, ...]:
        return self.hyperedges[self.edge_labels.index(label)]

    def to_json(self) -> dict:
        out = {"vertices": list(self.vertices), "hyperedges": [list(e) for e in self.hyperedges]}
        if self.edge_labels != tuple(f"e{i}" for i in range(len(self.hyperedges))):
            out["edge_labels"] = list(self.edge_labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Hypergraph":
        try:
            return cls(data["vertices"], data["hyperedges"], data.get("edge_labels"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad hypergraph JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Hypergraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple[str, ...]
    edges: frozenset

    def __init__(self, vertices: Iterable, edges: Iterable[Sequence]):
        verts = tuple(str(v) for v in vertices)
        if len(set(verts)) != len(verts):
            raise InputError("duplicate vertex ids")
        vs = set(verts)
        es = set()
        for e in edges:
            u, w = (str(x) for x in e)
            if u == w:
                raise InputError(f"self-loop at {u!r}")
            if u not in vs or w not in vs:
                raise InputError(f"edge ({u!r}, {w!r}) references unknown vertex")
            es.add(frozenset((u, w)))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(es))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def adjacency_masks(self) -> list[int]:
        index = {v: i for i, v in enumerate(self.vertices)}
        adj = [0] * len(self.vertices)
        for e in self.edges:
            u, w = (index[x] for x in e)
            adj[u] |= 1 << w
            adj[w] |= 1 << u
        return adj

    def adjacent(self, u: str, w: str) -> bool:
        return frozenset((u, w)) in self.edges

    def is_complete(self) -> bool:
        n = len(self.vertices)
        return len(self.edges) == n * (n - 1) // 2

    def is_independent(self, subset: Iterable[str]) -> bool:
        return all(not self.adjacent(u, w) for u, w in combinations(list(subset), 2))


@dataclass(frozen=True)
class Colouring:
    """A {0,1}-valuation of the vertices."""

    assignment: dict

    def ones(self) -> list[str]:
        return [v for v, b in self.assignment.items() if b]


def orthogonality_graph(H: Hypergraph) -> SimpleGraph:
    """Vertices adjacent iff they share at least one hyperedge."""
    edges = set()
    for e in H.hyperedges:
        for u, w in combinations(e, 2):
            edges.add((u, w))
    return SimpleGraph(H.vertices, edges)


# -- maximum independent set -------------------------------------------------


class _CliqueSearch:
    """Branch-and-bound maximum clique on bitmask adjacency.

    Bounding uses greedy sequential colouring (Tomita-style): a set coloured
    with c colours cannot contain a clique larger than c.
    """

    def __init__(self, adj: list[int], budget: int):
        self.adj = adj
        self.budget = budget
        self.nodes = 0

    def _colour_order(self, P: int):
        adj = self.adj
        order = []
        bounds = []
        colour = 0
        U = P
        while U:
            colour += 1
            Q = U
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~adj[v] & ~low
                U &= ~low
                order.append(v)
                bounds.append(colour)
        return order, bounds

    def _tick(self, best):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"independence search exceeded {self.budget} nodes", best=best)

    def max_size(self, P: int, lower: int = 0) -> int:
        self.best = lower
        self._expand(0, P)
        return self.best

    def _expand(self, size: int, P: int):
        self._tick(self.best)
        order, bounds = self._colour_order(P)
        for i in range(len(order) - 1, -1, -1):
            if size + bounds[i] <= self.best:
                return
            v = order[i]
            newP = P & self.adj[v]
            if newP:
                self._expand(size + 1, newP)
            elif size + 1 > self.best:
                self.best = size + 1
            P &= ~(1 << v)

    def exists(self, P: int, k: int) -> bool:
        """Is there a clique of size >= k inside P?"""
        if k <= 0:
            return True
        self.target = k
        try:
            self._exists(0, P)
        except _Found:
            return True
        return False

    def _exists(self, size: int, P: int):
        self._tick(None)
        if size >= self.target:
            raise _Found
        order, bounds = self._colour_order(P)
        for i in range(len(order) - 1, -1, -1):
            if size + bounds[i] < self.target:
                return
            v = order[i]
            self._exists(size + 1, P & self.adj[v])
            P &= ~(1 << v)


class _Found(Exception):
    pass


def _complement_masks(adj: list[int]) -> list[int]:
    n = len(adj)
    full = (1 << n) - 1
    return [(full & ~adj[i]) & ~(1 << i) for i in range(n)]


def max_clique_masks(adj: list[int], budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, list[int]]:
    """Maximum clique size and lexicographically smallest maximum clique (indices)."""
    n = len(adj)
    if n == 0:
        return 0, []
    search = _CliqueSearch(adj, budget)
    full = (1 << n) - 1
    size = search.max_size(full)
    witness = []
    P = full
    for v in range(n):
        if not (P >> v) & 1:
            continue
        need = size - len(witness) - 1
        cand = P & adj[v] & ~((1 << (v + 1)) - 1)
        if search.exists(cand, need):
            witness.append(v)
            P = cand
            if len(witness) == size:
                break
        else:
            P &= ~(1 << v)
    return size, witness


def independence_number(G: SimpleGraph, budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, tuple[str, ...]]:
    """Exact independence number with the lexicographically smallest maximum witness.

    Raises BudgetExceeded after ``budget`` branch-and-bound nodes.
    """
    comp = _complement_masks(G.adjacency_masks())
    size, idx = max_clique_masks(comp, budget)
    return size, tuple(G.vertices[i] for i in idx)


def all_maximum_independent_sets(G: SimpleGraph, cap: int = 10**4, budget: int = DEFAULT_NODE_BUDGET):
    """Size, exact count, and up to ``cap`` maximum independent sets in lexicographic order."""
    adj = G.adjacency_masks()
    comp = _complement_masks(adj)
    n = len(adj)
    if n == 0:
        return 0, 1, [()]
    search = _CliqueSearch(comp, budget)
    size = search.max_size((1 << n) - 1)
    found = []
    count = 0

    def rec(chosen, P, start):
        nonlocal count
        search._tick(None)
        if len(chosen) == size:
            count += 1
            if len(found) < cap:
                found.append(tuple(G.vertices[i] for i in chosen))
            return
        need = size - len(chosen)
        if bin(P).count("1") < need:
            return
        for v in _bits(P):
            if v < start:
                continue
            rest = P & comp[v] & ~((1 << (v + 1)) - 1)
            if search.exists(rest, need - 1):
                rec(chosen + [v], rest, v + 1)

    rec([], (1 << n) - 1, 0)
    return size, count, found


# -- exact-one colouring -------------------------------------------------------


def ks_colourable(H: Hypergraph, budget: int = DEFAULT_NODE_BUDGET) -> tuple[bool, Colouring | None]:
    """Decide whether some {0,1} assignment puts exactly one 1 in every hyperedge.

    Backtracking with unit propagation, branching on vertices in order and
    trying 1 before 0, so the witness is the first such assignment in that
    order.
    """
    n = H.n
    edges = H.edge_masks()
    incident = [[j for j, e in enumerate(edges) if (e >> i) & 1] for i in range(n)]
    nodes = 0

    def propagate(ones: int, zeros: int):
        changed = True
        while changed:
            changed = False
            for e in edges:
                on = e & ones
                if on & (on - 1):
                    return None
                free = e & ~ones & ~zeros
                if on:
                    if free:
                        zeros |= free
                        changed = True
                elif not free:
                    return None
                elif not (free & (free - 1)):
                    ones |= free
                    changed = True
        return ones, zeros

    def search(ones: int, zeros: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"colouring search exceeded {budget} nodes")
        state = propagate(ones, zeros)
        if state is None:
            return None
        ones, zeros = state
        free = ~(ones | zeros) & ((1 << n) - 1)
        # vertices in no hyperedge are unconstrained: set them to 0
        for v in _bits(free):
            if incident[v]:
                break
            zeros |= 1 << v
        else:
            return ones
        bit = 1 << v
        found = search(ones | bit, zeros)
        if found is not None:
            return found
        return search(ones, zeros | bit)

    ones = search(0, 0)
    if ones is None:
        return False, None
    return True, Colouring({v: (ones >> i) & 1 for i, v in enumerate(H.vertices)})


def is_exact_colouring(H: Hypergraph, colouring: Colouring) -> bool:
    return all(sum(colouring.assignment[v] for v in e) == 1 for e in H.hyperedges)


def regularity(H: Hypergraph) -> int | None:
    """k if every vertex lies in exactly k hyperedges, otherwise None."""
    degrees = {H.degree(v) for v in H.vertices}
    if len(degrees) == 1:
        k = degrees.pop()
        return k if k > 0 else None
    return None


def disjoint(edges: Sequence[Iterable[str]]) -> bool:
    seen: set = set()
    for e in edges:
        e = set(e)
        if seen & e:
            return False
        seen |= e
    return True
