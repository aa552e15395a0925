"""Exact vector sets, orthogonality scenarios and KS-basis-set searches.

Rays are rational vectors compared projectively: two rays are the same when
one is a nonzero multiple of the other. Every orthogonality decision is an
exact integer dot product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, ComputationError, InputError
from .hypergraph import (
    DEFAULT_NODE_BUDGET,
    Hypergraph,
    SimpleGraph,
    _bits,
    all_maximum_independent_sets,
    independence_number,
    ks_colourable,
)
from .polytope import nullspace
from .rational import jsonable, primitive, to_fraction

MAX_STAGES = 16
WITNESS_CAP = 10**4


def _dot(u, w):
    return sum(a * b for a, b in zip(u, w))


@dataclass(frozen=True)
class VectorSet:
    dim: int
    rays: Mapping  # id -> tuple of Fractions

    def __init__(self, dim: int, rays: Mapping):
        if dim < 2:
            raise InputError("dimension must be at least 2")
        table = {}
        seen = {}
        for k, vec in rays.items():
            v = tuple(to_fraction(c) for c in vec)
            if len(v) != dim:
                raise InputError(f"ray {k!r} has {len(v)} coordinates, expected {dim}")
            if not any(v):
                raise InputError(f"ray {k!r} is the zero vector")
            key = primitive(v)
            if key in seen:
                raise InputError(f"rays {seen[key]!r} and {k!r} are parallel")
            seen[key] = str(k)
            table[str(k)] = v
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rays", table)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.rays)

    def canonical(self, k: str) -> tuple[int, ...]:
        return primitive(self.rays[k])

    def orthogonal(self, a: str, b: str) -> bool:
        return _dot(self.rays[a], self.rays[b]) == 0

    def find(self, vec) -> str | None:
        """Id of the ray parallel to ``vec``, if present."""
        key = primitive(vec)
        for k in self.rays:
            if self.canonical(k) == key:
                return k
        return None

    def extended(self, new: Mapping) -> "VectorSet":
        merged = dict(self.rays)
        merged.update(new)
        return VectorSet(self.dim, merged)

    def orthogonality_graph(self) -> SimpleGraph:
        ids = self.ids
        return SimpleGraph(ids, [(a, b) for a, b in combinations(ids, 2) if self.orthogonal(a, b)])

    def to_json(self) -> dict:
        def coord(c):
            return int(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"

        return {"dim": self.dim, "rays": {k: [coord(c) for c in v] for k, v in self.rays.items()}}

    @classmethod
    def from_json(cls, data: dict) -> "VectorSet":
        try:
            return cls(int(data["dim"]), data["rays"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"bad ray-set JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "VectorSet":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Scenario:
    """Bases as hyperedges, optionally backed by rays.

    ``incomplete`` holds maximal orthogonal sets of size d-1, ``small`` the
    maximal orthogonal sets that are smaller still, and ``dotted`` the
    disjoint bases singled out as an encoding.
    """

    hypergraph: Hypergraph
    vectors: VectorSet | None = None
    incomplete: tuple = ()
    small: tuple = ()
    dotted: tuple = ()

    def __post_init__(self):
        if self.vectors is not None:
            V = self.vectors
            if set(V.ids) != set(self.hypergraph.vertices):
                raise InputError("scenario vertices and ray ids differ")
            for lab, e in zip(self.hypergraph.edge_labels, self.hypergraph.hyperedges):
                if len(e) != V.dim:
                    raise InputError(f"basis {lab!r} has {len(e)} rays, expected {V.dim}")
                for a, b in combinations(e, 2):
                    if not V.orthogonal(a, b):
                        raise InputError(f"basis {lab!r}: rays {a!r} and {b!r} are not orthogonal")
        edges = {frozenset(e) for e in self.hypergraph.hyperedges}
        dotted = tuple(tuple(str(v) for v in b) for b in self.dotted)
        for b in dotted:
            if frozenset(b) not in edges:
                raise InputError(f"dotted basis {b} is not a hyperedge")
        object.__setattr__(self, "dotted", dotted)

    @property
    def bases(self) -> tuple[tuple[str, ...], ...]:
        return self.hypergraph.hyperedges

    def all_bases(self) -> tuple[tuple[str, ...], tuple[tuple[str, ...], ...]]:
        """(labels, bases) for complete bases followed by incomplete ones."""
        labels = self.hypergraph.edge_labels + tuple(_basis_label(b) for b in self.incomplete)
        return labels, self.hypergraph.hyperedges + tuple(tuple(b) for b in self.incomplete)

    def measurement_bases(self):
        """(labels, bases, orthogonality graph) with every incomplete basis completed.

        A measurement is always a complete basis, so an incomplete basis
        {a, b} stands for {a, b, c} with c its (outside) completing ray; that
        ray is named ``+a-b`` and takes part in orthogonality like any other.
        Without rays the incomplete bases are used as they are.
        """
        labels, bases = self.all_bases()
        if self.vectors is None:
            return labels, bases, self.orthogonality_graph()
        V = self.vectors
        rays = dict(V.rays)
        full = list(self.hypergraph.hyperedges)
        for b in self.incomplete:
            b = tuple(b)
            if len(b) == V.dim - 1:
                mate = "+" + _basis_label(b)
                rays[mate] = complete_basis([V.rays[k] for k in b])
                b = b + (mate,)
            full.append(b)
        W = VectorSet(V.dim, rays)
        return labels, tuple(full), W.orthogonality_graph()
    def orthogonality_graph(self) -> SimpleGraph:
        """Exact orthogonality when rays are known, shared-hyperedge adjacency otherwise."""
        if self.vectors is not None:
            return self.vectors.orthogonality_graph()
        pairs = set()
        for e in list(self.hypergraph.hyperedges) + [tuple(b) for b in self.incomplete]:
            pairs.update(combinations(e, 2))
        return SimpleGraph(self.hypergraph.vertices, pairs)


def _maximal_cliques(adj: list[int]) -> list[list[int]]:
    """Bron-Kerbosch with pivoting; cliques as sorted index lists, sorted."""
    out = []

    def bk(R, P, X):
        if not P and not X:
            out.append(sorted(R))
            return
        pivot = max(_bits(P | X), key=lambda u: bin(P & adj[u]).count("1"))
        for v in list(_bits(P & ~adj[pivot])):
            bk(R + [v], P & adj[v], X & adj[v])
            P &= ~(1 << v)
            X |= 1 << v

    n = len(adj)
    if n:
        bk([], (1 << n) - 1, 0)
    return sorted(out)


def _basis_label(ids: Sequence[str]) -> str:
    return "-".join(ids)


def orthogonality_scenario(V: VectorSet) -> Scenario:
    """Complete bases are maximal orthogonal d-sets; smaller maximal sets are recorded separately."""
    G = V.orthogonality_graph()
    ids = V.ids
    cliques = _maximal_cliques(G.adjacency_masks())
    complete, incomplete, small = [], [], []
    for c in cliques:
        members = tuple(ids[i] for i in c)
        if len(c) == V.dim:
            complete.append(members)
        elif len(c) == V.dim - 1:
            incomplete.append(members)
        else:
            small.append(members)
    H = Hypergraph(ids, complete, [_basis_label(b) for b in complete])
    return Scenario(H, V, tuple(incomplete), tuple(small))


def adjacency_text(S: Scenario) -> str:
    """``[v; w1, w2, ...], ...`` listing every ray with its orthogonal partners in id order."""
    G = S.orthogonality_graph()
    order = {v: i for i, v in enumerate(G.vertices)}
    parts = []
    for v in G.vertices:
        nbrs = sorted((w for e in G.edges if v in e for w in e if w != v), key=order.get)
        parts.append(f"[{v}; {', '.join(nbrs)}]")
    return ", ".join(parts)


def complete_basis(partial: Sequence[Sequence]) -> tuple[int, ...]:
    """Primitive integer vector orthogonal to d-1 mutually orthogonal, independent vectors."""
    vecs = [tuple(to_fraction(c) for c in v) for v in partial]
    if not vecs:
        raise InputError("need at least one vector")
    d = len(vecs[0])
    if any(len(v) != d for v in vecs):
        raise InputError("vectors have different lengths")
    if len(vecs) != d - 1:
        raise InputError(f"need exactly {d - 1} vectors in dimension {d}, got {len(vecs)}")
    for a, b in combinations(range(len(vecs)), 2):
        if _dot(vecs[a], vecs[b]) != 0:
            raise InputError(f"not-orthogonal: vectors {a} and {b}")
    if d == 3:
        (a1, a2, a3), (b1, b2, b3) = vecs
        out = (a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
        if not any(out):
            raise InputError("dependent input vectors")
        return primitive(out)
    null = nullspace(vecs, d)
    if len(null) != 1:
        raise InputError("dependent input vectors")
    return primitive(null[0])


@dataclass(frozen=True)
class ClosureStage:
    stage: int
    added: tuple  # new ray ids, in completion order
    completed: tuple  # (incomplete basis, new ray id)
    rays: int
    complete_bases: int
    incomplete_after: tuple

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "added": list(self.added),
            "completed": [list(b) + [r] for b, r in self.completed],
            "rays": self.rays,
            "complete_bases": self.complete_bases,
            "incomplete_after": [list(b) for b in self.incomplete_after],
        }


def _fresh_labels(existing: Iterable[str]):
    ids = list(existing)
    if all(i.isdigit() for i in ids):
        nxt = max((int(i) for i in ids), default=0) + 1
        while True:
            yield str(nxt)
            nxt += 1
    taken = set(ids)
    k = 1
    while True:
        if f"c{k}" not in taken:
            yield f"c{k}"
        k += 1


def completion_closure(V: VectorSet, max_stages: int = MAX_STAGES) -> tuple[VectorSet, list[ClosureStage]]:
    """Complete every incomplete basis, recompute orthogonality, repeat until closed."""
    log = []
    current = V
    S = orthogonality_scenario(current)
    for stage in range(1, max_stages + 1):
        if not S.incomplete:
            return current, log
        labels = _fresh_labels(current.ids)
        new = {}
        completed = []
        for basis in S.incomplete:
            vec = complete_basis([current.rays[k] for k in basis])
            hit = next((k for k, v in new.items() if primitive(v) == vec), None)
            if hit is None:
                if current.find(vec) is not None:
                    raise ComputationError(f"completion of {basis} is already present; closure cannot grow")
                hit = next(labels)
                new[hit] = vec
            completed.append((basis, hit))
        current = current.extended(new)
        S = orthogonality_scenario(current)
        log.append(
            ClosureStage(stage, tuple(new), tuple(completed), len(current.ids), len(S.bases), S.incomplete)
        )
    if S.incomplete:
        raise ComputationError(f"completion did not close within {max_stages} stages")
    return current, log


def _intersection_graph(S: Scenario) -> SimpleGraph:
    labels, bases, _ = S.measurement_bases()
    sets = [set(e) for e in bases]
    edges = [(labels[i], labels[j]) for i, j in combinations(range(len(sets)), 2) if sets[i] & sets[j]]
    return SimpleGraph(labels, edges)


def max_disjoint_bases(S: Scenario, cap: int = WITNESS_CAP, budget: int = DEFAULT_NODE_BUDGET):
    """(size, exact count of maximum families, up to ``cap`` witnesses as basis-label tuples)."""
    return all_maximum_independent_sets(_intersection_graph(S), cap, budget)


@dataclass(frozen=True)
class TransversalSearch:
    """Outcome of looking for one ray per basis with no two orthogonal.

    When none exists, ``trace`` lists the dead ends: ``(prefix, j)`` means
    every ray of basis j is orthogonal to some ray already picked in
    ``prefix`` (picks follow the family order).
    """

    family: tuple
    transversal: tuple | None
    trace: tuple

    @property
    def refuted(self) -> bool:
        return self.transversal is None


def _complete_family(S: Scenario, family, prepared=None):
    labels, bases, G = prepared or S.measurement_bases()
    full = {frozenset(b[: len(b) - 1]) if b[-1].startswith("+") else frozenset(b): b for b in bases}
    return [full.get(frozenset(b), tuple(b)) for b in family], G


def transversal_search(
    S: Scenario, family: Sequence[Sequence[str]], budget: int = DEFAULT_NODE_BUDGET, prepared=None
) -> TransversalSearch:
    """Backtracking over the bases in the given order, with forward checking.

    Incomplete bases of the family are completed first (see
    ``Scenario.measurement_bases``).
    """
    fam, G = _complete_family(S, family, prepared)
    idx = {v: i for i, v in enumerate(G.vertices)}
    unknown = [v for b in fam for v in b if v not in idx]
    if unknown:
        raise InputError(f"family references unknown rays {unknown}")
    adj = G.adjacency_masks()
    masks = [sum(1 << idx[v] for v in b) for b in fam]
    trace = []
    nodes = 0

    def rec(k, picked, cands):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"transversal search exceeded {budget} nodes")
        if k == len(fam):
            return picked
        for v in _bits(cands[k]):
            blocked = adj[v]
            nxt = cands[:k + 1] + [c & ~blocked for c in cands[k + 1:]]
            prefix = picked + (G.vertices[v],)
            dead = next((j for j in range(k + 1, len(fam)) if not nxt[j]), None)
            if dead is not None:
                trace.append((prefix, dead))
                continue
            found = rec(k + 1, prefix, nxt)
            if found is not None:
                return found
        return None

    if not fam:
        return TransversalSearch((), (), ())
    found = rec(0, (), masks)
    return TransversalSearch(tuple(fam), found, () if found is not None else tuple(trace))


def check_refutation(S: Scenario, result: TransversalSearch) -> bool:
    """Independently confirm that a refutation trace closes every branch."""
    if not result.refuted:
        return False
    _, _, G = S.measurement_bases()
    fam = result.family
    leaves = {}
    for prefix, j in result.trace:
        leaves[tuple(prefix)] = j

    def rec(prefix):
        if prefix in leaves:
            j = leaves[prefix]
            return j >= len(prefix) and all(any(G.adjacent(v, u) for u in prefix) for v in fam[j])
        if len(prefix) == len(fam):
            return False
        for v in fam[len(prefix)]:
            if any(G.adjacent(v, u) for u in prefix):
                continue
            if not rec(prefix + (v,)):
                return False
        return True

    return rec(())


def is_ks_basis_set(S: Scenario, family: Sequence[Sequence[str]], budget: int = DEFAULT_NODE_BUDGET) -> bool:
    """Pairwise disjoint bases with no independent transversal."""
    sets = [set(b) for b in family]
    if any(a & b for a, b in combinations(sets, 2)):
        return False
    return transversal_search(S, family, budget).refuted


@dataclass(frozen=True)
class KSBasisSetSearch:
    best: tuple | None  # basis labels
    refutation: TransversalSearch | None
    families_checked: int
    q_min: int

    def to_json(self) -> dict:
        out = {"q_min": self.q_min, "families_checked": self.families_checked, "found": self.best is not None}
        if self.best is not None:
            out["family"] = list(self.best)
            out["refutation_leaves"] = len(self.refutation.trace)
        return out


def ks_basis_set_search(S: Scenario, q_min: int, budget: int = DEFAULT_NODE_BUDGET) -> KSBasisSetSearch:
    """Largest family of >= q_min disjoint bases with no independent transversal.

    Having no transversal is inherited by supersets, so only families that are
    maximal under inclusion need checking. Ties go to the family whose basis
    indices are lexicographically smallest.
    """
    prepared = S.measurement_bases()
    labels, bases, _ = prepared
    inter = _intersection_graph(S).adjacency_masks()
    n = len(labels)
    disj = [((1 << n) - 1) & ~inter[i] & ~(1 << i) for i in range(n)]
    families = []
    nodes = 0

    def bk(R, P, X):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"disjoint-family enumeration exceeded {budget} nodes")
        if len(R) + bin(P).count("1") < q_min:
            return
        if not P and not X:
            families.append(tuple(sorted(R)))
            return
        pivot = max(_bits(P | X), key=lambda u: bin(P & disj[u]).count("1"))
        for v in list(_bits(P & ~disj[pivot])):
            bk(R + [v], P & disj[v], X & disj[v])
            P &= ~(1 << v)
            X |= 1 << v

    if n:
        bk([], (1 << n) - 1, 0)
    families.sort(key=lambda f: (-len(f), f))
    for checked, fam in enumerate(families, 1):
        res = transversal_search(S, [bases[i] for i in fam], budget, prepared)
        if res.refuted:
            return KSBasisSetSearch(tuple(labels[i] for i in fam), res, checked, q_min)
    return KSBasisSetSearch(None, None, len(families), q_min)


# -- built-in data ------------------------------------------------------------------


def _data(name: str) -> dict:
    with resources.files("oneshot.data").joinpath(name).open() as fh:
        return json.load(fh)


def peres_violations(S: Scenario) -> list[str]:
    """Structural checks on the 24-ray set and its dotted partition."""
    out = []
    V = S.vectors
    if V is None or V.dim != 4 or len(V.ids) != 24:
        return ["expected 24 rays in dimension 4"]
    if len(S.bases) != 24:
        out.append(f"expected 24 bases, found {len(S.bases)}")
    if len(S.dotted) != 6:
        out.append(f"expected 6 dotted bases, found {len(S.dotted)}")
    dotted = {frozenset(b) for b in S.dotted}
    channel = [e for e in S.bases if frozenset(e) not in dotted]
    for v in V.ids:
        k = sum(v in e for e in channel)
        d = sum(v in b for b in S.dotted)
        if k != 3 or d != 1:
            out.append(f"ray {v} lies in {k} channel bases and {d} dotted bases")
    if S.incomplete or S.small:
        out.append("ray set has incomplete orthogonal sets")
    ok, _ = ks_colourable(Hypergraph(V.ids, channel))
    if ok:
        out.append("channel hypergraph is KS-colourable")
    return out


def load_builtin(name: str) -> Scenario:
    if name == "ck31":
        data = _data("ck31.json")
        return orthogonality_scenario(VectorSet(data["dim"], data["rays"]))
    if name == "peres24":
        data = _data("peres24.json")
        V = VectorSet(data["dim"], data["rays"])
        base = orthogonality_scenario(V)
        dotted = [tuple(b) for b in data["dotted"]]
        dotted_sets = [frozenset(b) for b in dotted]
        channel = [e for e in base.bases if frozenset(e) not in dotted_sets]
        edges = channel + [tuple(sorted(b, key=base.hypergraph.index.get)) for b in dotted]
        labels = [f"y{i + 1}" for i in range(len(channel))] + [f"m{i + 1}" for i in range(len(dotted))]
        S = Scenario(Hypergraph(V.ids, edges, labels), V, base.incomplete, base.small, tuple(edges[len(channel):]))
        problems = peres_violations(S)
        if problems:
            raise InputError("peres24 data failed validation: " + "; ".join(problems))
        return S
    raise InputError(f"unknown built-in scenario {name!r} (known: ck31, peres24)")


def peres_channel():
    """(channel, encoding) of the 18 channel bases with the 6 dotted bases as messages m1..m6."""
    from .channel import channel_from_scenario

    S = load_builtin("peres24")
    return channel_from_scenario(S, S.dotted, [f"m{i + 1}" for i in range(len(S.dotted))])


# -- Conway-Kochen verification -----------------------------------------------------


@dataclass
class Claim:
    name: str
    passed: bool
    detail: str


@dataclass
class AppendixFReport:
    stages: list = field(default_factory=list)  # (rays, complete bases, incomplete bases) per stage, stage 0 first
    alpha: dict = field(default_factory=dict)
    max_disjoint: dict = field(default_factory=dict)
    ks_basis_sets: dict = field(default_factory=dict)
    claims: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def check(self, name: str, ok: bool, detail: str):
        self.claims.append(Claim(name, bool(ok), detail))

    def first_failure(self) -> Claim | None:
        return next((c for c in self.claims if not c.passed), None)

    def raise_for_failure(self):
        bad = self.first_failure()
        if bad is not None:
            raise ComputationError(f"claim {bad.name!r} failed: {bad.detail}")

    def to_json(self) -> dict:
        return jsonable(
            {
                "passed": self.passed,
                "stages": [{"rays": r, "complete_bases": c, "incomplete_bases": i} for r, c, i in self.stages],
                "alpha": self.alpha,
                "max_disjoint": self.max_disjoint,
                "ks_basis_sets": self.ks_basis_sets,
                "claims": [{"name": c.name, "result": "PASS" if c.passed else "FAIL", "detail": c.detail} for c in self.claims],
            }
        )

    def to_text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in self.claims]
        lines.append("all claims pass" if self.passed else f"{sum(not c.passed for c in self.claims)} claim(s) failed")
        return "\n".join(lines)


def _as_sets(groups) -> set:
    return {frozenset(str(v) for v in g) for g in groups}


def verify_conway_kochen(data: dict | None = None, budget: int = DEFAULT_NODE_BUDGET) -> AppendixFReport:
    """Recompute every published fact about the 31-ray set and its completion.

    Computed completion rays get fresh labels; they are matched to the
    reference labels by projective equality before bases are compared.
    """
    data = data if data is not None else _data("ck31.json")
    rep = AppendixFReport()
    claims = data.get("claims", {})
    V = VectorSet(data["dim"], data["rays"])
    S = orthogonality_scenario(V)
    rep.stages.append((len(V.ids), len(S.bases), len(S.incomplete)))

    rep.check("ray count", len(V.ids) == 31 and V.dim == 3, f"{len(V.ids)} rays in dimension {V.dim}")
    rep.check(
        "complete bases",
        _as_sets(S.bases) == _as_sets(data["complete_bases"]),
        f"{len(S.bases)} computed, {len(data['complete_bases'])} listed",
    )
    rep.check(
        "incomplete bases",
        _as_sets(S.incomplete) == _as_sets(data["incomplete_bases"]) and not S.small,
        f"{len(S.incomplete)} computed, {len(data['incomplete_bases'])} listed",
    )
    text = adjacency_text(S)
    rep.check("adjacency lists", text == data["adjacency_text"], "identical" if text == data["adjacency_text"] else "differs")

    a0, _ = independence_number(S.orthogonality_graph(), budget)
    rep.alpha["initial"] = a0
    rep.check("independence number (31 rays)", a0 == claims.get("alpha_initial", 11), f"alpha = {a0}")

    size0, count0, _ = max_disjoint_bases(S, budget=budget)
    rep.max_disjoint["initial"] = {"size": size0, "count": count0}
    sizes = list(range(a0 + 1, size0 + 1))
    rep.check(
        "disjoint basis sets above alpha",
        sizes == claims.get("disjoint_sizes_above_alpha", [12, 13]),
        f"sizes {sizes} (maximum {size0}, {count0} maximum families)",
    )
    ks0 = ks_basis_set_search(S, a0 + 1, budget)
    rep.ks_basis_sets["initial"] = ks0.to_json()
    rep.check("no KS basis set (31 rays)", ks0.best is None, f"{ks0.families_checked} maximal families of size > {a0} checked")

    try:
        final, log = completion_closure(V)
    except ComputationError as exc:
        rep.check("completion closure", False, str(exc))
        return rep

    expected_counts = claims.get("stage_counts", [[51, 37, 4], [55, 41, 0]])
    listed = data["completion_stages"]
    for k, st in enumerate(log):
        rep.stages.append((st.rays, st.complete_bases, len(st.incomplete_after)))
        name = f"stage-{k + 1}"
        ref_stage = listed[k] if k < len(listed) else {"rays": {}, "completed_bases": [], "new_incomplete_bases": []}
        want = expected_counts[k] if k < len(expected_counts) else None
        rep.check(
            f"{name} completion count",
            len(st.added) == len(ref_stage["rays"]) and want is not None and [st.rays, st.complete_bases, len(st.incomplete_after)] == want,
            f"added {len(st.added)} rays (listed {len(ref_stage['rays'])}); {st.rays} rays, {st.complete_bases} bases, "
            f"{len(st.incomplete_after)} incomplete (expected {want})",
        )
        # map computed labels to reference labels
        listed_canon = {primitive([to_fraction(c) for c in v]): str(lab) for lab, v in ref_stage["rays"].items()}
        mapping = {v: v for v in V.ids}
        for lab in final.ids:
            key = final.canonical(lab)
            if lab not in mapping:
                hit = listed_canon.get(key)
                if hit is None:
                    for prev in listed:
                        hit = hit or {primitive([to_fraction(c) for c in v]): str(l) for l, v in prev["rays"].items()}.get(key)
                mapping[lab] = hit or f"?{lab}"
        unmatched = [r for r in st.added if mapping[r].startswith("?")]
        rep.check(f"{name} completion rays", not unmatched and len(st.added) == len(ref_stage["rays"]), f"{len(unmatched)} computed rays have no listed match")
        done = {frozenset(mapping[v] for v in b) | {mapping[r]} for b, r in st.completed}
        rep.check(
            f"{name} completed bases",
            done == _as_sets(ref_stage["completed_bases"]),
            f"{len(done)} computed, {len(ref_stage['completed_bases'])} listed",
        )
        after = {frozenset(mapping[v] for v in b) for b in st.incomplete_after}
        rep.check(
            f"{name} new incomplete bases",
            after == _as_sets(ref_stage["new_incomplete_bases"]),
            "; ".join("{" + ", ".join(sorted(b, key=lambda s: (len(s), s))) + "}" for b in sorted(after, key=sorted)) or "none",
        )
    if len(log) != len(listed):
        rep.check("number of completion stages", False, f"{len(log)} computed, {len(listed)} listed")

    # the reference data must be self-consistent too
    all_rays = dict(data["rays"])
    for st in data["completion_stages"]:
        all_rays.update(st["rays"])
    try:
        ref = VectorSet(3, all_rays)
        bad = [
            b
            for st in data["completion_stages"]
            for b in st["completed_bases"]
            if any(str(v) not in ref.rays for v in b) or any(not ref.orthogonal(str(x), str(y)) for x, y in combinations(b, 2))
        ]
        rep.check("listed completed bases are orthogonal", not bad, f"{len(bad)} inconsistent listed bases")
    except InputError as exc:
        rep.check("listed completed bases are orthogonal", False, str(exc))

    S55 = orthogonality_scenario(final)
    rep.check("closed: no further orthogonality", not S55.incomplete and not S55.small, f"{len(final.ids)} rays, {len(S55.bases)} bases")
    a1, _ = independence_number(S55.orthogonality_graph(), budget)
    rep.alpha["final"] = a1
    rep.check("independence number (completed set)", a1 == claims.get("alpha_final", 25), f"alpha = {a1}")
    size1, count1, _ = max_disjoint_bases(S55, budget=budget)
    rep.max_disjoint["final"] = {"size": size1, "count": count1}
    rep.check("maximum disjoint basis set (completed set)", size1 == claims.get("max_disjoint_final", 13), f"size {size1}, {count1} families")
    ks1 = ks_basis_set_search(S55, a1 + 1, budget)
    rep.ks_basis_sets["final"] = ks1.to_json()
    rep.check("no KS basis set above alpha (completed set)", ks1.best is None, f"none of size > {a1}")
    return rep
