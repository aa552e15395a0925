"""Exact classical and noncontextual bounds on one-shot success probability.

Every bound comes back as a ``BoundCertificate``: an exact rational value,
a witness that re-evaluates to it, and the method that produced it.

Deterministic encoders suffice for the classical maxima. The success
probability is affine in each conditional p_A(.|m) separately, so any
stochastic encoder is dominated by one of the deterministic encoders in its
support (see ``tests/test_bounds.py`` for the randomised check).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

from .channel import ClassicalChannel, Encoding, MessageEnsemble, eta
from .errors import BudgetExceeded, ComputationError, InputError
from .hypergraph import DEFAULT_NODE_BUDGET, Hypergraph
from .lp import FeasibleTableau
from .polytope import DEFAULT_VERTEX_CAP, ProbabilisticModel, RationalPolytope, polytope_vertices
from .rational import fraction_str, jsonable

__all__ = [
    "BoundCertificate",
    "ProbabilisticModel",
    "RationalPolytope",
    "polytope_vertices",
    "classical_max",
    "evaluate_classical",
    "scenario_gamma",
    "beta",
    "beta_value",
    "cig_classical_max",
    "cig_value",
    "check_noncontextual_bounds",
    "bisect_crossing",
]


@dataclass(frozen=True)
class BoundCertificate:
    value: Fraction
    witness: dict
    method: str
    stats: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return jsonable({"value": self.value, "method": self.method, "witness": self.witness, "stats": self.stats})

    def __str__(self):
        return fraction_str(self.value)


# -- classical maximum --------------------------------------------------------------


def evaluate_classical(N: ClassicalChannel, p: MessageEnsemble, encoder: Mapping, decoder: Mapping) -> Fraction:
    """Exact success probability of a deterministic encoder/decoder pair."""
    return sum(
        (p[m] * N(y, encoder[m]) for m in p.messages for y in N.outputs if decoder.get(y) == m),
        Fraction(0),
    )


def _best_decoder(N, p, encoder) -> dict:
    dec = {}
    for y in N.outputs:
        # first message wins ties
        best = max(p.messages, key=lambda m: (p[m] * N(y, encoder[m]), -p.messages.index(m)))
        dec[y] = best
    return dec


def classical_max(N: ClassicalChannel, p: MessageEnsemble, budget: int = DEFAULT_NODE_BUDGET) -> BoundCertificate:
    """max over encoders e of sum_y max_m p(m) N(y|e(m)), by branch and bound.

    With a uniform prior the objective only depends on the multiset of inputs
    used, so encoders are enumerated with nondecreasing input indices. For
    output-uniform, regular channels with a uniform prior the objective is a
    union size and the search runs on output bitmasks.
    """
    msgs = p.messages
    q = len(msgs)
    X, Y = N.inputs, N.outputs
    if q == 0:
        raise InputError("no messages")
    uniform = p.is_uniform()
    k = N.regularity()
    if uniform and k is not None and N.is_output_uniform():
        choice, value, nodes = _union_search(N, q, k, budget)
        method = "branch-and-bound (output unions)"
    else:
        choice, value, nodes = _weighted_search(N, p, uniform, budget)
        method = "branch-and-bound"
    encoder = {m: X[i] for m, i in zip(msgs, choice)}
    decoder = _best_decoder(N, p, encoder)
    exact = evaluate_classical(N, p, encoder, decoder)
    if exact != value:
        raise ComputationError(f"classical_max witness re-evaluates to {exact}, search reported {value}")
    return BoundCertificate(value, {"encoder": encoder, "decoder": decoder}, method, {"nodes": nodes})


def _union_search(N, q, k, budget):
    X, Y = N.inputs, N.outputs
    yidx = {y: i for i, y in enumerate(Y)}
    masks = [sum(1 << yidx[y] for y in N.support(x)) for x in X]
    best = -1
    best_choice = None
    nodes = 0
    choice = [0] * q

    def dfs(i, start, cover):
        nonlocal best, best_choice, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(
                f"classical_max exceeded {budget} nodes", best=Fraction(max(best, 0), k * q)
            )
        size = bin(cover).count("1")
        if i == q:
            if size > best:
                best, best_choice = size, choice[:]
            return
        if size + k * (q - i) <= best:
            return
        for x in range(start, len(X)):
            choice[i] = x
            dfs(i + 1, x, cover | masks[x])

    dfs(0, 0, 0)
    return best_choice, Fraction(best, k * q), nodes


def _weighted_search(N, p, uniform, budget):
    msgs, X, Y = p.messages, N.inputs, N.outputs
    q = len(msgs)
    scale = 1
    for m in msgs:
        for x in X:
            for y in Y:
                scale = math.lcm(scale, (p[m] * N(y, x)).denominator)
    w = [[[int(p[m] * N(y, x) * scale) for y in Y] for x in X] for m in msgs]
    # cap[i][y]: largest weight any message >= i could put on y
    cap = [[0] * len(Y) for _ in range(q + 1)]
    for i in range(q - 1, -1, -1):
        cap[i] = [max(cap[i + 1][j], max(w[i][x][j] for x in range(len(X)))) for j in range(len(Y))]
    rest = [0] * (q + 1)
    for i in range(q - 1, -1, -1):
        rest[i] = rest[i + 1] + int(p[msgs[i]] * scale)
    best = -1
    best_choice = None
    nodes = 0
    choice = [0] * q

    def dfs(i, start, cur, total):
        nonlocal best, best_choice, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"classical_max exceeded {budget} nodes", best=Fraction(max(best, 0), scale))
        if i == q:
            if total > best:
                best, best_choice = total, choice[:]
            return
        bound = min(total + rest[i], sum(max(c, m) for c, m in zip(cur, cap[i])))
        if bound <= best:
            return
        for x in range(start if uniform else 0, len(X)):
            choice[i] = x
            new = [c if c >= a else a for c, a in zip(cur, w[i][x])]
            dfs(i + 1, x, new, sum(new))

    dfs(0, 0, [0] * len(Y), 0)
    return best_choice, Fraction(best, scale), nodes


# -- weighted max-predictability ----------------------------------------------------


def scenario_gamma(N: ClassicalChannel, E: Encoding) -> Hypergraph:
    """Channel hyperedges plus the encoding classes (skipping classes that already are hyperedges)."""
    H = N.hypergraph()
    edges = list(H.hyperedges)
    labels = list(H.edge_labels)
    present = {frozenset(e) for e in edges}
    for m in E.messages:
        if frozenset(E[m]) not in present:
            edges.append(E[m])
            labels.append(m if m not in labels else f"class:{m}")
            present.add(frozenset(E[m]))
    return Hypergraph(H.vertices, edges, labels)


def _check_classes(G: Hypergraph, E: Encoding, p: MessageEnsemble):
    edges = {frozenset(e) for e in G.hyperedges}
    for m in E.messages:
        if frozenset(E[m]) not in edges:
            raise InputError(f"class of message {m!r} is not a hyperedge of the scenario")
    if set(E.messages) != set(p.messages):
        raise InputError("encoding and message ensemble name different messages")


def beta_value(model: Mapping, E: Encoding, p: MessageEnsemble) -> Fraction:
    """sum_m p(m) max_{x in X_m} model(x)."""
    return sum((p[m] * max(model[x] for x in E[m]) for m in E.messages), Fraction(0))


def _selections(E: Encoding):
    return product(*(E[m] for m in E.messages))


def _lp_chunk(args):
    tableau, cols, weights, chunk = args
    best = None
    for idx, sel in chunk:
        c = [Fraction(0)] * tableau.n
        for m_w, x in zip(weights, sel):
            for col, coef in cols(x, m_w):
                c[col] += coef
        res = tableau.maximize(c)
        if res.status != "optimal":
            raise ComputationError(f"LP for selection {sel} is {res.status}")
        if best is None or res.value > best[0]:
            best = (res.value, idx, res.x)
    return best


class _BetaColumns:
    """Objective builder for the beta LP (picklable for worker processes)."""

    def __init__(self, index):
        self.index = index

    def __call__(self, x, weight):
        return [(self.index[x], weight)]


class _CigColumns:
    def __init__(self, index, N, E, msg_of):
        self.index = index
        self.eta = {(x, x2): eta(N, x, x2) for m in E.messages for x in E[m] for x2 in E[m]}
        self.classes = {m: E[m] for m in E.messages}
        self.msg_of = msg_of

    def __call__(self, x, weight):
        m = self.msg_of[x]
        return [(self.index[x2], weight * self.eta[(x, x2)]) for x2 in self.classes[m]]


def _linearised(G: Hypergraph, E: Encoding, p: MessageEnsemble, columns, budget: int, threads: int):
    """max over selections (x_m in X_m) of an LP over the model polytope; ties keep the first selection."""
    P = RationalPolytope.of_hypergraph(G)
    tableau = FeasibleTableau(P.A, P.b)
    if not tableau.feasible:
        raise ComputationError("the scenario admits no probabilistic model")
    total = math.prod(len(E[m]) for m in E.messages)
    if total > budget:
        raise BudgetExceeded(f"{total} selections exceed the budget of {budget} LPs")
    weights = [p[m] for m in E.messages]
    sels = list(enumerate(_selections(E)))
    if threads > 1 and total > 64:
        size = -(-len(sels) // (threads * 4))
        chunks = [sels[i:i + size] for i in range(0, len(sels), size)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_lp_chunk, [(tableau, columns, weights, c) for c in chunks]))
    else:
        results = [_lp_chunk((tableau, columns, weights, sels))]
    best = None
    for r in results:
        if r is not None and (best is None or r[0] > best[0] or (r[0] == best[0] and r[1] < best[1])):
            best = r
    value, idx, x = best
    model = dict(zip(G.vertices, x))
    return value, sels[idx][1], model, total


def beta(
    G: Hypergraph,
    E: Encoding,
    p: MessageEnsemble,
    method: str = "both",
    cap: int = DEFAULT_VERTEX_CAP,
    budget: int = DEFAULT_NODE_BUDGET,
    threads: int = 1,
) -> BoundCertificate:
    """Weighted max-predictability: max over probabilistic models of sum_m p(m) max_{x in X_m} xi(x).

    ``method`` is "vertices" (enumerate the model polytope), "lp" (one exact
    LP per selection of x_m in X_m) or "both", which runs the two and fails
    loudly if they disagree.
    """
    if method not in ("vertices", "lp", "both"):
        raise InputError(f"unknown beta method {method!r}")
    _check_classes(G, E, p)
    certs = []
    if method in ("vertices", "both"):
        verts = polytope_vertices(G, cap)
        if not verts:
            raise ComputationError("the scenario admits no probabilistic model")
        best_val, best_v = None, None
        for v in verts:
            val = beta_value(v.assignment, E, p)
            if best_val is None or val > best_val:
                best_val, best_v = val, v
        certs.append(
            BoundCertificate(
                best_val,
                {"model": best_v.assignment, "argmax": {m: _argmax(best_v.assignment, E[m]) for m in E.messages}},
                "vertex-enum",
                {"vertices": len(verts)},
            )
        )
    if method in ("lp", "both"):
        index = {v: i for i, v in enumerate(G.vertices)}
        value, sel, model, n_lp = _linearised(G, E, p, _BetaColumns(index), budget, threads)
        if beta_value(model, E, p) != value:
            raise ComputationError("LP witness does not re-evaluate to the LP value")
        certs.append(
            BoundCertificate(value, {"model": model, "argmax": dict(zip(E.messages, sel))}, "linearized-LP", {"lps": n_lp})
        )
    if len(certs) == 2:
        if certs[0].value != certs[1].value:
            raise ComputationError(f"beta routes disagree: vertices {certs[0].value}, LPs {certs[1].value}")
        return BoundCertificate(
            certs[0].value, certs[0].witness, "vertex-enum+linearized-LP", {**certs[0].stats, **certs[1].stats}
        )
    return certs[0]


def _argmax(model, xs):
    return max(xs, key=lambda x: (model[x], -xs.index(x)))


# -- classical bound under context-independent guessing -----------------------------


def cig_value(N: ClassicalChannel, E: Encoding, p: MessageEnsemble, model: Mapping) -> tuple[Fraction, dict]:
    """(sum_m p(m) max_{x in X_m} sum_{x' in X_m} model(x') eta(x, x'), Alice's choices)."""
    total = Fraction(0)
    choice = {}
    for m in E.messages:
        best_x, best = None, None
        for x in E[m]:
            val = sum((model[x2] * eta(N, x, x2) for x2 in E[m]), Fraction(0))
            if best is None or val > best:
                best_x, best = x, val
        choice[m] = best_x
        total += p[m] * best
    return total, choice


def cig_classical_max(
    N: ClassicalChannel,
    E: Encoding,
    p: MessageEnsemble,
    method: str = "vertices",
    cap: int = DEFAULT_VERTEX_CAP,
    budget: int = DEFAULT_NODE_BUDGET,
    threads: int = 1,
) -> BoundCertificate:
    """Best classical strategy whose guesses obey context independence.

    Bob's guess is a probabilistic model on the scenario (channel hyperedges
    plus encoding classes); Alice sends some x in X_m. The maximum over models
    is attained at a polytope vertex, or equivalently by one LP per choice of
    Alice's inputs. ``method`` is "vertices", "lp" or "both".
    """
    if method not in ("vertices", "lp", "both"):
        raise InputError(f"unknown method {method!r}")
    G = scenario_gamma(N, E)
    _check_classes(G, E, p)
    certs = []
    if method in ("vertices", "both"):
        verts = polytope_vertices(G, cap)
        best = None
        for v in verts:
            val, choice = cig_value(N, E, p, v.assignment)
            if best is None or val > best[0]:
                best = (val, choice, v.assignment)
        certs.append(
            BoundCertificate(best[0], {"model": best[2], "alice": best[1]}, "vertex-enum", {"vertices": len(verts)})
        )
    if method in ("lp", "both"):
        index = {v: i for i, v in enumerate(G.vertices)}
        msg_of = {x: m for m in E.messages for x in E[m]}
        value, sel, model, n_lp = _linearised(G, E, p, _CigColumns(index, N, E, msg_of), budget, threads)
        if cig_value(N, E, p, model)[0] != value:
            raise ComputationError("LP witness does not re-evaluate to the LP value")
        certs.append(BoundCertificate(value, {"model": model, "alice": dict(zip(E.messages, sel))}, "linearized-LP", {"lps": n_lp}))
    if len(certs) == 2:
        if certs[0].value != certs[1].value:
            raise ComputationError(f"CIG bound routes disagree: {certs[0].value} vs {certs[1].value}")
        return BoundCertificate(certs[0].value, certs[0].witness, "vertex-enum+linearized-LP", {**certs[0].stats, **certs[1].stats})
    return certs[0]


# -- verdicts ------------------------------------------------------------------------


def check_noncontextual_bounds(
    corr_value,
    beta_cert: BoundCertificate | Fraction,
    eta_min,
    eta_max,
    S,
    cig_max: BoundCertificate | Fraction | None = None,
    tol: float = 1e-9,
) -> dict:
    """Compare observed Corr and S with the noncontextual thresholds.

    (i) Corr > beta, (ii) S > eta_max + (1 - eta_max) beta, (iii) S above the
    CIG classical maximum when given. (i) only implies an advantage when
    eta_min = eta_max; otherwise the precondition is flagged and the verdicts
    are still reported.
    """
    b = beta_cert.value if isinstance(beta_cert, BoundCertificate) else Fraction(beta_cert)
    eta_min, eta_max = Fraction(eta_min), Fraction(eta_max)
    threshold = eta_max + (1 - eta_max) * b
    out = {
        "beta": b,
        "corr": corr_value,
        "S": S,
        "eta_min": eta_min,
        "eta_max": eta_max,
        "S_threshold": threshold,
        "precondition": "ok" if eta_min == eta_max else "eta_min != eta_max: Corr > beta does not imply S > S_NC^max",
    }
    if b == 1:
        out["corr_violation"] = False
        out["verdict"] = "trivial bound"
    else:
        out["corr_violation"] = float(corr_value) > float(b) + tol
        out["verdict"] = "violation" if out["corr_violation"] else "no violation"
    out["corr_margin"] = float(corr_value) - float(b)
    out["S_violation"] = float(S) > float(threshold) + tol
    if cig_max is not None:
        c = cig_max.value if isinstance(cig_max, BoundCertificate) else Fraction(cig_max)
        out["cig_max"] = c
        out["S_exceeds_cig_max"] = float(S) > float(c) + tol
    return out


def bisect_crossing(f: Callable[[float], float], target: float, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-9) -> float:
    """Point in [lo, hi] where the nondecreasing function f crosses ``target``."""
    flo, fhi = f(lo) - target, f(hi) - target
    if flo > 0 or fhi < 0:
        raise InputError("target is not bracketed by f(lo) and f(hi)")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
