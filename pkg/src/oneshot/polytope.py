"""Probabilistic-model polytopes and exact vertex enumeration.

The polytope of a hypergraph is ``{p >= 0 : sum_{x in e} p(x) = 1 for every
hyperedge e}``. Vertices are enumerated with the double description method on
the homogenised cone of the affine-hull parametrisation, entirely in integer
arithmetic, so every reported vertex satisfies the equalities exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BudgetExceeded, InputError
from .hypergraph import Hypergraph

DEFAULT_VERTEX_CAP = 10**6


@dataclass(frozen=True)
class ProbabilisticModel:
    """Assignment vertex -> probability, summing to one on every hyperedge."""

    assignment: dict

    def __getitem__(self, v):
        return self.assignment[v]

    def is_deterministic(self) -> bool:
        return all(p in (0, 1) for p in self.assignment.values())


@dataclass(frozen=True)
class RationalPolytope:
    """``{x >= 0 : A x = b}`` over named variables, all data rational."""

    variables: tuple[str, ...]
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]

    @classmethod
    def of_hypergraph(cls, H: Hypergraph) -> "RationalPolytope":
        rows = []
        for e in H.hyperedges:
            members = set(e)
            rows.append(tuple(Fraction(1 if v in members else 0) for v in H.vertices))
        return cls(H.vertices, tuple(rows), tuple(Fraction(1) for _ in rows))

    def contains(self, x: Sequence) -> bool:
        if any(Fraction(v) < 0 for v in x):
            return False
        return all(sum(a * v for a, v in zip(row, x)) == rhs for row, rhs in zip(self.A, self.b))

    def vertices(self, cap: int = DEFAULT_VERTEX_CAP) -> list[tuple[Fraction, ...]]:
        return enumerate_vertices(self.A, self.b, len(self.variables), cap)


def _rref(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form in place; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [a * inv for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def affine_hull(A, b, n):
    """Particular solution and nullspace basis of ``A x = b``; None if inconsistent."""
    aug = [[Fraction(a) for a in row] + [Fraction(v)] for row, v in zip(A, b)]
    pivots = _rref(aug, n + 1)
    if n in pivots:
        return None
    x0 = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x0[c] = aug[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -aug[i][f]
        basis.append(vec)
    return x0, basis


def nullspace(rows: Sequence[Sequence], n: int) -> list[list[Fraction]]:
    hull = affine_hull(rows, [0] * len(rows), n)
    return hull[1]


def _int_row(row: Sequence[Fraction]) -> tuple[int, ...]:
    den = 1
    for a in row:
        den = math.lcm(den, Fraction(a).denominator)
    ints = [int(Fraction(a) * den) for a in row]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    return tuple(a // g for a in ints) if g > 1 else tuple(ints)


def _normalise(vec: list[int]) -> tuple[int, ...]:
    g = 0
    for a in vec:
        g = math.gcd(g, a)
    return tuple(a // g for a in vec) if g > 1 else tuple(vec)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _solve_square(M: list[list[Fraction]]) -> list[list[Fraction]]:
    """Inverse of a nonsingular square rational matrix."""
    k = len(M)
    aug = [list(M[i]) + [Fraction(1 if i == j else 0) for j in range(k)] for i in range(k)]
    _rref(aug, k)
    return [row[k:] for row in aug]


def cone_extreme_rays(H: list[tuple[int, ...]], cap: int) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{u : H u >= 0}`` (double description).

    ``H`` must have full column rank. Adjacency of rays is decided by the
    combinatorial test on their zero sets.
    """
    dim = len(H[0])
    # pick dim linearly independent rows for the initial simplicial cone
    chosen = []
    work: list[list[Fraction]] = []
    for i, row in enumerate(H):
        trial = [list(map(Fraction, r)) for r in work] + [list(map(Fraction, row))]
        if len(_rref([r[:] for r in trial], dim)) == len(trial):
            work.append(list(map(Fraction, row)))
            chosen.append(i)
            if len(chosen) == dim:
                break
    if len(chosen) < dim:
        raise InputError("constraint system does not define a pointed cone")
    inv = _solve_square(work)
    rays = [_normalise(list(_int_row([inv[r][c] for r in range(dim)]))) for c in range(dim)]
    processed = list(chosen)
    rest = [i for i in range(len(H)) if i not in set(chosen)]

    def zero_set(ray):
        z = 0
        for i in processed:
            if _dot(H[i], ray) == 0:
                z |= 1 << i
        return z

    zsets = [zero_set(r) for r in rays]
    for i in rest:
        h = H[i]
        vals = [_dot(h, r) for r in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        zer = [j for j, v in enumerate(vals) if v == 0]
        new_rays = []
        new_z = []
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if bin(common).count("1") < dim - 2:
                    continue
                if any(
                    (zsets[r] & common) == common
                    for r in range(len(rays))
                    if r != p and r != q
                ):
                    continue
                vec = [vals[p] * a - vals[q] * b for a, b in zip(rays[q], rays[p])]
                new_rays.append(_normalise(vec))
                new_z.append(common | (1 << i))
        bit = 1 << i
        rays = [rays[j] for j in pos] + [rays[j] for j in zer] + new_rays
        zsets = [zsets[j] for j in pos] + [zsets[j] | bit for j in zer] + new_z
        processed.append(i)
        if len(rays) > cap:
            raise BudgetExceeded(f"double description exceeded the cap of {cap} rays", best=len(rays))
    return rays


def enumerate_vertices(A, b, n: int, cap: int = DEFAULT_VERTEX_CAP) -> list[tuple[Fraction, ...]]:
    """All vertices of the bounded polytope ``{x >= 0 : A x = b}``, sorted."""
    hull = affine_hull(A, b, n)
    if hull is None:
        return []
    x0, N = hull
    k = len(N)
    if k == 0:
        return [tuple(x0)] if all(v >= 0 for v in x0) else []
    # rows (x0_i, N_i) act on u = (s, t); plus s >= 0
    H = [_int_row([x0[i]] + [N[j][i] for j in range(k)]) for i in range(n)]
    H.append(tuple([1] + [0] * k))
    rays = cone_extreme_rays(H, cap)
    out = set()
    for r in rays:
        s = r[0]
        if s == 0:
            raise InputError("polytope is unbounded")
        x = tuple(x0[i] + sum((N[j][i] * r[j + 1] for j in range(k)), Fraction(0)) / s for i in range(n))
        out.add(x)
    if len(out) > cap:
        raise BudgetExceeded(f"vertex count exceeds cap {cap}", best=len(out))
    return sorted(out)


def polytope_vertices(H: Hypergraph, cap: int = DEFAULT_VERTEX_CAP) -> list[ProbabilisticModel]:
    """Every extremal probabilistic model on ``H``, in lexicographic order of coordinates.

    Every vertex must lie in some hyperedge, otherwise the polytope is unbounded.
    """
    if H.uncovered_vertices():
        raise InputError(f"vertices {H.uncovered_vertices()} lie in no hyperedge; the model polytope is unbounded")
    P = RationalPolytope.of_hypergraph(H)
    return [ProbabilisticModel(dict(zip(H.vertices, x))) for x in P.vertices(cap)]
