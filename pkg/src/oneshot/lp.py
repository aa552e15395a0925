"""Exact rational simplex for small LPs in equality form.

    maximize c.x  subject to  A x = b,  x >= 0

All arithmetic is on ``fractions.Fraction``; Bland's rule is used for both
entering and leaving choices, so the method cannot cycle. Instances in this
package have at most a few dozen variables, so a dense tableau is fine.

``FeasibleTableau`` runs phase one once and can then be re-optimised for any
number of objectives over the same feasible region, which is what the
linearised weighted max-predictability computation needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None


class FeasibleTableau:
    """Phase-one result for ``A x = b, x >= 0``: a feasible basis in tableau form."""

    def __init__(self, A: Sequence[Sequence], b: Sequence):
        rows = [[Fraction(a) for a in row] for row in A]
        rhs = [Fraction(v) for v in b]
        if len(rows) != len(rhs):
            raise InputError("A and b have different row counts")
        n = len(rows[0]) if rows else 0
        if any(len(r) != n for r in rows):
            raise InputError("ragged constraint matrix")
        self.n = n
        for i, v in enumerate(rhs):
            if v < 0:
                rows[i] = [-a for a in rows[i]]
                rhs[i] = -v
        m = len(rows)
        # tableau rows: n structural columns + m artificial columns
        T = [rows[i] + [ONE if j == i else ZERO for j in range(m)] for i in range(m)]
        basis = [n + i for i in range(m)]
        # phase one objective: maximise -sum(artificials)
        cost = [ZERO] * n + [-ONE] * m
        self.feasible = True
        _optimise(T, rhs, basis, cost, allowed=n + m)
        if sum((rhs[i] for i in range(m) if basis[i] >= n), ZERO) > 0:
            self.feasible = False
            return
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(T):
            if basis[i] >= n:
                col = next((j for j in range(n) if T[i][j] != 0), None)
                if col is None:
                    del T[i], rhs[i], basis[i]
                    continue
                _pivot(T, rhs, basis, i, col)
            i += 1
        self.T = [row[:n] for row in T]
        self.rhs = rhs
        self.basis = basis

    def maximize(self, c: Sequence) -> LPResult:
        if not self.feasible:
            return LPResult("infeasible")
        cost = [Fraction(v) for v in c]
        if len(cost) != self.n:
            raise InputError("objective length does not match variable count")
        T = [row[:] for row in self.T]
        rhs = self.rhs[:]
        basis = self.basis[:]
        if not _optimise(T, rhs, basis, cost, allowed=self.n):
            return LPResult("unbounded")
        x = [ZERO] * self.n
        for i, j in enumerate(basis):
            x[j] = rhs[i]
        value = sum((cost[j] * x[j] for j in range(self.n)), ZERO)
        return LPResult("optimal", value, tuple(x))


def _pivot(T, rhs, basis, r, c):
    piv = T[r][c]
    row = T[r]
    if piv != 1:
        inv = 1 / piv
        row = [a * inv for a in row]
        T[r] = row
        rhs[r] = rhs[r] * inv
    nz = [j for j, a in enumerate(row) if a != 0]
    for i in range(len(T)):
        if i == r:
            continue
        f = T[i][c]
        if f != 0:
            Ti = T[i]
            for j in nz:
                Ti[j] -= f * row[j]
            rhs[i] -= f * rhs[r]
    basis[r] = c


def _optimise(T, rhs, basis, cost, allowed) -> bool:
    """Primal simplex with Bland's rule; returns False when unbounded."""
    m = len(T)
    while True:
        cb = [cost[j] for j in basis]
        in_basis = set(basis)
        enter = None
        for j in range(allowed):
            if j in in_basis:
                continue
            red = cost[j] - sum((cb[i] * T[i][j] for i in range(m) if T[i][j] != 0), ZERO)
            if red > 0:
                enter = j
                break
        if enter is None:
            return True
        leave = None
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return False
        _pivot(T, rhs, basis, leave, enter)


def maximize(c: Sequence, A_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    """One-off exact LP: maximise ``c.x`` subject to ``A_eq x = b_eq, x >= 0``."""
    return FeasibleTableau(A_eq, b_eq).maximize(c)
