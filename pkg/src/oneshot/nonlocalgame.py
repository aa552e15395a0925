"""Nonlocal games built from k-regular, output-uniform channels.

Alice gets a message m and answers a channel input x; Bob gets a channel
output y and answers a message m'. They win when y is impossible for x, or
when m' = m. With questions drawn as p(m) / |Y| the winning probability is an
affine image of the one-shot success probability of the same box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product

import numpy as np

from .bounds import BoundCertificate, classical_max
from .channel import ClassicalChannel, MessageEnsemble
from .errors import BudgetExceeded, ComputationError, InputError
from .hypergraph import DEFAULT_NODE_BUDGET
from .rational import fraction_str, lcm_of_denominators, to_fraction
from .strategy import CorrelationBox, success_probability


@dataclass(frozen=True)
class GameSpec:
    alice_questions: tuple[str, ...]
    alice_answers: tuple[str, ...]
    bob_questions: tuple[str, ...]
    bob_answers: tuple[str, ...]
    V: np.ndarray = field(repr=False)  # [m, y, x, m'] in {0, 1}
    p: dict = field(repr=False)  # (m, y) -> Fraction

    def __post_init__(self):
        shape = (len(self.alice_questions), len(self.bob_questions), len(self.alice_answers), len(self.bob_answers))
        V = np.asarray(self.V, dtype=np.int64)
        if V.shape != shape:
            raise InputError(f"predicate table has shape {V.shape}, expected {shape}")
        if not np.isin(V, (0, 1)).all():
            raise InputError("predicate values must be 0 or 1")
        object.__setattr__(self, "V", V)
        p = {(str(m), str(y)): to_fraction(self.p.get((m, y), 0)) for m in self.alice_questions for y in self.bob_questions}
        if any(v < 0 for v in p.values()) or sum(p.values()) != 1:
            raise InputError("question distribution must be nonnegative and sum to 1 exactly")
        object.__setattr__(self, "p", p)

    def weights(self) -> tuple[np.ndarray, int]:
        """Integer array W[m, y, x, m'] = L p(m, y) V(...) and the scale L."""
        L = lcm_of_denominators(self.p.values())
        P = np.array([[int(self.p[(m, y)] * L) for y in self.bob_questions] for m in self.alice_questions], dtype=np.int64)
        return self.V * P[:, :, None, None], L

    def to_json(self) -> dict:
        V = {
            m: {
                y: {x: {b: int(self.V[i, j, k, l]) for l, b in enumerate(self.bob_answers)} for k, x in enumerate(self.alice_answers)}
                for j, y in enumerate(self.bob_questions)
            }
            for i, m in enumerate(self.alice_questions)
        }
        return {
            "alice_questions": list(self.alice_questions),
            "alice_answers": list(self.alice_answers),
            "bob_questions": list(self.bob_questions),
            "bob_answers": list(self.bob_answers),
            "p": {m: {y: fraction_str(self.p[(m, y)]) for y in self.bob_questions} for m in self.alice_questions},
            "V": V,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GameSpec":
        try:
            S, A, T, B = data["alice_questions"], data["alice_answers"], data["bob_questions"], data["bob_answers"]
            V = np.array([[[[data["V"][m][y][x][b] for b in B] for x in A] for y in T] for m in S])
            p = {(m, y): data["p"][m][y] for m in S for y in T}
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad game JSON: {exc}") from exc
        return cls(tuple(S), tuple(A), tuple(T), tuple(B), V, p)

    @classmethod
    def load(cls, path) -> "GameSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _game_hypotheses(N: ClassicalChannel) -> int:
    k = N.regularity()
    if k is None:
        raise InputError("not-k-regular: inputs reach different numbers of outputs")
    if not N.is_output_uniform():
        raise InputError("not-output-uniform: N(y|x) is not 1/k on the support of x")
    return k


def build_game(N: ClassicalChannel, p: MessageEnsemble) -> GameSpec:
    """V = 1 when N(y|x) = 0, else [m' = m]; questions p(m, y) = p(m) / |Y|."""
    _game_hypotheses(N)
    msgs, X, Y = p.messages, N.inputs, N.outputs
    V = np.zeros((len(msgs), len(Y), len(X), len(msgs)), dtype=np.int64)
    for i, m in enumerate(msgs):
        for j, y in enumerate(Y):
            for k, x in enumerate(X):
                if N(y, x) == 0:
                    V[i, j, k, :] = 1
                else:
                    V[i, j, k, i] = 1
    q = {(m, y): p[m] / len(Y) for m in msgs for y in Y}
    return GameSpec(msgs, X, Y, msgs, V, q)


def _check_box(G: GameSpec, box: CorrelationBox):
    if (box.alice_inputs, box.alice_outputs, box.bob_inputs, box.bob_outputs) != (
        G.alice_questions,
        G.alice_answers,
        G.bob_questions,
        G.bob_answers,
    ):
        raise InputError("box alphabets do not match the game")


def s_bell(G: GameSpec, box: CorrelationBox) -> float:
    """sum_{m,y} p(m, y) sum_{x,m'} p(x, m'|m, y) V(x, m', m, y)."""
    _check_box(G, box)
    P = np.array([[float(G.p[(m, y)]) for y in G.bob_questions] for m in G.alice_questions])
    return float(np.einsum("my,myab,myab->", P, box.table, G.V))


def _message_symmetric(G: GameSpec) -> bool:
    """Is the game invariant under relabelling messages on both sides at once?"""
    if G.alice_questions != G.bob_answers:
        return False
    q = len(G.alice_questions)
    for i in range(q - 1):
        perm = list(range(q))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if not np.array_equal(G.V[perm][:, :, :, perm], G.V):
            return False
        for y in G.bob_questions:
            if G.p[(G.alice_questions[i], y)] != G.p[(G.alice_questions[i + 1], y)]:
                return False
    return True


def evaluate_local(G: GameSpec, alice: dict, bob: dict) -> Fraction:
    """Exact winning probability of a deterministic local strategy."""
    total = Fraction(0)
    for i, m in enumerate(G.alice_questions):
        k = G.alice_answers.index(alice[m])
        for j, y in enumerate(G.bob_questions):
            l = G.bob_answers.index(bob[y])
            if G.V[i, j, k, l]:
                total += G.p[(m, y)]
    return total


def local_max(G: GameSpec, budget: int = DEFAULT_NODE_BUDGET, chunk: int = 20000) -> BoundCertificate:
    """Exact Bell-local value: enumerate Alice's functions, answer optimally on Bob's side.

    When the game is symmetric under relabelling messages only multisets of
    Alice's answers are enumerated. Scores are exact integers in numpy.
    """
    W, L = G.weights()
    q, nA = len(G.alice_questions), len(G.alice_answers)
    symmetric = _message_symmetric(G)
    if symmetric:
        funcs = combinations_with_replacement(range(nA), q)
        count = _multichoose(nA, q)
    else:
        funcs = product(range(nA), repeat=q)
        count = nA**q
    if count > budget:
        raise BudgetExceeded(f"{count} local strategies exceed the budget of {budget}")
    rows = np.arange(q)[None, :]
    best_val, best_f = -1, None
    while True:
        block = np.array([f for _, f in zip(range(chunk), funcs)], dtype=np.int64)
        if block.size == 0:
            break
        # scores[c, y, m'] = sum_m W[m, y, f_c(m), m']
        scores = W[rows, :, block, :].sum(axis=1)
        vals = scores.max(axis=2).sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_f = int(vals[i]), tuple(int(v) for v in block[i])
    alice = {m: G.alice_answers[x] for m, x in zip(G.alice_questions, best_f)}
    bob = {}
    for j, y in enumerate(G.bob_questions):
        col = sum(W[i, j, best_f[i], :] for i in range(q))
        bob[y] = G.bob_answers[int(np.argmax(col))]
    value = Fraction(best_val, L)
    if evaluate_local(G, alice, bob) != value:
        raise ComputationError("local_max witness does not re-evaluate to the reported value")
    method = "enumeration (message multisets)" if symmetric else "enumeration"
    return BoundCertificate(value, {"alice": alice, "bob": bob}, method, {"alice_functions": count})


def _multichoose(n: int, k: int) -> int:
    from math import comb

    return comb(n + k - 1, k)


def affine_image(N: ClassicalChannel, value):
    """1 - k/|Y| + (k/|Y|) value, exact for Fractions."""
    k = _game_hypotheses(N)
    r = Fraction(k, len(N.outputs))
    if isinstance(value, Fraction):
        return 1 - r + r * value
    return 1 - float(r) + float(r) * value


def affine_check(N: ClassicalChannel, p: MessageEnsemble, box: CorrelationBox, tol: float = 1e-9) -> float:
    """|S_Bell - (1 - k/|Y| + (k/|Y|) S)| for the game built from N."""
    if not box.is_nonsignalling(tol):
        raise InputError("precondition violation: box is not no-signalling: " + "; ".join(box.violations(tol)))
    G = build_game(N, p)
    return abs(s_bell(G, box) - affine_image(N, success_probability(N, p, box)))


def local_affine_check(N: ClassicalChannel, p: MessageEnsemble, budget: int = DEFAULT_NODE_BUDGET) -> dict:
    """Both routes to the local bound: game enumeration and the affine image of classical_max."""
    loc = local_max(build_game(N, p), budget)
    cl = classical_max(N, p, budget)
    img = affine_image(N, cl.value)
    return {"local_max": loc.value, "classical_max": cl.value, "affine_image": img, "equal": loc.value == img}


def chsh_value(box: CorrelationBox) -> float:
    """(1/4) sum p(a, z|m, v) [a xor z = m v] on a two-input, two-output box."""
    if box.table.shape != (2, 2, 2, 2):
        raise InputError(f"CHSH needs a 2x2x2x2 box, got shape {box.table.shape}")
    total = 0.0
    for m, v, a, z in product(range(2), repeat=4):
        if a ^ z == m * v:
            total += box.table[m, v, a, z]
    return total / 4
