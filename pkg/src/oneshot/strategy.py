"""Correlation boxes, classical wirings and one-shot success probabilities.

A ``CorrelationBox`` is a conditional distribution p(a, b | s, t) stored as a
numpy array indexed ``[s, t, a, b]``. The communication protocol turns a raw
box shared by Alice and Bob into an *effective* box p(x, m' | m, y) through a
``Wiring``: Alice's encoder maps (message, outcome) to a channel input, Bob
picks his setting from the channel output via p(v|y), and post-processes
(outcome, output) into a guess.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .channel import ClassicalChannel, Encoding, MessageEnsemble, PREVEDEL_INPUTS, PREVEDEL_OUTPUTS, eta
from .errors import InputError
from .quantum import (
    TOL,
    DensityMatrix,
    Povm,
    QuantumStrategy,
    depolarize,
    max_entangled,
    projector,
    random_povm,
    random_state,
    validate_strategy,
)
from .rational import to_fraction


@dataclass(frozen=True)
class CorrelationBox:
    alice_inputs: tuple[str, ...]
    alice_outputs: tuple[str, ...]
    bob_inputs: tuple[str, ...]
    bob_outputs: tuple[str, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("alice_inputs", "alice_outputs", "bob_inputs", "bob_outputs"):
            labels = tuple(str(v) for v in getattr(self, name))
            if len(set(labels)) != len(labels):
                raise InputError(f"duplicate labels in {name}")
            object.__setattr__(self, name, labels)
        t = np.asarray(self.table, dtype=float)
        shape = (len(self.alice_inputs), len(self.bob_inputs), len(self.alice_outputs), len(self.bob_outputs))
        if t.shape != shape:
            raise InputError(f"box table has shape {t.shape}, expected {shape}")
        object.__setattr__(self, "table", t)

    def p(self, a: str, b: str, s: str, t: str) -> float:
        return float(
            self.table[
                self.alice_inputs.index(s),
                self.bob_inputs.index(t),
                self.alice_outputs.index(a),
                self.bob_outputs.index(b),
            ]
        )

    def alice_marginals(self) -> np.ndarray:
        """p(a | s, t) indexed [s, t, a]."""
        return self.table.sum(axis=3)

    def bob_marginals(self) -> np.ndarray:
        """p(b | s, t) indexed [s, t, b]."""
        return self.table.sum(axis=2)

    def signalling(self) -> float:
        """Largest dependence of either party's marginal on the other party's input."""
        A = self.alice_marginals()
        B = self.bob_marginals()
        dev_a = np.max(np.abs(A - A[:, :1, :])) if A.size else 0.0
        dev_b = np.max(np.abs(B - B[:1, :, :])) if B.size else 0.0
        return float(max(dev_a, dev_b))

    def violations(self, tol: float = TOL) -> list[str]:
        out = []
        low = float(self.table.min()) if self.table.size else 0.0
        if low < -tol:
            out.append(f"negative probability {low:.3g}")
        norm = float(np.max(np.abs(self.table.sum(axis=(2, 3)) - 1)))
        if norm > tol:
            out.append(f"normalisation off by {norm:.3g}")
        sig = self.signalling()
        if sig > tol:
            out.append(f"signalling by {sig:.3g}")
        return out

    def is_nonsignalling(self, tol: float = TOL) -> bool:
        return not self.violations(tol)

    def mix(self, other: "CorrelationBox", w: float) -> "CorrelationBox":
        """w * self + (1 - w) * other."""
        if self.alphabets() != other.alphabets():
            raise InputError("cannot mix boxes with different alphabets")
        return CorrelationBox(*self.alphabets(), w * self.table + (1 - w) * other.table)

    def alphabets(self):
        return self.alice_inputs, self.alice_outputs, self.bob_inputs, self.bob_outputs

    def to_json(self) -> dict:
        table = {}
        for i, s in enumerate(self.alice_inputs):
            table[s] = {}
            for j, t in enumerate(self.bob_inputs):
                table[s][t] = {
                    a: {b: float(self.table[i, j, k, l]) for l, b in enumerate(self.bob_outputs)}
                    for k, a in enumerate(self.alice_outputs)
                }
        return {
            "alphabets": {
                "alice_inputs": list(self.alice_inputs),
                "alice_outputs": list(self.alice_outputs),
                "bob_inputs": list(self.bob_inputs),
                "bob_outputs": list(self.bob_outputs),
            },
            "table": table,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CorrelationBox":
        try:
            al = data["alphabets"]
            S, A, T, B = al["alice_inputs"], al["alice_outputs"], al["bob_inputs"], al["bob_outputs"]
            arr = np.zeros((len(S), len(T), len(A), len(B)))
            for i, s in enumerate(S):
                for j, t in enumerate(T):
                    cell = data["table"][s][t]
                    for k, a in enumerate(A):
                        for l, b in enumerate(B):
                            arr[i, j, k, l] = float(to_fraction(cell[a][b])) if isinstance(cell[a][b], str) else float(cell[a][b])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad box JSON: {exc}") from exc
        return cls(S, A, T, B, arr)

    @classmethod
    def load(cls, path) -> "CorrelationBox":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Wiring:
    """Classical pre- and post-processing around a raw box.

    ``encoder[(m, a)]`` is the channel input Alice sends on outcome a of
    setting m; ``bob_setting[y]`` is the distribution p(v|y); and
    ``decoder[(z, y)]`` is Bob's guessed message.
    """

    encoder: Mapping
    bob_setting: Mapping
    decoder: Mapping

    def __post_init__(self):
        rows = {}
        for y, dist in self.bob_setting.items():
            row = {str(v): to_fraction(p) for v, p in dist.items()}
            if any(p < 0 for p in row.values()) or sum(row.values()) != 1:
                raise InputError(f"p(v|y={y!r}) is not a probability distribution")
            rows[str(y)] = row
        object.__setattr__(self, "bob_setting", rows)
        object.__setattr__(self, "encoder", {(str(m), str(a)): str(x) for (m, a), x in self.encoder.items()})
        object.__setattr__(self, "decoder", {(str(z), str(y)): str(g) for (z, y), g in self.decoder.items()})


def box_from_strategy(
    s: QuantumStrategy,
    alice_outputs: Sequence[str] | None = None,
    bob_outputs: Sequence[str] | None = None,
) -> CorrelationBox:
    """p(a, z | m, v) = Tr[(E^m_a (x) E^v_z) rho] for every setting pair.

    Outcome alphabets default to the union of the POVMs' outcomes in order of
    first appearance; outcomes a setting lacks get probability zero.
    """
    S = tuple(s.alice)
    T = tuple(s.bob)
    A = tuple(alice_outputs) if alice_outputs is not None else _union(p.outcomes for p in s.alice.values())
    B = tuple(bob_outputs) if bob_outputs is not None else _union(p.outcomes for p in s.bob.values())
    dA = next(iter(s.alice.values())).dim
    dB = next(iter(s.bob.values())).dim
    if dA * dB != s.rho.dim:
        raise InputError(f"dimension mismatch: {dA} x {dB} != {s.rho.dim}")
    rho = s.rho.matrix.reshape(dA, dB, dA, dB)
    table = np.zeros((len(S), len(T), len(A), len(B)))
    for i, m in enumerate(S):
        Ea = s.alice[m].elements
        # Bob's unnormalised conditional states for each of Alice's outcomes
        sigmas = {a: np.einsum("ba,ajbk->jk", Ea[a], rho) for a in Ea}
        for j, v in enumerate(T):
            Ez = s.bob[v].elements
            for a, sigma in sigmas.items():
                k = A.index(a)
                for z, F in Ez.items():
                    table[i, j, k, B.index(z)] = np.real(np.trace(F @ sigma))
    return CorrelationBox(S, A, T, B, table)


def _union(groups) -> tuple[str, ...]:
    out: dict = {}
    for g in groups:
        for k in g:
            out.setdefault(k, None)
    return tuple(out)


def effective_box(
    raw: CorrelationBox,
    w: Wiring,
    inputs: Sequence[str],
    outputs: Sequence[str],
    messages: Sequence[str] | None = None,
) -> CorrelationBox:
    """The box p(x, m' | m, y) the protocol induces.

    p(x, m'|m, y) = sum_{a: enc(m,a)=x} sum_v p(v|y) sum_{z: g(z,y)=m'} p(a, z|m, v)
    """
    msgs = tuple(messages) if messages is not None else raw.alice_inputs
    X, Y = tuple(inputs), tuple(outputs)
    S, A, T, B = raw.alice_inputs, raw.alice_outputs, raw.bob_inputs, raw.bob_outputs
    enc = np.zeros((len(S), len(A), len(X)))
    for i, m in enumerate(S):
        for k, a in enumerate(A):
            x = w.encoder.get((m, a))
            if x is None:
                if raw.table[i, :, k, :].any():
                    raise InputError(f"encoder undefined for message {m!r}, outcome {a!r}")
                continue
            if x not in X:
                raise InputError(f"encoder maps to unknown channel input {x!r}")
            enc[i, k, X.index(x)] = 1
    pv = np.zeros((len(Y), len(T)))
    for yi, y in enumerate(Y):
        if y not in w.bob_setting:
            raise InputError(f"p(v|y) undefined for y={y!r}")
        for v, p in w.bob_setting[y].items():
            if v not in T:
                raise InputError(f"wiring selects unknown Bob setting {v!r}")
            pv[yi, T.index(v)] = float(p)
    dec = np.zeros((len(Y), len(B), len(msgs)))
    for yi, y in enumerate(Y):
        for zi, z in enumerate(B):
            g = w.decoder.get((z, y))
            if g is None:
                raise InputError(f"decoder undefined for outcome {z!r}, output {y!r}")
            if g not in msgs:
                raise InputError(f"decoder produces unknown message {g!r}")
            dec[yi, zi, msgs.index(g)] = 1
    table = np.einsum("max,yv,mvaz,yzk->myxk", enc, pv, raw.table, dec, optimize=True)
    return CorrelationBox(S, X, Y, msgs, table)


def _check_protocol_box(N: ClassicalChannel, messages, box: CorrelationBox):
    if box.alice_outputs != N.inputs or box.bob_inputs != N.outputs:
        raise InputError("box alphabets do not match the channel (need Msg -> X and Y -> Msg)")
    missing = [m for m in messages if m not in box.alice_inputs or m not in box.bob_outputs]
    if missing:
        raise InputError(f"messages {missing} missing from the box alphabets")


def success_probability(N: ClassicalChannel, p: MessageEnsemble, box: CorrelationBox) -> float:
    """S = sum_m p(m) sum_{x,y} N(y|x) p(x, m'=m | m, y)."""
    _check_protocol_box(N, p.messages, box)
    Nyx = np.array([[float(N(y, x)) for y in N.outputs] for x in N.inputs])
    total = 0.0
    for m in p.messages:
        i = box.alice_inputs.index(m)
        k = box.bob_outputs.index(m)
        total += float(p[m]) * float(np.sum(Nyx.T * box.table[i, :, :, k]))
    return total


def _exact(values) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def _check_joint(E: Encoding, joint: Mapping, tol: float):
    for m in E.messages:
        if m not in joint:
            raise InputError(f"no joint table for message {m!r}")
        table = joint[m]
        Xm = set(E[m])
        bad = [k for k in table if k[0] not in Xm or k[1] not in Xm]
        if bad:
            raise InputError(f"joint table for {m!r} has entries outside X_m x X_m: {bad[:3]}")
        vals = list(table.values())
        if any(v < -tol for v in vals):
            raise InputError(f"joint table for {m!r} has negative entries")
        total = sum(vals)
        if (total != 1) if _exact(vals) else abs(total - 1) > tol:
            raise InputError(f"normalisation failure: joint table for {m!r} sums to {total}")


def success_probability_cig(
    N: ClassicalChannel, E: Encoding, p: MessageEnsemble, joint: Mapping, tol: float = TOL
):
    """S = sum_m p(m) sum_{x,x' in X_m} p(x, x'|m) eta(x, x').

    ``joint[m][(x, x')]`` is the probability that Alice inputs x and Bob
    guesses x', both inside X_m. Exact inputs give an exact Fraction.
    """
    _check_joint(E, joint, tol)
    exact = all(_exact(joint[m].values()) for m in E.messages)
    total = Fraction(0) if exact else 0.0
    for m in E.messages:
        inner = Fraction(0) if exact else 0.0
        for (x, x2), q in joint[m].items():
            e = eta(N, x, x2)
            inner += q * e if exact else q * float(e)
        total += (p[m] if exact else float(p[m])) * inner
    return total


def corr(joint: Mapping, p: MessageEnsemble):
    """Probability that Bob's guess equals Alice's input: sum_m p(m) sum_x p(x, x|m)."""
    exact = all(_exact(joint[m].values()) for m in p.messages)
    total = Fraction(0) if exact else 0.0
    for m in p.messages:
        same = sum((q for (x, x2), q in joint[m].items() if x == x2), Fraction(0) if exact else 0.0)
        total += (p[m] if exact else float(p[m])) * same
    return total


def cig_joint_from_box(raw: CorrelationBox, N: ClassicalChannel, E: Encoding) -> dict:
    """Read p(x, x'|m) off a raw box whose Bob settings are channel outputs and outcomes are guesses.

    Uses the first output y in Y_{x'}; ``cig_deviation`` measures how much the
    choice of y matters.
    """
    joint = {}
    for m in E.messages:
        i = raw.alice_inputs.index(m)
        table = {}
        for x in E[m]:
            for x2 in E[m]:
                y = next(y for y in N.outputs if y in N.support(x2))
                table[(x, x2)] = float(raw.table[i, raw.bob_inputs.index(y), raw.alice_outputs.index(x), raw.bob_outputs.index(x2)])
        joint[m] = table
    return joint


def cig_deviation(raw: CorrelationBox, N: ClassicalChannel, E: Encoding) -> float:
    """max |p(x, x'|m, y1) - p(x, x'|m, y2)| over y1, y2 in Y_{x'}: zero iff guessing is context independent."""
    worst = 0.0
    for m in E.messages:
        i = raw.alice_inputs.index(m)
        for x in N.inputs:
            if x not in raw.alice_outputs:
                continue
            k = raw.alice_outputs.index(x)
            for x2 in N.inputs:
                if x2 not in raw.bob_outputs:
                    continue
                l = raw.bob_outputs.index(x2)
                vals = [raw.table[i, raw.bob_inputs.index(y), k, l] for y in N.support(x2)]
                worst = max(worst, float(np.max(vals) - np.min(vals)))
    return worst


# -- named strategies ----------------------------------------------------------------


def cubitt_strategy(scenario, visibility: float = 1.0):
    """Shared two-ququart maximally entangled state; Alice measures dotted bases, Bob the channel bases.

    ``scenario`` needs ``vectors`` (ray coordinates), ``hypergraph`` and
    ``dotted`` (the disjoint bases used as the encoding). Returns
    ``(strategy, wiring, channel, encoding)``.
    """
    from .channel import channel_from_scenario

    if scenario.vectors is None or not scenario.dotted:
        raise InputError("Cubitt strategy needs a scenario with rays and a dotted partition")
    channel, encoding = channel_from_scenario(scenario, scenario.dotted)
    rays = scenario.vectors.rays
    d = scenario.vectors.dim
    rho = max_entangled(d)
    if visibility != 1.0:
        rho = depolarize(rho, visibility)
    alice = {m: Povm(m, {x: projector(rays[x]) for x in encoding[m]}) for m in encoding.messages}
    bob = {y: Povm(y, {x: projector(rays[x], conjugate=True) for x in channel.preimage(y)}) for y in channel.outputs}
    strategy = QuantumStrategy(rho, alice, bob)
    wiring = Wiring(
        encoder={(m, x): x for m in encoding.messages for x in channel.inputs},
        bob_setting={y: {y: 1} for y in channel.outputs},
        decoder={(x, y): encoding.class_of(x) for x in channel.inputs for y in channel.outputs},
    )
    return strategy, wiring, channel, encoding


def prevedel_strategy(visibility: float = 1.0):
    """Two-qubit Phi+ with CHSH-optimal observables and the bit/parity wiring.

    Alice measures Z (m=0) or X (m=1) and sends x = m b2; Bob measures
    (Z+X)/sqrt2 for parity outputs and (Z-X)/sqrt2 for second-bit outputs.
    Outputs revealing the first bit ignore Bob's outcome, so setting 0 is
    fixed there.
    """
    Z = np.diag([1.0, -1.0]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    I = np.eye(2)

    def binary(setting, obs):
        return Povm(setting, {"0": (I + obs) / 2, "1": (I - obs) / 2})

    rho = max_entangled(2)
    if visibility != 1.0:
        rho = depolarize(rho, visibility)
    alice = {"0": binary("0", Z), "1": binary("1", X)}
    bob = {"0": binary("0", (Z + X) / np.sqrt(2)), "1": binary("1", (Z - X) / np.sqrt(2))}
    return QuantumStrategy(rho, alice, bob), prevedel_wiring()


def prevedel_wiring() -> Wiring:
    encoder = {(m, b2): f"{m}{b2}" for m in "01" for b2 in "01"}
    bob_setting = {}
    decoder = {}
    for y in PREVEDEL_OUTPUTS:
        kind, b = y.split(":")
        bob_setting[y] = {"1": 1} if kind == "2" else {"0": 1}
        for z in "01":
            decoder[(z, y)] = b if kind == "1" else str(int(b) ^ int(z))
    return Wiring(encoder, bob_setting, decoder)


def pr_box() -> CorrelationBox:
    """p(a, z|m, v) = 1/2 when a xor z = m v."""
    t = np.zeros((2, 2, 2, 2))
    for m, v, a, z in product(range(2), repeat=4):
        if a ^ z == m * v:
            t[m, v, a, z] = 0.5
    return CorrelationBox("01", "01", "01", "01", t)


def deterministic_box(alice_fn: Mapping, bob_fn: Mapping, alice_outputs, bob_outputs) -> CorrelationBox:
    """Local deterministic box: a = alice_fn[s], b = bob_fn[t]."""
    S, T = tuple(alice_fn), tuple(bob_fn)
    A, B = tuple(alice_outputs), tuple(bob_outputs)
    t = np.zeros((len(S), len(T), len(A), len(B)))
    for i, s in enumerate(S):
        for j, u in enumerate(T):
            t[i, j, A.index(alice_fn[s]), B.index(bob_fn[u])] = 1
    return CorrelationBox(S, A, T, B, t)


def uniform_box(S, A, T, B) -> CorrelationBox:
    t = np.full((len(S), len(T), len(A), len(B)), 1.0 / (len(A) * len(B)))
    return CorrelationBox(S, A, T, B, t)


def chsh_vertices() -> list[CorrelationBox]:
    """The 24 extremal no-signalling boxes of the two-input two-output scenario."""
    out = []
    for fa in product(range(2), repeat=2):
        for fb in product(range(2), repeat=2):
            out.append(deterministic_box({"0": str(fa[0]), "1": str(fa[1])}, {"0": str(fb[0]), "1": str(fb[1])}, "01", "01"))
    for alpha, beta, gamma in product(range(2), repeat=3):
        t = np.zeros((2, 2, 2, 2))
        for m, v, a, z in product(range(2), repeat=4):
            if a ^ z == (m * v) ^ (alpha * m) ^ (beta * v) ^ gamma:
                t[m, v, a, z] = 0.5
        out.append(CorrelationBox("01", "01", "01", "01", t))
    return out


def random_chsh_box(rng: np.random.Generator) -> CorrelationBox:
    """Dirichlet mixture of the 24 no-signalling vertices."""
    verts = chsh_vertices()
    w = rng.dirichlet(np.full(len(verts), 0.3))
    t = sum(wi * v.table for wi, v in zip(w, verts))
    return CorrelationBox("01", "01", "01", "01", t)


def random_nonsignalling_box(S, A, T, B, rng: np.random.Generator, d: int = 3) -> CorrelationBox:
    """Random mixture of a random quantum box and random local deterministic boxes."""
    S, A, T, B = (tuple(map(str, z)) for z in (S, A, T, B))
    q = QuantumStrategy(
        random_state(d * d, rng),
        {s: random_povm(s, A, d, rng) for s in S},
        {t: random_povm(t, B, d, rng) for t in T},
    )
    parts = [box_from_strategy(q, A, B)]
    for _ in range(3):
        parts.append(
            deterministic_box(
                {s: A[rng.integers(len(A))] for s in S},
                {t: B[rng.integers(len(B))] for t in T},
                A,
                B,
            )
        )
    w = rng.dirichlet(np.ones(len(parts)))
    return CorrelationBox(S, A, T, B, sum(wi * p.table for wi, p in zip(w, parts)))


def random_wiring(raw: CorrelationBox, inputs, outputs, messages, rng: np.random.Generator) -> Wiring:
    encoder = {(m, a): inputs[rng.integers(len(inputs))] for m in raw.alice_inputs for a in raw.alice_outputs}
    bob_setting = {}
    for y in outputs:
        w = rng.integers(1, 4, size=len(raw.bob_inputs))
        total = int(w.sum())
        bob_setting[y] = {v: Fraction(int(wi), total) for v, wi in zip(raw.bob_inputs, w)}
    decoder = {(z, y): messages[rng.integers(len(messages))] for z in raw.bob_outputs for y in outputs}
    return Wiring(encoder, bob_setting, decoder)


__all__ = [
    "CorrelationBox",
    "Wiring",
    "QuantumStrategy",
    "box_from_strategy",
    "effective_box",
    "success_probability",
    "success_probability_cig",
    "corr",
    "cig_joint_from_box",
    "cig_deviation",
    "cubitt_strategy",
    "prevedel_strategy",
    "prevedel_wiring",
    "pr_box",
    "deterministic_box",
    "uniform_box",
    "chsh_vertices",
    "random_chsh_box",
    "random_nonsignalling_box",
    "random_wiring",
    "validate_strategy",
    "DensityMatrix",
]
