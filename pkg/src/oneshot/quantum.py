"""Small dense quantum states and measurements.

Everything here is double-precision complex numpy. Validation uses an
absolute tolerance of 1e-9 by default; all matrices are at most 16x16.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError

TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def violations(self, tol: float = TOL) -> list[str]:
        m = self.matrix
        out = []
        herm = np.max(np.abs(m - m.conj().T))
        if herm > tol:
            out.append(f"state not Hermitian (deviation {herm:.3g})")
        tr = abs(np.trace(m) - 1)
        if tr > tol:
            out.append(f"state trace off by {tr:.3g}")
        low = np.min(np.linalg.eigvalsh((m + m.conj().T) / 2))
        if low < -tol:
            out.append(f"state has negative eigenvalue {low:.3g}")
        return out


@dataclass(frozen=True)
class Povm:
    """A measurement: outcome label -> positive operator."""

    setting: str
    elements: Mapping = field(repr=False)

    def __post_init__(self):
        els = {str(k): np.asarray(v, dtype=complex) for k, v in self.elements.items()}
        if not els:
            raise InputError(f"POVM {self.setting!r} has no outcomes")
        shapes = {e.shape for e in els.values()}
        if len(shapes) != 1:
            raise InputError(f"POVM {self.setting!r} mixes operator dimensions")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return next(iter(self.elements.values())).shape[0]

    @property
    def outcomes(self) -> tuple[str, ...]:
        return tuple(self.elements)

    def violations(self, tol: float = TOL) -> list[str]:
        out = []
        total = None
        for k, e in self.elements.items():
            herm = np.max(np.abs(e - e.conj().T))
            if herm > tol:
                out.append(f"POVM {self.setting!r} outcome {k!r} not Hermitian (deviation {herm:.3g})")
            low = np.min(np.linalg.eigvalsh((e + e.conj().T) / 2))
            if low < -tol:
                out.append(f"POVM {self.setting!r} outcome {k!r} has negative eigenvalue {low:.3g}")
            total = e if total is None else total + e
        dev = np.max(np.abs(total - np.eye(total.shape[0])))
        if dev > tol:
            out.append(f"POVM {self.setting!r} elements do not sum to identity (deviation {dev:.3g})")
        return out


@dataclass(frozen=True)
class Ensemble:
    """(probability, conditional state) per outcome; the state is None for zero-probability outcomes."""

    members: Mapping

    def average(self) -> np.ndarray:
        acc = None
        for p, rho in self.members.values():
            if rho is None:
                continue
            term = p * rho.matrix
            acc = term if acc is None else acc + term
        return acc


@dataclass(frozen=True)
class QuantumStrategy:
    """Shared state plus Alice's POVM per message and Bob's POVM per setting."""

    rho: DensityMatrix
    alice: Mapping  # message -> Povm
    bob: Mapping  # setting -> Povm


def ket(vector: Sequence) -> np.ndarray:
    v = np.asarray([complex(c) for c in vector])
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InputError("zero vector")
    return v / norm


def projector(vector: Sequence, conjugate: bool = False) -> np.ndarray:
    v = ket(vector)
    if conjugate:
        v = v.conj()
    return np.outer(v, v.conj())


def max_entangled(d: int) -> DensityMatrix:
    """Projector onto (1/sqrt d) sum_i |i>|i>."""
    if d < 2:
        raise InputError("maximally entangled state needs d >= 2")
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1
    psi /= np.sqrt(d)
    return DensityMatrix(np.outer(psi, psi.conj()))


def partial_trace(rho: np.ndarray, dA: int, dB: int, keep: str = "B") -> np.ndarray:
    r = np.asarray(rho).reshape(dA, dB, dA, dB)
    if keep == "B":
        return np.einsum("ajak->jk", r)
    if keep == "A":
        return np.einsum("ajbj->ab", r)
    raise InputError("keep must be 'A' or 'B'")


def split_dims(rho: DensityMatrix, dA: int) -> int:
    if rho.dim % dA:
        raise InputError(f"state dimension {rho.dim} does not factor with dA={dA}")
    return rho.dim // dA


def steered_ensemble(rho_AB: DensityMatrix, alice_povm: Povm) -> Ensemble:
    """Bob's conditional states and their probabilities for each of Alice's outcomes."""
    dA = alice_povm.dim
    dB = split_dims(rho_AB, dA)
    members = {}
    for k, E in alice_povm.elements.items():
        sigma = partial_trace(np.kron(E, np.eye(dB)) @ rho_AB.matrix, dA, dB, keep="B")
        p = float(np.real(np.trace(sigma)))
        if p <= 1e-15:
            members[k] = (0.0, None)
        else:
            members[k] = (p, DensityMatrix(sigma / p))
    return Ensemble(members)


def depolarize(rho: DensityMatrix, v: float) -> DensityMatrix:
    """v*rho + (1-v)*I/d."""
    if not 0 <= v <= 1:
        raise InputError(f"visibility {v} outside [0, 1]")
    d = rho.dim
    return DensityMatrix(v * rho.matrix + (1 - v) * np.eye(d) / d)


def born(rho: DensityMatrix, *operators: np.ndarray) -> float:
    op = operators[0]
    for o in operators[1:]:
        op = np.kron(op, o)
    return float(np.real(np.trace(op @ rho.matrix)))


def validate_strategy(s: QuantumStrategy, tol: float = TOL) -> list[str]:
    """Every state and POVM invariant, with the size of each violation."""
    out = list(s.rho.violations(tol))
    dA = dB = None
    for povm in s.alice.values():
        out += povm.violations(tol)
        dA = povm.dim
    for povm in s.bob.values():
        out += povm.violations(tol)
        dB = povm.dim
    if dA is not None and dB is not None and dA * dB != s.rho.dim:
        out.append(f"dimension mismatch: {dA} x {dB} != {s.rho.dim}")
    return out


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = G @ G.conj().T
    return DensityMatrix(m / np.trace(m))


def random_povm(setting: str, outcomes: Sequence[str], d: int, rng: np.random.Generator) -> Povm:
    """S^{-1/2} G_k S^{-1/2} for random positive G_k, so elements sum to identity."""
    Gs = []
    for _ in outcomes:
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        Gs.append(A @ A.conj().T)
    S = sum(Gs)
    w, U = np.linalg.eigh(S)
    inv_sqrt = U @ np.diag(w ** -0.5) @ U.conj().T
    return Povm(setting, {k: inv_sqrt @ G @ inv_sqrt for k, G in zip(outcomes, Gs)})
