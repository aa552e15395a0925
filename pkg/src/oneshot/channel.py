"""Classical channels, encodings and zero-error codes.

Channel probabilities are exact ``Fraction`` values throughout; floats only
appear once a channel meets a quantum strategy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .errors import BudgetExceeded, InputError
from .hypergraph import (
    DEFAULT_NODE_BUDGET,
    Hypergraph,
    SimpleGraph,
    independence_number,
    orthogonality_graph,
)
from .rational import fraction_str, to_fraction


@dataclass(frozen=True)
class ClassicalChannel:
    """N(y|x) over ordered input and output alphabets."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    probs: Mapping = field(repr=False)

    def __init__(self, inputs: Iterable, outputs: Iterable, probs: Mapping):
        xs = tuple(str(x) for x in inputs)
        ys = tuple(str(y) for y in outputs)
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise InputError("duplicate channel symbols")
        table = {}
        for x in xs:
            row = probs.get(x, {})
            unknown = set(map(str, row)) - set(ys)
            if unknown:
                raise InputError(f"input {x!r} has probabilities for unknown outputs {sorted(unknown)}")
            table[x] = {y: to_fraction(row.get(y, 0)) for y in ys}
            if any(p < 0 for p in table[x].values()):
                raise InputError(f"negative probability for input {x!r}")
            total = sum(table[x].values())
            if total != 1:
                raise InputError(f"probabilities for input {x!r} sum to {total}, not 1")
        extra = set(map(str, probs)) - set(xs)
        if extra:
            raise InputError(f"probabilities given for unknown inputs {sorted(extra)}")
        object.__setattr__(self, "inputs", xs)
        object.__setattr__(self, "outputs", ys)
        object.__setattr__(self, "probs", table)

    def __call__(self, y: str, x: str) -> Fraction:
        return self.probs[x][y]

    def support(self, x: str) -> frozenset:
        """Y_x: outputs reachable from x."""
        return frozenset(y for y, p in self.probs[x].items() if p > 0)

    def preimage(self, y: str) -> tuple[str, ...]:
        """X_y: inputs that can produce y."""
        return tuple(x for x in self.inputs if self.probs[x][y] > 0)

    def hypergraph(self) -> Hypergraph:
        return channel_hypergraph(self)

    def confusability_graph(self) -> SimpleGraph:
        return orthogonality_graph(channel_hypergraph(self))

    def regularity(self) -> int | None:
        """k when every input reaches exactly k outputs, else None."""
        sizes = {len(self.support(x)) for x in self.inputs}
        return sizes.pop() if len(sizes) == 1 else None

    def is_output_uniform(self) -> bool:
        for x in self.inputs:
            Yx = self.support(x)
            if any(self.probs[x][y] != Fraction(1, len(Yx)) for y in Yx):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "probs": {x: {y: fraction_str(p) for y, p in row.items() if p} for x, row in self.probs.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClassicalChannel":
        if data.get("output_uniform"):
            if "hypergraph" not in data:
                raise InputError("output_uniform channel JSON needs a 'hypergraph' entry")
            return output_uniform_channel(Hypergraph.from_json(data["hypergraph"]))
        try:
            return cls(data["inputs"], data["outputs"], data["probs"])
        except (KeyError, AttributeError, TypeError) as exc:
            raise InputError(f"bad channel JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ClassicalChannel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Encoding:
    """Messages and their disjoint input classes X_m."""

    messages: tuple[str, ...]
    classes: Mapping

    def __init__(self, classes: Mapping):
        msgs = tuple(str(m) for m in classes)
        object.__setattr__(self, "messages", msgs)
        object.__setattr__(self, "classes", {str(m): tuple(str(x) for x in xs) for m, xs in classes.items()})

    def __getitem__(self, m: str) -> tuple[str, ...]:
        return self.classes[m]

    def class_of(self, x: str) -> str | None:
        for m, xs in self.classes.items():
            if x in xs:
                return m
        return None

    def to_json(self) -> dict:
        return {m: list(xs) for m, xs in self.classes.items()}

    @classmethod
    def from_json(cls, data: dict) -> "Encoding":
        if not isinstance(data, dict):
            raise InputError("encoding JSON must map message -> list of inputs")
        return cls(data)

    @classmethod
    def load(cls, path) -> "Encoding":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class MessageEnsemble:
    """Prior p(m), exact and normalised."""

    p: Mapping

    def __init__(self, p: Mapping):
        table = {str(m): to_fraction(v) for m, v in p.items()}
        if any(v < 0 for v in table.values()):
            raise InputError("negative message probability")
        if sum(table.values()) != 1:
            raise InputError(f"message probabilities sum to {sum(table.values())}, not 1")
        object.__setattr__(self, "p", table)

    @classmethod
    def uniform(cls, messages: Iterable) -> "MessageEnsemble":
        msgs = [str(m) for m in messages]
        return cls({m: Fraction(1, len(msgs)) for m in msgs})

    @property
    def messages(self) -> tuple[str, ...]:
        return tuple(self.p)

    def __getitem__(self, m: str) -> Fraction:
        return self.p[m]

    def is_uniform(self) -> bool:
        return len(set(self.p.values())) == 1


def channel_hypergraph(N: ClassicalChannel) -> Hypergraph:
    """One hyperedge X_y per output y that some input can produce.

    Outputs with the same preimage give the same constraint, so only the
    first of them is kept.
    """
    edges, labels, seen = [], [], set()
    for y in N.outputs:
        Xy = N.preimage(y)
        if Xy and frozenset(Xy) not in seen:
            seen.add(frozenset(Xy))
            edges.append(Xy)
            labels.append(y)
    return Hypergraph(N.inputs, edges, labels)


def output_uniform_channel(H: Hypergraph) -> ClassicalChannel:
    """N(y|x) = 1/|Y_x| on the hyperedges containing x."""
    uncovered = H.uncovered_vertices()
    if uncovered:
        raise InputError(f"vertices {uncovered} lie in no hyperedge, so they have no outputs")
    probs = {}
    for x in H.vertices:
        Yx = [lab for lab, e in zip(H.edge_labels, H.hyperedges) if x in e]
        probs[x] = {y: Fraction(1, len(Yx)) for y in Yx}
    return ClassicalChannel(H.vertices, H.edge_labels, probs)


def eta(N: ClassicalChannel, x: str, x2: str) -> Fraction:
    """Probability that input x yields an output that x2 could also have produced."""
    if x not in N.probs or x2 not in N.probs:
        raise InputError(f"unknown input {x if x not in N.probs else x2!r}")
    Y2 = N.support(x2)
    return sum((p for y, p in N.probs[x].items() if y in Y2), Fraction(0))


def eta_extremes(N: ClassicalChannel, E: Encoding) -> tuple[Fraction, Fraction]:
    """(eta_min, eta_max) over distinct pairs inside each message class."""
    vals = [eta(N, x, x2) for m in E.messages for x in E[m] for x2 in E[m] if x != x2]
    if not vals:
        raise InputError("no message class has two or more inputs")
    return min(vals), max(vals)


def zero_error_capacity(N: ClassicalChannel, budget: int = DEFAULT_NODE_BUDGET) -> int:
    return independence_number(N.confusability_graph(), budget)[0]


def validate_encoding(N: ClassicalChannel, E: Encoding) -> list[str]:
    """Violations of the encoding rules; an empty list means valid."""
    out = []
    G = N.confusability_graph()
    owner: dict = {}
    for m in E.messages:
        xs = E[m]
        if not xs:
            out.append(f"message {m!r} has an empty class")
        for x in xs:
            if x not in N.probs:
                out.append(f"message {m!r}: {x!r} is not a channel input")
            elif x in owner:
                out.append(f"disjointness: {x!r} is in both {owner[x]!r} and {m!r}")
            else:
                owner[x] = m
        for a, b in combinations(xs, 2):
            if a in N.probs and b in N.probs and not G.adjacent(a, b):
                out.append(f"clique: {a!r} and {b!r} in message {m!r} are not confusable")
    return out


def admits_zero_error_code(N: ClassicalChannel, E: Encoding, budget: int = DEFAULT_NODE_BUDGET):
    """Search for one input per message class, pairwise non-confusable.

    Returns ``(True, {message: input})`` or ``(False, None)``.
    """
    problems = validate_encoding(N, E)
    if problems:
        raise InputError("invalid encoding: " + "; ".join(problems))
    G = N.confusability_graph()
    msgs = sorted(E.messages, key=lambda m: len(E[m]))
    nodes = 0

    def rec(i, chosen):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"zero-error code search exceeded {budget} nodes")
        if i == len(msgs):
            return dict(chosen)
        for x in E[msgs[i]]:
            if all(not G.adjacent(x, y) for y in chosen.values()):
                chosen[msgs[i]] = x
                found = rec(i + 1, chosen)
                if found is not None:
                    return found
                del chosen[msgs[i]]
        return None

    found = rec(0, {})
    if found is None:
        return False, None
    return True, {m: found[m] for m in E.messages}


def channel_from_scenario(scenario, dotted: Iterable[Iterable[str]], message_labels: Iterable[str] | None = None):
    """Channel over the non-dotted hyperedges plus the encoding given by the dotted ones.

    ``scenario`` is a Hypergraph or anything with a ``hypergraph`` attribute.
    """
    H = getattr(scenario, "hypergraph", scenario)
    dotted = [tuple(str(v) for v in b) for b in dotted]
    dotted_sets = [frozenset(b) for b in dotted]
    seen: set = set()
    for b in dotted_sets:
        if seen & b:
            raise InputError("dotted bases are not pairwise disjoint")
        seen |= b
    keep = [(lab, e) for lab, e in zip(H.edge_labels, H.hyperedges) if frozenset(e) not in dotted_sets]
    covered = set().union(*(set(e) for _, e in keep)) if keep else set()
    missing = [v for v in H.vertices if v not in covered]
    if missing:
        raise InputError(f"coverage-violation: vertices {missing} lie only in dotted bases")
    channel = output_uniform_channel(Hypergraph(H.vertices, [e for _, e in keep], [lab for lab, _ in keep]))
    labels = list(message_labels) if message_labels is not None else [f"m{i}" for i in range(len(dotted))]
    return channel, Encoding(dict(zip(labels, dotted)))


def identity_channel(symbols: Iterable) -> ClassicalChannel:
    xs = [str(s) for s in symbols]
    return ClassicalChannel(xs, xs, {x: {x: 1} for x in xs})


PREVEDEL_INPUTS = ("00", "01", "10", "11")
PREVEDEL_OUTPUTS = ("1:0", "2:0", "P:0", "1:1", "2:1", "P:1")


def prevedel_channel() -> ClassicalChannel:
    """Two-bit inputs; the output reveals one of bit 1, bit 2 or their parity, uniformly."""
    probs = {}
    for x in PREVEDEL_INPUTS:
        b1, b2 = int(x[0]), int(x[1])
        probs[x] = {f"1:{b1}": Fraction(1, 3), f"2:{b2}": Fraction(1, 3), f"P:{b1 ^ b2}": Fraction(1, 3)}
    return ClassicalChannel(PREVEDEL_INPUTS, PREVEDEL_OUTPUTS, probs)


def prevedel_encoding() -> Encoding:
    return Encoding({"0": ("00", "01"), "1": ("10", "11")})
