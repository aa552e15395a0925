"""Entanglement-assisted one-shot classical communication: exact bounds, strategies and KS-set tools."""

__version__ = "0.1.0"

from .channel import ClassicalChannel, Encoding, MessageEnsemble, prevedel_channel, prevedel_encoding
from .errors import BudgetExceeded, ComputationError, InputError, OneshotError
from .hypergraph import Hypergraph, SimpleGraph, independence_number, ks_colourable
from .kssets import load_builtin, peres_channel, verify_conway_kochen

__all__ = [
    "ClassicalChannel",
    "Encoding",
    "MessageEnsemble",
    "prevedel_channel",
    "prevedel_encoding",
    "peres_channel",
    "Hypergraph",
    "SimpleGraph",
    "independence_number",
    "ks_colourable",
    "load_builtin",
    "verify_conway_kochen",
    "OneshotError",
    "InputError",
    "ComputationError",
    "BudgetExceeded",
]
