from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from oneshot.channel import (
    ClassicalChannel,
    Encoding,
    MessageEnsemble,
    admits_zero_error_code,
    channel_from_scenario,
    channel_hypergraph,
    eta,
    eta_extremes,
    identity_channel,
    output_uniform_channel,
    validate_encoding,
    zero_error_capacity,
)
from oneshot.errors import InputError
from oneshot.hypergraph import Hypergraph


def test_prevedel_structure(prevedel):
    N, E, p = prevedel
    H = channel_hypergraph(N)
    assert len(H.hyperedges) == 6 and all(len(e) == 2 for e in H.hyperedges)
    assert N.is_output_uniform()
    assert validate_encoding(N, E) == []
    # every pair of two-bit strings agrees on a bit or on the parity
    assert zero_error_capacity(N) == 1
    assert eta_extremes(N, E) == (Fraction(1, 3), Fraction(1, 3))


def test_peres_structure(peres):
    N, E, p = peres
    assert len(N.inputs) == 24 and len(N.outputs) == 18
    assert all(len(N.support(x)) == 3 for x in N.inputs)
    assert validate_encoding(N, E) == []
    assert zero_error_capacity(N) == 5
    assert eta_extremes(N, E) == (Fraction(1, 3), Fraction(1, 3))
    assert admits_zero_error_code(N, E) == (False, None)


def test_eta_is_overlap_mass():
    N = ClassicalChannel("ab", "uvw", {"a": {"u": "1/2", "v": "1/2"}, "b": {"v": "1/3", "w": "2/3"}})
    assert eta(N, "a", "b") == Fraction(1, 2)
    assert eta(N, "b", "a") == Fraction(1, 3)
    assert eta(N, "a", "a") == 1


def test_zero_error_code_found():
    N = identity_channel("abc")
    ok, code = admits_zero_error_code(N, Encoding({"0": ["a"], "1": ["b"]}))
    assert ok and code == {"0": "a", "1": "b"}


def test_validate_encoding_reports_each_violation():
    N = identity_channel("abc")
    problems = validate_encoding(N, Encoding({"0": ["a", "b"], "1": ["b"], "2": [], "3": ["z"]}))
    text = " | ".join(problems)
    assert "not confusable" in text and "both" in text and "empty" in text and "not a channel input" in text
    with pytest.raises(InputError):
        admits_zero_error_code(N, Encoding({"0": ["a", "b"]}))


@pytest.mark.parametrize(
    "probs",
    [{"a": {"u": "1/2"}}, {"a": {"u": -1, "v": 2}}, {"a": {"q": 1}}, {"a": {"u": 1}, "z": {"u": 1}}],
)
def test_channel_rejects_bad_rows(probs):
    with pytest.raises(InputError):
        ClassicalChannel("a", "uv", probs)


def test_message_ensemble_is_exact():
    with pytest.raises(InputError):
        MessageEnsemble({"a": 0.5, "b": 0.4})
    p = MessageEnsemble.uniform("abc")
    assert p["a"] == Fraction(1, 3) and p.is_uniform()


def _covering(n, edges):
    rest = set(range(n)) - set().union(*edges)
    return n, edges + [rest] if rest else edges


hypergraphs = st.integers(2, 7).flatmap(
    lambda n: st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=3), min_size=1, max_size=8, unique_by=frozenset).map(
        lambda es: _covering(n, es)
    )
)


@given(hypergraphs)
def test_output_uniform_channel_round_trips(data):
    n, edges = data
    H = Hypergraph(range(n), edges)
    N = output_uniform_channel(H)
    assert N.is_output_uniform()
    assert {frozenset(e) for e in channel_hypergraph(N).hyperedges} == {frozenset(e) for e in H.hyperedges}
    assert ClassicalChannel.from_json(N.to_json()).probs == N.probs


def test_channel_from_scenario_rejects_uncovered_vertex():
    H = Hypergraph("abcd", [("a", "b"), ("c", "d"), ("a", "c")])
    with pytest.raises(InputError, match="coverage"):
        channel_from_scenario(H, [("c", "d")])
    N, E = channel_from_scenario(Hypergraph("abcd", [("a", "b"), ("c", "d"), ("a", "c"), ("b", "d")]), [("a", "b")])
    assert E["m0"] == ("a", "b") and "e0" not in N.outputs


def test_encoding_json_round_trip(prevedel):
    _, E, _ = prevedel
    assert Encoding.from_json(E.to_json()).classes == E.classes


def test_outputs_with_equal_preimages_share_a_hyperedge():
    N = ClassicalChannel("ab", "uvw", {"a": {"u": "1/2", "v": "1/2"}, "b": {"u": "1/2", "v": "1/2"}})
    H = channel_hypergraph(N)
    assert H.hyperedges == (("a", "b"),) and H.edge_labels == ("u",)
    assert N.regularity() == 2
