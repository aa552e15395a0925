from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oneshot.bounds import classical_max
from oneshot.channel import ClassicalChannel, MessageEnsemble, output_uniform_channel
from oneshot.errors import BudgetExceeded, InputError
from oneshot.hypergraph import Hypergraph
from oneshot.nonlocalgame import (
    GameSpec,
    affine_check,
    affine_image,
    build_game,
    evaluate_local,
    local_affine_check,
    local_max,
    s_bell,
)
from oneshot.strategy import random_nonsignalling_box

seeds = st.integers(0, 2**32 - 1)


def _brute_local(G):
    from itertools import product

    best = Fraction(0)
    for xs in product(G.alice_answers, repeat=len(G.alice_questions)):
        alice = dict(zip(G.alice_questions, xs))
        for ms in product(G.bob_answers, repeat=len(G.bob_questions)):
            best = max(best, evaluate_local(G, alice, dict(zip(G.bob_questions, ms))))
    return best


def test_prevedel_local_value(prevedel):
    N, E, p = prevedel
    out = local_affine_check(N, p)
    assert out["local_max"] == Fraction(11, 12) == out["affine_image"]


def test_peres_local_value(peres):
    N, E, p = peres
    out = local_affine_check(N, p)
    assert out["local_max"] == Fraction(107, 108) and out["equal"]


@given(seeds)
def test_affine_identity_on_random_boxes(prevedel, seed):
    N, E, p = prevedel
    box = random_nonsignalling_box(p.messages, N.inputs, N.outputs, p.messages, np.random.default_rng(seed), d=2)
    assert affine_check(N, p, box) < 1e-12


regular = st.sampled_from(
    [
        # 2-regular on four inputs
        (["a", "b", "c", "d"], [("a", "b"), ("c", "d"), ("a", "c"), ("b", "d")]),
        # 1-regular
        (["a", "b", "c"], [("a", "b"), ("c",)]),
        # 2-regular triangle
        (["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")]),
    ]
)


@given(regular, st.integers(2, 3))
def test_local_max_is_affine_image_of_classical(inst, q):
    N = output_uniform_channel(Hypergraph(*inst))
    p = MessageEnsemble.uniform(range(q))
    G = build_game(N, p)
    loc = local_max(G).value
    assert loc == affine_image(N, classical_max(N, p).value)
    assert loc == _brute_local(G)


def test_message_asymmetric_game_uses_full_enumeration():
    N = output_uniform_channel(Hypergraph("abc", [("a", "b"), ("b", "c"), ("a", "c")]))
    G = build_game(N, MessageEnsemble({"0": "2/3", "1": "1/3"}))
    cert = local_max(G)
    assert cert.method == "enumeration"
    assert cert.value == _brute_local(G)


def test_hypotheses_are_checked():
    irregular = output_uniform_channel(Hypergraph("abc", [("a", "b"), ("b", "c")]))
    with pytest.raises(InputError, match="not-k-regular"):
        build_game(irregular, MessageEnsemble.uniform("01"))
    skewed = ClassicalChannel("ab", "uv", {"a": {"u": "1/3", "v": "2/3"}, "b": {"u": "1/2", "v": "1/2"}})
    with pytest.raises(InputError, match="not-output-uniform"):
        build_game(skewed, MessageEnsemble.uniform("01"))


def test_signalling_box_rejected(prevedel):
    N, E, p = prevedel
    box = random_nonsignalling_box(p.messages, N.inputs, N.outputs, p.messages, np.random.default_rng(0), d=2)
    t = box.table.copy()
    t[0] = 0
    t[0, :, 0, 0] = 1
    bad = type(box)(box.alice_inputs, box.alice_outputs, box.bob_inputs, box.bob_outputs, t)
    with pytest.raises(InputError, match="precondition"):
        affine_check(N, p, bad)


def test_game_json_round_trip(prevedel, tmp_path):
    N, E, p = prevedel
    G = build_game(N, p)
    back = GameSpec.from_json(G.to_json())
    assert np.array_equal(back.V, G.V) and back.p == G.p
    assert local_max(back).value == Fraction(11, 12)


def test_local_budget(peres):
    N, E, p = peres
    with pytest.raises(BudgetExceeded):
        local_max(build_game(N, p), budget=10)
