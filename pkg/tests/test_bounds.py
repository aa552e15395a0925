from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oneshot.bounds import (
    beta,
    bisect_crossing,
    check_noncontextual_bounds,
    cig_classical_max,
    classical_max,
    evaluate_classical,
    scenario_gamma,
)
from oneshot.channel import ClassicalChannel, Encoding, MessageEnsemble
from oneshot.errors import BudgetExceeded, ComputationError, InputError
from oneshot.polytope import polytope_vertices
from oneshot.hypergraph import Hypergraph, ks_colourable
from oneshot.suite import cubitt_corr, exhaustive_union_oracle, random_beta_instance

seeds = st.integers(0, 2**32 - 1)


def _brute_classical(N, p):
    """Every deterministic encoder; Bob guesses the heaviest message per output."""
    best = Fraction(0)
    for xs in product(N.inputs, repeat=len(p.messages)):
        total = Fraction(0)
        for y in N.outputs:
            total += max(p[m] * N(y, x) for m, x in zip(p.messages, xs))
        best = max(best, total)
    return best


def _random_channel(rng, nx, ny):
    X = [f"x{i}" for i in range(nx)]
    Y = [f"y{j}" for j in range(ny)]
    probs = {}
    for x in X:
        w = rng.integers(0, 4, size=ny)
        if w.sum() == 0:
            w[rng.integers(ny)] = 1
        probs[x] = {y: Fraction(int(wi), int(w.sum())) for y, wi in zip(Y, w) if wi}
    return ClassicalChannel(X, Y, probs)


def test_named_classical_values(prevedel, peres):
    N, E, p = prevedel
    assert classical_max(N, MessageEnsemble.uniform("01")).value == Fraction(5, 6)
    N, E, p = peres
    cert = classical_max(N, p)
    assert cert.value == Fraction(17, 18) == exhaustive_union_oracle(N, 6)
    assert evaluate_classical(N, p, cert.witness["encoder"], cert.witness["decoder"]) == cert.value


@given(seeds, st.booleans())
def test_classical_max_matches_brute_force(seed, uniform):
    rng = np.random.default_rng(seed)
    N = _random_channel(rng, int(rng.integers(2, 6)), int(rng.integers(2, 6)))
    q = int(rng.integers(2, 4))
    if uniform:
        p = MessageEnsemble.uniform(range(q))
    else:
        w = rng.integers(1, 5, size=q)
        p = MessageEnsemble({str(i): Fraction(int(v), int(w.sum())) for i, v in enumerate(w)})
    cert = classical_max(N, p)
    assert cert.value == _brute_classical(N, p)
    assert evaluate_classical(N, p, cert.witness["encoder"], cert.witness["decoder"]) == cert.value


@given(seeds)
def test_stochastic_encoders_do_not_help(seed):
    # success is affine in each p_A(.|m), so random encoders and decoders stay below the deterministic max
    rng = np.random.default_rng(seed)
    N = _random_channel(rng, 4, 4)
    p = MessageEnsemble.uniform("abc")
    best = float(classical_max(N, p).value)
    Nyx = np.array([[float(N(y, x)) for y in N.outputs] for x in N.inputs])
    for _ in range(20):
        enc = rng.dirichlet(np.ones(len(N.inputs)), size=3)  # p(x|m)
        dec = rng.dirichlet(np.ones(3), size=len(N.outputs))  # p(m'|y)
        S = sum(float(p[m]) * enc[i] @ Nyx @ dec[:, i] for i, m in enumerate(p.messages))
        assert S <= best + 1e-12


def test_classical_budget(peres):
    N, E, p = peres
    with pytest.raises(BudgetExceeded):
        classical_max(N, p, budget=5)


def test_prevedel_beta_and_cig(prevedel):
    N, E, p = prevedel
    G = scenario_gamma(N, E)
    b = beta(G, E, p, "both")
    assert b.value == Fraction(1, 2) and b.method == "vertex-enum+linearized-LP"
    assert cig_classical_max(N, E, p, "both").value == Fraction(2, 3)


@pytest.mark.slow
def test_peres_beta_both_routes(peres):
    N, E, p = peres
    b = beta(scenario_gamma(N, E), E, p, "both")
    assert b.value == Fraction(2, 3)
    assert b.stats["vertices"] == 120 and b.stats["lps"] == 4**6


def test_peres_cig_bound_meets_sandwich(peres):
    N, E, p = peres
    cig = cig_classical_max(N, E, p)
    eta = Fraction(1, 3)
    assert cig.value == eta + (1 - eta) * Fraction(2, 3) == Fraction(7, 9)


@given(seeds)
def test_beta_routes_agree(seed):
    H, E, p = random_beta_instance(np.random.default_rng(seed))
    if H.uncovered_vertices():
        return
    if not polytope_vertices(H):
        for method in ("vertices", "lp"):
            with pytest.raises(ComputationError):
                beta(H, E, p, method)
        return
    both = beta(H, E, p, "both")  # raises if the two routes disagree
    assert 0 < both.value <= 1


@given(seeds)
def test_colourable_scenarios_have_beta_one(seed):
    # a KS-colouring puts exactly one 1 in every message class
    H, E, p = random_beta_instance(np.random.default_rng(seed))
    if H.uncovered_vertices():
        return
    ok, _ = ks_colourable(H)
    if ok:
        assert beta(H, E, p, "vertices").value == 1


def test_threads_do_not_change_results(prevedel):
    N, E, p = prevedel
    G = scenario_gamma(N, E)
    one = beta(G, E, p, "lp", threads=1)
    two = beta(G, E, p, "lp", threads=2)
    assert (one.value, one.witness) == (two.value, two.witness)


def test_beta_rejects_unknown_method(prevedel):
    N, E, p = prevedel
    with pytest.raises(InputError):
        beta(scenario_gamma(N, E), E, p, "magic")


def test_verdicts():
    v = check_noncontextual_bounds(1.0, Fraction(2, 3), Fraction(1, 3), Fraction(1, 3), 1.0)
    assert v["verdict"] == "violation" and v["S_violation"] and v["precondition"] == "ok"
    v = check_noncontextual_bounds(0.5, Fraction(2, 3), Fraction(1, 3), Fraction(1, 2), 0.7, cig_max=Fraction(7, 9))
    assert v["verdict"] == "no violation" and not v["S_exceeds_cig_max"]
    assert v["precondition"] != "ok"
    assert check_noncontextual_bounds(1.0, 1, 0, 0, 1.0)["verdict"] == "trivial bound"


def test_crossing_visibility():
    v = bisect_crossing(cubitt_corr, 2 / 3, tol=1e-9)
    assert abs(v - 5 / 9) < 1e-6
    with pytest.raises(InputError):
        bisect_crossing(lambda t: t, 2.0)
