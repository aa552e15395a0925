import numpy as np
import pytest
from hypothesis import given, strategies as st

from oneshot.errors import InputError
from oneshot.quantum import (
    DensityMatrix,
    Povm,
    QuantumStrategy,
    born,
    depolarize,
    ket,
    max_entangled,
    partial_trace,
    projector,
    random_povm,
    random_state,
    steered_ensemble,
    validate_strategy,
)

seeds = st.integers(0, 2**32 - 1)


def test_max_entangled_is_a_state_with_mixed_marginals():
    rho = max_entangled(4)
    assert rho.violations() == []
    assert np.allclose(partial_trace(rho.matrix, 4, 4, "B"), np.eye(4) / 4)
    assert np.allclose(partial_trace(rho.matrix, 4, 4, "A"), np.eye(4) / 4)


@given(seeds, st.integers(2, 3))
def test_steering_cannot_signal(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_state(d * d, rng)
    povm = random_povm("s", ["0", "1", "2"], d, rng)
    ens = steered_ensemble(rho, povm)
    assert np.allclose(ens.average(), partial_trace(rho.matrix, d, d, "B"), atol=1e-10)
    assert abs(sum(p for p, _ in ens.members.values()) - 1) < 1e-10


@given(seeds, st.integers(2, 4))
def test_random_objects_are_valid(seed, d):
    rng = np.random.default_rng(seed)
    assert random_state(d, rng).violations() == []
    assert random_povm("s", "abc", d, rng).violations() == []


def test_depolarize_endpoints():
    rho = max_entangled(2)
    assert np.allclose(depolarize(rho, 1).matrix, rho.matrix)
    assert np.allclose(depolarize(rho, 0).matrix, np.eye(4) / 4)
    with pytest.raises(InputError):
        depolarize(rho, 1.5)


def test_born_on_bell_state():
    rho = max_entangled(2)
    P0 = projector([1, 0])
    assert abs(born(rho, P0, P0) - 0.5) < 1e-12
    # conjugate projectors give perfect correlation on the maximally entangled state
    v = [1, 1j]
    assert abs(born(rho, projector(v), projector(v, conjugate=True)) - 0.5) < 1e-12


def test_violations_are_reported():
    bad = DensityMatrix(np.diag([0.7, 0.5]))
    assert any("trace" in v for v in bad.violations())
    neg = DensityMatrix(np.diag([1.2, -0.2]))
    assert any("negative" in v for v in neg.violations())
    povm = Povm("s", {"0": np.diag([1, 0]), "1": np.diag([0, 0.5])})
    assert any("identity" in v for v in povm.violations())
    strat = QuantumStrategy(max_entangled(2), {"m": Povm("m", {"0": np.eye(3)})}, {"y": Povm("y", {"0": np.eye(2)})})
    assert any("dimension" in v for v in validate_strategy(strat))


def test_ket_rejects_zero():
    with pytest.raises(InputError):
        ket([0, 0])
