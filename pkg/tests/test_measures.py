from math import log, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbound.errors import DegenerateSpectrum, InvalidKappa, NotNormalized
from qbound.linalg import random_state
from qbound.measures import (
    EndpointPair,
    MeasureSpec,
    binary_entropy,
    combined,
    h_measure,
    ket_variances,
    normalized_pair,
    per_operator,
    renyi2,
    shannon,
    std_dev,
    two_valued_std,
    u_kappa,
    u_max,
)
from qbound.operators import spin1_nine_set
from qbound.states import expectations

PM1 = (-1.0, 1.0)


def test_normalized_pair():
    assert normalized_pair(-1.0, PM1) == (1.0, 0.0)
    assert normalized_pair(0.0, PM1) == (0.5, 0.5)
    dot, ring = normalized_pair(np.array([0.2, 0.6]), (0.0, 1.0))
    assert np.allclose(dot, [0.8, 0.4]) and np.allclose(ring, [0.2, 0.6])
    assert normalized_pair(1.0 + 1e-12, PM1)[0] == 0.0
    with pytest.raises(ValueError):
        normalized_pair(1.1, PM1)
    with pytest.raises(DegenerateSpectrum):
        EndpointPair(1.0, 1.0).check()


def test_scalar_measures():
    assert h_measure(0.0, PM1) == pytest.approx(log(2))
    assert h_measure(1.0, PM1) == 0.0
    assert u_kappa(0.0, PM1, 0.5) == pytest.approx(sqrt(2))
    assert u_kappa(0.0, PM1, 2.0) == pytest.approx(0.5)
    assert u_max(0.5, PM1) == pytest.approx(0.75)
    assert renyi2(0.0, PM1) == pytest.approx(log(2))
    assert two_valued_std(0.0, PM1) == pytest.approx(1.0)
    assert two_valued_std(0.5, (0.0, 1.0)) == pytest.approx(0.5)
    assert binary_entropy(0.5) == pytest.approx(log(2))
    assert shannon([0.25] * 4) == pytest.approx(log(4))
    with pytest.raises(NotNormalized):
        shannon([0.5, 0.6])
    for bad in (1.0, 0.0, -1.0, np.inf, None):
        with pytest.raises(InvalidKappa):
            u_kappa(0.0, PM1, bad)


def test_spec_directions():
    assert MeasureSpec("H").direction == "minimize"
    assert MeasureSpec("u_max").direction == "maximize"
    assert MeasureSpec("u_kappa", 0.5).direction == "minimize"
    assert MeasureSpec("u_kappa", 2.0).direction == "maximize"
    assert MeasureSpec("power_probs", 2.0).acts_on_probabilities
    assert MeasureSpec("u_kappa", 0.5).label == "u_kappa(0.5)"
    with pytest.raises(ValueError):
        MeasureSpec("nonsense")
    with pytest.raises(InvalidKappa):
        MeasureSpec("u_kappa")


@pytest.mark.parametrize("kind,kappa", [("H", None), ("u_kappa", 0.5), ("u_kappa", 3.0), ("u_max", None),
                                        ("renyi2", None), ("std_dev", None), ("std_dev_squared", None)])
def test_vectorized_matches_scalar(kind, kappa):
    spec = MeasureSpec(kind, kappa)
    ends = [(-1.0, 1.0), (0.0, 1.0), (-2.0, 3.0)]
    vals = np.random.default_rng(0).uniform(0, 1, (7, 3)) * [2, 1, 5] + [-1, 0, -2]
    scalar = {
        "H": h_measure,
        "u_kappa": lambda v, e: u_kappa(v, e, kappa),
        "u_max": u_max,
        "renyi2": renyi2,
        "std_dev": two_valued_std,
        "std_dev_squared": lambda v, e: two_valued_std(v, e) ** 2,
    }[kind]
    table = per_operator(vals, spec, ends)
    for r in range(7):
        for i in range(3):
            assert table[r, i] == pytest.approx(scalar(vals[r, i], ends[i]), abs=1e-14)
    assert np.allclose(combined(vals, spec, ends), table.sum(axis=1))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-1, 1), b=st.floats(-1, 1), t=st.floats(0, 1))
def test_concavity_and_convexity(a, b, t):
    mid = t * a + (1 - t) * b
    for kind, kappa in [("H", None), ("u_kappa", 0.5), ("renyi2", None), ("std_dev", None)]:
        spec = MeasureSpec(kind, kappa)
        f = lambda v: combined([v], spec, [PM1])
        assert f(mid) >= t * f(a) + (1 - t) * f(b) - 1e-12
    for kind, kappa in [("u_max", None), ("u_kappa", 2.0)]:
        spec = MeasureSpec(kind, kappa)
        f = lambda v: combined([v], spec, [PM1])
        assert f(mid) <= t * f(a) + (1 - t) * f(b) + 1e-12


def test_probability_kinds():
    p = np.array([0.5, 0.25, 0.25, 0.0])
    assert combined(p, MeasureSpec("shannon_probs"), [PM1] * 4) == pytest.approx(shannon(p))
    assert combined(p, MeasureSpec("power_probs", 2.0), [PM1] * 4) == pytest.approx(0.375)


def test_standard_deviations_from_states(rng):
    ops = spin1_nine_set()
    rho = random_state(3, 1, seed=rng)
    ket = np.linalg.eigh(rho)[1][:, -1]
    var = ket_variances(ket, ops.matrices)[0]
    direct = [std_dev(rho, m) ** 2 for m in ops.matrices]
    assert np.allclose(var, direct, atol=1e-12)
    # for operators with two eigenvalues the mean fixes the deviation
    vals = expectations(rho, ops).values
    for i in range(6, 9):
        assert two_valued_std(vals[i], (0.0, 1.0)) == pytest.approx(std_dev(rho, ops.matrices[i]), abs=1e-10)
    combined_point = combined(expectations(rho, ops.subset(range(6, 9))), MeasureSpec("H"), [(0.0, 1.0)] * 3)
    assert combined_point > 0
    with pytest.raises(ValueError):
        std_dev(np.diag([1.5, -0.5]), np.diag([1.0, -1.0]))
