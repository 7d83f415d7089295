import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbound.errors import DimensionTooLarge, LinearlyDependent, NonHermitianInput
from qbound.linalg import (
    MAX_DIM,
    gram_matrix,
    gram_schmidt,
    hermitian_eig,
    hermiticity_residual,
    hs_inner,
    is_hermitian,
    random_ket,
    random_state,
    top_eigenpair,
    trace_power,
)


def _hermitian(seed, d):
    r = np.random.default_rng(seed)
    g = r.standard_normal((d, d)) + 1j * r.standard_normal((d, d))
    return g + g.conj().T


def _charpoly_roots(h):
    """Eigenvalues as roots of the characteristic polynomial (independent of any eigensolver)."""
    return np.sort(np.roots(np.poly(h)).real)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_eigenvalues_match_characteristic_polynomial(d):
    h = _hermitian(d, d)
    w, _ = hermitian_eig(h)
    assert np.allclose(w, _charpoly_roots(h), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, MAX_DIM))
def test_decomposition_reconstructs_and_is_unitary(seed, d):
    h = _hermitian(seed, d)
    w, v = hermitian_eig(h)
    scale = max(1.0, np.abs(h).max())
    assert np.all(np.diff(w) >= 0)
    assert np.abs(v @ np.diag(w) @ v.conj().T - h).max() < 1e-12 * scale * d
    assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-12 * d


def test_batched_stack_matches_single_calls():
    hs = np.array([_hermitian(s, 4) for s in range(6)])
    w, v = hermitian_eig(hs)
    for k, h in enumerate(hs):
        ws, _ = hermitian_eig(h)
        assert np.allclose(w[k], ws, atol=1e-12)
        assert np.allclose(h @ v[k], v[k] * w[k], atol=1e-10)


def test_degenerate_and_diagonal_inputs():
    w, v = hermitian_eig(np.diag([2.0, -1.0, 2.0]))
    assert np.allclose(w, [-1, 2, 2])
    w, _ = hermitian_eig(np.eye(4))
    assert np.allclose(w, 1.0)
    w, _ = hermitian_eig(np.array([[0, -1j], [1j, 0]]))
    assert np.allclose(w, [-1, 1])


def test_top_eigenpair():
    h = _hermitian(3, 5)
    lam, vec = top_eigenpair(h)
    assert lam == pytest.approx(np.linalg.eigvalsh(h)[-1], abs=1e-10)
    assert np.allclose(h @ vec, lam * vec, atol=1e-10)


def test_rejects_non_hermitian_and_large():
    with pytest.raises(NonHermitianInput):
        hermitian_eig(np.array([[1, 1e-3j], [1e-3j, 1]]))
    with pytest.raises(DimensionTooLarge):
        hermitian_eig(np.eye(MAX_DIM + 1))
    with pytest.raises(ValueError):
        hermitian_eig(np.ones((2, 3)))


def test_hermiticity_helpers():
    m = np.array([[1, 2 + 1j], [2 - 1j, 0]])
    assert hermiticity_residual(m) == 0
    assert is_hermitian(m)
    assert not is_hermitian(m + np.array([[0, 1e-6], [0, 0]]))
    assert hs_inner(m, m) == pytest.approx(np.trace(m.conj().T @ m))


@pytest.mark.parametrize("power", [1, 2, 3, 4])
def test_trace_power_against_einsum(power, rng):
    rho = random_state(4, seed=rng)
    letters = "abcdefgh"
    # tr(rho^m) written as a closed chain of indices
    sub = ",".join(letters[i] + letters[(i + 1) % power] for i in range(power)) + "->"
    expect = np.einsum(sub, *([rho] * power))
    assert trace_power(rho, power) == pytest.approx(expect, abs=1e-13)


def test_trace_power_validates():
    with pytest.raises(ValueError):
        trace_power(np.eye(2), 0)


def test_gram_schmidt_matrices():
    vecs = np.array([[1.0, 0, 0], [0.5, np.sqrt(0.75), 0], [0, 0, 1.0]])
    res = gram_schmidt(vecs)
    assert np.allclose(res.basis @ res.basis.T, np.eye(3))
    assert np.allclose(res.change @ res.change.T, gram_matrix(vecs))
    assert np.allclose(res.inverse @ vecs, res.basis)
    with pytest.raises(LinearlyDependent):
        gram_schmidt(np.array([[1.0, 0, 0], [2.0, 0, 0]]))


def test_random_state_properties():
    for rank in (1, 2, 4):
        rho = random_state(4, rank, seed=7)
        w = np.linalg.eigvalsh(rho)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert w.min() > -1e-14
        assert np.sum(w > 1e-12) == rank
    assert np.allclose(random_state(3, seed=1), random_state(3, seed=1))
    with pytest.raises(ValueError):
        random_state(3, 4)
    ket = random_ket(5, np.random.default_rng(0))
    assert np.linalg.norm(ket) == pytest.approx(1.0)
