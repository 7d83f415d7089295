import numpy as np
import pytest

from qbound.errors import DimensionMismatch, NotPrime, NotUnit
from qbound.linalg import random_state
from qbound.operators import (
    OperatorSet,
    axes_from_dots,
    axis_operator,
    binomial_weights,
    fig1_projectors,
    fig1_set,
    is_prime,
    mub_family,
    omega,
    phase_operator,
    projector_pair,
    qubit_axis_set,
    shift_operator,
    sic_qubit,
    spin1_nine_set,
    spin1_six_set,
    spin_operators,
    weyl,
    weyl_coefficients,
    weyl_hermitian_parts,
    weyl_labels,
    weyl_set,
)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_weyl_commutation_and_orthogonality(d):
    x, z = shift_operator(d), phase_operator(d)
    assert np.allclose(z @ x, omega(d) * x @ z)
    assert np.allclose(np.linalg.matrix_power(x, d), np.eye(d))
    ws = np.array([weyl(*lab, d) for lab in weyl_labels(d)])
    gram = np.einsum("aij,bij->ab", ws.conj(), ws)
    assert np.allclose(gram, d * np.eye(d * d))
    assert np.allclose(weyl(1, 1, d), x @ z)


def test_weyl_expansion_reconstructs(rng):
    rho = random_state(3, seed=rng)
    coeffs = weyl_coefficients(rho)
    back = sum(c * weyl(lab.x, lab.z, 3) for lab, c in coeffs.items())
    assert np.allclose(back, rho)
    assert coeffs[(0, 0)] == pytest.approx(1 / 3)
    with pytest.raises(DimensionMismatch):
        weyl_coefficients(rho, 4)


def test_weyl_sets():
    s = weyl_set(3)
    assert len(s) == 9 and s.labels[4] == "X^1Z^1"
    h = weyl_hermitian_parts(3)
    assert len(h) == 16 and h.all_hermitian


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_mub_unbiased(d):
    fam = mub_family(d)
    assert fam.max_overlap_deviation() < 1e-10
    # each of the first d bases diagonalizes X Z^z
    for z in range(d):
        op = weyl(1, z, d)
        for j in range(d):
            ket = fam.bases[z][:, j]
            assert np.allclose(op @ ket, fam.eigenvalue_offsets[z] * omega(d) ** j * ket)
            assert abs(ket[0].imag) < 1e-12 and ket[0].real > 0


def test_mub_probabilities_and_projectors(rng):
    fam = mub_family(3)
    rho = random_state(3, seed=rng)
    p = fam.probabilities(rho)
    assert p.shape == (4, 3)
    assert np.allclose(p.sum(axis=1), 1.0)
    proj = fam.projectors()
    direct = np.einsum("jk,nkj->n", rho, proj.matrices).real
    assert np.allclose(direct, p.ravel())


@pytest.mark.parametrize("d", [1, 4, 6, 9])
def test_mub_rejects_composite(d):
    assert not is_prime(d)
    with pytest.raises(NotPrime):
        mub_family(d)


@pytest.mark.parametrize("two_j", [1, 2, 3, 4])
def test_spin_algebra(two_j):
    jx, jy, jz = spin_operators(two_j).matrices
    j = two_j / 2
    assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
    assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(two_j + 1))
    assert np.allclose(np.diag(jz).real, j - np.arange(two_j + 1))


def test_spin1_nine_set_structure():
    s = spin1_nine_set()
    a = s.matrices
    # squares of the first six land in the last three
    for i, k in [(0, 6), (3, 6), (1, 7), (4, 7), (2, 8), (5, 8)]:
        assert np.allclose(a[i] @ a[i], a[k])
    assert np.allclose(a[6] + a[7] + a[8], 2 * np.eye(3))
    ends = np.array(s.endpoints())
    assert np.allclose(ends[:6], [[-1, 1]] * 6)
    assert np.allclose(ends[6:], [[0, 1]] * 3)
    assert np.allclose(a, a.conj().transpose(0, 2, 1))
    assert spin1_six_set().labels == s.labels[:6]


def test_qubit_axes():
    axes = axes_from_dots(0.5)
    assert np.allclose(axes @ axes.T, [[1, 0.5], [0.5, 1]])
    axes3 = axes_from_dots(0.1, -0.2, 0.3)
    assert np.allclose(axes3 @ axes3.T, [[1, 0.1, -0.2], [0.1, 1, 0.3], [-0.2, 0.3, 1]])
    ops = qubit_axis_set(axes)
    assert np.allclose(ops.spectra(), [[-1, 1], [-1, 1]])
    with pytest.raises(NotUnit):
        axis_operator([1.0, 1.0, 0.0])


@pytest.mark.parametrize("variant", ["gram", "wh"])
def test_sic_tetrahedron(variant):
    sic = sic_qubit(variant)
    g = sic.bloch @ sic.bloch.T
    assert np.allclose(np.diag(g), 1.0)
    assert np.allclose(g[~np.eye(4, dtype=bool)], -1 / 3)
    assert np.allclose(sic.effects.matrices.sum(axis=0), np.eye(2))
    assert len(sic.axis_observables()) == 4


def test_fig1_projectors():
    p, q = fig1_projectors()
    for m in (p, q):
        assert np.allclose(m @ m, m)
        assert np.trace(m).real == pytest.approx(1.0)
    assert abs(np.trace(p @ q) - 169 / 675) < 1e-12
    assert fig1_set().dim == 3


def test_projector_pair_overlap():
    s = projector_pair(0.3, 3)
    assert np.trace(s.matrices[0] @ s.matrices[1]).real == pytest.approx(0.3)


def test_operator_set_json_round_trip():
    s = spin1_nine_set()
    back = OperatorSet.from_json(s.to_json())
    assert back.labels == s.labels
    assert np.array_equal(back.matrices, s.matrices)
    assert s["J_z"] is not None and np.allclose(s["J_z"], s.matrices[2])
    assert np.allclose(binomial_weights(2), [1, np.sqrt(2), 1])
