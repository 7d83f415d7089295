"""
Dense complex linear algebra for small qudit dimensions (2 to 16).

Everything works on plain numpy arrays. Matrix routines accept a single
``(d, d)`` matrix or a stack ``(..., d, d)``; the eigensolver processes a
whole stack in lockstep, which is what the geometry and optimizer modules
rely on for speed.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionTooLarge, LinearlyDependent, NonHermitianInput

MAX_DIM = 16
HERMITIAN_TOL = 1e-12
# Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of ||H||.
JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class GramSchmidtResult(NamedTuple):
    """Orthonormalized vectors together with both change-of-basis matrices.

    ``change`` holds the inputs expressed in the new orthonormal frame (row i is
    input i), so it is lower triangular and ``change @ change.T`` is the Gram
    matrix. ``inverse`` maps the inputs onto the orthonormal vectors.
    """

    basis: np.ndarray
    change: np.ndarray
    inverse: np.ndarray


def _check_square(m: np.ndarray) -> int:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    d = m.shape[-1]
    if d > MAX_DIM:
        raise DimensionTooLarge(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    return d


def as_matrix(m) -> np.ndarray:
    """Coerce to a complex square matrix (or stack) with the dimension guard."""
    arr = np.asarray(m, dtype=complex)
    _check_square(arr)
    return arr


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(a^dagger b)."""
    return complex(np.sum(np.conj(a) * b))


def hermiticity_residual(m: np.ndarray) -> float:
    """Largest |m_jk - conj(m_kj)| over all entries (and the whole stack)."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - adjoint(m))))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return hermiticity_residual(m) <= tol * scale


def hermitian_eig(h, tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix (or stack) by cyclic Jacobi sweeps.

    Each 2x2 pivot block is first made real by a diagonal phase and then
    annihilated by a plane rotation, so the accumulated transform stays unitary.
    All matrices of a stack are rotated together; matrices that have already
    converged receive rotations that are numerically the identity.

    Eigenvalues are returned in ascending order and column ``k`` of the
    eigenvector matrix belongs to eigenvalue ``k``.

    Raises
    ------
    NonHermitianInput
        If ``max |H_jk - conj(H_kj)|`` exceeds ``tol`` (scaled by the largest
        entry when that is above one).
    DimensionTooLarge
        If the dimension exceeds 16.
    """
    a = as_matrix(h)
    if not is_hermitian(a, tol):
        raise NonHermitianInput(
            f"matrix is not Hermitian (residual {hermiticity_residual(a):.3e})"
        )
    d = a.shape[-1]
    batch_shape = a.shape[:-2]
    a = a.reshape((-1, d, d))
    a = 0.5 * (a + adjoint(a))
    n = a.shape[0]
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    # batch-last layout keeps every row/column slice contiguous
    a = np.ascontiguousarray(np.moveaxis(a, 0, -1))
    v = np.zeros((d, d, n), dtype=complex)
    v[np.arange(d), np.arange(d), :] = 1.0
    offmask = ~np.eye(d, dtype=bool)
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[offmask]) ** 2, axis=0))
        if not np.any(off > JACOBI_REL_TOL * scale):
            break
        for p, q in pairs:
            apq = a[p, q]
            mag = np.abs(apq)
            nz = mag > 0.0
            safe = np.where(nz, mag, 1.0)
            phase = np.where(nz, apq / safe, 1.0)
            theta = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            t = np.copysign(1.0, theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # u = [[c, s], [-s conj(phase), c conj(phase)]] acting on columns p, q
            u10 = -s * np.conj(phase)
            u11 = c * np.conj(phase)
            for m in (a, v):
                colp = m[:, p].copy()
                colq = m[:, q].copy()
                m[:, p] = colp * c + colq * u10
                m[:, q] = colp * s + colq * u11
            rowp = a[p].copy()
            rowq = a[q].copy()
            a[p] = rowp * c + rowq * np.conj(u10)
            a[q] = rowp * s + rowq * np.conj(u11)

    a = np.moveaxis(a, -1, 0)
    v = np.moveaxis(v, -1, 0)
    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return EigenDecomposition(w.reshape(batch_shape + (d,)), v.reshape(batch_shape + (d, d)))


def eigvalsh(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    return hermitian_eig(h, tol).eigenvalues


def top_eigenpair(h, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Largest eigenvalue and its eigenvector for each matrix of a stack."""
    w, v = hermitian_eig(h, tol)
    return w[..., -1], v[..., :, -1]


def trace_power(m, power: int) -> complex:
    """tr(m**power) for a single matrix or a stack of matrices."""
    if power < 1 or power > MAX_DIM:
        raise ValueError(f"power must lie in 1..{MAX_DIM}, got {power}")
    a = as_matrix(m)
    out = np.trace(np.linalg.matrix_power(a, power), axis1=-2, axis2=-1)
    return complex(out) if np.ndim(out) == 0 else out


def gram_matrix(vectors) -> np.ndarray:
    vecs = np.asarray(vectors, dtype=float)
    return vecs @ vecs.T


def gram_schmidt(vectors, det_tol: float = 1e-10) -> GramSchmidtResult:
    """Orthonormalize real vectors in order (modified Gram-Schmidt).

    Raises LinearlyDependent when the Gram determinant is below ``det_tol``.
    """
    vecs = np.asarray(vectors, dtype=float)
    if vecs.ndim != 2 or vecs.shape[0] > vecs.shape[1]:
        raise ValueError(f"need k <= n vectors of length n, got shape {vecs.shape}")
    if np.linalg.det(gram_matrix(vecs)) < det_tol:
        raise LinearlyDependent("input vectors are (numerically) linearly dependent")
    basis = []
    for vec in vecs:
        w = vec.copy()
        for b in basis:
            w -= (b @ w) * b
        basis.append(w / np.linalg.norm(w))
    basis = np.array(basis)
    change = np.tril(vecs @ basis.T)
    inverse = np.linalg.solve(change, np.eye(len(vecs)))
    return GramSchmidtResult(basis, change, np.tril(inverse))


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector: normalized complex standard-normal draws."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_state(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random density matrix of the given rank (Ginibre construction).

    ``rng = numpy.random.default_rng(seed)`` (PCG64) draws a ``dim x rank``
    complex Gaussian G, and the result is ``G G^dagger / tr(G G^dagger)``.
    Rank one gives the projector onto a Haar-random ket.
    """
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in 1..{dim}, got {rank}")
    if dim > MAX_DIM:
        raise DimensionTooLarge(f"dimension {dim} exceeds {MAX_DIM}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ adjoint(g)
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + adjoint(rho))
