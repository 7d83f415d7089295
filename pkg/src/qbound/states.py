"""
Pure-state parametrization, spin coherent states and the expectation map.

A qudit ket is fixed (up to global phase) by d-1 polar angles theta in
[0, pi/2] and d-1 phases phi in [0, 2 pi):

    psi = (cos t0, sin t0 cos t1 e^{i p1}, ..., sin t0 ... sin t_{d-2} e^{i p_{d-1}}).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import AngleOutOfRange, DimensionMismatch, NonRealExpectation
from .operators import OperatorSet

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12
EXPECT_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class PureStateAngles:
    dim: int
    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float).reshape(-1)
        ph = np.asarray(self.phis, dtype=float).reshape(-1)
        if len(th) != self.dim - 1 or len(ph) != self.dim - 1:
            raise ValueError(f"need {self.dim - 1} thetas and phis for dim {self.dim}")
        if np.any(th < -ANGLE_TOL) or np.any(th > np.pi / 2 + ANGLE_TOL) or not np.all(np.isfinite(ph)):
            raise AngleOutOfRange(f"thetas {th} must lie in [0, pi/2]")
        object.__setattr__(self, "thetas", np.clip(th, 0.0, np.pi / 2))
        object.__setattr__(self, "phis", np.mod(ph, TWO_PI))

    @classmethod
    def from_vector(cls, dim: int, vec) -> "PureStateAngles":
        vec = np.asarray(vec, dtype=float)
        return cls(dim, vec[: dim - 1], vec[dim - 1 :])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.thetas, self.phis])

    def ket(self) -> np.ndarray:
        return ket_from_angles(self)


def kets_from_vectors(dim: int, vecs) -> np.ndarray:
    """Batched ket construction from rows (theta_0..theta_{d-2}, phi_1..phi_{d-1})."""
    v = np.atleast_2d(np.asarray(vecs, dtype=float))
    th = v[:, : dim - 1]
    ph = v[:, dim - 1 :]
    n = v.shape[0]
    amp = np.ones((n, dim))
    run = np.ones(n)
    for l in range(dim - 1):
        amp[:, l] = run * np.cos(th[:, l])
        run = run * np.sin(th[:, l])
    amp[:, dim - 1] = run
    phase = np.ones((n, dim), dtype=complex)
    phase[:, 1:] = np.exp(1j * ph)
    return amp * phase


def ket_from_angles(angles: PureStateAngles) -> np.ndarray:
    return kets_from_vectors(angles.dim, angles.as_vector())[0]


def angles_from_ket(ket, tol: float = 1e-14) -> PureStateAngles:
    """Inverse of ket_from_angles after removing the global phase.

    The phase is chosen so the first nonzero amplitude is real positive; phases
    of vanishing amplitudes (and of every amplitude behind a vanishing tail) are 0.
    """
    psi = np.asarray(ket, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    d = len(psi)
    lead = int(np.argmax(np.abs(psi) > tol))
    psi = psi * np.exp(-1j * np.angle(psi[lead]))
    thetas = np.zeros(d - 1)
    phis = np.zeros(d - 1)
    rest = 1.0
    for l in range(d - 1):
        if rest <= tol:
            thetas[l] = 0.0
            continue
        c = np.clip(abs(psi[l]) / rest, 0.0, 1.0)
        thetas[l] = np.arccos(c)
        rest = rest * np.sin(thetas[l])
    for l in range(1, d):
        if abs(psi[l]) > tol:
            phis[l - 1] = np.angle(psi[l])
    return PureStateAngles(d, thetas, phis)


def coherent_kets(two_j: int, alpha, beta) -> np.ndarray:
    """Batched spin coherent kets in the basis m = j, j-1, ..., -j.

    Amplitude of |m>: sqrt(C(2j, j+m)) cos(a/2)^(j+m) sin(a/2)^(j-m) e^{-i m b}.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    j = two_j / 2
    k = np.arange(two_j + 1)  # j - m
    m = j - k
    binom = np.sqrt(np.array([comb(two_j, int(two_j - kk)) for kk in k], dtype=float))
    c = np.cos(alpha / 2)[:, None]
    s = np.sin(alpha / 2)[:, None]
    amp = binom * c ** (two_j - k) * s**k
    return amp * np.exp(-1j * m[None, :] * beta[:, None])


def coherent_ket(two_j: int, alpha: float, beta: float) -> np.ndarray:
    if not -ANGLE_TOL <= alpha <= np.pi + ANGLE_TOL:
        raise AngleOutOfRange(f"alpha {alpha} outside [0, pi]")
    if not np.isfinite(beta):
        raise AngleOutOfRange("beta must be finite")
    return coherent_kets(two_j, alpha, np.mod(beta, TWO_PI))[0]


def density(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, np.conj(ket))


@dataclass(frozen=True)
class ExpectationPoint:
    """Real vector of expectation values tied to the operator set that produced it."""

    ops: OperatorSet = field(repr=False)
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if len(vals) != len(self.ops):
            raise DimensionMismatch(f"{len(vals)} values for {len(self.ops)} operators")
        object.__setattr__(self, "values", vals)

    def within_hyperrectangle(self, tol: float = 1e-10) -> bool:
        ends = np.array(self.ops.endpoints())
        return bool(np.all(self.values >= ends[:, 0] - tol) and np.all(self.values <= ends[:, 1] + tol))


def expectations(rho, ops: OperatorSet) -> ExpectationPoint:
    """values[i] = tr(rho A_i), real for Hermitian A_i."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ops.dim, ops.dim):
        raise DimensionMismatch(f"state shape {rho.shape} vs operator dim {ops.dim}")
    raw = np.einsum("jk,nkj->n", rho, ops.matrices)
    herm = np.array(ops.hermitian)
    if np.any(np.abs(raw.imag[herm]) > EXPECT_IMAG_TOL):
        raise NonRealExpectation(f"complex expectation {raw} for a Hermitian operator")
    return ExpectationPoint(ops, raw.real)


def ket_expectations(kets, matrices) -> np.ndarray:
    """Real parts of <psi|A_i|psi> for a batch of kets, shape (n_kets, N)."""
    kets = np.atleast_2d(kets)
    n, d = matrices.shape[0], matrices.shape[-1]
    av = (kets @ matrices.reshape(n * d, d).T).reshape(len(kets), n, d)
    return np.sum((np.conj(kets)[:, None, :] * av).real, axis=2)


def spin1_pure_expectations(angles: PureStateAngles) -> np.ndarray:
    """Closed-form <A_1>..<A_9> of the spin-1 nine-set for a pure qutrit state."""
    if angles.dim != 3:
        raise DimensionMismatch("spin-1 closed forms need dim-3 angles")
    t0, t1 = angles.thetas
    p1, p2 = angles.phis
    s20 = np.sin(2 * t0)
    st0sq = np.sin(t0) ** 2
    return np.array(
        [
            s20 * np.cos(t1) * np.sin(p1),
            s20 * np.sin(t1) * np.sin(p2),
            -st0sq * np.sin(2 * t1) * np.sin(p1 - p2),
            s20 * np.cos(t1) * np.cos(p1),
            -s20 * np.sin(t1) * np.cos(p2),
            st0sq * np.sin(2 * t1) * np.cos(p1 - p2),
            np.cos(t0) ** 2 + st0sq * np.cos(t1) ** 2,
            np.cos(t0) ** 2 + st0sq * np.sin(t1) ** 2,
            st0sq,
        ]
    )


def bloch_vector(rho) -> np.ndarray:
    """Qubit Bloch vector (tr rho X, tr rho Y, tr rho Z)."""
    from .operators import PAULIS

    rho = np.asarray(rho, dtype=complex)
    return np.einsum("jk,nkj->n", rho, PAULIS).real


def qubit_angles_from_bloch(r) -> tuple[float, float]:
    """(theta, phi) of the ket whose Bloch vector is the unit vector r.

    Bloch vector of (cos t, sin t e^{i p}) is (sin 2t cos p, sin 2t sin p, cos 2t).
    """
    r = np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    theta = 0.5 * np.arccos(np.clip(r[2], -1.0, 1.0))
    phi = float(np.mod(np.arctan2(r[1], r[0]), TWO_PI))
    return float(theta), phi
