"""
Constructors for the operator families used throughout the package.

Labels are stable strings ("J_x", "X^1Z^2", "Pi_3", ...) because the CLI and
the bound catalog address operators by label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb, isqrt
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NotPrime, NotUnit
from .linalg import MAX_DIM, adjoint, hermitian_eig, is_hermitian

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.array([PAULI_X, PAULI_Y, PAULI_Z])


@dataclass(frozen=True)
class OperatorSet:
    """An ordered, labeled list of ``dim x dim`` operators."""

    labels: tuple[str, ...]
    matrices: np.ndarray = field(repr=False)
    hermitian: tuple[bool, ...] = ()

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected an (N, d, d) stack, got {mats.shape}")
        if len(self.labels) != mats.shape[0]:
            raise ValueError("one label per operator is required")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.hermitian:
            object.__setattr__(self, "hermitian", tuple(is_hermitian(m) for m in mats))

    @classmethod
    def from_list(cls, labels: Sequence[str], matrices: Sequence[np.ndarray]) -> "OperatorSet":
        return cls(tuple(labels), np.array(matrices, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, key) -> np.ndarray:
        if isinstance(key, str):
            key = self.labels.index(key)
        return self.matrices[key]

    @property
    def all_hermitian(self) -> bool:
        return all(self.hermitian)

    def subset(self, indices: Sequence[int]) -> "OperatorSet":
        indices = list(indices)
        return OperatorSet(
            tuple(self.labels[i] for i in indices),
            self.matrices[indices],
            tuple(self.hermitian[i] for i in indices),
        )

    def squares(self) -> "OperatorSet":
        return OperatorSet(
            tuple(f"({lab})^2" for lab in self.labels), self.matrices @ self.matrices
        )

    def spectra(self) -> np.ndarray:
        """Ascending eigenvalues of every (Hermitian) operator, shape (N, d)."""
        return hermitian_eig(self.matrices).eigenvalues

    def endpoints(self) -> list[tuple[float, float]]:
        """(a_min, a_max) for every operator."""
        spec = self.spectra()
        return [(float(s[0]), float(s[-1])) for s in spec]

    def to_json(self) -> str:
        data = {
            "dim": self.dim,
            "operators": [
                {
                    "label": lab,
                    "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
                }
                for lab, m in zip(self.labels, self.matrices)
            ],
        }
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> "OperatorSet":
        data = json.loads(text)
        dim = int(data["dim"])
        labels, mats = [], []
        for item in data["operators"]:
            entries = np.array(item["entries"], dtype=float)
            if entries.shape != (dim * dim, 2):
                raise DimensionMismatch(f"operator {item.get('label')} has wrong entry count")
            mats.append((entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim))
            labels.append(str(item["label"]))
        return cls.from_list(labels, mats)


# --- Weyl-Heisenberg operators -------------------------------------------------


class WeylLabel(NamedTuple):
    x: int
    z: int

    def __str__(self) -> str:
        return f"X^{self.x}Z^{self.z}"


def omega(dim: int) -> complex:
    return np.exp(2j * np.pi / dim)


def shift_operator(dim: int) -> np.ndarray:
    """X|j> = |j+1 mod d>."""
    return np.roll(np.eye(dim, dtype=complex), 1, axis=0)


def phase_operator(dim: int) -> np.ndarray:
    """Z|j> = omega^j |j>."""
    return np.diag(omega(dim) ** np.arange(dim))


def weyl(x: int, z: int, dim: int) -> np.ndarray:
    """The unitary X^x Z^z (exponents taken mod dim)."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    x %= dim
    z %= dim
    j = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    # (X^x Z^z)|j> = omega^{zj} |j + x>
    out[(j + x) % dim, j] = omega(dim) ** ((z * j) % dim)
    return out


def weyl_labels(dim: int) -> list[WeylLabel]:
    return [WeylLabel(x, z) for x in range(dim) for z in range(dim)]


def weyl_coefficients(a, dim: int | None = None) -> dict[WeylLabel, complex]:
    """Expansion coefficients c_xz = tr((X^xZ^z)^dagger A)/d."""
    a = np.asarray(a, dtype=complex)
    dim = a.shape[0] if dim is None else dim
    if a.shape != (dim, dim):
        raise DimensionMismatch(f"operator shape {a.shape} does not match dim {dim}")
    return {
        lab: complex(np.sum(np.conj(weyl(lab.x, lab.z, dim)) * a) / dim)
        for lab in weyl_labels(dim)
    }


def weyl_set(dim: int) -> OperatorSet:
    labs = weyl_labels(dim)
    return OperatorSet(tuple(str(lab) for lab in labs), np.array([weyl(*lab, dim) for lab in labs]))


def weyl_hermitian_parts(dim: int) -> OperatorSet:
    """(W + W^dagger)/2 and (W - W^dagger)/(2i) for every non-identity X^xZ^z."""
    labels, mats = [], []
    for lab in weyl_labels(dim)[1:]:
        w = weyl(*lab, dim)
        labels += [f"Re[{lab}]", f"Im[{lab}]"]
        mats += [0.5 * (w + adjoint(w)), (w - adjoint(w)) / 2j]
    return OperatorSet.from_list(labels, mats)


# --- mutually unbiased bases ----------------------------------------------------


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, isqrt(n) + 1))


@dataclass(frozen=True)
class MubFamily:
    """d+1 orthonormal bases; ``bases[z]`` holds kets as columns.

    ``bases[0..d-1]`` are eigenbases of X Z^z, ordered by eigenvalue
    ``mu * omega^j``; ``bases[d]`` is the computational basis.
    """

    dim: int
    bases: np.ndarray = field(repr=False)
    eigenvalue_offsets: np.ndarray = field(repr=False)

    def max_overlap_deviation(self) -> float:
        d = self.dim
        worst = 0.0
        for i in range(d + 1):
            gram = adjoint(self.bases[i]) @ self.bases[i]
            worst = max(worst, float(np.max(np.abs(gram - np.eye(d)))))
            for k in range(i + 1, d + 1):
                ov = np.abs(adjoint(self.bases[i]) @ self.bases[k]) ** 2
                worst = max(worst, float(np.max(np.abs(ov - 1.0 / d))))
        return worst

    def probabilities(self, rho) -> np.ndarray:
        """Outcome probabilities <z,j|rho|z,j>, shape (d+1, d)."""
        rho = np.asarray(rho, dtype=complex)
        p = np.einsum("bjk,jl,blk->bk", np.conj(self.bases), rho, self.bases)
        return p.real

    def projectors(self) -> OperatorSet:
        labels, mats = [], []
        for b in range(self.dim + 1):
            tag = f"z={b}" if b < self.dim else "std"
            for j in range(self.dim):
                ket = self.bases[b][:, j]
                labels.append(f"P[{tag},{j}]")
                mats.append(np.outer(ket, np.conj(ket)))
        return OperatorSet.from_list(labels, mats)


def mub_family(dim: int) -> MubFamily:
    """Complete set of MUBs for prime ``dim`` from the Weyl operators.

    The eigenkets of X Z^z have components
    ``c_k = (mu omega^j)^(-k) omega^(z k (k-1)/2) / sqrt(d)`` where ``mu = 1``
    for odd d and ``mu = i^z`` for d = 2 (there X Z has eigenvalues +-i).
    The first component is real positive.
    """
    if not is_prime(dim):
        raise NotPrime(f"{dim} is not prime; only prime-dimensional MUBs are built")
    if dim > MAX_DIM:
        raise ValueError(f"dimension {dim} exceeds {MAX_DIM}")
    w = omega(dim)
    k = np.arange(dim)
    bases, offsets = [], []
    for z in range(dim):
        mu = 1j**z if dim == 2 else 1.0
        cols = []
        for j in range(dim):
            lam = mu * w**j
            cols.append(lam ** (-k) * w ** ((z * k * (k - 1) // 2) % dim) / np.sqrt(dim))
        bases.append(np.array(cols).T)
        offsets.append(mu)
    bases.append(np.eye(dim, dtype=complex))
    offsets.append(1.0)
    return MubFamily(dim, np.array(bases), np.array(offsets))


# --- angular momentum -------------------------------------------------------------


def spin_operators(two_j: int) -> OperatorSet:
    """J_x, J_y, J_z for spin j = two_j/2 in the basis m = j, j-1, ..., -j."""
    if two_j < 1:
        raise ValueError("two_j must be a positive integer")
    j = two_j / 2
    m = j - np.arange(two_j + 1)
    # J_+ |m> = sqrt((j - m)(j + m + 1)) |m + 1>; |m+1> sits one row above |m>.
    jplus = np.diag(np.sqrt((j - m[1:]) * (j + m[1:] + 1)), k=1).astype(complex)
    jminus = adjoint(jplus)
    jx = 0.5 * (jplus + jminus)
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(complex)
    return OperatorSet(("J_x", "J_y", "J_z"), np.array([jx, jy, jz]), (True, True, True))


def _ketbra(j: int, k: int, dim: int = 3) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[j, k] = 1.0
    return out


SPIN1_LABELS = ("J_x", "J_y", "J_z", "K_yz", "K_zx", "K_xy", "J_x^2", "J_y^2", "J_z^2")


def spin1_nine_set() -> OperatorSet:
    """A_1..A_9 = J_x, J_y, J_z, K_yz, K_zx, K_xy, J_x^2, J_y^2, J_z^2.

    Uses the real-basis spin-1 matrices J_x = -i(|0><1| - |1><0|),
    J_y = -i(|0><2| - |2><0|), J_z = -i(|1><2| - |2><1|) and the
    anticommutators K_ab = J_a J_b + J_b J_a.
    """
    jx = -1j * (_ketbra(0, 1) - _ketbra(1, 0))
    jy = -1j * (_ketbra(0, 2) - _ketbra(2, 0))
    jz = -1j * (_ketbra(1, 2) - _ketbra(2, 1))

    def anti(a, b):
        return a @ b + b @ a

    mats = [jx, jy, jz, anti(jy, jz), anti(jz, jx), anti(jx, jy), jx @ jx, jy @ jy, jz @ jz]
    return OperatorSet(SPIN1_LABELS, np.array(mats), (True,) * 9)


def spin1_six_set() -> OperatorSet:
    return spin1_nine_set().subset(range(6))


# --- qubit ----------------------------------------------------------------------------


def axis_operator(unit3, tol: float = 1e-10) -> np.ndarray:
    """a . sigma for a real unit 3-vector."""
    a = np.asarray(unit3, dtype=float)
    if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > tol:
        raise NotUnit(f"axis {a} is not a unit 3-vector")
    return np.einsum("i,ijk->jk", a, PAULIS)


def axes_from_dots(ab: float, ac: float | None = None, bc: float | None = None) -> np.ndarray:
    """Unit vectors with prescribed pairwise dot products.

    Rows are expressed in the frame obtained by Gram-Schmidt on the vectors
    themselves (a along x, b in the xy-plane), i.e. the rows are the lower
    triangular Cholesky factor of the Gram matrix.
    """
    if ac is None and bc is None:
        gram = np.array([[1.0, ab], [ab, 1.0]])
    else:
        gram = np.array([[1.0, ab, ac], [ab, 1.0, bc], [ac, bc, 1.0]])
    low = np.linalg.cholesky(gram)
    out = np.zeros((len(gram), 3))
    out[:, : len(gram)] = low
    return out


def qubit_axis_set(vectors, labels: Sequence[str] | None = None) -> OperatorSet:
    vecs = np.asarray(vectors, dtype=float)
    labels = labels or [f"a{i + 1}.sigma" for i in range(len(vecs))]
    return OperatorSet.from_list(labels, [axis_operator(v / np.linalg.norm(v)) for v in vecs])


@dataclass(frozen=True)
class SicPovm:
    bloch: np.ndarray = field(repr=False)
    effects: OperatorSet = field(repr=False)

    def axis_observables(self) -> OperatorSet:
        return qubit_axis_set(self.bloch, [f"a{i + 1}.sigma" for i in range(4)])


SIC_GRAM_ROWS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0 / 3.0, 2.0 * np.sqrt(2.0) / 3.0, 0.0],
        [-1.0 / 3.0, -np.sqrt(2.0) / 3.0, np.sqrt(2.0 / 3.0)],
    ]
)

WH_TRANSFORM = np.array([[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]) / np.sqrt(3.0)


def sic_qubit(variant: str = "gram") -> SicPovm:
    """Qubit SIC-POVM: tetrahedral Bloch vectors and effects (I + a.sigma)/4.

    ``gram`` takes the three vectors from the lower-triangular Gram factor
    (a_1 along x); ``weyl_heisenberg`` takes the covariant orientation with
    a_4 along (1, 1, 1)/sqrt(3). Either way a_4 = -(a_1 + a_2 + a_3).
    """
    if variant == "gram":
        first = SIC_GRAM_ROWS
    elif variant in ("weyl_heisenberg", "wh"):
        first = WH_TRANSFORM @ np.eye(3)
    else:
        raise ValueError(f"unknown SIC variant {variant!r}")
    bloch = np.vstack([first, -first.sum(axis=0)])
    effects = [(PAULI_I + axis_operator(a)) / 4.0 for a in bloch]
    return SicPovm(bloch, OperatorSet.from_list([f"Pi_{i + 1}" for i in range(4)], effects))


# --- two rank-1 projectors ---------------------------------------------------------


def fig1_projectors() -> tuple[np.ndarray, np.ndarray]:
    """The two non-commuting rank-1 qutrit projectors with tr(PQ) = 169/675.

    P = |a><a| with a = (1, 5i, 7)/sqrt(75); Q = |b><b| with b = (2, 1, -2)/3.
    """
    p = np.array(
        [
            [1 / 75, -1j / 15, 7 / 75],
            [1j / 15, 1 / 3, 7j / 15],
            [7 / 75, -7j / 15, 49 / 75],
        ],
        dtype=complex,
    )
    q = np.array([[4, 2, -4], [2, 1, -2], [-4, -2, 4]], dtype=complex) / 9.0
    return p, q


def fig1_set() -> OperatorSet:
    p, q = fig1_projectors()
    return OperatorSet(("P", "Q"), np.array([p, q]), (True, True))


def projector_pair(overlap_sq: float, dim: int = 2) -> OperatorSet:
    """Rank-1 projectors |a><a|, |b><b| on C^dim with |<a|b>|^2 = overlap_sq."""
    a = np.zeros(dim, dtype=complex)
    b = np.zeros(dim, dtype=complex)
    a[0] = 1.0
    b[0] = np.sqrt(overlap_sq)
    b[1] = np.sqrt(1.0 - overlap_sq)
    return OperatorSet(("P", "Q"), np.array([np.outer(a, a.conj()), np.outer(b, b.conj())]))


def binomial_weights(two_j: int) -> np.ndarray:
    return np.sqrt(np.array([comb(two_j, k) for k in range(two_j + 1)], dtype=float))
