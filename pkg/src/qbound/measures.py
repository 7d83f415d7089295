"""
Uncertainty and certainty measures on expectation values.

Each operator's expectation is mapped affinely onto a two-outcome
distribution (dotA, ringA) using its extreme eigenvalues, and the scalar
measures below act on that distribution. All value-level functions accept
numpy arrays and broadcast, which the optimizer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateSpectrum, InvalidKappa, NotNormalized

CLAMP_TOL = 1e-10
DEGENERACY_TOL = 1e-12


class EndpointPair(NamedTuple):
    a_min: float
    a_max: float

    def check(self) -> "EndpointPair":
        if not self.a_max - self.a_min > DEGENERACY_TOL:
            raise DegenerateSpectrum(f"a_min = a_max = {self.a_min}")
        return self


CONCAVE_KINDS = {"H", "std_dev", "std_dev_squared", "shannon_probs", "renyi2"}
CONVEX_KINDS = {"u_max"}
KINDS = CONCAVE_KINDS | CONVEX_KINDS | {"u_kappa", "power_probs"}


@dataclass(frozen=True)
class MeasureSpec:
    """A per-operator measure and the direction in which it is extremized.

    Uncertainty measures (concave) are minimized and certainty measures
    (convex) are maximized. ``power_probs`` is sum_i p_i^kappa applied
    directly to probabilities (no affine normalization).
    """

    kind: str
    kappa: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind in ("u_kappa", "power_probs"):
            _check_kappa(self.kappa)

    @property
    def direction(self) -> str:
        if self.kind in CONCAVE_KINDS:
            return "minimize"
        if self.kind in CONVEX_KINDS:
            return "maximize"
        return "minimize" if self.kappa < 1 else "maximize"

    @property
    def label(self) -> str:
        if self.kappa is None:
            return self.kind
        return f"{self.kind}({self.kappa:g})"

    @property
    def acts_on_probabilities(self) -> bool:
        return self.kind in ("shannon_probs", "power_probs")


def _check_kappa(kappa):
    if kappa is None or not np.isfinite(kappa) or kappa <= 0 or kappa == 1:
        raise InvalidKappa(f"kappa must be positive, finite and not 1, got {kappa}")


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, x * np.log(safe), 0.0)


def normalized_pair(value, ep: EndpointPair, tol: float = CLAMP_TOL):
    """(dotA, ringA) = ((a_max - v)/(a_max - a_min), 1 - dotA), clamped into [0, 1]."""
    a_min, a_max = EndpointPair(*ep).check()
    v = np.asarray(value, dtype=float)
    if np.any(v < a_min - tol) or np.any(v > a_max + tol):
        raise ValueError(f"value {value} outside [{a_min}, {a_max}]")
    dot = np.clip((a_max - v) / (a_max - a_min), 0.0, 1.0)
    ring = 1.0 - dot
    if dot.ndim == 0:
        return float(dot), float(ring)
    return dot, ring


def h_measure(value, ep):
    dot, ring = normalized_pair(value, ep)
    out = -(_xlogx(dot) + _xlogx(ring))
    return float(out) if np.ndim(out) == 0 else out


def u_kappa(value, ep, kappa: float):
    _check_kappa(kappa)
    dot, ring = normalized_pair(value, ep)
    out = np.power(dot, kappa) + np.power(ring, kappa)
    return float(out) if np.ndim(out) == 0 else out


def u_max(value, ep):
    dot, ring = normalized_pair(value, ep)
    out = np.maximum(dot, ring)
    return float(out) if np.ndim(out) == 0 else out


def renyi2(value, ep):
    """H_2 = -ln u_2."""
    return -np.log(u_kappa(value, ep, 2.0))


def two_valued_std(value, ep):
    """sqrt((a_max - v)(v - a_min)): the standard deviation of an observable
    with only two distinct eigenvalues, expressed through its mean alone."""
    a_min, a_max = EndpointPair(*ep).check()
    v = np.clip(np.asarray(value, dtype=float), a_min, a_max)
    out = np.sqrt(np.maximum((a_max - v) * (v - a_min), 0.0))
    return float(out) if np.ndim(out) == 0 else out


def std_dev(rho, a) -> float:
    """sqrt(<A^2> - <A>^2) with rounding-level negative radicands mapped to 0."""
    rho = np.asarray(rho, dtype=complex)
    a = np.asarray(a, dtype=complex)
    m1 = np.trace(rho @ a).real
    m2 = np.trace(rho @ a @ a).real
    var = m2 - m1 * m1
    if var < -1e-12:
        raise ValueError(f"negative variance {var:.3e}; is rho a state?")
    return float(np.sqrt(max(var, 0.0)))


def ket_variances(kets, matrices) -> np.ndarray:
    """(Delta A_i)^2 for a batch of kets, shape (n_kets, N)."""
    kets = np.atleast_2d(kets)
    av = np.einsum("njk,bk->bnj", matrices, kets)
    m1 = np.einsum("bj,bnj->bn", np.conj(kets), av).real
    m2 = np.einsum("bnj,bnj->bn", np.conj(av), av).real
    return np.maximum(m2 - m1 * m1, 0.0)


def shannon(probs, tol: float = 1e-10) -> float:
    p = np.asarray(probs, dtype=float)
    if abs(p.sum() - 1.0) > tol or np.any(p < -tol):
        raise NotNormalized(f"{p} is not a probability vector")
    return float(-np.sum(_xlogx(np.clip(p, 0.0, None))))


def binary_entropy(p: float) -> float:
    """h(p) = -(p ln p + (1 - p) ln(1 - p))."""
    return shannon([p, 1.0 - p])


def per_operator(values, spec: MeasureSpec, endpoints: Sequence) -> np.ndarray:
    """Per-operator measure values; ``values`` has shape (..., N)."""
    v = np.asarray(values, dtype=float)
    if spec.kind == "shannon_probs":
        return -_xlogx(np.clip(v, 0.0, None))
    if spec.kind == "power_probs":
        return np.power(np.clip(v, 0.0, None), spec.kappa)
    ends = np.array([EndpointPair(*ep).check() for ep in endpoints], dtype=float).reshape(-1, 2)
    a_min, a_max = ends[:, 0], ends[:, 1]
    if np.any(v < a_min - CLAMP_TOL) or np.any(v > a_max + CLAMP_TOL):
        raise ValueError("expectation value outside its eigenvalue range")
    dot = np.clip((a_max - v) / (a_max - a_min), 0.0, 1.0)
    ring = 1.0 - dot
    if spec.kind == "H":
        return -(_xlogx(dot) + _xlogx(ring))
    if spec.kind == "u_kappa":
        return np.power(dot, spec.kappa) + np.power(ring, spec.kappa)
    if spec.kind == "u_max":
        return np.maximum(dot, ring)
    if spec.kind == "renyi2":
        return -np.log(dot * dot + ring * ring)
    # two-valued standard deviation sqrt((a_max - v)(v - a_min)) = (a_max - a_min) sqrt(dot ring)
    var = (a_max - a_min) ** 2 * dot * ring
    return np.sqrt(var) if spec.kind == "std_dev" else var


def combined(values, spec: MeasureSpec, endpoints: Sequence):
    """Sum of the per-operator measure over the operator set.

    ``values`` may be an ExpectationPoint, a single N-vector or a stack (..., N).
    The standard-deviation kinds use the two-valued form and are exact only for
    observables with two distinct eigenvalues (qubit axes, projectors); general
    observables go through ``optimizer.std_dev_bound``, which works on states.
    """
    vals = getattr(values, "values", values)
    vals = np.asarray(vals, dtype=float)
    if vals.shape[-1] != len(endpoints) and not spec.acts_on_probabilities:
        raise ValueError(f"{vals.shape[-1]} values for {len(endpoints)} endpoint pairs")
    out = per_operator(vals, spec, endpoints).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out
