"""
Quantum constraints on density operators and on expectation values.

A Hermitian unit-trace matrix is a state exactly when every S_n of the
Newton recursion on its moments tr(rho^m) is nonnegative. The closed-form
polynomials below express the same moments directly in expectation values
for the qutrit, Weyl, spin-1 and MUB settings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import HermiticityViolation, MissingLabel, NonRealMoment, NotNormalized
from .linalg import MAX_DIM, hermiticity_residual, trace_power
from .operators import WeylLabel, omega, weyl_labels

S_TOL = 1e-9
MOMENT_IMAG_TOL = 1e-10
PROB_SUM_TOL = 1e-10
PROB_NEG_TOL = 1e-12


@dataclass(frozen=True)
class MomentVector:
    """tr(rho^m) for m = 1..dim; ``moments[0]`` is tr(rho)."""

    dim: int
    moments: np.ndarray = field(repr=False)

    def __getitem__(self, m: int) -> float:
        # 1-based access mirrors tr(rho^m)
        return float(self.moments[m - 1])


@dataclass(frozen=True)
class ConstraintReport:
    """S_1..S_d with per-order verdicts, plus the Hermiticity and trace checks."""

    s_values: np.ndarray
    satisfied: np.ndarray
    tolerance: float
    hermiticity_residual: float = 0.0
    hermitian: bool = True
    trace: float = 1.0
    unit_trace: bool = True
    failure: str | None = None

    @property
    def valid(self) -> bool:
        return bool(self.hermitian and self.unit_trace and np.all(self.satisfied))

    def failed_orders(self) -> list[int]:
        return [n + 1 for n, ok in enumerate(self.satisfied) if not ok]


def moments_of(rho) -> MomentVector:
    """Moments tr(rho^m), m = 1..d, as real numbers."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[-1]
    out = np.empty(d)
    power = np.eye(d, dtype=complex)
    for m in range(d):
        power = power @ rho
        t = np.trace(power)
        if abs(t.imag) > MOMENT_IMAG_TOL * max(1.0, abs(t.real)):
            raise NonRealMoment(f"tr(rho^{m + 1}) has imaginary part {t.imag:.3e}")
        out[m] = t.real
    return MomentVector(d, out)


def newton_s_values(moments: Sequence[float]) -> np.ndarray:
    """S_1..S_n from the alternating recursion
    S_n = (1/n) sum_{m=1}^{n} (-1)^(m-1) tr(rho^m) S_{n-m}, S_0 = 1.

    Works elementwise on trailing-axis stacks of moments.
    """
    p = np.asarray(moments, dtype=float)
    n_max = p.shape[-1]
    s = [np.ones(p.shape[:-1])]
    for n in range(1, n_max + 1):
        acc = np.zeros(p.shape[:-1])
        for m in range(1, n + 1):
            acc = acc + (-1) ** (m - 1) * p[..., m - 1] * s[n - m]
        s.append(acc / n)
    return np.stack(s[1:], axis=-1)


def newton_s(moments, tol: float = S_TOL) -> ConstraintReport:
    """Positivity report from a moment vector (S_n are elementary symmetric polynomials)."""
    p = moments.moments if isinstance(moments, MomentVector) else np.asarray(moments, dtype=float)
    s = newton_s_values(p)
    ok = s >= -tol
    failure = None if ok.all() else f"S_{int(np.argmin(ok)) + 1} < 0"
    return ConstraintReport(s, ok, tol, trace=float(p[0]), failure=failure)


def validate_state(rho, tol: float = S_TOL, herm_tol: float = 1e-12, trace_tol: float = 1e-10) -> ConstraintReport:
    """Check Hermiticity, unit trace and S_n >= -tol. Never raises on finite input."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or not np.all(np.isfinite(rho)):
        return ConstraintReport(
            np.array([]), np.array([], dtype=bool), tol, np.inf, False, np.nan, False,
            "input is not a finite square matrix",
        )
    resid = hermiticity_residual(rho)
    herm = resid <= herm_tol * max(1.0, float(np.max(np.abs(rho))))
    tr = float(np.trace(rho).real)
    unit = abs(tr - 1.0) <= trace_tol and abs(np.trace(rho).imag) <= trace_tol
    # evaluate S_n on the Hermitian part so the report is always populated
    h = 0.5 * (rho + rho.conj().T)
    s = newton_s_values(moments_of(h).moments) if rho.shape[0] <= MAX_DIM else np.array([])
    ok = s >= -tol
    failure = None
    if not herm:
        failure = f"not Hermitian (residual {resid:.3e})"
    elif not unit:
        failure = f"trace {tr:.12g} differs from 1"
    elif not ok.all():
        failure = f"S_{int(np.argmin(ok)) + 1} < 0"
    return ConstraintReport(s, ok, tol, resid, bool(herm), tr, bool(unit), failure)


def explicit_s234(moments) -> tuple[float, float, float | None]:
    """The explicit forms 1 - p2, 1 - 3p2 + 2p3 and 1 - 6p2 + 8p3 + 3p2^2 - 6p4.

    With p_m = tr(rho^m) and unit trace these equal 2! S_2, 3! S_3 and 4! S_4.
    The quartic is None for dim < 4.
    """
    p = moments.moments if isinstance(moments, MomentVector) else np.asarray(moments, dtype=float)
    p2 = p[1] if len(p) > 1 else 1.0
    p3 = p[2] if len(p) > 2 else 1.0
    s2 = 1.0 - p2
    s3 = 1.0 - 3.0 * p2 + 2.0 * p3
    s4 = None
    if len(p) >= 4:
        s4 = 1.0 - 6.0 * p2 + 8.0 * p3 + 3.0 * p2**2 - 6.0 * p[3]
    return float(s2), float(s3), None if s4 is None else float(s4)


def qutrit_moments_standard(r, tol: float = 1e-10) -> tuple[float, float, float]:
    """tr(rho), tr(rho^2), tr(rho^3) of a qutrit from its matrix elements r_jk."""
    r = np.asarray(r, dtype=complex)
    if r.shape != (3, 3):
        raise ValueError("expected a 3x3 coefficient grid")
    if hermiticity_residual(r) > tol:
        raise HermiticityViolation("r_jk must equal conj(r_kj)")
    r00, r11, r22 = r[0, 0].real, r[1, 1].real, r[2, 2].real
    a01, a02, a12 = abs(r[0, 1]) ** 2, abs(r[0, 2]) ** 2, abs(r[1, 2]) ** 2
    t1 = r00 + r11 + r22
    t2 = r00**2 + r11**2 + r22**2 + 2.0 * (a01 + a02 + a12)
    cyc = r[0, 1] * r[1, 2] * r[2, 0]
    t3 = (
        r00**3 + r11**3 + r22**3
        + 3.0 * r00 * (a01 + a02)
        + 3.0 * r11 * (a01 + a12)
        + 3.0 * r22 * (a02 + a12)
        + 3.0 * (cyc + np.conj(cyc)).real
    )
    return float(t1), float(t2), float(t3)


def _lookup(expect: Mapping, x: int, z: int, dim: int) -> complex:
    key = WeylLabel(x % dim, z % dim)
    for k in (key, tuple(key), str(key)):
        if k in expect:
            return complex(expect[k])
    raise MissingLabel(f"expectation of {key} is missing")


def weyl_tr2(expect: Mapping, dim: int) -> float:
    """tr(rho^2) = (1/d) sum |<X^x Z^z>|^2 over all d^2 labels."""
    total = sum(abs(_lookup(expect, lab.x, lab.z, dim)) ** 2 for lab in weyl_labels(dim))
    return float(total / dim)


def weyl_tr3(expect: Mapping, dim: int) -> complex:
    """tr(rho^3) for any d from the d^2 Weyl expectations.

    Uses rho = (1/d) sum conj-weighted <(X^xZ^z)^dagger> X^xZ^z and the product
    rule X^a Z^b X^c Z^e = omega^(bc) X^(a+c) Z^(b+e).
    """
    w = omega(dim)
    labs = weyl_labels(dim)
    # c[x, z] = <(X^xZ^z)^dagger>/d is the coefficient of X^xZ^z in rho
    c = np.zeros((dim, dim), dtype=complex)
    for lab in labs:
        c[lab.x, lab.z] = np.conj(_lookup(expect, lab.x, lab.z, dim)) / dim
    total = 0.0j
    for x1, z1 in labs:
        for x2, z2 in labs:
            x3 = (-x1 - x2) % dim
            z3 = (-z1 - z2) % dim
            # X^x1Z^z1 X^x2Z^z2 X^x3Z^z3 = omega^(z1 x2 + (z1+z2) x3) I
            phase = w ** ((z1 * x2 + (z1 + z2) * x3) % dim)
            total += c[x1, z1] * c[x2, z2] * c[x3, z3] * phase
    return complex(total * dim)


def qutrit_tr3_weyl(expect: Mapping) -> complex:
    """tr(rho^3) of a qutrit as the explicit cubic in the nine <X^xZ^z>."""
    def e(x, z):
        return _lookup(expect, x, z, 3)

    w = omega(3)
    X, X2, XZ, X2Z2 = e(1, 0), e(2, 0), e(1, 1), e(2, 2)
    XZ2, X2Z, Z, Z2 = e(1, 2), e(2, 1), e(0, 1), e(0, 2)
    cubes = 1 + X**3 + X2**3 + XZ**3 + X2Z2**3 + XZ2**3 + X2Z**3 + Z**3 + Z2**3
    squares = 6 * (abs(X) ** 2 + abs(XZ) ** 2 + abs(XZ2) ** 2 + abs(Z) ** 2)
    triples = (
        X * XZ * XZ2
        + X2 * X2Z * X2Z2
        + Z * XZ * X2Z
        + Z2 * XZ2 * X2Z2
        + w * Z * X2 * XZ2
        + w * Z2 * X * X2Z
        + w**2 * Z * X * X2Z2
        + w**2 * Z2 * X2 * XZ
    )
    return complex((cubes + squares - 3 * triples) / 9)


def check_probability_vector(p, tol_sum: float = PROB_SUM_TOL, tol_neg: float = PROB_NEG_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > tol_sum or np.any(p < -tol_neg):
        raise NotNormalized(f"probabilities {p} do not form a distribution")
    return p


def mub_quadratic(prob_vectors) -> float:
    """sum over all d+1 bases of sum_j p_j^2; quantum states give at most 2."""
    probs = [check_probability_vector(p) for p in prob_vectors]
    return float(sum(np.sum(p**2) for p in probs))


def spin1_moments(a) -> tuple[float, float, float]:
    """tr(rho), tr(rho^2), tr(rho^3) from <A_1>..<A_9> of the spin-1 nine-set.

    Order: J_x, J_y, J_z, K_yz, K_zx, K_xy, J_x^2, J_y^2, J_z^2.
    """
    jx, jy, jz, kyz, kzx, kxy, x2, y2, z2 = (float(v) for v in a)
    t1 = 0.5 * (x2 + y2 + z2)
    t2 = -1.0 + x2**2 + y2**2 + z2**2 + 0.5 * (jx**2 + jy**2 + jz**2 + kxy**2 + kyz**2 + kzx**2)
    t3 = 1.0 - 3.0 * x2 * y2 * z2 + 0.75 * (
        (jx**2 + kyz**2) * x2
        + (jy**2 + kzx**2) * y2
        + (jz**2 + kxy**2) * z2
        - kxy * kyz * kzx
        + jx * kxy * jy
        + jy * kyz * jz
        + jz * kzx * jx
    )
    return t1, t2, t3


def moment_vector_from_trace_powers(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([trace_power(rho, m).real for m in range(1, rho.shape[-1] + 1)])
