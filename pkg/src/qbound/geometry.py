"""
The allowed region of expectation values as a convex body.

For Hermitian A_1..A_N the set E of attainable (<A_1>, ..., <A_N>) is compact
and convex, and its support function is h(w) = lambda_max(sum_i w_i A_i).
A point e lies in E exactly when g(w) = h(w) - w.e >= 0 for every unit w,
and the touch point (the expectations in the top eigenvector) is the
gradient of h. Closed-form regions (qubit Gram ellipsoids, two projectors,
the spin ball) are provided as independent cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DegenerateOverlap, LinearlyDependent, NonHermitianOperator, NotUnit, TooManyOperators
from .linalg import gram_matrix, hermitian_eig, is_hermitian, top_eigenpair
from .measures import MeasureSpec, combined
from .operators import OperatorSet
from .states import ket_expectations

MEMBERSHIP_TOL = 1e-7
DEFAULT_PROBES = 512
# denser probes narrow the band of grid cells that need refinement
GRID_PROBES = 2048
GRID_RESOLUTION = 400
MEASURE_TOL = 1e-9
ORIGIN_TOL = 1e-12
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


# --- closed-form quadratic regions ---------------------------------------------


@dataclass(frozen=True)
class QuadraticRegion:
    """{x : E^T G^-1 E <= 1} with E = (x - center)/scale componentwise."""

    gram: np.ndarray = field(repr=False)
    center: np.ndarray = field(default=None, repr=False)
    scale: float = 1.0

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if np.max(np.abs(g - g.T)) > 1e-12:
            raise ValueError("Gram matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(g)) <= 0:
            raise LinearlyDependent("Gram matrix is not positive definite")
        object.__setattr__(self, "gram", g)
        c = np.zeros(len(g)) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def to_bloch(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.scale

    def quadratic_form(self, x):
        e = self.to_bloch(x)
        sol = np.linalg.solve(self.gram, np.moveaxis(e, -1, 0).reshape(self.dim, -1))
        val = np.sum(np.moveaxis(e, -1, 0).reshape(self.dim, -1) * sol, axis=0)
        return val.reshape(np.shape(e)[:-1]) if np.ndim(e) > 1 else float(val[0])

    def contains(self, x, tol: float = 1e-12):
        return np.asarray(self.quadratic_form(x)) <= 1.0 + tol

    def support(self, w):
        """max of w.x over the region: w.center + scale sqrt(w^T G w)."""
        w = np.asarray(w, dtype=float)
        return w @ self.center + self.scale * np.sqrt(np.einsum("...i,ij,...j->...", w, self.gram, w))


def gram_region(axes, det_tol: float = 1e-10) -> QuadraticRegion:
    """Region of (<a_1.sigma>, ..., <a_k.sigma>) for unit axes: E^T G^-1 E <= 1."""
    a = np.asarray(axes, dtype=float)
    if a.ndim != 2 or a.shape[0] not in (2, 3) or a.shape[1] != 3:
        raise ValueError("need two or three 3-vectors")
    if np.any(np.abs(np.linalg.norm(a, axis=1) - 1.0) > 1e-10):
        raise NotUnit("axes must be unit vectors")
    g = gram_matrix(a)
    if np.linalg.det(g) < det_tol:
        raise LinearlyDependent("axes are linearly dependent; drop the redundant ones")
    return QuadraticRegion(g)


def ellipsoid_axes(region: QuadraticRegion) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal O and eigenvalues lambda with O^T G O = diag(lambda).

    Semi-principal axes have lengths sqrt(lambda_i) along the columns of O.
    Eigenvalues ascend; each column's first significant entry is positive.
    """
    w, v = hermitian_eig(region.gram.astype(complex))
    o = v.real
    for k in range(o.shape[1]):
        lead = o[np.argmax(np.abs(o[:, k]) > 1e-9), k]
        if lead < 0:
            o[:, k] = -o[:, k]
    return o, w


def schrodinger_qubit(a: float, b: float, c: float, ab: float) -> float:
    """(1 - <A>^2)(1 - <B>^2) - (1 - ab^2) <C>^2 - (ab - <A><B>)^2 for qubit axes
    a, b with a.b = ab and c along a x b; nonnegative on states, zero on pure ones."""
    return (1 - a * a) * (1 - b * b) - (1 - ab * ab) * c * c - (ab - a * b) ** 2


@dataclass(frozen=True)
class TwoProjectorRegion:
    """Region of (<P>, <Q>) for rank-1 projectors with |<a|b>|^2 = overlap_sq.

    For dim 2 it is the ellipse E^T G^-1 E <= 1 with E = (2p - 1, 2q - 1) and
    G = [[1, 2s - 1], [2s - 1, 1]]. For dim > 2 it is the convex hull of
    that ellipse and the origin.
    """

    overlap_sq: float
    dim: int = 2
    ellipse: QuadraticRegion = field(init=False, repr=False)

    def __post_init__(self):
        s = float(self.overlap_sq)
        if not 0.0 < s < 1.0:
            raise DegenerateOverlap(f"overlap {s} must lie strictly between 0 and 1")
        c = 2.0 * s - 1.0
        object.__setattr__(
            self, "ellipse", QuadraticRegion(np.array([[1.0, c], [c, 1.0]]), np.array([0.5, 0.5]), 0.5)
        )

    def hull_form(self, x):
        """min over t >= 1 of the ellipse form at t*x (the ellipse form itself for dim 2).

        Points are inside exactly when this is <= 1 (or x = 0 for dim > 2).
        The form jumps at the origin, so points within ORIGIN_TOL of it count as
        the origin.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.dim == 2:
            out = self.ellipse.quadratic_form(x)
            return np.atleast_1d(out)
        ginv = np.linalg.inv(self.ellipse.gram)
        # form(t) = (2 t x - 1)^T Ginv (2 t x - 1) = 4 t^2 xGx - 4 t xG1 + 1G1
        one = np.ones(2)
        xgx = np.einsum("ni,ij,nj->n", x, ginv, x)
        xg1 = x @ ginv @ one
        g11 = one @ ginv @ one
        safe = np.where(xgx > 0, xgx, 1.0)
        t = np.where(xgx > 0, np.maximum(1.0, xg1 / (2.0 * safe)), 1.0)
        val = 4 * t * t * xgx - 4 * t * xg1 + g11
        return np.where(np.linalg.norm(x, axis=1) <= ORIGIN_TOL, 0.0, val)

    def contains(self, x, tol: float = 1e-12):
        out = self.hull_form(x) <= 1.0 + tol
        return bool(out[0]) if np.ndim(x) == 1 else out

    def support(self, w):
        w = np.asarray(w, dtype=float)
        h = self.ellipse.support(w)
        return h if self.dim == 2 else np.maximum(0.0, h)


def two_projector_region(overlap_sq: float, dim: int = 2) -> TwoProjectorRegion:
    return TwoProjectorRegion(overlap_sq, dim)


# --- support function ------------------------------------------------------------


def _check_ops(ops) -> np.ndarray:
    mats = ops.matrices if isinstance(ops, OperatorSet) else np.asarray(ops, dtype=complex)
    if not all(is_hermitian(m) for m in mats):
        raise NonHermitianOperator("support functions need Hermitian operators")
    return mats


def support_batch(directions, matrices) -> tuple[np.ndarray, np.ndarray]:
    """h(w) and touch points for a stack of directions (shape (M, N))."""
    w = np.atleast_2d(np.asarray(directions, dtype=float))
    n, d = matrices.shape[0], matrices.shape[-1]
    h_mat = (w @ matrices.reshape(n, d * d)).reshape(len(w), d, d)
    lam, vec = top_eigenpair(h_mat)
    touch = ket_expectations(vec, matrices)
    return lam, touch


def support_value(direction, ops) -> float:
    """lambda_max(sum_i w_i A_i): the maximum of w.E over the allowed region."""
    w = np.asarray(direction, dtype=float)
    if not np.any(w):
        raise ValueError("direction must be nonzero")
    mats = _check_ops(ops)
    return float(support_batch(w, mats)[0][0])


def operator_radius(matrices) -> float:
    """sqrt(sum ||A_i||^2): a Lipschitz constant of h on the unit sphere."""
    spec = hermitian_eig(matrices).eigenvalues
    return float(np.sqrt(np.sum(np.max(np.abs(spec), axis=-1) ** 2)))


# --- probe directions ---------------------------------------------------------------


def probe_directions(n: int, count: int = DEFAULT_PROBES, seed: int = 0) -> np.ndarray:
    """Pseudo-uniform unit directions plus the +-coordinate axes.

    Evenly spaced angles in 2D, a Fibonacci (golden-spiral) lattice in 3D and
    normalized Gaussian draws in higher dimension.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(count) / count
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    elif n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (3 - np.sqrt(5)) * k
        dirs = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    else:
        g = np.random.default_rng(seed).standard_normal((count, n))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    eye = np.eye(n)
    return np.vstack([dirs, eye, -eye])


@lru_cache(maxsize=16)
def _covering_angle(n: int, count: int) -> float:
    """Largest angular gap from any unit vector to the nearest probe (estimated for 3D)."""
    if n == 2:
        return np.pi / count
    if n == 3:
        probes = probe_directions(3, count)
        g = np.random.default_rng(12345).standard_normal((20000, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        cos = np.max(g @ probes.T, axis=1)
        # a 1.5x safety factor over the sampled worst case
        return 1.5 * float(np.arccos(np.clip(np.min(cos), -1.0, 1.0)))
    return np.inf


class _ProbeCache:
    def __init__(self, matrices, count, seed):
        self.matrices = matrices
        n = matrices.shape[0]
        self.dirs = probe_directions(n, count, seed)
        self.h, self.touch = support_batch(self.dirs, matrices)
        self.radius = operator_radius(matrices)
        gap = _covering_angle(n, count)
        self.chord = 2 * np.sin(min(gap, np.pi) / 2) if np.isfinite(gap) else np.inf


# --- membership -----------------------------------------------------------------------


class MembershipVerdict(NamedTuple):
    inside: bool
    margin: float
    witness_direction: np.ndarray


def _g_values(w, e, matrices):
    h, touch = support_batch(w, matrices)
    return h - np.sum(w * e, axis=1), touch


def _refine_circle(theta0, e, matrices, half_width, iters=70):
    """Golden-section search for min g on the arc theta0 +- half_width (N = 2)."""
    a = theta0 - half_width
    b = theta0 + half_width

    def g_at(t):
        w = np.column_stack([np.cos(t), np.sin(t)])
        return _g_values(w, e, matrices)[0]

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g_at(c), g_at(d)
    for _ in range(iters):
        left = gc < gd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - GOLDEN * (b - a), d)
        new_d = np.where(left, c, a + GOLDEN * (b - a))
        g_new = g_at(np.where(left, new_c, new_d))
        gc, gd = np.where(left, g_new, gd), np.where(left, gc, g_new)
        c, d = new_c, new_d
    t = 0.5 * (a + b)
    w = np.column_stack([np.cos(t), np.sin(t)])
    return w, g_at(t)


def _refine_sphere(w, e, matrices, iters=300, step0=0.1):
    """Riemannian gradient descent with backtracking on g over the unit sphere."""
    w = w.copy()
    g, touch = _g_values(w, e, matrices)
    step = np.full(len(w), step0)
    active = np.ones(len(w), dtype=bool)
    for _ in range(iters):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        grad = touch[idx] - e[idx]
        rg = grad - np.sum(grad * w[idx], axis=1, keepdims=True) * w[idx]
        norm = np.linalg.norm(rg, axis=1)
        trial = w[idx] - step[idx, None] * rg
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        g_t, touch_t = _g_values(trial, e[idx], matrices)
        ok = g_t < g[idx] - 1e-4 * step[idx] * norm**2
        acc = idx[ok]
        w[acc], g[acc], touch[acc] = trial[ok], g_t[ok], touch_t[ok]
        step[acc] *= 1.5
        step[idx[~ok]] *= 0.5
        done = (norm < 1e-8) | (step[idx] < 1e-13)
        active[idx[done]] = False
    return w, g


def _probe_stage(e, cache: _ProbeCache, tol: float):
    """Probe minima, witnesses and the mask of points the probes cannot decide."""
    gp = cache.h[None, :] - e @ cache.dirs.T
    best = np.argmin(gp, axis=1)
    margin = gp[np.arange(len(e)), best]
    lip = cache.radius + np.linalg.norm(e, axis=1)
    undecided = (margin >= -tol) & (margin <= lip * cache.chord)
    return gp, margin, cache.dirs[best].copy(), undecided


def _start_directions(gp, cache: _ProbeCache, k: int):
    """The k lowest probes; on the circle only local minima of g qualify."""
    n = cache.dirs.shape[1]
    if n == 2:
        m_dirs = len(cache.dirs) - 4
        ring = gp[:, :m_dirs]
        local = (ring <= np.roll(ring, 1, axis=1)) & (ring <= np.roll(ring, -1, axis=1))
        ring = np.where(local, ring, np.inf)
        k = min(k, m_dirs)
        order = np.argpartition(ring, k - 1, axis=1)[:, :k]
        # non-minima fill unused slots; they fall back to the overall best probe
        fallback = np.argmin(gp[:, :m_dirs], axis=1)[:, None]
        order = np.where(np.isfinite(np.take_along_axis(ring, order, axis=1)), order, fallback)
        return 2 * np.pi * order / m_dirs, 2 * np.pi / m_dirs
    k = min(k, gp.shape[1])
    order = np.argpartition(gp, k - 1, axis=1)[:, :k]
    return cache.dirs[order], None


def membership_batch(
    points,
    ops,
    tol: float = MEMBERSHIP_TOL,
    probes: int = DEFAULT_PROBES,
    seed: int = 0,
    certify: bool = False,
    n_starts: int = 4,
    coarse_probes: int | None = None,
    _cache: _ProbeCache | None = None,
):
    """Vectorized membership. Returns (inside, margin, witness) arrays.

    With ``certify`` a point skips refinement when the probes alone decide it:
    a probe with g < -tol proves it is outside, and min_probe g > L * chord
    (L a Lipschitz constant of g, chord the probe covering distance) proves
    it is inside. Reported margins for such points are the probe minima.
    ``coarse_probes`` adds a cheaper first certification pass.
    """
    if probes < 100:
        raise ValueError("at least 100 probe directions are required")
    mats = _check_ops(ops)
    n = mats.shape[0]
    e = np.atleast_2d(np.asarray(points, dtype=float))
    if e.shape[1] != n:
        raise ValueError(f"points have {e.shape[1]} coordinates for {n} operators")
    margin = np.empty(len(e))
    witness = np.empty((len(e), n))
    todo = np.arange(len(e))
    if certify and coarse_probes:
        coarse = _ProbeCache(mats, coarse_probes, seed)
        _, m0, w0, und = _probe_stage(e, coarse, tol)
        margin[:], witness[:] = m0, w0
        todo = np.nonzero(und)[0]
    cache = _cache or _ProbeCache(mats, probes, seed)
    if len(todo):
        gp, m1, w1, und = _probe_stage(e[todo], cache, tol)
        margin[todo], witness[todo] = m1, w1
        if certify:
            gp, todo = gp[und], todo[und]
    if len(todo):
        k = n_starts
        starts, half = _start_directions(gp, cache, k)
        rows = np.repeat(todo, k)
        if n == 2:
            w_ref, g_ref = _refine_circle(starts.reshape(-1), e[rows], mats, half)
        else:
            w_ref, g_ref = _refine_sphere(starts.reshape(-1, n), e[rows], mats)
        g_ref = g_ref.reshape(len(todo), k)
        pick = np.argmin(g_ref, axis=1)
        g_best = g_ref[np.arange(len(todo)), pick]
        w_best = w_ref.reshape(len(todo), k, n)[np.arange(len(todo)), pick]
        better = g_best < margin[todo]
        margin[todo[better]] = g_best[better]
        witness[todo[better]] = w_best[better]
    return margin >= -tol, margin, witness


def membership(point, ops, tol: float = MEMBERSHIP_TOL, probes: int = DEFAULT_PROBES, seed: int = 0) -> MembershipVerdict:
    """Is ``point`` a vector of expectation values of some state?

    Minimizes g(w) = h(w) - w.point over unit w, starting from ``probes``
    pseudo-uniform directions plus the coordinate axes. The point is inside
    when the minimum is >= -tol; for inside points the margin is the distance
    to the boundary and for outside points it is minus the distance.
    """
    values = getattr(point, "values", point)
    inside, margin, witness = membership_batch(values, ops, tol, probes, seed, n_starts=6)
    return MembershipVerdict(bool(inside[0]), float(margin[0]), witness[0])


# --- boundary and grids -----------------------------------------------------------------


class BoundarySample(NamedTuple):
    directions: np.ndarray
    touch_points: np.ndarray
    support: np.ndarray


def boundary_sample(ops, n_directions: int, seed: int = 0) -> BoundarySample:
    """Support values and touch points (extreme points of E) along sampled directions.

    2D uses evenly spaced angles; higher dimensions use Gaussian draws from
    ``numpy.random.default_rng(seed)``.
    """
    if n_directions < 1:
        raise ValueError("need at least one direction")
    mats = _check_ops(ops)
    n = mats.shape[0]
    if n == 2:
        ang = 2 * np.pi * np.arange(n_directions) / n_directions
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        g = np.random.default_rng(seed).standard_normal((n_directions, n))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    h, touch = support_batch(dirs, mats)
    return BoundarySample(dirs, touch, h)


@dataclass(frozen=True)
class RegionGrid:
    axes: list = field(repr=False)
    in_e: np.ndarray = field(repr=False)
    in_r: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    margins: np.ndarray = field(repr=False)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def region_in_r(values, spec: MeasureSpec, bound: float, tol: float = MEASURE_TOL):
    """Cells obeying the relation: value >= bound for URs, value <= bound for CRs."""
    if spec.direction == "minimize":
        return values >= bound - tol
    return values <= bound + tol


def measure_region_grid(
    ops: OperatorSet,
    spec: MeasureSpec,
    bound: float,
    resolution: int = GRID_RESOLUTION,
    tol: float = MEMBERSHIP_TOL,
    probes: int = GRID_PROBES,
    chunk: int = 8000,
) -> RegionGrid:
    """Rasterize the hyperrectangle at cell centers and flag cells in R and in E."""
    if len(ops) > 3:
        raise TooManyOperators(f"grids support at most 3 operators, got {len(ops)}")
    ends = ops.endpoints()
    axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution for lo, hi in ends]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = combined(pts, spec, ends)
    in_r = region_in_r(vals, spec, bound)
    mats = _check_ops(ops)
    cache = _ProbeCache(mats, probes, 0)
    in_e = np.empty(len(pts), dtype=bool)
    margins = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        ins, mar, _ = membership_batch(
            pts[s : s + chunk], ops, tol, probes, certify=True, coarse_probes=256, _cache=cache
        )
        in_e[s : s + chunk] = ins
        margins[s : s + chunk] = mar
    shape = mesh[0].shape
    return RegionGrid(axes, in_e.reshape(shape), in_r.reshape(shape), vals.reshape(shape), margins.reshape(shape))
