"""
Tight uncertainty and certainty bounds by global search over pure states.

A concave combined measure attains its minimum (and a convex one its
maximum) at an extreme point of the allowed region, and every extreme point
comes from a pure state. The search therefore runs over the 2(d-1) angles
of a pure ket (or the two angles of a spin coherent state when only
J_x, J_y, J_z enter): a lattice scan picks diverse starting points, and
Nelder-Mead refines each of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import log, sqrt
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import UnknownBound
from .measures import MeasureSpec, binary_entropy, combined, ket_variances
from .operators import (
    OperatorSet,
    axes_from_dots,
    mub_family,
    qubit_axis_set,
    sic_qubit,
    spin1_nine_set,
    spin1_six_set,
    spin_operators,
)
from .states import PureStateAngles, angles_from_ket, coherent_kets, kets_from_vectors, ket_expectations

DEFAULT_SEED = 0
EXACT_GATE = 1e-6
ROUNDED_GATE = 1e-4
WITNESS_FIDELITY = 1 - 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings. ``None`` picks the dimension-dependent default.

    grid_points: lattice points per angle (24 for d <= 3, 12 above).
    sample_points: quasi-random starting sample used instead of the full
        lattice once it would exceed ``max_lattice`` points.
    restarts: number of diverse lattice points refined by Nelder-Mead.
    max_iter: Nelder-Mead iterations per restart (default max(400, 200 k)).
    """

    grid_points: int | None = None
    restarts: int = 16
    max_iter: int | None = None
    seed: int = DEFAULT_SEED
    tolerance: float = 1e-12
    sample_points: int = 20000
    max_lattice: int = 400_000
    diversity: float = 0.99

    def __post_init__(self):
        for name in ("restarts", "sample_points", "max_lattice"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.grid_points is not None and self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


# --- problems --------------------------------------------------------------------------


@dataclass(frozen=True)
class Problem:
    """A scalar objective over a box of angles, vectorized over rows.

    ``kets`` maps parameter rows to kets; ``score`` maps kets to objective
    values. The search minimizes ``sign * score``.
    """

    n_params: int
    upper: np.ndarray
    periodic: np.ndarray
    kets: Callable[[np.ndarray], np.ndarray]
    score: Callable[[np.ndarray], np.ndarray]
    sign: float
    dim: int
    coherent: bool = False
    seeds: np.ndarray | None = None

    def objective(self, params) -> np.ndarray:
        return self.sign * self.score(self.kets(np.atleast_2d(params)))


def eigenstate_seeds(matrices) -> np.ndarray:
    """Angle rows of every eigenvector of every operator.

    Optima of sums of standard deviations sit on cusps at eigenstates, which a
    lattice can miss, so these are always added to the start pool.
    """
    rows = []
    for m in np.asarray(matrices):
        if np.allclose(m, np.conj(m.T)):
            _, vecs = np.linalg.eigh(m)
            rows.extend(angles_from_ket(vecs[:, k]).as_vector() for k in range(vecs.shape[1]))
    return np.array(rows) if rows else None


def pure_state_problem(dim: int, score, sign: float, seeds=None) -> Problem:
    k = dim - 1
    upper = np.concatenate([np.full(k, np.pi / 2), np.full(k, 2 * np.pi)])
    periodic = np.concatenate([np.zeros(k, bool), np.ones(k, bool)])
    return Problem(2 * k, upper, periodic, lambda p: kets_from_vectors(dim, p), score, sign, dim, seeds=seeds)


def coherent_problem(two_j: int, score, sign: float) -> Problem:
    upper = np.array([np.pi, 2 * np.pi])
    periodic = np.array([False, True])
    return Problem(
        2, upper, periodic, lambda p: coherent_kets(two_j, p[:, 0], p[:, 1]), score, sign, two_j + 1, True
    )


def measure_score(ops: OperatorSet, spec: MeasureSpec):
    mats = ops.matrices
    ends = ops.endpoints()

    def score(kets):
        vals = ket_expectations(kets, mats)
        if not spec.acts_on_probabilities:
            lo = np.array([e[0] for e in ends])
            hi = np.array([e[1] for e in ends])
            vals = np.clip(vals, lo, hi)
        return combined(vals, spec, ends)

    return score


def deviation_score(ops: OperatorSet, squared: bool):
    mats = ops.matrices

    def score(kets):
        var = ket_variances(kets, mats)
        return var.sum(axis=1) if squared else np.sqrt(var).sum(axis=1)

    return score


# --- search ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalOptimum:
    params: np.ndarray
    value: float
    ket: np.ndarray = field(repr=False)


def _grid_points(problem: Problem, config: OptimizerConfig) -> int:
    if config.grid_points is not None:
        return config.grid_points
    return 24 if problem.dim <= 3 or problem.coherent else 12


def start_points(problem: Problem, config: OptimizerConfig) -> np.ndarray:
    """The full lattice when affordable, otherwise a seeded Sobol sample of the box.

    Problem seeds (operator eigenstates) are prepended.
    """
    g = _grid_points(problem, config)
    if g**problem.n_params <= config.max_lattice:
        axes = []
        for up, per in zip(problem.upper, problem.periodic):
            axes.append(up * np.arange(g) / g if per else np.linspace(0.0, up, g))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        from scipy.stats import qmc

        m = int(np.ceil(np.log2(config.sample_points)))
        sample = qmc.Sobol(problem.n_params, scramble=True, seed=config.seed).random_base2(m)
        pts = sample * problem.upper
    if problem.seeds is not None:
        pts = np.vstack([problem.seeds, pts])
    return pts


def _evaluate(problem: Problem, params: np.ndarray, chunk: int = 50_000) -> tuple[np.ndarray, np.ndarray]:
    vals = np.empty(len(params))
    kets = np.empty((len(params), problem.dim), dtype=complex)
    for s in range(0, len(params), chunk):
        k = problem.kets(params[s : s + chunk])
        kets[s : s + chunk] = k
        vals[s : s + chunk] = problem.sign * problem.score(k)
    return vals, kets


def _diverse(vals, kets, count: int, max_fidelity: float) -> list[int]:
    """Indices of the lowest values, skipping kets too close to ones already chosen."""
    order = np.argsort(vals, kind="stable")[:20000]
    chosen: list[int] = []
    for i in order:
        if chosen:
            fid = np.abs(np.conj(kets[chosen]) @ kets[i]) ** 2
            if np.max(fid) > max_fidelity:
                continue
        chosen.append(int(i))
        if len(chosen) == count:
            break
    return chosen


def _nelder_mead(problem: Problem, x0: np.ndarray, step: np.ndarray, config: OptimizerConfig):
    k = problem.n_params
    max_iter = config.max_iter or max(400, 200 * k)
    fun = lambda x: float(problem.objective(x)[0])
    best = None
    for _ in range(2):
        simplex = np.vstack([x0, x0 + np.diag(step)])
        res = minimize(
            fun,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": max_iter,
                "maxfev": 2 * max_iter,
                "xatol": 1e-10,
                "fatol": config.tolerance,
                "initial_simplex": simplex,
            },
        )
        if best is None or res.fun <= best.fun:
            best = res
        # restart the simplex at the optimum with a smaller step
        x0 = best.x
        step = step * 0.05
    return best


def local_optima(problem: Problem, config: OptimizerConfig, restarts: int | None = None) -> list[LocalOptimum]:
    """Refine the ``restarts`` best diverse start points; results sorted by value."""
    pts = start_points(problem, config)
    vals, kets = _evaluate(problem, pts)
    chosen = _diverse(vals, kets, restarts or config.restarts, config.diversity)
    g = _grid_points(problem, config)
    step = problem.upper / g
    out = []
    for i in chosen:
        res = _nelder_mead(problem, pts[i], step, config)
        ket = problem.kets(np.atleast_2d(res.x))[0]
        out.append(LocalOptimum(np.asarray(res.x), float(res.fun), ket))
    out.sort(key=lambda o: o.value)
    return out


# --- results ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundResult:
    name: str
    set_label: str
    measure: str
    direction: str
    value: float
    angles: PureStateAngles | None
    reference_value: float | None = None
    reference_expr: str = ""
    deviation: float | None = None
    gate: float = EXACT_GATE
    coherent_angles: tuple[float, float] | None = None
    witnesses: int | None = None

    @property
    def passed(self) -> bool:
        return self.deviation is None or self.deviation <= self.gate

    def with_reference(self, value: float, expr: str, gate: float) -> "BoundResult":
        return replace(self, reference_value=value, reference_expr=expr, deviation=abs(self.value - value), gate=gate)


def _result(name, set_label, measure, problem: Problem, best: LocalOptimum) -> BoundResult:
    coh = None
    if problem.coherent:
        a, b = best.params
        # fold into alpha in [0, pi], beta in [0, 2 pi)
        a = np.mod(a, 2 * np.pi)
        if a > np.pi:
            a, b = 2 * np.pi - a, b + np.pi
        coh = (float(a), float(np.mod(b, 2 * np.pi)))
    return BoundResult(
        name,
        set_label,
        measure,
        "minimize" if problem.sign > 0 else "maximize",
        problem.sign * best.value,
        angles_from_ket(best.ket),
        coherent_angles=coh,
    )


def optimize_bound(ops: OperatorSet, spec: MeasureSpec, config: OptimizerConfig | None = None,
                   name: str = "", coherent_two_j: int | None = None) -> BoundResult:
    """Extremize the combined measure over pure states of ``ops.dim``.

    Concave kinds are minimized and convex kinds maximized, as fixed by the
    spec. With ``coherent_two_j`` the search runs over spin coherent states,
    which is exact for measures of (J_x, J_y, J_z) alone.
    """
    config = config or OptimizerConfig()
    problem = _measure_problem(ops, spec, coherent_two_j)
    best = local_optima(problem, config)[0]
    return _result(name or spec.label, "|".join(ops.labels), spec.label, problem, best)


def _measure_problem(ops, spec, coherent_two_j=None) -> Problem:
    sign = 1.0 if spec.direction == "minimize" else -1.0
    score = measure_score(ops, spec)
    if coherent_two_j is not None:
        return coherent_problem(coherent_two_j, score, sign)
    return pure_state_problem(ops.dim, score, sign, eigenstate_seeds(ops.matrices))


def std_dev_bound(ops: OperatorSet, squared: bool = False, config: OptimizerConfig | None = None,
                  name: str = "") -> BoundResult:
    """Minimize sum_i Delta A_i (or sum_i (Delta A_i)^2) over pure states.

    Deviations come straight from the state, sqrt(<A^2> - <A>^2), so the
    operators may have any spectrum.
    """
    config = config or OptimizerConfig()
    problem = pure_state_problem(ops.dim, deviation_score(ops, squared), 1.0, eigenstate_seeds(ops.matrices))
    best = local_optima(problem, config)[0]
    label = "std_dev_squared" if squared else "std_dev"
    return _result(name or label, "|".join(ops.labels), label, problem, best)


# --- catalog ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable[[], Problem]
    set_label: str
    measure: str
    reference_value: float
    reference_expr: str
    gate: float = EXACT_GATE
    expected_witnesses: int | None = None


EPSILON = 0.75


def qubit_two_setting_set(epsilon: float = EPSILON) -> OperatorSet:
    """A = a.sigma, B = b.sigma with a.b = 2 epsilon - 1 (eigenvalues +-1)."""
    return qubit_axis_set(axes_from_dots(2 * epsilon - 1), ["A", "B"])


def _entries() -> list[CatalogEntry]:
    nine, six = spin1_nine_set(), spin1_six_set()
    H, U_HALF, U2, UMAX = MeasureSpec("H"), MeasureSpec("u_kappa", 0.5), MeasureSpec("u_kappa", 2.0), MeasureSpec("u_max")
    out = []

    def meas(name, ops, spec, value, expr, set_label, gate=EXACT_GATE, two_j=None, witnesses=None):
        out.append(CatalogEntry(
            name, lambda: _measure_problem(ops, spec, two_j), set_label, spec.label, value, expr, gate, witnesses
        ))

    def dev(name, ops, squared, value, expr, set_label):
        label = "std_dev_squared" if squared else "std_dev"
        out.append(CatalogEntry(
            name, lambda: pure_state_problem(ops.dim, deviation_score(ops, squared), 1.0, eigenstate_seeds(ops.matrices)),
            set_label, label, value, expr
        ))

    meas("spin1.H", nine, H, 6 * log(2), "6 ln 2", "spin1-nine")
    meas("spin1.u_half", nine, U_HALF, 3 + 6 * sqrt(2), "3 + 6 sqrt 2", "spin1-nine")
    meas("spin1.u2", nine, U2, 6.0, "6", "spin1-nine")
    meas("spin1.u_max", nine, UMAX, 6.51702, "6.51702", "spin1-nine", gate=ROUNDED_GATE)
    dev("spin1.std9", nine, False, 4.0, "4", "spin1-nine")
    dev("spin1.std6", six, False, 1 + 2 * sqrt(2), "1 + 2 sqrt 2", "spin1-six")
    dev("spin1.var9", nine, True, 10 / 3, "10/3", "spin1-nine")
    dev("spin1.var6", six, True, 8 / 3, "8/3", "spin1-six")

    for two_j in (1, 2, 3, 4):
        j = two_j / 2
        tag = f"spinj.{two_j}/2" if two_j % 2 else f"spinj.{two_j // 2}"
        ops = spin_operators(two_j)
        lab = f"spin --two-j {two_j}"
        meas(f"{tag}.H", ops, H, 2 * log(2), "2 ln 2", lab, two_j=two_j, witnesses=6)
        meas(f"{tag}.H2", ops, MeasureSpec("renyi2"), 3 * log(1.5), "3 ln(3/2)", lab, two_j=two_j, witnesses=8)
        meas(f"{tag}.u_half", ops, U_HALF, 1 + 2 * sqrt(2), "1 + 2 sqrt 2", lab, two_j=two_j)
        meas(f"{tag}.u2", ops, U2, 2.0, "2", lab, two_j=two_j)
        meas(f"{tag}.u_max", ops, UMAX, (3 + sqrt(3)) / 2, "(3 + sqrt 3)/2", lab, two_j=two_j, witnesses=8)
        dev(f"{tag}.var", ops, True, j, f"j = {j:g}", lab)

    eps = EPSILON
    qb = qubit_two_setting_set(eps)
    lab = "qubit-axes --dots 0.5"
    dev("qubit2.std", qb, False, sqrt(1 - (2 * eps - 1) ** 2), "sqrt(1 - (2e - 1)^2)", lab)
    meas("qubit2.H", qb, H, 2 * binary_entropy((1 + sqrt(eps)) / 2), "2 h((1 + sqrt e)/2)", lab)
    meas("qubit2.u_half", qb, U_HALF, 1 + sqrt(eps) + sqrt(1 - eps), "1 + sqrt e + sqrt(1 - e)", lab)
    meas("qubit2.u2", qb, U2, max(2 - eps, 1 + eps), "max(2 - e, 1 + e)", lab)
    meas("qubit2.u_max", qb, UMAX, max(1 + sqrt(1 - eps), 1 + sqrt(eps)), "max(1 + sqrt(1 - e), 1 + sqrt e)", lab)

    sic = sic_qubit("gram")
    axes4 = sic.axis_observables()
    meas("sic.std", axes4, MeasureSpec("std_dev"), 2 * sqrt(2), "2 sqrt 2", "sic")
    meas("sic.entropy", sic.effects, MeasureSpec("shannon_probs"), log(3), "ln 3", "sic", witnesses=4)
    meas("sic.u_half", sic.effects, MeasureSpec("power_probs", 0.5), sqrt(3), "sqrt 3", "sic")
    meas("sic.quadratic", sic.effects, MeasureSpec("power_probs", 2.0), 1 / 3, "1/3", "sic")
    meas("sic.var", axes4, MeasureSpec("std_dev_squared"), 8 / 3, "8/3", "sic")

    mub = mub_family(3).projectors()
    meas("mub3.quadratic", mub, MeasureSpec("power_probs", 2.0), 2.0, "2", "mub --dim 3")
    return out


_ENTRY_CACHE: dict[str, CatalogEntry] | None = None


def catalog_entries() -> dict[str, CatalogEntry]:
    global _ENTRY_CACHE
    if _ENTRY_CACHE is None:
        _ENTRY_CACHE = {e.name: e for e in _entries()}
    return _ENTRY_CACHE


def catalog_names() -> list[str]:
    return list(catalog_entries())


def _entry(name: str) -> CatalogEntry:
    entries = catalog_entries()
    if name not in entries:
        raise UnknownBound(f"unknown bound {name!r}")
    return entries[name]


def run_bound(name: str, config: OptimizerConfig | None = None, witnesses: bool = False) -> BoundResult:
    config = config or OptimizerConfig()
    entry = _entry(name)
    problem = entry.build()
    optima = local_optima(problem, config, max(config.restarts, 32) if witnesses else None)
    result = _result(name, entry.set_label, entry.measure, problem, optima[0])
    if witnesses:
        result = replace(result, witnesses=len(_cluster(optima)))
    return result.with_reference(entry.reference_value, entry.reference_expr, entry.gate)


def catalog(config: OptimizerConfig | None = None, only=None) -> list[BoundResult]:
    """Run every named bound (or those listed in ``only``) and report deviations."""
    names = catalog_names() if only is None else ([only] if isinstance(only, str) else list(only))
    return [run_bound(n, config) for n in names]


def _cluster(optima: list[LocalOptimum], value_tol: float = 1e-7) -> list[LocalOptimum]:
    """Distinct global optima: within ``value_tol`` of the best, merged by state fidelity."""
    best = optima[0].value
    reps: list[LocalOptimum] = []
    for o in optima:
        if o.value > best + value_tol * max(1.0, abs(best)):
            continue
        if any(abs(np.vdot(r.ket, o.ket)) ** 2 >= WITNESS_FIDELITY for r in reps):
            continue
        reps.append(o)
    return reps


def minimizer_witnesses(name: str, config: OptimizerConfig | None = None) -> list[PureStateAngles]:
    """Distinct optimal states for a catalog bound, as ket angles.

    Every restart is refined; optima whose value matches the best to 1e-7 are
    merged when their states have fidelity >= 1 - 1e-6.
    """
    config = config or OptimizerConfig()
    problem = _entry(name).build()
    optima = local_optima(problem, replace(config, restarts=max(config.restarts, 32)))
    return [angles_from_ket(o.ket) for o in _cluster(optima)]


def witness_kets(name: str, config: OptimizerConfig | None = None) -> list[np.ndarray]:
    config = config or OptimizerConfig()
    problem = _entry(name).build()
    optima = local_optima(problem, replace(config, restarts=max(config.restarts, 32)))
    return [o.ket for o in _cluster(optima)]


def refine_from(name: str, params, config: OptimizerConfig | None = None) -> LocalOptimum:
    """Nelder-Mead from a given parameter vector (e.g. known optimal angles)."""
    config = config or OptimizerConfig()
    problem = _entry(name).build()
    x0 = np.asarray(params, dtype=float)
    res = _nelder_mead(problem, x0, np.full(problem.n_params, 1e-3), config)
    return LocalOptimum(np.asarray(res.x), float(problem.sign * res.fun), problem.kets(np.atleast_2d(res.x))[0])


def evaluate_bound(name: str, params) -> float:
    """Objective of a catalog bound at given parameters, in the measure's own sign."""
    problem = _entry(name).build()
    return float(problem.score(problem.kets(np.atleast_2d(np.asarray(params, dtype=float))))[0])
