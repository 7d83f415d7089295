"""
Command-line entry point ``qbound``.

Exit codes: 0 success or valid, 1 negative verdict or failed gate, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import geometry, optimizer
from .constraints import mub_quadratic, newton_s, spin1_moments, validate_state, weyl_tr2, weyl_tr3
from .errors import ArityMismatch, DimensionMismatch, ParseError, QboundError, TooManyOperators
from .linalg import random_state
from .measures import MeasureSpec
from .operators import (
    OperatorSet,
    axes_from_dots,
    fig1_projectors,
    fig1_set,
    mub_family,
    qubit_axis_set,
    sic_qubit,
    spin1_nine_set,
    spin1_six_set,
    spin_operators,
    weyl_hermitian_parts,
    weyl_set,
)
from .states import expectations

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2
SET_NAMES = ("fig1", "spin", "spin1-nine", "spin1-six", "sic", "qubit-axes", "weyl", "mub")


def default_seed() -> int:
    raw = os.environ.get("QBOUND_SEED")
    if raw is None:
        return optimizer.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"QBOUND_SEED={raw!r} is not an integer") from None


def num(x) -> float:
    """Round to 12 significant digits for printing."""
    return float(f"{float(x):.12g}")


def sci(x) -> str | None:
    return None if x is None else f"{float(x):.3e}"


# --- input parsing -------------------------------------------------------------------------


def parse_matrix_text(text: str, name: str = "<input>") -> np.ndarray:
    """Parse a JSON ``{"dim", "entries": [[re, im], ...]}`` matrix or a real CSV matrix."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{name}: {exc.msg}", exc.lineno, exc.colno) from None
        try:
            dim = int(data["dim"])
            entries = np.array(data["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{name}: need integer 'dim' and [re, im] 'entries' ({exc})") from None
        if dim < 1 or entries.shape != (dim * dim, 2):
            raise ParseError(f"{name}: expected {dim * dim} [re, im] pairs, got shape {entries.shape}")
        return (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    rows = []
    for i, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        vals = []
        for j, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"{name}: cannot read {cell.strip()!r} as a real number", i, j) from None
        rows.append(vals)
    if not rows:
        raise ParseError(f"{name}: empty matrix file", 1, 1)
    d = len(rows)
    for i, r in enumerate(rows, start=1):
        if len(r) != d:
            raise ParseError(f"{name}: row has {len(r)} entries, expected {d}", i, len(r))
    return np.array(rows, dtype=complex)


def read_matrix(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_matrix_text(text, path)


def parse_floats(text: str, what: str) -> list[float]:
    out = []
    for j, part in enumerate(text.split(","), start=1):
        try:
            out.append(float(part))
        except ValueError:
            raise ParseError(f"{what}: cannot read {part.strip()!r} as a number", 1, j) from None
    return out


def resolve_set(args) -> OperatorSet:
    """Turn ``--set`` and its companion flags into an operator set."""
    name = args.set
    if name.startswith("file:"):
        path = name[5:]
        try:
            return OperatorSet.from_json(Path(path).read_text())
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: malformed operator set ({exc})") from None
    if name == "fig1":
        return fig1_set()
    if name == "spin":
        return spin_operators(args.two_j)
    if name == "spin1-nine":
        return spin1_nine_set()
    if name == "spin1-six":
        return spin1_six_set()
    if name == "sic":
        return sic_qubit("gram").axis_observables()
    if name == "qubit-axes":
        return qubit_axis_set(_axes(args))
    if name == "weyl":
        return weyl_hermitian_parts(args.dim)
    if name == "mub":
        return mub_family(args.dim).projectors()
    raise ParseError(f"unknown set {name!r}; choose from {', '.join(SET_NAMES)} or file:PATH")


def _axes(args) -> np.ndarray:
    dots = parse_floats(args.dots, "--dots")
    if len(dots) not in (1, 3):
        raise ParseError("--dots takes dab or dab,dac,dbc")
    return axes_from_dots(*dots)


def closed_form_verdict(args, point: np.ndarray, ops: OperatorSet):
    """Independent inside/outside answer for the sets with a known region shape."""
    if args.set == "fig1":
        p, q = fig1_projectors()
        region = geometry.two_projector_region(float(np.trace(p @ q).real), 3)
        return {"shape": "hull of ellipse and origin", "inside": bool(region.contains(point, 1e-9)),
                "form": num(region.hull_form(point)[0])}
    if args.set == "qubit-axes":
        region = geometry.gram_region(_axes(args))
        form = region.quadratic_form(point)
        return {"shape": "ellipse" if len(point) == 2 else "ellipsoid", "inside": bool(form <= 1 + 1e-9),
                "form": num(form)}
    if args.set == "spin":
        radius = args.two_j / 2
        norm = float(np.linalg.norm(point))
        return {"shape": "ball", "inside": bool(norm <= radius + 1e-9), "radius": num(radius), "norm": num(norm)}
    return None


def optimizer_config(args) -> optimizer.OptimizerConfig:
    cfg = optimizer.OptimizerConfig(seed=args.seed)
    if getattr(args, "grid", None):
        cfg = replace(cfg, grid_points=args.grid)
    if getattr(args, "restarts", None):
        cfg = replace(cfg, restarts=args.restarts)
    if getattr(args, "max_iter", None):
        cfg = replace(cfg, max_iter=args.max_iter)
    return cfg


def emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(rows if len(rows) != 1 else rows[0], out, indent=2)
        out.write("\n")
        return
    keys = list(dict.fromkeys(k for r in rows for k in r))
    writer = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})


# --- commands ---------------------------------------------------------------------------------


def cmd_validate_state(args) -> int:
    rho = read_matrix(args.file)
    rep = validate_state(rho, tol=args.tol)
    emit([{
        "valid": rep.valid,
        "hermiticity_residual": sci(rep.hermiticity_residual),
        "trace": num(rep.trace),
        "S": [num(s) for s in rep.s_values],
        "failed_orders": rep.failed_orders(),
        "failure": rep.failure,
    }], args.format)
    return EXIT_OK if rep.valid else EXIT_NEGATIVE


def cmd_qc(args) -> int:
    """Quantum constraints evaluated from expectation values."""
    if args.state is None and args.values is None:
        raise ParseError("qc needs --state FILE or --values v1,v2,...")
    row: dict = {"set": args.set}
    if args.set == "mub":
        fam = mub_family(args.dim)
        if args.values is not None:
            p = np.array(parse_floats(args.values, "--values"))
            if p.size != fam.dim * (fam.dim + 1):
                raise ArityMismatch(f"need {fam.dim * (fam.dim + 1)} probabilities, got {p.size}")
            probs = p.reshape(fam.dim + 1, fam.dim)
        else:
            probs = fam.probabilities(read_matrix(args.state))
        val = mub_quadratic(probs)
        ok = val <= 2 + args.tol
        row.update({"quadratic": num(val), "limit": 2, "satisfied": bool(ok)})
        emit([row], args.format)
        return EXIT_OK if ok else EXIT_NEGATIVE
    if args.set == "spin1-nine":
        if args.values is not None:
            a = parse_floats(args.values, "--values")
            if len(a) != 9:
                raise ArityMismatch(f"need 9 expectation values, got {len(a)}")
        else:
            a = expectations(read_matrix(args.state), spin1_nine_set()).values
        moments = spin1_moments(a)
    elif args.set == "weyl":
        if args.state is None:
            raise ParseError("weyl constraints take --state FILE")
        rho = read_matrix(args.state)
        ops = weyl_set(args.dim)
        raw = np.einsum("jk,nkj->n", rho, ops.matrices)
        expect = {lab: v for lab, v in zip(ops.labels, raw)}
        moments = (float(np.trace(rho).real), weyl_tr2(expect, args.dim), float(np.real(weyl_tr3(expect, args.dim))))
        # only the first three constraints have Weyl-expectation forms
        moments = moments[: min(args.dim, 3)]
    else:
        raise ParseError("qc supports --set mub, spin1-nine or weyl")
    rep = newton_s(list(moments), tol=args.tol)
    row.update({"moments": [num(m) for m in moments], "S": [num(s) for s in rep.s_values],
                "satisfied": bool(np.all(rep.satisfied))})
    emit([row], args.format)
    return EXIT_OK if np.all(rep.satisfied) else EXIT_NEGATIVE


def cmd_membership(args) -> int:
    ops = resolve_set(args)
    point = np.array(parse_floats(args.point, "--point"))
    if point.size != len(ops):
        raise ArityMismatch(f"point has {point.size} entries but the set has {len(ops)} operators")
    verdict = geometry.membership(point, ops, tol=args.tol, probes=args.probes, seed=args.seed)
    if abs(verdict.margin) <= args.tol:
        label = "boundary"
    else:
        label = "inside" if verdict.inside else "outside"
    row = {
        "point": [num(x) for x in point],
        "verdict": label,
        "inside": verdict.inside,
        "margin": num(verdict.margin),
        "witness_direction": [num(x) for x in verdict.witness_direction],
    }
    closed = closed_form_verdict(args, point, ops)
    if closed is not None:
        row["closed_form"] = closed
    emit([row], args.format)
    return EXIT_OK if verdict.inside else EXIT_NEGATIVE


def _bound_row(r: optimizer.BoundResult) -> dict:
    return {
        "name": r.name,
        "set": r.set_label,
        "measure": r.measure,
        "direction": r.direction,
        "computed": num(r.value),
        "reference_value": None if r.reference_value is None else num(r.reference_value),
        "reference_expr": r.reference_expr,
        "deviation": sci(r.deviation),
        "gate": sci(r.gate),
        "passed": r.passed,
        "witnesses": r.witnesses,
        "thetas": [num(t) for t in r.angles.thetas] if r.angles else None,
        "phis": [num(p) for p in r.angles.phis] if r.angles else None,
    }


def cmd_catalog(args) -> int:
    cfg = optimizer_config(args)
    names = optimizer.catalog_names()
    if args.only:
        names = [n for item in args.only for n in item.split(",") if n]
    rows, ok = [], True
    for name in names:
        res = optimizer.run_bound(name, cfg)
        ok &= res.passed
        row = _bound_row(res)
        if args.witnesses:
            found = optimizer.minimizer_witnesses(name, cfg)
            row["witnesses"] = len(found)
            row["witness_angles"] = [
                {"thetas": [num(t) for t in w.thetas], "phis": [num(p) for p in w.phis]} for w in found
            ]
        rows.append(row)
    emit(rows, args.format)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_bound(args) -> int:
    ops = resolve_set(args)
    cfg = optimizer_config(args)
    if args.measure in ("std", "var"):
        res = optimizer.std_dev_bound(ops, squared=args.measure == "var", config=cfg)
    else:
        spec = MeasureSpec(args.measure, args.kappa)
        two_j = args.two_j if args.set == "spin" else None
        res = optimizer.optimize_bound(ops, spec, cfg, coherent_two_j=two_j)
    emit([_bound_row(res)], args.format)
    return EXIT_OK


def cmd_region(args) -> int:
    ops = resolve_set(args)
    if len(ops) > 3:
        raise TooManyOperators(f"region export supports at most 3 operators, got {len(ops)}")
    n = len(ops)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    sample = geometry.boundary_sample(ops, args.directions, seed=args.seed)
    bpath = out.with_name(out.name + "_boundary.csv")
    with open(bpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"dir_{i + 1}" for i in range(n)] + [f"touch_{i + 1}" for i in range(n)] + ["support"])
        for d, t, h in zip(*sample):
            w.writerow([f"{x:.12g}" for x in (*d, *t, h)])
    written = [str(bpath)]
    if args.measure:
        spec = MeasureSpec(args.measure, args.kappa)
        if args.bound is None:
            raise ParseError("--measure needs --bound VALUE")
        grid = geometry.measure_region_grid(ops, spec, args.bound, resolution=args.resolution)
        gpath = out.with_name(out.name + "_grid.csv")
        cols = ["x", "y", "z"][:n]
        with open(gpath, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols + ["in_E", "in_R"])
            for p, e, r in zip(grid.points(), grid.in_e.ravel(), grid.in_r.ravel()):
                w.writerow([f"{x:.12g}" for x in p] + [int(e), int(r)])
        written.append(str(gpath))
    emit([{"files": written, "directions": args.directions}], "json")
    return EXIT_OK


def cmd_mub(args) -> int:
    fam = mub_family(args.dim)
    if args.state:
        rho = read_matrix(args.state)
        if rho.shape != (fam.dim, fam.dim):
            raise DimensionMismatch(f"state is {rho.shape[0]}x{rho.shape[1]} but the bases have dim {fam.dim}")
    else:
        rho = random_state(args.dim, seed=args.seed)
    value = mub_quadratic(fam.probabilities(rho))
    bases = [
        [[[num(z.real), num(z.imag)] for z in fam.bases[b][:, k]] for k in range(fam.dim)]
        for b in range(fam.dim + 1)
    ]
    row = {
        "dim": fam.dim,
        "max_overlap_deviation": sci(fam.max_overlap_deviation()),
        "quadratic": num(value),
        "limit": 2,
        "satisfied": bool(value <= 2 + 1e-9),
    }
    row["bases"] = bases
    emit([row], args.format)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------------------


def _add_set_args(p, required=True):
    p.add_argument("--set", required=required, help="fig1, spin, spin1-nine, spin1-six, sic, qubit-axes, weyl, mub or file:PATH")
    p.add_argument("--two-j", type=int, default=2, help="2j for --set spin")
    p.add_argument("--dots", default="0.5", help="dab[,dac,dbc] for --set qubit-axes")
    p.add_argument("--dim", type=int, default=3, help="dimension for --set weyl and mub")


def _add_opt_args(p):
    p.add_argument("--grid", type=int, help="lattice points per angle")
    p.add_argument("--restarts", type=int, help="number of simplex refinements")
    p.add_argument("--max-iter", type=int, help="simplex iterations per refinement")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbound", description="Quantum constraints, allowed regions and tight uncertainty bounds.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: $QBOUND_SEED or 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-state", parents=[common], help="check Hermiticity, trace and positivity of a density matrix")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_validate_state)

    p = sub.add_parser("qc", parents=[common], help="evaluate quantum constraints from expectation values")
    _add_set_args(p)
    p.add_argument("--state", help="density matrix file")
    p.add_argument("--values", help="comma-separated expectation values or probabilities")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("membership", parents=[common], help="is a point of expectation values allowed?")
    _add_set_args(p)
    p.add_argument("--point", required=True)
    p.add_argument("--tol", type=float, default=geometry.MEMBERSHIP_TOL)
    p.add_argument("--probes", type=int, default=geometry.DEFAULT_PROBES)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("catalog", parents=[common], help="reproduce the named tight bounds")
    p.add_argument("--only", action="append", help="bound name(s), comma-separated; repeatable")
    p.add_argument("--witnesses", action="store_true", help="also cluster and list optimal states")
    p.add_argument("--list", action="store_true", help="print the bound names and exit")
    _add_opt_args(p)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("bound", parents=[common], help="optimize a measure over pure states of a chosen set")
    _add_set_args(p)
    p.add_argument("--measure", required=True, help="H, u_kappa, u_max, renyi2, shannon_probs, power_probs, std or var")
    p.add_argument("--kappa", type=float)
    _add_opt_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("region", parents=[common], help="export boundary samples and region grids")
    _add_set_args(p)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--directions", type=int, default=720)
    p.add_argument("--resolution", type=int, default=geometry.GRID_RESOLUTION)
    p.add_argument("--measure", help="measure kind for the R grid")
    p.add_argument("--kappa", type=float)
    p.add_argument("--bound", type=float, help="bound value defining R")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("mub", parents=[common], help="mutually unbiased bases for a prime dimension")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--state", help="density matrix file (default: random state)")
    p.set_defaults(func=cmd_mub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.seed is None:
            args.seed = default_seed()
        if args.command == "catalog" and args.list:
            print("\n".join(optimizer.catalog_names()))
            return EXIT_OK
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QboundError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
