"""Command-line front end.

Exit codes: 0 ok, 1 failed check or sign violation, 2 infeasible input,
3 unsupported alpha, 4 tolerance failure (the report is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analytic as an
from . import geometry as geo
from . import oracle as orc
from . import rearrange as rr
from .errors import DomainError, GrushinError, InfeasibleSpec, NonConvergent, UnsupportedAlpha
from .generators import random_feasible
from .suites import SUITES, run_all

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_UNSUPPORTED, EXIT_TOLERANCE = 0, 1, 2, 3, 4
SWEEP_FIELDS = ("alpha", "v1", "h1", "d", "x0", "lambda", "y")


# -- output helpers --------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _csv_text(fields, rows) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _emit(record: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(record)
    return _csv_text(list(record), [list(record.values())])


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# -- argument parsing ------------------------------------------------------------

def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_float(s: str) -> float:
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite nonnegative number, got {s}")
    return v


def _common(p: argparse.ArgumentParser, spec: bool = True) -> None:
    p.add_argument("--out", type=Path, default=Path("grushin_out"), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="format of printed records")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--experimental-alpha", action="store_true",
                   help="allow alpha outside {0, 1}; the vpsi identity residual is reported, not asserted")
    if spec:
        p.add_argument("--alpha", type=_nonneg_float, required=True)
        p.add_argument("--v1", type=_nonneg_float, required=True)
        p.add_argument("--v2", type=_nonneg_float, default=0.0)
        p.add_argument("--h1", type=_nonneg_float, default=0.0)
        p.add_argument("--h2", type=_nonneg_float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grushin-partition",
                                     description="Minimal partitions with trace constraint in the Grushin plane.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="closed-form minimizer")
    _common(p)
    p.add_argument("--n-grid", type=_positive_int, default=400, help="cells of the sampled profile")

    p = sub.add_parser("compare", help="closed form against the discrete minimizer")
    _common(p)
    p.add_argument("--n-grid", type=_positive_int, default=400)
    p.add_argument("--x0-min", type=float, default=None)
    p.add_argument("--x0-max", type=float, default=None)
    p.add_argument("--sup-tol", type=float, default=None, help="default max(0.01, 5/N)")
    p.add_argument("--gap-tol", type=float, default=0.005, help="relative cut-perimeter gap")

    p = sub.add_parser("sweep", help="closed form over a (v1, h1) grid")
    _common(p, spec=False)
    p.add_argument("--alpha", type=_nonneg_float, nargs="+", default=[0.0, 1.0])
    p.add_argument("--v1-range", type=float, nargs=3, metavar=("LO", "HI", "N"), default=[0.5, 8.0, 10])
    p.add_argument("--h1-range", type=float, nargs=3, metavar=("LO", "HI", "N"), default=[0.25, 4.0, 10])
    p.add_argument("--jobs", type=_positive_int, default=1)

    p = sub.add_parser("check", help="run the invariant suites")
    _common(p, spec=False)
    p.add_argument("--suite", choices=sorted(SUITES), nargs="*", default=None)

    p = sub.add_parser("figures", help="write plotting data (profiles, hulls, competitor margins)")
    _common(p, spec=False)
    p.add_argument("--alpha", type=_nonneg_float, default=1.0)
    return parser


def _spec_from(args) -> geo.PartitionSpec:
    return geo.PartitionSpec(args.alpha, args.v1, args.v2, args.h1, args.h2)


def _center_only(spec: geo.PartitionSpec) -> None:
    if spec.v2 != 0 or spec.h2 != 0:
        raise InfeasibleSpec("the closed form covers the center-only problem; pass --v2 0 --h2 0")


# -- commands --------------------------------------------------------------------

def cmd_solve(args) -> int:
    spec = _spec_from(args)
    _center_only(spec)
    sol = an.solve_closed_form(spec.alpha, spec.v1, spec.h1, experimental=args.experimental_alpha)
    record = an.solution_record(sol)
    text = _emit(record, args.format)
    tag = _tag(spec)
    _atomic_write(args.out / f"solution_{tag}.{args.format}", text)
    geo.write_profile(an.sample_profile(sol, args.n_grid), args.out / f"profile_{tag}.csv")
    sys.stdout.write(text)
    return EXIT_OK


def _tag(spec: geo.PartitionSpec) -> str:
    return f"a{spec.alpha:g}_v{spec.v1:g}_h{spec.h1:g}"


def cmd_compare(args) -> int:
    spec = _spec_from(args)
    _center_only(spec)
    if args.n_grid < 16:
        raise DomainError("--n-grid must be at least 16 for compare")
    sol = an.solve_closed_form(spec.alpha, spec.v1, spec.h1, experimental=args.experimental_alpha)
    bracket = None
    if args.x0_min is not None or args.x0_max is not None:
        lo, hi = orc.default_x0_bracket(spec)
        bracket = (args.x0_min if args.x0_min is not None else lo, args.x0_max if args.x0_max is not None else hi)
    cfg = orc.OracleConfig(n_grid=args.n_grid, x0_bracket=bracket)
    sup_tol = args.sup_tol if args.sup_tol is not None else max(0.01, 5.0 / args.n_grid)
    exact = an.cut_perimeter_exact(sol)
    report = {"alpha": spec.alpha, "v1": spec.v1, "h1": spec.h1, "n_grid": args.n_grid,
              "x0_closed": sol.x0, "perimeter_closed": exact, "sup_tol": sup_tol, "gap_tol": args.gap_tol}
    tag = _tag(spec)
    try:
        res = orc.direct_minimize(spec, cfg)
    except NonConvergent as exc:
        report.update(error=str(exc), passed=False)
        _atomic_write(args.out / f"compare_{tag}.{args.format}", _emit(report, args.format))
        _err(str(exc))
        return EXIT_TOLERANCE
    sup = orc.closed_form_distance(res.profile, sol)
    gap = (res.perimeter - exact) / exact
    passed = sup <= sup_tol and abs(gap) <= args.gap_tol
    report.update(x0_oracle=res.x0, perimeter_oracle=res.perimeter, sup_distance=sup,
                  perimeter_gap=gap, iterations=res.iterations, passed=passed)
    E = res.profile
    rows = [(float(x), float(f), an.profile_extended(sol, float(x))) for x, f in zip(E.xs, E.fs)]
    _atomic_write(args.out / f"compare_profiles_{tag}.csv", _csv_text(("x", "f_oracle", "f_closed"), rows))
    geo.write_profile(E, args.out / f"oracle_profile_{tag}.csv")
    text = _emit(report, args.format)
    _atomic_write(args.out / f"compare_{tag}.{args.format}", text)
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_TOLERANCE


def _sweep_cell(job: tuple[int, float, float, float, bool]) -> tuple[int, dict | None, str | None]:
    i, alpha, v1, h1, experimental = job
    try:
        sol = an.solve_closed_form(alpha, v1, h1, experimental=experimental)
    except (InfeasibleSpec, UnsupportedAlpha) as exc:
        return i, None, f"{type(exc).__name__}: {exc}"
    return i, {"alpha": alpha, "v1": v1, "h1": h1, "d": sol.d, "x0": sol.x0,
               "lambda": sol.lam, "y": sol.y_shift}, None


def _grid(r) -> np.ndarray:
    lo, hi, n = r
    if int(n) != n or n < 1 or not (0 < lo <= hi):
        raise DomainError(f"invalid grid {r}: need 0 < LO <= HI and integer N >= 1")
    return np.linspace(lo, hi, int(n))


def cmd_sweep(args) -> int:
    v1s, h1s = _grid(args.v1_range), _grid(args.h1_range)
    for a in args.alpha:
        if a not in (0.0, 1.0) and not args.experimental_alpha:
            raise UnsupportedAlpha(f"alpha={a} needs --experimental-alpha")
    jobs = [(i, a, float(v), float(h), args.experimental_alpha)
            for i, (a, v, h) in enumerate((a, v, h) for a in args.alpha for v in v1s for h in h1s)]
    cells = args.out / "sweep_cells"
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_cell, jobs, chunksize=8))
    else:
        results = [_sweep_cell(j) for j in jobs]
    rows, failures, violations = [], 0, 0
    for i, row, err in sorted(results, key=lambda r: r[0]):
        if row is None:
            failures += 1
            _err(f"cell {i}: {err}")
            continue
        # one file per cell, then merged
        _atomic_write(cells / f"cell_{i:05d}.csv", _csv_text(SWEEP_FIELDS, [[row[k] for k in SWEEP_FIELDS]]))
        rows.append(row)
        if row["alpha"] == 0.0 and abs(row["y"]) > 1e-10 * max(1.0, row["h1"]):
            violations += 1
        if row["alpha"] == 1.0 and not row["y"] < 0:
            violations += 1
    _atomic_write(args.out / "sweep.csv", _csv_text(SWEEP_FIELDS, [[r[k] for k in SWEEP_FIELDS] for r in rows]))
    if args.format == "json":
        _atomic_write(args.out / "sweep.json", _json_text(rows))
    summary = {"cells": len(jobs), "solved": len(rows), "failed": failures, "sign_violations": violations}
    for a in args.alpha:
        ys = [r["y"] for r in rows if r["alpha"] == a]
        if ys:
            summary[f"y_range_alpha_{a:g}"] = [min(ys), max(ys)]
    sys.stdout.write(_json_text(summary))
    if failures:
        return EXIT_INFEASIBLE
    return EXIT_FAIL if violations else EXIT_OK


def cmd_check(args) -> int:
    results = run_all(args.seed, args.suite)
    if args.format == "json":
        text = _json_text([{"suite": r.suite, "name": r.name, "passed": r.passed, "detail": r.detail}
                           for r in results])
        sys.stdout.write(text)
    else:
        for r in results:
            print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_figures(args) -> int:
    out = args.out
    rng = np.random.default_rng(args.seed)
    E, x0, spec = random_feasible(rng, args.alpha)
    F, xt = rr.regularize(E, x0, spec)
    geo.write_profile(E, out / "regularize_input.csv")
    geo.write_profile(F, out / "regularize_output.csv")
    hx, hy = rr.hull_in_psi_plane(E, x0)
    _atomic_write(out / "psi_hull.csv", _csv_text(("xi", "eta"), zip(hx.tolist(), hy.tolist())))
    rows = []
    for a in (0.0, 1.0):
        rows += [(a, *r) for r in orc.competitor_table(a)]
    _atomic_write(out / "vertical_tangency_margins.csv",
                  _csv_text(("alpha", "eps", "a_eps", "b_eps", "margin"), [tuple(map(float, r)) for r in rows]))
    fits = {}
    for a in (0.0, 1.0):
        fit = orc.vertical_slope_expansion(a)
        fits[f"alpha_{a:g}"] = {"exponent": fit.exponent, "coefficient": fit.coefficient,
                                "exponent_stderr": fit.exponent_stderr,
                                "coefficient_stderr": fit.coefficient_stderr,
                                "predicted_coefficient": -1.0 / (6.0 * math.sqrt(2.0))}
    _atomic_write(out / "slope_expansion_fits.json", _json_text(fits))
    line = geo.ProfileSet(0.0, [0.0, 1.0], [2.0, 1.0])
    fin = [orc.cut_competitor(line, 1.0, 0.5, e) for e in np.geomspace(1e-2, 1e-5, 13)]
    _atomic_write(out / "finite_slope_margins.csv",
                  _csv_text(("eps", "a_eps", "b_eps", "margin"), [(c.eps, c.a_eps, c.b_eps, c.margin) for c in fin]))
    summary = {"seed": args.seed, "alpha": args.alpha, "x0_in": x0, "x0_out": xt,
               "cluster_perimeter_in": geo.cluster_perimeter(E, x0),
               "cluster_perimeter_out": geo.cluster_perimeter(F, xt), "out": str(out)}
    sys.stdout.write(_emit(summary, args.format))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "compare": cmd_compare, "sweep": cmd_sweep,
            "check": cmd_check, "figures": cmd_figures}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnsupportedAlpha as exc:
        _err(str(exc))
        return EXIT_UNSUPPORTED
    except (InfeasibleSpec, DomainError) as exc:
        _err(str(exc))
        return EXIT_INFEASIBLE
    except GrushinError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
