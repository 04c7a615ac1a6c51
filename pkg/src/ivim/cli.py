"""Command-line front end.

Subcommands:

    solve     run one solve, write solution.csv + summary.json
    converge  sweep n (or m), write convergence.csv + summary.json
    compare   solve and integrate with RK4, write compare.csv + summary.json
    export    write a problem (built-in or file) as a JSON problem file

Exit codes: 0 success, 1 input error, 2 divergence, 3 I/O failure.
All numeric output uses 17 significant digits, so values round-trip exactly;
outputs are written atomically and repeated runs are byte-identical apart
from the informational wall_time fields in summary.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .engine import DivergenceError, SolveConfig, solve
from .problems import builtin_names, get_problem
from .reference import ReferenceSolution, empirical_order, error_metrics, rk4_reference

__all__ = ["main", "build_parser"]


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which this tool reserves for
    # divergence; bad command lines are input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_text_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    _write_text_atomic(path, "\n".join(lines) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    _write_text_atomic(path, json.dumps(doc, indent=2) + "\n")


def _parse_int_list(text: str, what: str) -> list:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"{what} must be a comma-separated list of integers") from exc
    if not values:
        raise ValueError(f"{what} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly ascending")
    return values


def _closed_form_reference(system, nodes) -> ReferenceSolution:
    values = np.atleast_2d(system.exact(nodes))
    return ReferenceSolution(nodes=nodes, values=values, source=("closed_form", system.name))


def _solve_error(system, report):
    """Max-abs error of a finished solve against the reference protocol."""
    if system.exact is not None:
        ref = _closed_form_reference(system, report.grid.nodes)
    else:
        step = (system.T - system.a) / (100 * (report.grid.n - 1))
        ref = rk4_reference(system, step)
    return error_metrics(report, ref)


def _cmd_solve(args) -> int:
    system, _ = get_problem(args.problem)
    cfg = SolveConfig(n=args.n, m_max=args.m, mode=args.mode)
    report = solve(system, cfg)
    out_dir = Path(args.out_dir)

    k = system.k
    nodes = report.grid.nodes
    values = report.nodal_values()
    header = ["t"] + [f"u{j + 1}" for j in range(k)]
    exact_vals = None
    if system.exact is not None:
        exact_vals = np.atleast_2d(system.exact(nodes))
        header += [f"exact{j + 1}" for j in range(k)]
        header += [f"abs_err{j + 1}" for j in range(k)]
        header += ["log10_err"]
    rows = []
    for i in range(nodes.size):
        row = [_fmt(nodes[i])] + [_fmt(values[j, i]) for j in range(k)]
        if exact_vals is not None:
            errs = [abs(values[j, i] - exact_vals[j, i]) for j in range(k)]
            row += [_fmt(exact_vals[j, i]) for j in range(k)]
            row += [_fmt(e) for e in errs]
            worst = max(errs)
            row += [_fmt(np.log10(worst)) if worst > 0.0 else "-inf"]
        rows.append(row)
    _write_csv(out_dir / "solution.csv", header, rows)

    max_abs = None
    if system.exact is not None:
        max_abs = float(np.max(np.abs(values - exact_vals)))
    _write_json(
        out_dir / "summary.json",
        {
            "command": "solve",
            "problem": system.name or str(args.problem),
            "n": args.n,
            "m": args.m,
            "mode": args.mode,
            "iterations_run": report.iterations_run,
            "max_abs_error": max_abs,
            "wall_time_s": round(report.wall_time, 3),
        },
    )
    return 0


def _cmd_converge(args) -> int:
    system, _ = get_problem(args.problem)
    if (args.n_list is None) == (args.m_list is None):
        raise ValueError("provide exactly one of --n-list or --m-list")
    if args.n_list is not None:
        if args.m is None:
            raise ValueError("--n-list requires a fixed --m")
        n_values = _parse_int_list(args.n_list, "--n-list")
        points = [(n, args.m) for n in n_values]
    else:
        if args.n is None:
            raise ValueError("--m-list requires a fixed --n")
        m_values = _parse_int_list(args.m_list, "--m-list")
        points = [(args.n, m) for m in m_values]

    started = time.perf_counter()
    rows = []
    prev = None  # (cells, max_abs)
    for n, m in points:
        report = solve(system, SolveConfig(n=n, m_max=m, mode=args.mode))
        max_abs = _solve_error(system, report).max_abs
        order = ""
        if prev is not None and prev[0] * 2 == n - 1 and max_abs > 0.0 and prev[1] > 0.0:
            order = _fmt(empirical_order(prev[1], max_abs))
        rows.append([str(n), str(m), _fmt(max_abs), order])
        prev = (n - 1, max_abs)

    out_dir = Path(args.out_dir)
    _write_csv(out_dir / "convergence.csv", ["n", "m", "max_abs", "observed_order"], rows)
    _write_json(
        out_dir / "summary.json",
        {
            "command": "converge",
            "problem": system.name or str(args.problem),
            "mode": args.mode,
            "points": [{"n": n, "m": m} for n, m in points],
            "max_abs": [float(row[2]) for row in rows],
            "wall_time_s": round(time.perf_counter() - started, 3),
        },
    )
    return 0


def _cmd_compare(args) -> int:
    system, _ = get_problem(args.problem)
    report = solve(system, SolveConfig(n=args.n, m_max=args.m, mode=args.mode))
    rk_started = time.perf_counter()
    ref = rk4_reference(system, args.rk4_step)
    rk_wall = time.perf_counter() - rk_started

    k = system.k
    nodes = report.grid.nodes
    ivim_vals = report.nodal_values()
    rk_vals = np.vstack([np.interp(nodes, ref.nodes, ref.values[j]) for j in range(k)])
    gaps = np.abs(ivim_vals - rk_vals)

    header = (
        ["t"]
        + [f"ivim{j + 1}" for j in range(k)]
        + [f"rk4_{j + 1}" for j in range(k)]
        + [f"gap{j + 1}" for j in range(k)]
    )
    rows = []
    for i in range(nodes.size):
        rows.append(
            [_fmt(nodes[i])]
            + [_fmt(ivim_vals[j, i]) for j in range(k)]
            + [_fmt(rk_vals[j, i]) for j in range(k)]
            + [_fmt(gaps[j, i]) for j in range(k)]
        )
    out_dir = Path(args.out_dir)
    _write_csv(out_dir / "compare.csv", header, rows)
    _write_json(
        out_dir / "summary.json",
        {
            "command": "compare",
            "problem": system.name or str(args.problem),
            "n": args.n,
            "m": args.m,
            "mode": args.mode,
            "rk4_step": args.rk4_step,
            "max_gap": float(np.max(gaps)),
            "wall_time_ivim_s": round(report.wall_time, 3),
            "wall_time_rk4_s": round(rk_wall, 3),
        },
    )
    return 0


def _cmd_export(args) -> int:
    _, doc = get_problem(args.problem)
    _write_json(Path(args.out), doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="ivim",
        description=(
            "Solve initial value problems by variational iteration on a "
            "piecewise-linear grid."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    builtin_help = f"built-in problem ({', '.join(builtin_names())}) or JSON file path"

    p = sub.add_parser("solve", help="run one solve and write solution.csv")
    p.add_argument("--problem", required=True, help=builtin_help)
    p.add_argument("--n", type=int, required=True, help="grid node count (>= 2)")
    p.add_argument("--m", type=int, required=True, help="iteration count (>= 1)")
    p.add_argument("--mode", choices=["paper", "full_trapezoid"], default="paper",
                   help="quadrature mode (default: paper)")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("converge", help="error sweep over n or m")
    p.add_argument("--problem", required=True, help=builtin_help)
    p.add_argument("--n-list", help="comma-separated ascending node counts")
    p.add_argument("--m-list", help="comma-separated ascending iteration counts")
    p.add_argument("--n", type=int, help="fixed n (with --m-list)")
    p.add_argument("--m", type=int, help="fixed m (with --n-list)")
    p.add_argument("--mode", choices=["paper", "full_trapezoid"], default="paper")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("compare", help="side-by-side with a fixed-step RK4 run")
    p.add_argument("--problem", required=True, help=builtin_help)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rk4-step", type=float, required=True,
                   help="RK4 step; must divide T - a")
    p.add_argument("--mode", choices=["paper", "full_trapezoid"], default="paper")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("export", help="write a problem definition as JSON")
    p.add_argument("--problem", required=True, help=builtin_help)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"ivim: divergence: {exc}", file=sys.stderr)
        return 2
    except OverflowError as exc:
        print(f"ivim: divergence: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"ivim: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ivim: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
