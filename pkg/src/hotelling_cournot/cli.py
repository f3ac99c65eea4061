"""Command-line front end.

Exit codes: 0 success, 1 usage or invalid parameters, 2 computation
failure, 3 the oracle disagrees with the solver.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .analysis import (
    Axis,
    SweepSpec,
    compare_allowance,
    find_tg,
    run_sweep,
    solve,
)
from .classical import Equilibrium, SolverSettings, central_limit_classical
from .errors import ModelError
from .market import MarketConfig
from .oracle import multi_start_iteration, verify_equilibrium
from .quantum import central_limit_quantum

EXIT_OK, EXIT_USAGE, EXIT_FAILURE, EXIT_DISAGREE = 0, 1, 2, 3
GAMMA_MAX = 30.0
SIG_DIGITS = 9

EQ_COLUMNS = [
    "p1", "p2", "q1", "q2", "x1", "x2", "r", "profit1", "profit2",
    "residual_norm", "iterations", "converged", "branch", "negative_strategy",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- formatting ------------------------------------------------------------------

def fmt(value):
    """9 significant digits; JSON gets a float parsed back from the same text."""
    if value is None:
        return None
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIG_DIGITS}g}")
    return value


def _csv_text(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIG_DIGITS}g}"
    return str(value)


def eq_record(eq: Equilibrium | None) -> dict:
    """Flat record of an equilibrium; every field None when ``eq`` is None."""
    if eq is None:
        rec = {k: None for k in EQ_COLUMNS}
        rec["converged"] = False
        return rec
    x = eq.strategies or (None, None)
    return {
        "p1": eq.prices[0], "p2": eq.prices[1],
        "q1": eq.quantities[0], "q2": eq.quantities[1],
        "x1": x[0], "x2": x[1],
        "r": eq.boundary,
        "profit1": eq.profits[0], "profit2": eq.profits[1],
        "residual_norm": eq.residual_norm,
        "iterations": eq.iterations,
        "converged": eq.converged,
        "branch": eq.branch.value,
        "negative_strategy": eq.negative_strategy,
    }


def eq_json(eq: Equilibrium | None) -> dict:
    """Equilibrium with the dataclass field names; nulls when not converged."""
    if eq is None:
        return {
            "prices": None, "quantities": None, "strategies": None,
            "boundary": None, "profits": None, "residual_norm": None,
            "iterations": None, "converged": False, "branch": None,
        }
    pair = lambda v: None if v is None else [fmt(float(v[0])), fmt(float(v[1]))]
    return {
        "prices": pair(eq.prices),
        "quantities": pair(eq.quantities),
        "strategies": pair(eq.strategies),
        "boundary": fmt(float(eq.boundary)),
        "profits": pair(eq.profits),
        "residual_norm": fmt(float(eq.residual_norm)),
        "iterations": eq.iterations,
        "converged": eq.converged,
        "branch": eq.branch.value,
        "negative_strategy": eq.negative_strategy,
        "diagnostics": list(eq.diagnostics),
    }


def render(fmt_name: str, spec: dict, rows: list[dict], diagnostics: list[str],
           json_rows: list[dict] | None = None) -> str:
    if fmt_name == "json":
        payload = {
            "spec": spec,
            "results": json_rows if json_rows is not None else [
                {k: fmt(v) for k, v in row.items()} for row in rows
            ],
            "diagnostics": diagnostics,
        }
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_csv_text(v) for v in row.values()])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument helpers ------------------------------------------------------------

def _gamma(value: str) -> float:
    g = float(value)
    if not (math.isfinite(g) and 0.0 <= g <= GAMMA_MAX):
        raise argparse.ArgumentTypeError(f"gamma must lie in [0, {GAMMA_MAX:g}]")
    return g


def _axis(value: str) -> Axis:
    try:
        name, lo, hi, step = value.split(":")
        return Axis(name, float(lo), float(hi), float(step))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"axis {value!r}: expected name:min:max:step with name in r1, r2, t, gamma ({exc})"
        ) from None


def _config(args) -> MarketConfig:
    try:
        return MarketConfig(args.r1, args.r2, args.t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _settings(args) -> SolverSettings:
    return SolverSettings(tol=args.tol)


def _common(p, locations=True, t=True, gamma=True):
    if locations:
        p.add_argument("--r1", type=float, default=0.3, help="firm 1 location in [0, 0.5]")
        p.add_argument("--r2", type=float, default=0.6, help="firm 2 location in [0.5, 1]")
    if t:
        p.add_argument("--t", type=float, default=0.2, help="transport rate (negative = allowance)")
    if gamma:
        p.add_argument("--gamma", type=_gamma, default=0.0, help="entanglement, 0 to 30")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    p.add_argument("--tol", type=float, default=1e-12, help="solver tolerance")


# -- commands --------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _config(args)
    spec = {"command": "solve", "r1": cfg.r1, "r2": cfg.r2, "t": cfg.t, "gamma": args.gamma}
    code, eq, diagnostics = EXIT_OK, None, []
    try:
        eq = solve(cfg, args.gamma, _settings(args))
    except ModelError as exc:
        code = EXIT_FAILURE
        diagnostics.append(f"{exc.code}: {exc}")
    else:
        diagnostics.extend(eq.diagnostics)
    row = {"r1": cfg.r1, "r2": cfg.r2, "t": cfg.t, "gamma": args.gamma, **eq_record(eq)}
    emit(render(args.format, spec, [row], diagnostics,
                [{"r1": cfg.r1, "r2": cfg.r2, "t": cfg.t, "gamma": args.gamma, **eq_json(eq)}]),
         args.out)
    if code:
        print(f"solve failed: {diagnostics[0]}", file=sys.stderr)
    return code


def _sweep_rows(result, benefit: bool):
    a1, a2 = result.spec.axis1.name.value, result.spec.axis2.name.value
    rows, json_rows, diagnostics = [], [], []
    for cell in result:
        axes = {a1: cell.params[a1], a2: cell.params[a2]}
        eq = cell.equilibrium if cell.ok else None
        row = {**axes, **eq_record(eq)}
        jrow = {**axes, **eq_json(eq)}
        if benefit:
            b = cell.benefit or (None, None)
            row["benefit1"], row["benefit2"] = b
            jrow["benefit"] = None if cell.benefit is None else [fmt(v) for v in b]
        row["error"] = cell.error
        jrow["error"] = cell.error
        rows.append(row)
        json_rows.append(jrow)
        if cell.error:
            diagnostics.append(f"{a1}={axes[a1]:g} {a2}={axes[a2]:g}: {cell.error}: {cell.message}")
    return rows, json_rows, diagnostics


def _fixed(args, axes) -> dict:
    names = {a.name.value for a in axes}
    fixed = {}
    for key in ("r1", "r2", "t", "gamma"):
        if key not in names and hasattr(args, key):
            fixed[key] = getattr(args, key)
    return fixed


def _run_grid(args, axis1, axis2, quantity, command) -> int:
    try:
        spec = SweepSpec(axis1, axis2, _fixed(args, (axis1, axis2)), quantity, _settings(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for axis in (axis1, axis2):
        if axis.name.value == "gamma" and not 0.0 <= axis.lo <= axis.hi <= GAMMA_MAX:
            raise UsageError(f"gamma axis must lie in [0, {GAMMA_MAX:g}]")
    result = run_sweep(spec)
    rows, json_rows, diagnostics = _sweep_rows(result, quantity == "benefit")
    emit(render(args.format, {"command": command, **spec.to_dict()}, rows, diagnostics, json_rows),
         args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    return _run_grid(args, args.axis1, args.axis2, args.quantity, "sweep")


def cmd_benefit(args) -> int:
    return _run_grid(args, args.axis1, args.axis2, "benefit", "benefit")


def cmd_threshold(args) -> int:
    spec = {"command": "threshold", "gamma": args.gamma, "grid_step": args.grid_step,
            "threshold_tol": args.threshold_tol}
    try:
        res = find_tg(args.gamma, args.grid_step, args.threshold_tol,
                      settings=_settings(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except ModelError as exc:
        print(f"threshold failed: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    row = {"gamma": args.gamma, "t_g": res.value, "lo": res.bracket[0], "hi": res.bracket[1],
           "grid_step": res.grid_used, "evaluations": res.evaluations}
    emit(render(args.format, spec, [row], [res.reason] if res.reason else []), args.out)
    return EXIT_OK


def cmd_allowance(args) -> int:
    spec = {"command": "allowance", "r1": args.r1, "r2": args.r2, "gamma": args.gamma,
            "threshold_tol": args.threshold_tol}
    try:
        MarketConfig(args.r1, args.r2, 0.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        comp = compare_allowance(args.r1, args.r2, args.gamma, args.threshold_tol,
                                 _settings(args))
    except ModelError as exc:
        print(f"allowance failed: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    qp = comp.quantum_profits or (None, None)
    cp = comp.classical_profits or (None, None)
    row = {
        "r1": args.r1, "r2": args.r2, "gamma": args.gamma,
        "t_c_classical": comp.classical.value, "u_c_classical": -comp.classical.value,
        "t_c_quantum": comp.quantum.value, "u_c_quantum": -comp.quantum.value,
        "reason_classical": comp.classical.reason, "reason_quantum": comp.quantum.reason,
        "ordered": comp.ordered, "witness_t": comp.witness_t,
        "witness_quantum_profit1": qp[0], "witness_quantum_profit2": qp[1],
        "witness_classical_profit1": cp[0], "witness_classical_profit2": cp[1],
    }
    emit(render(args.format, spec, [row], []), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    spec = {"command": "verify", "r1": cfg.r1, "r2": cfg.r2, "t": cfg.t, "gamma": args.gamma}
    try:
        eq = solve(cfg, args.gamma, _settings(args))
        report = verify_equilibrium(eq, cfg, args.gamma)
        points, starts_agree = (
            multi_start_iteration(cfg, args.gamma) if args.iterate else ([], True)
        )
    except ModelError as exc:
        print(f"verify failed: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    row = {
        "r1": cfg.r1, "r2": cfg.r2, "t": cfg.t, "gamma": args.gamma,
        "agrees": report.agrees,
        "max_deviation_gain": report.max_deviation_gain,
        "best_deviation": report.best_deviation,
        "response1": report.responses[0], "response2": report.responses[1],
        "grid_coarse": report.grid_coarse, "grid_fine": report.grid_fine,
        "skipped_cells": report.skipped_cells,
    }
    diagnostics = []
    if args.iterate:
        row["iteration_starts_converged"] = len(points)
        row["iteration_agrees"] = starts_agree
        if not starts_agree:
            diagnostics.append("best-response iteration from corner starts disagrees")
    emit(render(args.format, spec, [row], diagnostics), args.out)
    return EXIT_OK if report.agrees and starts_agree else EXIT_DISAGREE


def cmd_limits(args) -> int:
    spec = {"command": "limits", "t": args.t, "gamma": args.gamma}
    try:
        qc, pc = central_limit_classical(args.t)
        qq, pq = central_limit_quantum(args.t, args.gamma)
    except (ValueError, OverflowError) as exc:
        print(f"limits failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    row = {"t": args.t, "gamma": args.gamma, "q_classical": qc, "p_classical": pc,
           "q_quantum": qq, "p_quantum": pq}
    emit(render(args.format, spec, [row], []), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hotelling-cournot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one quantity subgame")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="grid over two of r1, r2, t, gamma")
    _common(p)
    p.add_argument("--axis1", type=_axis, default=Axis("r1", 0.05, 0.5, 0.05))
    p.add_argument("--axis2", type=_axis, default=Axis("r2", 0.5, 0.95, 0.05))
    p.add_argument("--quantity", default="profit",
                   choices=("price", "quantity", "profit", "benefit", "strategy"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("benefit", help="quantum minus classical profit over a grid")
    _common(p)
    p.add_argument("--axis1", type=_axis, default=Axis("t", 0.0, 1.0, 0.1))
    p.add_argument("--axis2", type=_axis, default=Axis("gamma", 0.0, 5.0, 1.0))
    p.set_defaults(func=cmd_benefit)

    p = sub.add_parser("threshold", help="transport threshold t_g")
    _common(p, locations=False, t=False)
    p.add_argument("--grid-step", type=float, default=0.025)
    p.add_argument("--threshold-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("allowance", help="critical transport allowance, classical vs quantum")
    _common(p, t=False)
    p.set_defaults(gamma=5.0)
    p.add_argument("--threshold-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_allowance)

    p = sub.add_parser("verify", help="check a solve with the best-response oracle")
    _common(p)
    p.add_argument("--iterate", action="store_true",
                   help="also run best-response iteration from four starts")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("limits", help="closed forms at the market centre")
    _common(p, locations=False)
    p.set_defaults(func=cmd_limits)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0, parse errors exit 1
        return exc.code
    if not (args.tol > 0 and math.isfinite(args.tol)):
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
