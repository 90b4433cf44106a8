"""Command-line front end: solve, sweep, svf, geug and validate.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
capital, 3 numerical failure, 4 validation failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import io
import os
import sys

from .config import ConfigError, load_config, parse_config
from .errors import InfeasibleCapitalError, InvalidArgumentError, InvalidSpecError, NumericalError
from .market import SWEEP_PARAMETERS, Scenario
from .policy import geug, osiw, solve_policy, svf
from .split import v0_min
from .uoc import consumption_budget
from .uow import auxiliary_budget
from .validation import run_validation

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3, 4
WORKERS_ENV = "FIXEDTERM_WORKERS"
SWEEP_OUTPUTS = ("osiw", "svf", "geug", "value", "psi_star", "v1_star", "v2_star")
SOLVE_COLUMNS = ("v0_min", "v1_star", "v2_star", "psi_star", "osiw", "x_b", "lambda1", "lambda2",
                 "value", "case_tag", "residuals")
SWEEP_COLUMNS = ("parameter", "value", "metric", "result", "status", "diagnostics")


def fmt(v) -> str:
    """12 significant digits, locale independent; ``None`` becomes an empty field."""
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def solve_row(sc: Scenario) -> dict:
    sol = solve_policy(sc)
    res = 0.0
    if sol.uoc.lambda1 is not None:
        res = max(res, _rel(consumption_budget(sol.uoc.lambda1, sc), sol.split.v1_star))
    if sol.uow.lambda2 is not None:
        res = max(res, _rel(auxiliary_budget(sol.uow.lambda2, sol.psi_star, sc), sol.uow.x_tilde2))
    return {
        "v0_min": v0_min(sc), "v1_star": sol.split.v1_star, "v2_star": sol.split.v2_star,
        "psi_star": sol.psi_star, "osiw": osiw(sol, sc), "x_b": sol.uow.x_b,
        "lambda1": sol.uoc.lambda1, "lambda2": sol.uow.lambda2, "value": sol.total_value,
        "case_tag": sol.uow.case_tag.value, "residuals": res,
    }


def _metric(sc: Scenario, metric: str) -> float:
    if metric == "svf":
        return svf(sc)
    if metric == "geug":
        return geug(sc)
    row = solve_row(sc)
    return row["value" if metric == "value" else metric]


def sweep_point(args) -> list[tuple]:
    """All requested metrics at one grid value; failures become status rows."""
    sc, param, value, outputs = args
    rows = []
    try:
        point = sc.with_param(param, value)
    except (InvalidSpecError, InvalidArgumentError) as exc:
        return [(param, value, m, None, "invalid", str(exc)) for m in outputs]
    for m in outputs:
        try:
            rows.append((param, value, m, _metric(point, m), "ok", ""))
        except InfeasibleCapitalError as exc:
            rows.append((param, value, m, None, "infeasible", str(exc)))
        except (NumericalError, ArithmeticError) as exc:
            rows.append((param, value, m, None, "numerical", str(exc)))
    return rows


def run_sweep(sc: Scenario, param: str, grid: list[float], outputs: list[str], workers: int = 1) -> str:
    jobs = [(sc, param, v, outputs) for v in grid]
    if not outputs:
        return _csv(SWEEP_COLUMNS, [])
    if workers > 1 and len(jobs) > 1:
        with cf.ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(sweep_point, jobs))
    else:
        results = [sweep_point(j) for j in jobs]
    return _csv(SWEEP_COLUMNS, [row for rows in results for row in rows])


def _floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("grid must be non-empty")
    return vals


def _outputs(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    bad = [n for n in names if n not in SWEEP_OUTPUTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown outputs {bad}; choose from {', '.join(SWEEP_OUTPUTS)}")
    return names


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI scenario file (defaults to the base case)")
    common.add_argument("--out", metavar="PATH", help="also write the CSV here")
    common.add_argument("--seed", type=int, help="override [numerics].seed")
    common.add_argument("--workers", type=int, default=None,
                        help=f"parallel worker processes (default ${WORKERS_ENV} or 1)")

    p = _Parser(prog="fixedterm", description="Consumption, investment and fixed-term asset allocation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="optimal policy summary row")
    sw = sub.add_parser("sweep", parents=[common], help="metrics over a one-parameter grid")
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    sw.add_argument("--grid", required=True, type=_floats, metavar="V1,V2,...")
    sw.add_argument("--outputs", type=_outputs, default=["osiw"], metavar="M1,M2,...",
                    help=f"subset of {','.join(SWEEP_OUTPUTS)} (default osiw)")
    sub.add_parser("svf", parents=[common], help="subjective value of the fixed-term asset")
    sub.add_parser("geug", parents=[common], help="guarantee-equivalent utility gain")
    va = sub.add_parser("validate", parents=[common], help="run the oracle and consistency checks")
    va.add_argument("--perturb-lambda", type=float, default=None, help=argparse.SUPPRESS)
    return p


def _emit(text: str, out: str | None):
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _run(ns) -> int:
    sc = load_config(ns.config) if ns.config else parse_config("")
    if ns.seed is not None:
        sc = sc.with_numerics(seed=ns.seed)
    workers = ns.workers if ns.workers is not None else _default_workers()
    if ns.command == "solve":
        row = solve_row(sc)
        _emit(_csv(SOLVE_COLUMNS, [[row[c] for c in SOLVE_COLUMNS]]), ns.out)
    elif ns.command == "sweep":
        _emit(run_sweep(sc, ns.param, ns.grid, ns.outputs, workers), ns.out)
    elif ns.command in ("svf", "geug"):
        value = svf(sc) if ns.command == "svf" else geug(sc)
        _emit(_csv(("metric", "value"), [(ns.command, value)]), ns.out)
    else:
        results = run_validation(sc, perturb=ns.perturb_lambda)
        _emit(_csv(("check", "status", "seed", "detail"),
                   [(r.name, "pass" if r.passed else "FAIL", r.seed, r.detail) for r in results]), ns.out)
        failed = [r.name for r in results if not r.passed]
        if failed:
            print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return _run(ns)
    except InfeasibleCapitalError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, InvalidSpecError, InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
