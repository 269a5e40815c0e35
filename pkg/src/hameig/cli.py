"""Command-line front end.

    hameig check  --problem NAME|config.ini --rho R [--M EXPR] [--delta EXPR]
    hameig solve  --problem ... --rho R --lambda L [--init u.csv]
    hameig scan   --problem ... --rho R [--lambda-max L] [--lambda-points N]
    hameig list-catalog

Exit codes: 0 success, 2 hypothesis failure, 3 non-convergence, 4 usage.
The environment variable HAMEIG_SEED is reserved for stochastic sampling;
every current code path is deterministic and ignores it.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CATALOG, list_catalog
from .config import ConfigError, RunConfig, load_config, problem_from_section
from .errors import DomainError, HypothesisFailure
from .expr import ExprError, compile_expr
from .problem import BoundData, compute_delta_bar, lambda_bar_threshold, run_hypothesis_checks
from .quadrature import GridFunction
from .solver import boundary_scan, cone_verify, fixed_point_solve, initial_guess
from .svg import Series, line_plot

EXIT_OK, EXIT_HYPOTHESIS, EXIT_NONCONVERGENCE, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--problem", help="catalog name or path to an INI config file")
    p.add_argument("--config", help="INI config file (same as passing a path to --problem)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="catalog problem parameter, repeatable")
    p.add_argument("--rho", type=float)
    p.add_argument("--grid-n", type=int, dest="grid_n")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--emit", help="comma-separated subset of csv,json,svg")
    p.add_argument("--M", dest="M_expr", metavar="EXPR", help="override the majorant M_rho(t)")
    p.add_argument("--delta", dest="delta_expr", metavar="EXPR", help="override the minorant delta_rho(t)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hameig", description="Eigenpairs of perturbed Hammerstein equations with discontinuous nonlinearities.")
    parser.add_argument("--version", action="version", version=f"hameig {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("check", help="verify the hypotheses and print delta_bar and rho/delta_bar")
    _common(p)
    p.add_argument("--lambda-max", type=float, dest="lambda_max", help="lambda_bar used for admissibility (default 1.25 rho/delta_bar)")
    p = sub.add_parser("solve", help="solve u = y + lambda T u at a fixed lambda")
    _common(p)
    p.add_argument("--lambda", type=float, dest="lam", required=False)
    p.add_argument("--init", help="CSV with columns t,u used as the starting iterate")
    p.add_argument("--max-iter", type=int, default=2000, dest="max_iter")
    p = sub.add_parser("scan", help="locate eigenpairs with |u - y| = rho")
    _common(p)
    p.add_argument("--lambda-max", type=float, dest="lambda_max")
    p.add_argument("--lambda-points", type=int, dest="lambda_points")
    p.add_argument("--threads", type=int, help="parallel lambda solves (default: available CPUs)")
    sub.add_parser("list-catalog", help="list built-in problems")
    return parser


def _merge(args) -> RunConfig:
    source = args.config or args.problem or "example-delay-phi"
    if source in CATALOG:
        cfg = RunConfig(problem=source)
    elif source.endswith(".ini") or Path(source).is_file():
        cfg = load_config(source)
    else:
        raise UsageError(f"unknown problem {source!r}; use list-catalog or pass an .ini file")
    for attr in ("rho", "grid_n", "tol", "out", "lambda_max", "lambda_points", "threads", "lam"):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, attr, val)
    if args.emit:
        cfg.emit = tuple(x.strip() for x in args.emit.split(",") if x.strip())
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        cfg.params[key] = value
    cfg.validate()
    return cfg


def _problem(cfg: RunConfig, args):
    if cfg.problem_section is not None:
        spec, bounds = problem_from_section(cfg.problem_section, cfg.rho)
    else:
        try:
            spec, bounds = CATALOG[cfg.problem][0](cfg.rho, **cfg.params)
        except TypeError as exc:
            raise UsageError(f"bad parameters for {cfg.problem}: {exc}") from None
    M, M_label = bounds.M_rho, bounds.M_label
    D, D_label = bounds.delta_rho, bounds.delta_label
    if args.M_expr:
        g = compile_expr(args.M_expr, names=("t",))
        M, M_label = (lambda t: np.asarray(g(np.asarray(t, dtype=float))) * np.ones_like(np.asarray(t, dtype=float))), args.M_expr
    if args.delta_expr:
        h = compile_expr(args.delta_expr, names=("t",))
        D, D_label = (lambda t: np.asarray(h(np.asarray(t, dtype=float))) * np.ones_like(np.asarray(t, dtype=float))), args.delta_expr
    bounds = BoundData(M_rho=M, delta_rho=D, rho=bounds.rho, M_label=M_label, delta_label=D_label)
    return spec, bounds


def _outdir(cfg):
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _write_json(path, data):
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x

    path.write_text(json.dumps(clean(data), indent=2, default=_json_default) + "\n", encoding="utf-8")


def _write_csv(path, u: GridFunction, y_vals):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "u_minus_y"])
        for t, a, b in zip(u.nodes, u.values, u.values - y_vals):
            w.writerow([repr(float(t)), repr(float(a)), repr(float(b))])


def read_init_csv(path, spec, grid_n) -> GridFunction:
    """Starting iterate from a CSV with columns t,u (header required)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        t = np.array([float(r["t"]) for r in rows])
        u = np.array([float(r["u"]) for r in rows])
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read initial guess {path}: {exc}") from None
    order = np.argsort(t)
    grid = initial_guess(spec, grid_n)
    return grid.copy(np.interp(grid.nodes, t[order], u[order]))


def _u_plot(u, y_vals, title):
    return line_plot(
        [Series(u.nodes, u.values, "u"), Series(u.nodes, y_vals, "y", dashed=True)],
        title=title,
        xlabel="t",
        ylabel="u(t)",
    )


def cmd_check(args, cfg, spec, bounds) -> int:
    report = run_hypothesis_checks(spec, bounds, lambda_bar=args.lambda_max)
    print(report.render())
    if "json" in cfg.emit and args.out:
        _write_json(_outdir(cfg) / "report.json", report.to_dict())
    return EXIT_OK if report.passed else EXIT_HYPOTHESIS


def cmd_solve(args, cfg, spec, bounds) -> int:
    if cfg.lam is None:
        raise UsageError("solve needs --lambda (or lambda in the [run] section)")
    u0 = read_init_csv(args.init, spec, cfg.grid_n) if args.init else None
    res = fixed_point_solve(spec, spec.kernel, cfg.lam, u0=u0, tol=cfg.tol, grid_n=cfg.grid_n, max_iter=args.max_iter)
    y_vals = spec.vertex.eval_array(res.u.nodes)
    cert = cone_verify(res.u, spec.vertex, max(cfg.tol, 1e-8))
    norm = float(np.max(np.abs((res.u.values - y_vals)[res.u.nonneg])))
    summary = {
        "problem": spec.name,
        "rho": cfg.rho,
        "grid_n": cfg.grid_n,
        "tol": cfg.tol,
        "norm_u_minus_y": norm,
        "cone": cert.to_dict(),
        **res.summary(),
    }
    out = _outdir(cfg)
    if "json" in cfg.emit:
        _write_json(out / "solution.json", summary)
    if res.converged:
        if "csv" in cfg.emit:
            _write_csv(out / "solution.csv", res.u, y_vals)
        if "svg" in cfg.emit:
            (out / "solution.svg").write_text(_u_plot(res.u, y_vals, f"{spec.name}, lambda = {cfg.lam:g}"), encoding="utf-8")
    status = "converged" if res.converged else f"NOT converged ({res.mode})"
    print(f"lambda = {cfg.lam:.12g}: {status}, residual {res.residual:.3e} after {res.iterations} iterations")
    print(f"|u - y|_[0,1] = {norm:.12g}; cone certificate {'passes' if cert.passed else 'fails'}")
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_scan(args, cfg, spec, bounds) -> int:
    try:
        threshold = lambda_bar_threshold(cfg.rho, compute_delta_bar(bounds, spec.kernel))
    except HypothesisFailure:
        threshold = None
    lam_max = cfg.lambda_max or (1.25 * threshold if threshold else 10.0)
    grid = np.linspace(lam_max / cfg.lambda_points, lam_max, cfg.lambda_points)
    scan = boundary_scan(
        spec,
        spec.kernel,
        bounds,
        lambda_grid=grid,
        tol=cfg.tol,
        solve_tol=min(1e-10, 1e-2 * cfg.tol),
        grid_n=cfg.grid_n,
        threads=cfg.threads or os.cpu_count() or 1,
    )
    out = _outdir(cfg)
    for k, p in enumerate(scan.pairs, start=1):
        y_vals = spec.vertex.eval_array(p.u_star.nodes)
        if "csv" in cfg.emit:
            _write_csv(out / f"eigenpair_{k}.csv", p.u_star, y_vals)
        if "svg" in cfg.emit:
            (out / f"eigenpair_{k}.svg").write_text(_u_plot(p.u_star, y_vals, f"u* at lambda* = {p.lambda_star:.8g}"), encoding="utf-8")
    if "svg" in cfg.emit:
        ok = [s for s in scan.samples if s["n"] is not None]
        svg = line_plot(
            [
                Series(np.array([s["lambda"] for s in ok]), np.array([s["n"] for s in ok]), "n(lambda)", markers=True),
                Series(np.array([p.lambda_star for p in scan.pairs]), np.full(len(scan.pairs), cfg.rho), "lambda*", markers=True, colour="#d62728") if scan.pairs else Series(np.array([]), np.array([])),
            ],
            title=f"{spec.name}: |u_lambda - y| against lambda",
            xlabel="lambda",
            ylabel="|u - y|",
            hlines=(cfg.rho,),
            vlines=tuple(p.lambda_star for p in scan.pairs),
        )
        (out / "n_lambda.svg").write_text(svg, encoding="utf-8")
    if "json" in cfg.emit:
        _write_json(
            out / "scan.json",
            {
                "problem": spec.name,
                "rho": cfg.rho,
                "grid_n": cfg.grid_n,
                "tol": cfg.tol,
                "lambda_bar": scan.lambda_bar,
                "rho_over_delta_bar": scan.threshold,
                "pairs": [p.to_dict() for p in scan.pairs],
                "samples": scan.samples,
                "diagnostics": scan.diagnostics,
                "notes": spec.notes,
            },
        )
    print(f"lambda grid: {len(grid)} points in ({grid[0]:.6g}, {lam_max:.6g}]; rho/delta_bar = {threshold if threshold is None else f'{threshold:.10g}'}")
    for k, p in enumerate(scan.pairs, start=1):
        print(f"  eigenpair {k}: lambda* = {p.lambda_star:.12g}  residual {p.residual:.2e}  norm gap {p.norm_gap:.2e}  [{p.method}, {p.mode}]")
    for d in scan.diagnostics:
        print(f"  note: {d}")
    if scan.pairs:
        return EXIT_OK
    report = run_hypothesis_checks(spec, bounds)
    if not report.passed:
        print("no eigenpair; hypotheses fail:", ", ".join(c.name for c in report.failures()))
        return EXIT_HYPOTHESIS
    print("resolution failure: hypotheses pass but no eigenpair was located")
    return EXIT_NONCONVERGENCE


def cmd_list() -> int:
    for name, desc in list_catalog().items():
        print(f"{name:20s} {desc}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help/--version exit 0, argument errors exit EXIT_USAGE
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "list-catalog":
        return cmd_list()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _merge(args)
        spec, bounds = _problem(cfg, args)
        handler = {"check": cmd_check, "solve": cmd_solve, "scan": cmd_scan}[args.command]
        return handler(args, cfg, spec, bounds)
    except (UsageError, ConfigError, ExprError, DomainError) as exc:
        print(f"hameig: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
