"""Run configuration files (INI, one ``[problem]`` and one ``[run]`` section).

Schema version 1::

    [problem]
    schema = 1
    # either a catalog entry ...
    catalog = eigendir
    param.ftilde = u
    # ... or an explicit problem (expressions use the grammar of hameig.expr)
    f = 1 + v/2 + step(u - 1/2)
    sigma = t - 1/4
    omega = 1
    r = 0.25
    sigma_slope = 1
    M = 3
    delta = 1/2
    gamma = 1/2 ; t*t + 1/4 @ 0..1
    Gamma =
    singularity = 0:-0.5

    [run]
    rho = 1
    lambda = 2
    lambda_max = 10
    lambda_points = 24
    grid_n = 257
    tol = 1e-8
    threads = 1
    out = results
    emit = csv,json,svg

Curves are ``;``-separated expressions in ``t`` with an optional ``@ a..b``
interval (default ``0..1``).  Their second derivatives are taken by central
differences with step 1e-4.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import get_problem
from .errors import DomainError
from .expr import ExprError, compile_expr
from .problem import BoundData, DiscontinuityCurve, ProblemSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_curves", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
FD_STEP = 1e-4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "example-delay-phi"
    rho: float = 1.0
    lam: float | None = None
    lambda_max: float | None = None
    lambda_points: int = 24
    grid_n: int = 257
    tol: float = 1e-8
    threads: int | None = None  # None: available CPUs
    out: str = "."
    emit: tuple = ("csv", "json", "svg")
    params: dict = field(default_factory=dict)
    problem_section: dict | None = None

    def validate(self):
        if not self.rho > 0.0:
            raise ConfigError("rho must be positive")
        if not self.tol > 0.0:
            raise ConfigError("tol must be positive")
        if self.grid_n < 5:
            raise ConfigError("grid_n must be at least 5")
        if self.lambda_points < 2:
            raise ConfigError("lambda_points must be at least 2")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.lam is not None and self.lam < 0.0:
            raise ConfigError("lambda must be non-negative")
        bad = set(self.emit) - {"csv", "json", "svg"}
        if bad:
            raise ConfigError(f"unknown emit kinds: {', '.join(sorted(bad))}")


def _second_derivative(fn, a, b):
    h = FD_STEP

    def d2(t):
        t = np.clip(np.asarray(t, dtype=float), a + h, b - h)
        return (fn(t + h) - 2.0 * fn(t) + fn(t - h)) / (h * h)

    return d2


def parse_curves(text: str, prefix: str) -> list[DiscontinuityCurve]:
    curves = []
    for k, item in enumerate(p.strip() for p in (text or "").split(";")):
        if not item:
            continue
        expr, _, span = item.partition("@")
        a, b = 0.0, 1.0
        if span.strip():
            try:
                a, b = (float(x) for x in span.split(".."))
            except ValueError:
                raise ConfigError(f"bad curve interval {span.strip()!r}; expected a..b") from None
        g = compile_expr(expr, names=("t",))
        fn = lambda t, g=g: np.asarray(g(np.asarray(t, dtype=float)), dtype=float) * np.ones_like(np.asarray(t, dtype=float))
        curves.append(DiscontinuityCurve(a, b, fn, _second_derivative(fn, a, b), label=f"{prefix}{k + 1}:{expr.strip()}"))
    return curves


def _t_expr(text):
    g = compile_expr(text, names=("t",))
    return lambda t: np.asarray(g(np.asarray(t, dtype=float)), dtype=float) * np.ones_like(np.asarray(t, dtype=float))


def problem_from_section(sec: dict, rho: float):
    """Build ``(spec, bounds)`` from a ``[problem]`` section."""
    try:
        if "catalog" in sec:
            params = {k[len("param."):]: v for k, v in sec.items() if k.startswith("param.")}
            return get_problem(sec["catalog"], rho, **params)
        missing = [k for k in ("f", "sigma", "omega", "M", "delta") if k not in sec]
        if missing:
            raise ConfigError(f"[problem] is missing {', '.join(missing)}")
        fexpr = compile_expr(sec["f"], names=("t", "u", "v"))
        singular = []
        if sec.get("singularity", "").strip():
            for item in sec["singularity"].split(","):
                pt, ex = item.split(":")
                singular.append((float(pt), float(ex)))
        slope = sec.get("sigma_slope", "").strip()
        spec = ProblemSpec(
            f=fexpr,
            sigma=_t_expr(sec["sigma"]),
            omega=_t_expr(sec["omega"]),
            r=float(sec.get("r", "0")),
            gamma_curves=parse_curves(sec.get("gamma", ""), "gamma_"),
            Gamma_curves=parse_curves(sec.get("Gamma", ""), "Gamma_"),
            sigma_slope=int(slope) if slope else None,
            singularities=tuple(singular),
            name=sec.get("name", "config"),
            notes={"f": sec["f"]},
        )
        bounds = BoundData(
            M_rho=_t_expr(sec["M"]),
            delta_rho=_t_expr(sec["delta"]),
            rho=rho,
            M_label=sec["M"].strip(),
            delta_label=sec["delta"].strip(),
        )
        return spec, bounds
    except (ExprError, DomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not parser.has_section("problem"):
        raise ConfigError("missing [problem] section")
    sec = dict(parser["problem"])
    try:
        schema = int(sec.pop("schema", ""))
    except ValueError:
        raise ConfigError("[problem] needs an integer 'schema' field") from None
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {schema}; this build reads schema {SCHEMA_VERSION}")
    run = dict(parser["run"]) if parser.has_section("run") else {}
    cfg = RunConfig(problem=str(path), problem_section=sec)
    try:
        for key, cast, attr in (
            ("rho", float, "rho"),
            ("lambda", float, "lam"),
            ("lambda_max", float, "lambda_max"),
            ("lambda_points", int, "lambda_points"),
            ("grid_n", int, "grid_n"),
            ("tol", float, "tol"),
            ("threads", int, "threads"),
            ("out", str, "out"),
        ):
            if key in run:
                setattr(cfg, attr, cast(run[key]))
    except ValueError as exc:
        raise ConfigError(f"[run]: {exc}") from None
    if "emit" in run:
        cfg.emit = tuple(x.strip() for x in run["emit"].split(",") if x.strip())
    cfg.validate()
    return cfg
