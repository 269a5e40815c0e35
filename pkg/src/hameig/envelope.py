"""Pointwise closed-convex envelope of a discontinuous nonlinearity.

For scalar values the closed convex hull of ``f(t, B_eps(u, v))`` is the
interval between its infimum and supremum.  We approximate both from a
tensor sample of the eps-box enriched with one-sided limits at every
discontinuity curve that passes through the box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisFailure
from .kernel import GreenKernel
from .problem import BoundData, ProblemSpec, compute_delta_bar
from .quadrature import QuadConfig

__all__ = ["ValueInterval", "f_envelope", "boundary_norm_lower_bound", "sliding_selection", "ONE_SIDED_OFFSET"]

ONE_SIDED_OFFSET = 1e-9
DEFAULT_SAMPLES = 33


@dataclass(frozen=True)
class ValueInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interval(self, other: "ValueInterval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol


def _axis(centre, eps, n, curve_values):
    lo, hi = max(0.0, centre - eps), centre + eps
    pts = [np.linspace(lo, hi, n), [centre]]
    for g in curve_values:
        if lo <= g <= hi:
            pts.append([p for p in (g - ONE_SIDED_OFFSET, g + ONE_SIDED_OFFSET) if lo <= p <= hi])
    return np.unique(np.concatenate([np.asarray(p, dtype=float) for p in pts]))


def _curve_values(curves, t):
    return [float(c.value(t)) for c in curves if c.a <= t <= c.b]


def f_envelope(spec: ProblemSpec, t: float, u: float, v: float, eps: float, n: int = DEFAULT_SAMPLES) -> ValueInterval:
    """Interval hull of ``f(t, u', v')`` over the eps-box around (u, v)."""
    if not 0.0 <= t <= 1.0 or u < 0.0 or v < 0.0:
        raise DomainError(f"query ({t}, {u}, {v}) outside the domain of f")
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    us = _axis(u, eps, n, _curve_values(spec.gamma_curves, t))
    vs = _axis(v, eps, n, _curve_values(spec.Gamma_curves, t))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = np.asarray(spec.f(t, us[:, None], vs[None, :]), dtype=float)
    return ValueInterval(float(np.min(vals)), float(np.max(vals)))


def boundary_norm_lower_bound(spec: ProblemSpec, bounds: BoundData, kernel: GreenKernel | None = None, quad_cfg: QuadConfig | None = None) -> float:
    """Lower bound on the sup-norm of envelope values over the cone boundary.

    Any convex combination of operator values is bounded below on [1/4, 3/4]
    by ``int k(t,s) delta_rho(s) ds``, so the bound is delta_bar itself.
    """
    dbar = compute_delta_bar(bounds, kernel or spec.kernel, quad_cfg)
    if not dbar > 0.0:
        raise HypothesisFailure(f"delta_bar={dbar} gives no positive lower bound")
    return dbar


def sliding_selection(interval: ValueInterval, target: float) -> float:
    """Element of ``interval`` closest to ``target``."""
    return min(max(target, interval.lo), interval.hi)
