"""Breakpoint- and singularity-aware quadrature and the Hammerstein operator.

``hammerstein_apply`` computes

    Tu(t) = int_0^1 k(t, s) f(s, u(s), u(sigma(s))) ds

on the non-negative nodes of ``u``.  The integration mesh is the node set of
``u`` refined by every point where ``u`` (or ``u o sigma``) crosses a
discontinuity curve, so the integrand is smooth on every panel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError
from .kernel import GreenKernel

if TYPE_CHECKING:  # pragma: no cover
    from .problem import ProblemSpec

__all__ = [
    "QuadConfig",
    "QuadResult",
    "GridFunction",
    "integrate",
    "panel_nodes",
    "hammerstein_apply",
    "integrand_samples",
    "green_apply",
    "find_crossings",
]

# endpoint samples of closed rules are taken this far (relative) inside the
# panel, i.e. as one-sided limits, so jumps sitting on breakpoints are never
# evaluated on the wrong side
_ENDPOINT_NUDGE = 1e-10
CROSSING_XTOL = 1e-12

_GAUSS7 = np.polynomial.legendre.leggauss(7)


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings.

    ``panels`` is the number of composite panels per breakpoint segment (the
    starting count for the adaptive loop in :func:`integrate`).
    ``singularities`` lists ``(endpoint, exponent)`` pairs of integrable
    power singularities ``|s - endpoint|**exponent`` with exponent in (-1, 0).
    """

    panels: int = 4
    rule: str = "simpson"
    singularities: tuple = ()
    tol: float = 1e-10
    max_doublings: int = 14

    def __post_init__(self):
        if self.panels < 4:
            raise DomainError(f"panels={self.panels} must be >= 4")
        if not self.tol > 0.0:
            raise DomainError(f"tol={self.tol} must be > 0")
        if self.rule not in ("simpson", "gauss7"):
            raise DomainError(f"unknown rule {self.rule!r}")
        for _, expo in self.singularities:
            if not -1.0 < expo < 0.0:
                raise DomainError(f"singularity exponent {expo} not in (-1, 0)")

    def with_singularities(self, extra) -> "QuadConfig":
        merged = tuple(dict.fromkeys(tuple(self.singularities) + tuple(extra)))
        return QuadConfig(self.panels, self.rule, merged, self.tol, self.max_doublings)


class QuadResult(NamedTuple):
    value: float
    error: float
    panels: int


def _reference_rule(rule: str, panels: int):
    """Composite rule on [0, 1]: (nodes, weights, endpoint mask)."""
    if rule == "simpson":
        m = 2 * panels
        x = np.linspace(0.0, 1.0, m + 1)
        w = np.ones(m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= 1.0 / (3.0 * m)
        ends = np.zeros(m + 1, dtype=bool)
        ends[0] = ends[-1] = True
        return x, w, ends
    xg, wg = _GAUSS7
    h = 1.0 / panels
    left = np.arange(panels) * h
    x = (left[:, None] + (xg[None, :] + 1.0) * (h / 2.0)).ravel()
    w = np.tile(wg * (h / 2.0), panels)
    return x, w, np.zeros(x.size, dtype=bool)


def _substitution_power(exponent: float) -> int:
    # s = tau**m turns |s|**exponent ds into a bounded tau-integrand
    return max(2, math.ceil(1.0 / (1.0 + exponent) - 1e-9))


def panel_nodes(a: float, b: float, panels: int, rule: str = "simpson", left_exponent=None, right_exponent=None):
    """Nodes and weights of the composite rule on [a, b].

    A singular endpoint is handled with ``s = a + (b - a) tau**m``.  End nodes
    of closed rules are nudged inwards (one-sided limits); nodes whose weight
    vanishes are dropped.  Returns ``(nodes, weights)``.
    """
    x, w, ends = _reference_rule(rule, panels)
    length = b - a
    if ends.any():
        # closed rule: sample the end nodes as one-sided limits; under a
        # singular substitution this also gives the end node its limit value
        x = x.copy()
        x[0] += _ENDPOINT_NUDGE
        x[-1] -= _ENDPOINT_NUDGE
    if left_exponent is not None:
        m = _substitution_power(left_exponent)
        s = a + length * x**m
        w = w * m * x ** (m - 1) * length
    elif right_exponent is not None:
        m = _substitution_power(right_exponent)
        s = b - length * (1.0 - x) ** m
        w = w * m * (1.0 - x) ** (m - 1) * length
    else:
        s = a + length * x
        w = w * length
    keep = w != 0.0
    return s[keep], w[keep]


def _segments(a, b, breakpoints):
    pts = [a] + sorted(float(p) for p in breakpoints if a < p < b) + [b]
    out = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi > lo:
            out.append((lo, hi))
    return out


def _singular_exponents(lo, hi, singularities):
    left = right = None
    for point, expo in singularities:
        if point == lo:
            left = expo
        elif point == hi:
            right = expo
    return left, right


def _composite(g, a, b, breakpoints, cfg, panels):
    total = 0.0
    for lo, hi in _segments(a, b, breakpoints):
        left, right = _singular_exponents(lo, hi, cfg.singularities)
        s, w = panel_nodes(lo, hi, panels, cfg.rule, left, right)
        vals = np.asarray(g(s), dtype=float) * np.ones_like(s)
        bad = ~np.isfinite(vals)
        if bad.any():
            loc = float(s[np.argmax(bad)])
            raise IntegrationError(f"non-finite integrand at s={loc!r}", location=loc)
        total += float(np.dot(w, vals))
    return total


def integrate(g: Callable, a: float, b: float, breakpoints: Sequence[float] = (), cfg: QuadConfig | None = None) -> QuadResult:
    """Integrate a vectorised ``g`` over [a, b], split at ``breakpoints``.

    The panel count is doubled until successive estimates agree to ``cfg.tol``;
    the returned error is the Richardson estimate of the last doubling.
    """
    cfg = cfg or QuadConfig()
    if not a < b:
        raise DomainError(f"empty interval [{a}, {b}]")
    for p in breakpoints:
        if not a <= p <= b:
            raise DomainError(f"breakpoint {p} outside [{a}, {b}]")
    order_factor = 15.0 if cfg.rule == "simpson" else 1.0
    panels = cfg.panels
    coarse = _composite(g, a, b, breakpoints, cfg, panels)
    err = math.inf
    for _ in range(cfg.max_doublings):
        panels *= 2
        fine = _composite(g, a, b, breakpoints, cfg, panels)
        err = abs(fine - coarse) / order_factor
        coarse = fine
        if err <= cfg.tol * max(1.0, abs(fine)):
            break
    return QuadResult(coarse, err, panels)


@dataclass
class GridFunction:
    """Continuous function on [-r, 1], piecewise linear between ``nodes``."""

    nodes: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.shape != self.values.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0.0):
            raise DomainError("nodes must be strictly increasing")
        if self.nodes[-1] != 1.0 or not np.any(self.nodes == 0.0):
            raise DomainError("grid must end at 1 and contain the node 0")

    @classmethod
    def uniform(cls, r: float = 0.0, n: int = 257, values=None) -> "GridFunction":
        """``n`` uniform nodes on [0, 1] plus history nodes at matching spacing."""
        if n < 3:
            raise DomainError("need at least 3 nodes on [0, 1]")
        pos = np.linspace(0.0, 1.0, n)
        if r > 0.0:
            m = max(1, math.ceil(r * (n - 1) - 1e-9))
            hist = np.linspace(-r, 0.0, m + 1)[:-1]
            nodes = np.concatenate([hist, pos])
        else:
            nodes = pos
        vals = np.zeros_like(nodes) if values is None else values
        return cls(nodes, vals)

    @classmethod
    def from_function(cls, fn: Callable, r: float = 0.0, n: int = 257) -> "GridFunction":
        g = cls.uniform(r, n)
        g.values = np.asarray(fn(g.nodes), dtype=float) * np.ones_like(g.nodes)
        return g

    @property
    def r(self) -> float:
        return -float(self.nodes[0])

    @property
    def nonneg(self) -> np.ndarray:
        return self.nodes >= 0.0

    def eval(self, t):
        return np.interp(t, self.nodes, self.values)

    def copy(self, values=None) -> "GridFunction":
        return GridFunction(self.nodes.copy(), self.values.copy() if values is None else np.asarray(values, float))

    def sup_norm(self, where: str = "positive") -> float:
        v = self.values[self.nonneg] if where == "positive" else self.values
        return float(np.max(np.abs(v)))


def find_crossings(g: Callable, pts: np.ndarray, values: np.ndarray | None = None, xtol: float = CROSSING_XTOL):
    """Roots of ``g`` located by sign changes between consecutive ``pts``.

    Each bracket is refined by Brent's safeguarded bisection to ``xtol``.
    A bracket whose refinement fails is kept by its midpoint with a warning.
    """
    vals = np.asarray(g(pts), dtype=float) if values is None else values
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0.0)[0]
    roots = []
    for i in idx:
        lo, hi = float(pts[i]), float(pts[i + 1])
        try:
            roots.append(brentq(lambda x: float(g(x)), lo, hi, xtol=xtol))
        except (ValueError, RuntimeError):
            warnings.warn(f"crossing refinement failed in [{lo}, {hi}]; keeping midpoint", RuntimeWarning)
            roots.append(0.5 * (lo + hi))
    return roots


def deviated_values(u: GridFunction, spec: "ProblemSpec", s):
    """``u(sigma(s))``, reading the history through ``omega`` where sigma(s) < 0."""
    x = np.asarray(spec.sigma(s), dtype=float) * np.ones_like(np.asarray(s, dtype=float))
    inside = np.interp(np.maximum(x, 0.0), u.nodes, u.values)
    if np.any(x < 0.0):
        hist = np.asarray(spec.omega(np.where(x < 0.0, x, 0.0)), dtype=float)
        return np.where(x < 0.0, hist, inside)
    return inside


def integration_breakpoints(u: GridFunction, spec: "ProblemSpec") -> np.ndarray:
    """Mesh for Tu: non-negative nodes, sigma kinks, curve endpoints and crossings."""
    base = u.nodes[u.nonneg]
    pts = set(base.tolist())
    pts.update(p for p in spec.sigma_kinks if 0.0 < p < 1.0)
    if spec.sigma_slope in (1, -1) and u.r > 0.0:
        # kinks of u o sigma sit at the preimages of the nodes of u
        s0 = float(spec.sigma(0.0))
        pre = (u.nodes - s0) * spec.sigma_slope
        pts.update(p for p in pre.tolist() if 0.0 < p < 1.0)
    for c in tuple(spec.gamma_curves) + tuple(spec.Gamma_curves):
        pts.update(p for p in (c.a, c.b) if 0.0 < p < 1.0)
    mesh = np.array(sorted(pts))

    def _curve_crossings(curves, fn):
        found = []
        for c in curves:
            sel = (mesh >= c.a) & (mesh <= c.b)
            sub = mesh[sel]
            if sub.size < 2:
                continue
            g = lambda x, c=c: fn(x) - c.value(x)
            found.extend(find_crossings(g, sub))
        return found

    extra = _curve_crossings(spec.gamma_curves, u.eval)
    extra += _curve_crossings(spec.Gamma_curves, lambda x: deviated_values(u, spec, x))
    if extra:
        mesh = np.unique(np.concatenate([mesh, extra]))
        mesh = mesh[np.concatenate([[True], np.diff(mesh) > 4 * CROSSING_XTOL])]
        if mesh[-1] != 1.0:
            mesh[-1] = 1.0
    return mesh


def _mesh_nodes(mesh, cfg: QuadConfig):
    """Quadrature nodes/weights over all mesh segments (vectorised)."""
    x, w, ends = _reference_rule(cfg.rule, cfg.panels)
    lo, hi = mesh[:-1], mesh[1:]
    length = hi - lo
    singular = {p: e for p, e in cfg.singularities}
    xs = np.broadcast_to(x, (lo.size, x.size)).copy()
    if ends.any():
        xs[:, 0] += _ENDPOINT_NUDGE
        xs[:, -1] -= _ENDPOINT_NUDGE
    s = lo[:, None] + length[:, None] * xs
    ws = length[:, None] * w[None, :]
    if 0.0 in singular:
        m = _substitution_power(singular[0.0])
        s[0] = lo[0] + length[0] * xs[0] ** m
        ws[0] = length[0] * w * m * xs[0] ** (m - 1)
    if 1.0 in singular:
        m = _substitution_power(singular[1.0])
        s[-1] = hi[-1] - length[-1] * (1.0 - xs[-1]) ** m
        ws[-1] = length[-1] * w * m * (1.0 - xs[-1]) ** (m - 1)
    s, ws = s.ravel(), ws.ravel()
    keep = ws != 0.0
    return s[keep], ws[keep]


def integrand_samples(u: GridFunction, spec: "ProblemSpec", cfg: QuadConfig | None = None, mesh=None):
    """Quadrature nodes ``s``, weights ``w`` and ``F(s) = f(s, u(s), u(sigma(s)))``."""
    cfg = (cfg or QuadConfig()).with_singularities(spec.singularities)
    if mesh is None:
        mesh = integration_breakpoints(u, spec)
    s, w = _mesh_nodes(mesh, cfg)
    us = u.eval(s)
    vs = deviated_values(u, spec, s)
    with np.errstate(over="ignore", invalid="ignore"):
        F = np.asarray(spec.f(s, us, vs), dtype=float) * np.ones_like(s)
    bad = ~np.isfinite(F)
    if bad.any():
        loc = float(s[np.argmax(bad)])
        raise IntegrationError(f"non-finite integrand at s={loc!r}", location=loc)
    return s, w, F, mesh


def green_apply(t: np.ndarray, s: np.ndarray, wF: np.ndarray) -> np.ndarray:
    """``sum_q G(t_i, s_q) wF_q`` for sorted ``s`` in O(len(s) + len(t)).

    Uses the factorisation ``G(t, s) = (1 - t) s`` for s < t and
    ``t (1 - s)`` for s >= t; t < 0 gives 0 (zero extension).
    """
    left = np.concatenate([[0.0], np.cumsum(s * wF)])
    right = np.concatenate([[0.0], np.cumsum((1.0 - s) * wF)])
    k = np.searchsorted(s, t, side="left")
    out = (1.0 - t) * left[k] + t * (right[-1] - right[k])
    return np.where(t < 0.0, 0.0, out)


def hammerstein_apply(u: GridFunction, spec: "ProblemSpec", kernel: GreenKernel | None = None, cfg: QuadConfig | None = None) -> GridFunction:
    """Tu on the nodes of ``u`` (zero on [-r, 0]); no vertex, no lambda."""
    kernel = kernel or spec.kernel
    if not isinstance(kernel, GreenKernel):
        raise TypeError("only the Dirichlet Green kernel is supported")
    s, w, F, _ = integrand_samples(u, spec, cfg)
    vals = green_apply(u.nodes, s, w * F)
    return GridFunction(u.nodes.copy(), vals)
