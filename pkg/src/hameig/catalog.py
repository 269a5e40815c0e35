"""Built-in problems.

``example-delay-phi`` is the delay problem

    -u''(t) = lam ((2 - phi(u(t) - t^2)) / sqrt(t) + phi(u(t - 1/2) - t^2) u(t)^3)
    u(t) = sqrt(1 + 2t) on [-1/2, 0],  u(1) = 0

with ``phi(x) = sum_{n : q_n < x} 2^-n`` over an enumeration of the rationals.
The enumeration is frozen here (it is part of the problem definition):
``q_1 = 0``, ``q_{2k} = c_k``, ``q_{2k+1} = -c_k`` where ``c_k`` is the k-th
term of the Calkin-Wilf sequence 1, 1/2, 2, 1/3, 3/2, 2/3, 3, 1/4, ...
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .expr import compile_expr
from .problem import BoundData, DiscontinuityCurve, ProblemSpec

__all__ = [
    "RationalEnumeration",
    "calkin_wilf",
    "phi_eval",
    "example_problem",
    "const_f_problem",
    "eigendir_problem",
    "gh_split_problem",
    "CATALOG",
    "get_problem",
    "list_catalog",
    "DEFAULT_DEPTH",
]

DEFAULT_DEPTH = 40


def calkin_wilf(k: int) -> list[Fraction]:
    """First ``k`` positive rationals in Calkin-Wilf order (Newman's recurrence)."""
    out, c = [], Fraction(1)
    for _ in range(k):
        out.append(c)
        c = 1 / (2 * math.floor(c) - c + 1)
    return out


class RationalEnumeration:
    """Truncated enumeration ``q_1..q_N`` with vectorised ``phi_N``."""

    def __init__(self, depth: int = DEFAULT_DEPTH):
        if depth < 1:
            raise DomainError("truncation depth must be >= 1")
        self.depth = depth
        cw = calkin_wilf((depth + 1) // 2)
        q = [Fraction(0)]
        for c in cw:
            q.extend([c, -c])
        self.rationals = q[:depth]
        self.q = np.array([float(x) for x in self.rationals])
        self.weights = 2.0 ** -np.arange(1, depth + 1)
        order = np.argsort(self.q, kind="stable")
        self._sorted_q = self.q[order]
        self._cum = np.concatenate([[0.0], np.cumsum(self.weights[order])])

    def __getitem__(self, n: int) -> Fraction:
        """1-based access to q_n."""
        if not 1 <= n <= self.depth:
            raise IndexError(n)
        return self.rationals[n - 1]

    def phi(self, x):
        """``sum 2^-n`` over n <= depth with q_n < x (strict)."""
        idx = np.searchsorted(self._sorted_q, x, side="left")
        out = self._cum[idx]
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> str:
        return f"q_1=0, q_2k=c_k, q_2k+1=-c_k (Calkin-Wilf c_k), depth {self.depth}"


@lru_cache(maxsize=16)
def _enumeration(depth: int) -> RationalEnumeration:
    return RationalEnumeration(depth)


def phi_eval(x, depth: int = DEFAULT_DEPTH):
    return _enumeration(depth).phi(x)


def _power_curves(enum: RationalEnumeration, prefix: str):
    """Curves ``t^2 + q_n`` restricted to where they are non-negative on [0, 1]."""
    curves = []
    for n, q in enumerate(enum.q, start=1):
        a = 0.0 if q >= 0.0 else math.sqrt(-q)
        if a >= 1.0:
            continue
        curves.append(
            DiscontinuityCurve(
                a=a,
                b=1.0,
                value=lambda t, q=q: np.asarray(t, dtype=float) ** 2 + q,
                second_derivative=lambda t: 2.0 * np.ones_like(np.asarray(t, dtype=float)),
                label=f"{prefix}{n}",
            )
        )
    return curves


def example_problem(rho: float, depth: int = DEFAULT_DEPTH):
    """The delay problem with the rationals-indexed jump function; returns (spec, bounds)."""
    if not rho > 0.0:
        raise DomainError("rho must be positive")
    enum = _enumeration(int(depth))
    phi = enum.phi

    def f(t, u, v):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            inv_sqrt = 1.0 / np.sqrt(t)
        return (2.0 - phi(u - t * t)) * inv_sqrt + phi(v - t * t) * np.asarray(u, dtype=float) ** 3

    spec = ProblemSpec(
        f=f,
        sigma=lambda t: np.asarray(t, dtype=float) - 0.5,
        omega=lambda t: np.sqrt(np.maximum(1.0 + 2.0 * np.asarray(t, dtype=float), 0.0)),
        r=0.5,
        gamma_curves=_power_curves(enum, "gamma_"),
        Gamma_curves=_power_curves(enum, "Gamma_"),
        sigma_slope=1,
        singularities=((0.0, -0.5),),
        name="example-delay-phi",
        notes={"enumeration": enum.describe()},
    )
    cube = (rho + 1.0) ** 3
    bounds = BoundData(
        M_rho=lambda t: 2.0 / np.sqrt(np.asarray(t, dtype=float)) + cube,
        delta_rho=lambda t: 1.0 / np.sqrt(np.asarray(t, dtype=float)),
        rho=rho,
        M_label=f"2/√t+{cube:g}",
        delta_label="1/√t",
    )
    return spec, bounds


def _const(c):
    return lambda t: c * np.ones_like(np.asarray(t, dtype=float))


def const_f_problem(rho: float, value: float = 1.0):
    """f = const, no history: Tu = value * t(1-t)/2 for every u."""
    value = float(value)
    spec = ProblemSpec(
        f=lambda t, u, v: value * np.ones(np.broadcast(np.asarray(t), np.asarray(u), np.asarray(v)).shape),
        sigma=lambda t: np.asarray(t, dtype=float),
        omega=_const(0.0),
        r=0.0,
        sigma_slope=1,
        name="const-f",
    )
    bounds = BoundData(M_rho=_const(value), delta_rho=_const(value), rho=rho, M_label=f"{value:g}", delta_label=f"{value:g}")
    return spec, bounds


def _sampled_bounds(fn, R, n=513):
    grid = np.linspace(0.0, R, n)
    vals = np.asarray(fn(grid), dtype=float) * np.ones_like(grid)
    return float(np.max(vals)), float(np.min(vals))


def eigendir_problem(rho: float, ftilde: str = "1"):
    """``-u'' = lam ftilde(u)``, u(0) = u(1) = 0, encoded with r = 0 and sigma = id.

    The sign is absorbed so that the nonlinearity is non-negative.  Bounds are
    the sampled max/min of ``ftilde`` over [0, rho].
    """
    ft = compile_expr(ftilde, names=("u",))
    spec = ProblemSpec(
        f=lambda t, u, v: ft(np.asarray(u, dtype=float) + 0.0 * np.asarray(t, dtype=float) + 0.0 * np.asarray(v, dtype=float)),
        sigma=lambda t: np.asarray(t, dtype=float),
        omega=_const(0.0),
        r=0.0,
        sigma_slope=1,
        name="eigendir",
        notes={"ftilde": ftilde},
    )
    hi, lo = _sampled_bounds(ft, rho)
    bounds = BoundData(M_rho=_const(hi), delta_rho=_const(lo), rho=rho, M_label=f"{hi:g}", delta_label=f"{lo:g}")
    return spec, bounds


def gh_split_problem(
    rho: float,
    g: str = "1 + v/2",
    h: str = "step(u - 1/2) + step(u - 1)/2",
    jumps=(0.5, 1.0),
    r: float = 0.25,
    omega: str = "1",
):
    """``f(t,u,v) = g(t, v) + h(u)`` with h jumping at ``jumps``; delay sigma(t) = t - r.

    The jump set of h gives constant curves gamma_n = a_n.  M is the sampled
    sup of g + h over [0, R]; the minorant is half the sampled inf of g, so the
    admissibility inequality with psi = lam * delta is strict.
    """
    if isinstance(jumps, str):
        jumps = [float(a) for a in jumps.split(",") if a.strip()]
    r = float(r)
    gf = compile_expr(g, names=("t", "v"))
    hf = compile_expr(h, names=("u",))
    om = compile_expr(omega, names=("t",))
    curves = [
        DiscontinuityCurve(0.0, 1.0, _const(float(a)), _const(0.0), epsilon=0.05, label=f"a{k + 1}")
        for k, a in enumerate(jumps)
        if a >= 0.0
    ]
    spec = ProblemSpec(
        f=lambda t, u, v: gf(t, v) + hf(u),
        sigma=lambda t: np.asarray(t, dtype=float) - r,
        omega=om,
        r=r,
        gamma_curves=curves,
        sigma_slope=1,
        name="gh-split",
        notes={"g": g, "h": h, "jumps": list(jumps)},
    )
    R = rho + spec.omega_norm()
    tt = (np.arange(64) + 0.5) / 64
    vv = np.linspace(0.0, R, 129)
    gvals = np.asarray(gf(tt[:, None], vv[None, :]), dtype=float)
    hmax, _ = _sampled_bounds(hf, R)
    ginf = float(np.min(gvals))
    gsup = np.max(gvals, axis=1)
    m_const = float(np.max(gsup)) + hmax
    bounds = BoundData(
        M_rho=_const(m_const * (1.0 + 1e-9)),
        delta_rho=_const(0.5 * ginf),
        rho=rho,
        M_label=f"{m_const:g}",
        delta_label=f"{0.5 * ginf:g}",
    )
    return spec, bounds


CATALOG = {
    "example-delay-phi": (example_problem, "delay BVP with the rationals-indexed jump function phi (r = 1/2)"),
    "eigendir": (eigendir_problem, "-u'' = lam ftilde(u), Dirichlet, r = 0, sigma = identity (default ftilde = 1)"),
    "gh-split": (gh_split_problem, "f = g(t, u(sigma)) + h(u) with countably many jumps of h"),
    "const-f": (const_f_problem, "f = 1, y = 0: closed form n(lam) = lam/8"),
}


def list_catalog() -> dict:
    return {name: desc for name, (_, desc) in CATALOG.items()}


def get_problem(name: str, rho: float, **params):
    try:
        factory = CATALOG[name][0]
    except KeyError:
        raise DomainError(f"unknown problem {name!r}; known: {', '.join(CATALOG)}") from None
    return factory(rho, **params)
