"""Dirichlet Green's function, its zero extension to [-r, 1] and the cone vertex.

The Green's function of ``-u'' = h, u(0) = u(1) = 0`` is

    G(t, s) = t (1 - s)   for t <= s
    G(t, s) = (1 - t) s   for s <  t

and satisfies ``Phi(s)/4 <= G(t, s) <= Phi(s)`` with ``Phi(s) = s (1 - s)``
(the lower bound for t in [1/4, 3/4]).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "GreenKernel",
    "VertexFunction",
    "green_eval",
    "phi_upper",
    "kernel_eval",
    "vertex_eval",
    "green_matrix",
]


def _check_unit(name, x):
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name}={x!r} outside [0, 1]")


def green_eval(t: float, s: float) -> float:
    _check_unit("t", t)
    _check_unit("s", s)
    if t <= s:
        return t * (1.0 - s)
    return (1.0 - t) * s


def phi_upper(s: float) -> float:
    _check_unit("s", s)
    return s * (1.0 - s)


@dataclass(frozen=True)
class GreenKernel:
    """Zero extension ``k(t, s)`` of G to t in [-r, 1]; vanishes for t < 0."""

    r: float = 0.0

    def __post_init__(self):
        if not self.r >= 0.0:
            raise DomainError(f"history length r={self.r!r} must be >= 0")

    def eval(self, t: float, s: float) -> float:
        if not (-self.r <= t <= 1.0):
            raise DomainError(f"t={t!r} outside [{-self.r}, 1]")
        _check_unit("s", s)
        if t < 0.0:
            return 0.0
        return green_eval(t, s)

    def eval_array(self, t, s):
        """Broadcasting evaluation without domain checks (hot path)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        g = np.where(t <= s, t * (1.0 - s), (1.0 - t) * s)
        return np.where(t < 0.0, 0.0, g)


def kernel_eval(k: GreenKernel, t: float, s: float) -> float:
    return k.eval(t, s)


def green_matrix(k: GreenKernel, t, s):
    """Dense matrix ``k(t_i, s_j)``."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return k.eval_array(t[:, None], s[None, :])


@dataclass(frozen=True)
class VertexFunction:
    """Vertex ``y`` of the affine cone.

    ``y = omega`` on [-r, 0] and ``y(t) = (1 - t) omega(0)`` on (0, 1].
    ``omega(0)`` is read once at construction so that ``y`` is continuous at 0
    regardless of how the history evaluator rounds.
    """

    omega: Callable[[float], float]
    r: float = 0.0
    omega0: float = field(init=False)
    _cache: dict = field(init=False, default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "omega0", float(self.omega(0.0)))
        if self.omega0 < 0.0:
            raise DomainError(f"history omega(0)={self.omega0} is negative")

    def eval(self, t: float) -> float:
        if not (-self.r <= t <= 1.0):
            raise DomainError(f"t={t!r} outside [{-self.r}, 1]")
        if t == 0.0:
            return self.omega0
        if t < 0.0:
            return float(self.omega(t))
        return (1.0 - t) * self.omega0

    def eval_array(self, t):
        t = np.asarray(t, dtype=float)
        out = (1.0 - t) * self.omega0
        neg = t < 0.0
        if np.any(neg):
            hist = np.asarray(self.omega(np.where(neg, t, -self.r)), dtype=float)
            out = np.where(neg, hist, out)
        return out

    def samples(self, n: int = 1024):
        """Dense (t, omega(t)) samples on [-r, 0], cached per n (plotting and norms)."""
        if n not in self._cache:
            if self.r > 0.0:
                t = np.linspace(-self.r, 0.0, n)
                vals = np.asarray(self.omega(t), dtype=float) * np.ones_like(t)
                vals[-1] = self.omega0
            else:
                t = np.zeros(1)
                vals = np.array([self.omega0])
            self._cache[n] = (t, vals)
        return self._cache[n]

    def history_norm(self, n: int = 1024) -> float:
        return float(np.max(np.abs(self.samples(n)[1])))


def vertex_eval(y: VertexFunction, t: float) -> float:
    return y.eval(t)
