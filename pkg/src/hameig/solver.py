"""Fixed points of ``u = y + lam T u`` and eigenpairs on the cone boundary.

``boundary_scan`` samples ``n(lam) = |u_lam - y|_[0,1]`` on a lambda grid,
brackets every crossing of the level rho and refines it.  Branches of
solutions with superlinear f fold back in lambda, and past the fold plain
Picard iteration cannot reach them; for those the scan falls back to the
norm-constrained iteration

    w <- rho T(y + w) / |T(y + w)|,   lam = rho / |T(y + w)|

which stays on the sphere ``|w| = rho`` of the cone by construction.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .envelope import f_envelope, sliding_selection
from .errors import ConvergenceError, DomainError, HypothesisFailure
from .kernel import GreenKernel, VertexFunction
from .problem import BoundData, ProblemSpec, compute_delta_bar, lambda_bar_threshold
from .quadrature import (
    GridFunction,
    QuadConfig,
    deviated_values,
    green_apply,
    hammerstein_apply,
    integrand_samples,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConeCertificate",
    "FixedPointResult",
    "EigenPair",
    "ScanResult",
    "cone_verify",
    "fixed_point_solve",
    "norm_response",
    "boundary_solve",
    "boundary_scan",
    "estimate_lipschitz",
    "choose_damping",
    "power_iteration",
    "initial_guess",
]

DIVERGENCE_BOUND = 1e8
SLIDING_SAMPLES = 9
STALL_WINDOW = 100
GREEN_SUP = 0.125  # max_t int_0^1 G(t, s) ds


@dataclass
class ConeCertificate:
    history_pinned: bool
    nonneg: bool
    harnack: bool
    history_margin: float
    nonneg_margin: float
    harnack_margin: float

    @property
    def passed(self) -> bool:
        return self.history_pinned and self.nonneg and self.harnack

    def to_dict(self) -> dict:
        return {
            "history_pinned": self.history_pinned,
            "nonneg": self.nonneg,
            "harnack": self.harnack,
            "history_margin": self.history_margin,
            "nonneg_margin": self.nonneg_margin,
            "harnack_margin": self.harnack_margin,
        }


def cone_verify(u: GridFunction, y: VertexFunction, tol: float = 1e-8) -> ConeCertificate:
    """Membership of ``u - y`` in the cone, evaluated on the nodes of ``u``.

    Margins: largest history deviation, smallest value of u - y on [0, 1],
    and ``min_[1/4,3/4](u - y) - |u - y|_[0,1] / 4``.
    """
    w = u.values - y.eval_array(u.nodes)
    hist = u.nodes <= 0.0
    pos = u.nonneg
    mid = (u.nodes >= 0.25) & (u.nodes <= 0.75)
    hist_margin = float(np.max(np.abs(w[hist]))) if np.any(hist) else 0.0
    nonneg_margin = float(np.min(w[pos]))
    norm = float(np.max(np.abs(w[pos])))
    harnack_margin = float(np.min(w[mid])) - 0.25 * norm
    return ConeCertificate(
        history_pinned=hist_margin <= tol,
        nonneg=nonneg_margin >= -tol,
        harnack=harnack_margin >= -tol,
        history_margin=hist_margin,
        nonneg_margin=nonneg_margin,
        harnack_margin=harnack_margin,
    )


@dataclass
class FixedPointResult:
    u: GridFunction
    lam: float
    converged: bool
    residual: float
    iterations: int
    mode: str = "classical"
    damping: float = 1.0
    relaxed_residual: float | None = None
    chatter: dict = field(default_factory=dict)
    residual_history: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "converged": self.converged,
            "residual": self.residual,
            "iterations": self.iterations,
            "mode": self.mode,
            "damping": self.damping,
            "relaxed_residual": self.relaxed_residual,
            "chatter": self.chatter,
        }


def initial_guess(spec: ProblemSpec, grid_n: int = 257) -> GridFunction:
    """The vertex y sampled on the default grid (history pinned to omega)."""
    u = GridFunction.uniform(spec.r, grid_n)
    u.values = spec.vertex.eval_array(u.nodes)
    return u


def _pin_history(u: GridFunction, spec: ProblemSpec) -> GridFunction:
    u = u.copy()
    hist = u.nodes < 0.0
    if np.any(hist):
        u.values[hist] = np.asarray(spec.omega(u.nodes[hist]), dtype=float)
    u.values[u.nodes == 0.0] = spec.vertex.omega0
    return u


def estimate_lipschitz(spec: ProblemSpec, R: float, nt: int = 32, n: int = 17) -> float:
    """Largest sampled difference quotient of f in (u, v) over [0, R]^2."""
    t = (np.arange(nt) + 0.5) / nt
    g = np.linspace(0.0, R, n)
    h = g[1] - g[0]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        F = np.asarray(spec.f(t[:, None, None], g[None, :, None], g[None, None, :]), dtype=float)
    F = np.broadcast_to(F, (nt, n, n))
    du = np.abs(np.diff(F, axis=1)) / h
    dv = np.abs(np.diff(F, axis=2)) / h
    L = float(np.nanmax(du)) + float(np.nanmax(dv))
    return L if math.isfinite(L) else math.inf


def choose_damping(spec: ProblemSpec, lam: float, R: float) -> float:
    """Undamped iteration when the sampled Lipschitz bound makes y + lam T a contraction."""
    L = estimate_lipschitz(spec, R)
    return 1.0 if lam * L * GREEN_SUP < 1.0 else 0.5


def _apply(u, spec, kernel, cfg):
    return hammerstein_apply(u, spec, kernel, cfg).values


def _sup(x, mask):
    return float(np.max(np.abs(x[mask])))


def fixed_point_solve(
    spec: ProblemSpec,
    kernel: GreenKernel | None = None,
    lam: float = 1.0,
    u0: GridFunction | None = None,
    damping: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 2000,
    cfg: QuadConfig | None = None,
    grid_n: int = 257,
    sliding_rounds: int = 5,
) -> FixedPointResult:
    """Damped Picard iteration ``u <- (1 - theta) u + theta (y + lam T u)``.

    The history part of u is pinned to omega and never updated.  A period-2
    oscillation (``|u_{k+2} - u_k| < tol`` with residual >= tol) triggers the
    sliding-mode treatment.  Non-convergence is returned, not raised.
    """
    if lam < 0.0:
        raise DomainError("lambda must be non-negative")
    kernel = kernel or spec.kernel
    u = _pin_history(u0 if u0 is not None else initial_guess(spec, grid_n), spec)
    y = spec.vertex.eval_array(u.nodes)
    pos = u.nonneg
    if lam == 0.0:
        u.values[pos] = y[pos]
        return FixedPointResult(u, 0.0, True, 0.0, 1, damping=1.0)
    if damping is None:
        R = max(float(np.max(np.abs(u.values))), spec.omega_norm()) + 1.0
        damping = choose_damping(spec, lam, R)
    if not 0.0 < damping <= 1.0:
        raise DomainError("damping must lie in (0, 1]")
    history = []
    prev = prev2 = None
    best = math.inf
    rising = 0
    for k in range(max_iter):
        try:
            Tu = _apply(u, spec, kernel, cfg)
        except (ArithmeticError, FloatingPointError) as exc:
            return FixedPointResult(u, lam, False, math.inf, k, mode="diverged", damping=damping, chatter={"error": str(exc)}, residual_history=history)
        target = y + lam * Tu
        res = _sup(u.values - target, pos)
        history.append(res)
        if not math.isfinite(res) or res > DIVERGENCE_BOUND:
            return FixedPointResult(u, lam, False, res, k, mode="diverged", damping=damping, residual_history=history[-50:])
        if res < tol:
            return FixedPointResult(u, lam, True, res, k, damping=damping, residual_history=history[-50:])
        rising = rising + 1 if len(history) > 1 and res > history[-2] else 0
        best = min(best, res)
        if rising >= 25 and res > 10.0 * best:
            return FixedPointResult(u, lam, False, res, k, mode="diverged", damping=damping, residual_history=history[-50:])
        if prev2 is not None:
            period2 = _sup(u.values - prev2, pos) < tol and _sup(u.values - prev, pos) >= tol
            stalled = k >= 2 * STALL_WINDOW and min(history[-STALL_WINDOW:]) > 0.99 * min(history[:-STALL_WINDOW])
            if period2 or stalled:
                log.info("%s at lambda=%g after %d iterations", "period-2 chattering" if period2 else "stalled residual", lam, k)
                return _slide(spec, kernel, lam, u, u.copy(prev), y, tol, max_iter, cfg, damping, sliding_rounds, k, history)
        prev2, prev = prev, u.values.copy()
        new = u.copy()
        new.values[pos] = (1.0 - damping) * u.values[pos] + damping * target[pos]
        u = new
    return FixedPointResult(u, lam, False, history[-1], max_iter, mode="max-iter", damping=damping, residual_history=history[-50:])


def _envelope_bounds(spec, s, us, vs, eps):
    lo = np.empty_like(s)
    hi = np.empty_like(s)
    for i in range(s.size):
        iv = f_envelope(spec, float(s[i]), max(float(us[i]), 0.0), max(float(vs[i]), 0.0), eps, n=SLIDING_SAMPLES)
        lo[i], hi[i] = iv.lo, iv.hi
    return lo, hi


def _equivalent_control(spec, lam, s, us, eps, env_lo, env_hi):
    """Selection that keeps u on a nearby curve gamma: lam F = -gamma''."""
    target = 0.5 * (env_lo + env_hi)
    for c in spec.gamma_curves:
        inside = (s >= c.a) & (s <= c.b)
        if not np.any(inside):
            continue
        near = inside & (np.abs(us - np.asarray(c.value(s), dtype=float)) <= eps)
        if np.any(near):
            target = np.where(near, -np.asarray(c.second_derivative(s), dtype=float) / lam, target)
    return np.clip(target, env_lo, env_hi)


def relaxed_residual(u: GridFunction, spec: ProblemSpec, lam: float, eps: float, cfg: QuadConfig | None = None) -> float:
    """Distance from u to ``y + lam [T_lo u, T_hi u]`` (interval hull of the envelope)."""
    s, w, _, _ = integrand_samples(u, spec, cfg)
    us, vs = u.eval(s), deviated_values(u, spec, s)
    lo, hi = _envelope_bounds(spec, s, us, vs, eps)
    y = spec.vertex.eval_array(u.nodes)
    a = y + lam * green_apply(u.nodes, s, w * lo)
    b = y + lam * green_apply(u.nodes, s, w * hi)
    dist = np.maximum(np.maximum(a - u.values, u.values - b), 0.0)
    return float(np.max(dist[u.nonneg]))


def _relaxation_radius(u: GridFunction, spec: ProblemSpec, tol: float) -> float:
    """Envelope radius for the relaxed residual.

    Between nodes the piecewise-linear u departs from a curve it follows by up
    to ``h^2 max|gamma''| / 8``; the radius must cover that defect.
    """
    h = float(np.max(np.diff(u.nodes[u.nonneg])))
    curv = 0.0
    for c in spec.gamma_curves + spec.Gamma_curves:
        curv = max(curv, float(np.max(np.abs(np.asarray(c.second_derivative(c.samples(64)), dtype=float)))))
    return max(100.0 * tol, 1e-8, 2.0 * h * h * curv / 8.0)


def _slide(spec, kernel, lam, u, u_prev, y, tol, max_iter, cfg, damping, rounds, k0, history):
    pos = u.nonneg
    amp = _sup(u.values - u_prev.values, pos)
    eps = max(amp, 10.0 * tol)
    chatter = {"amplitude": amp, "rounds": 0, "nodes": []}
    it = k0
    for rnd in range(rounds):
        chat = pos & (np.abs(u.values - u_prev.values) > tol)
        chatter["rounds"] = rnd + 1
        chatter["nodes"] = [float(x) for x in u.nodes[chat]]
        idx = np.nonzero(chat)[0]
        sliding_intervals = np.zeros(u.nodes.size - 1, dtype=bool)
        sliding_intervals[idx[idx < u.nodes.size - 1]] = True
        sliding_intervals[idx[idx > 0] - 1] = True
        res = math.inf
        for _ in range(max_iter):
            it += 1
            s, w, F, _ = integrand_samples(u, spec, cfg)
            cell = np.clip(np.searchsorted(u.nodes, s, side="right") - 1, 0, u.nodes.size - 2)
            mask = sliding_intervals[cell]
            if np.any(mask):
                us = u.eval(s[mask])
                vs = deviated_values(u, spec, s[mask])
                lo, hi = _envelope_bounds(spec, s[mask], us, vs, eps)
                F = F.copy()
                F[mask] = _equivalent_control(spec, lam, s[mask], us, eps, lo, hi)
            target = y + lam * green_apply(u.nodes, s, w * F)
            new_res = _sup(u.values - target, pos)
            history.append(new_res)
            u_prev = u
            u = u.copy()
            u.values[pos] = (1.0 - damping) * u.values[pos] + damping * target[pos]
            if new_res < tol or abs(new_res - res) < 0.01 * tol:
                res = new_res
                break
            res = new_res
        rel = relaxed_residual(u, spec, lam, _relaxation_radius(u, spec, tol), cfg)
        if rel < tol:
            single = _sup(u.values - y - lam * _apply(u, spec, kernel, cfg), pos)
            chatter["selection_residual"] = res
            return FixedPointResult(u, lam, True, single, it, mode="sliding", damping=damping, relaxed_residual=rel, chatter=chatter, residual_history=history[-50:])
        eps *= 2.0
    single = _sup(u.values - y - lam * _apply(u, spec, kernel, cfg), pos)
    return FixedPointResult(u, lam, False, single, it, mode="chattering", damping=damping, relaxed_residual=rel, chatter=chatter, residual_history=history[-50:])


def norm_response(spec, kernel=None, lam=1.0, tol=1e-10, u0=None, **kwargs) -> float:
    """``|u_lam - y|_[0,1]``; raises ConvergenceError when the solve fails."""
    res = fixed_point_solve(spec, kernel, lam, u0=u0, tol=tol, **kwargs)
    if not res.converged:
        raise ConvergenceError(f"no fixed point at lambda={lam} ({res.mode})", report=res)
    y = spec.vertex.eval_array(res.u.nodes)
    return _sup(res.u.values - y, res.u.nonneg)


def boundary_solve(
    spec: ProblemSpec,
    kernel: GreenKernel | None = None,
    rho: float = 1.0,
    w0: GridFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 1000,
    cfg: QuadConfig | None = None,
    grid_n: int = 257,
    damping: float = 1.0,
) -> FixedPointResult:
    """Norm-constrained iteration for (lam, u) with ``|u - y|_[0,1] = rho``.

    ``w0`` is a starting displacement u - y (zero on the history).  The
    result's residual is ``|u - y - lam T u|``, which equals the last step.
    """
    kernel = kernel or spec.kernel
    if not rho > 0.0:
        raise DomainError("rho must be positive")
    base = _pin_history(initial_guess(spec, grid_n) if w0 is None else GridFunction(w0.nodes, spec.vertex.eval_array(w0.nodes)), spec)
    y = base.values.copy()
    pos = base.nonneg
    if w0 is None:
        w = _apply(base, spec, kernel, cfg)
    else:
        w = np.where(pos, w0.values, 0.0)
    scale = _sup(w, pos)
    if not scale > 0.0:
        raise HypothesisFailure("T vanishes at the starting point; no direction to follow")
    w = rho * w / scale
    history = []
    lam = math.nan
    for k in range(max_iter):
        u = base.copy(np.where(pos, y + w, y))
        try:
            Tu = _apply(u, spec, kernel, cfg)
        except ArithmeticError as exc:
            return FixedPointResult(u, lam, False, math.inf, k, mode="diverged", damping=damping, chatter={"error": str(exc)})
        nT = _sup(Tu, pos)
        if not (nT > 0.0 and math.isfinite(nT)):
            return FixedPointResult(u, lam, False, math.inf, k, mode="diverged", damping=damping)
        lam = rho / nT
        w_new = lam * Tu
        step = _sup(w_new - w, pos)
        history.append(step)
        if step < tol:
            return FixedPointResult(u, lam, True, step, k, mode="classical", damping=damping, residual_history=history[-50:])
        w = (1.0 - damping) * w + damping * w_new
        w = rho * w / _sup(w, pos)
    return FixedPointResult(u, lam, False, history[-1], max_iter, mode="max-iter", damping=damping, residual_history=history[-50:])


@dataclass
class EigenPair:
    lambda_star: float
    u_star: GridFunction
    residual: float
    norm_gap: float
    cone_cert: ConeCertificate
    rho: float
    method: str = "lambda-bisection"
    mode: str = "classical"
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "rho": self.rho,
            "residual": self.residual,
            "norm_gap": self.norm_gap,
            "method": self.method,
            "mode": self.mode,
            "iterations": self.iterations,
            "cone": self.cone_cert.to_dict(),
            "grid_n": int(np.sum(self.u_star.nonneg)),
        }


@dataclass
class ScanResult:
    pairs: list
    samples: list
    lambda_bar: float
    threshold: float | None
    diagnostics: list = field(default_factory=list)

    @property
    def failed_cells(self) -> list:
        return [s["lambda"] for s in self.samples if s["status"] != "converged"]


def _certify(spec, kernel, lam, u, rho, cfg, cone_tol, method, mode, iterations) -> EigenPair:
    y = spec.vertex.eval_array(u.nodes)
    pos = u.nonneg
    residual = _sup(u.values - y - lam * _apply(u, spec, kernel, cfg), pos)
    gap = abs(_sup(u.values - y, pos) - rho)
    return EigenPair(lam, u, residual, gap, cone_verify(u, spec.vertex, cone_tol), rho, method, mode, iterations)


def _accept(pair: EigenPair, solve_tol: float, tol: float, lambda_bar: float) -> list[str]:
    problems = []
    if pair.mode == "classical" and not pair.residual <= max(solve_tol, tol):
        problems.append(f"residual {pair.residual:.3e}")
    if not pair.norm_gap <= tol:
        problems.append(f"norm gap {pair.norm_gap:.3e}")
    if not pair.cone_cert.passed:
        problems.append("cone certificate failed")
    if not 0.0 < pair.lambda_star < lambda_bar:
        problems.append(f"lambda* {pair.lambda_star:.6g} outside (0, {lambda_bar:.6g})")
    return problems


def boundary_scan(
    spec: ProblemSpec,
    kernel: GreenKernel | None = None,
    bounds: BoundData | None = None,
    lambda_grid=None,
    tol: float = 1e-8,
    solve_tol: float = 1e-10,
    cfg: QuadConfig | None = None,
    grid_n: int = 257,
    threads: int = 1,
    max_iter: int = 2000,
    fallback: bool = True,
    grid_points: int = 24,
) -> ScanResult:
    """Locate eigenpairs ``(lam*, u*)`` with ``|u* - y|_[0,1] = rho``.

    Every sign change of ``n(lam) - rho`` between consecutive convergent grid
    points is refined by Brent's bracketing method.  With ``fallback`` the
    norm-constrained iteration is tried when no bracket exists.
    """
    if bounds is None:
        raise DomainError("bounds (rho, M, delta) are required")
    kernel = kernel or spec.kernel
    rho = bounds.rho
    diagnostics = []
    try:
        threshold = lambda_bar_threshold(rho, compute_delta_bar(bounds, kernel))
    except HypothesisFailure as exc:
        threshold = None
        diagnostics.append(f"delta_bar not positive: {exc}")
    if lambda_grid is None:
        lam_max = 1.25 * threshold if threshold else 10.0
        lambda_grid = np.linspace(lam_max / grid_points, lam_max, grid_points)
    grid = np.unique(np.asarray(lambda_grid, dtype=float))
    if np.any(grid <= 0.0):
        raise DomainError("lambda grid must be positive")
    lambda_bar = float(grid[-1])
    if threshold is not None and not lambda_bar > threshold:
        diagnostics.append(f"lambda_bar={lambda_bar:.6g} does not exceed rho/delta_bar={threshold:.6g}; existence is not guaranteed on this grid")

    start = initial_guess(spec, grid_n)
    solve_kw = dict(tol=solve_tol, max_iter=max_iter, cfg=cfg, grid_n=grid_n)
    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for lam, res in zip(grid, pool.map(lambda l: fixed_point_solve(spec, kernel, float(l), u0=start, **solve_kw), grid)):
                results[float(lam)] = res
    else:
        warm = start
        for lam in grid:
            res = fixed_point_solve(spec, kernel, float(lam), u0=warm, **solve_kw)
            results[float(lam)] = res
            if res.converged:
                warm = res.u

    y_cache = spec.vertex.eval_array(start.nodes)
    samples = []
    good = []
    for lam in grid:
        res = results[float(lam)]
        entry = {"lambda": float(lam), "status": "converged" if res.converged else res.mode, "iterations": res.iterations, "residual": res.residual, "n": None}
        if res.converged:
            entry["n"] = _sup(res.u.values - y_cache, res.u.nonneg)
            good.append((float(lam), entry["n"], res))
        samples.append(entry)
    bad = [s["lambda"] for s in samples if s["status"] != "converged"]
    if bad:
        diagnostics.append(f"{len(bad)} lambda cells without convergence (first at {bad[0]:.6g}); excluded from bracketing")

    pairs = []
    candidates = []
    for lam, n, r in good:
        if n == rho:
            candidates.append(_certify(spec, kernel, lam, r.u, rho, cfg, tol, "lambda-bisection", r.mode, r.iterations))
    for (la, na, ra), (lb, nb, rb) in zip(good[:-1], good[1:]):
        if (na - rho) * (nb - rho) >= 0.0:
            continue
        cache = {la: ra, lb: rb}

        def gap(lam):
            nearest = min(cache, key=lambda x: abs(x - lam))
            r = fixed_point_solve(spec, kernel, lam, u0=cache[nearest].u, **solve_kw)
            if not r.converged:
                raise ConvergenceError(f"no convergence at lambda={lam}", report=r)
            cache[lam] = r
            return _sup(r.u.values - y_cache, r.u.nonneg) - rho

        try:
            lam_star = brentq(gap, la, lb, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        except ConvergenceError as exc:
            diagnostics.append(f"bracket [{la:.6g}, {lb:.6g}] abandoned: {exc}")
            continue
        if lam_star not in cache:
            gap(lam_star)
        r = cache[lam_star]
        pair = _certify(spec, kernel, lam_star, r.u, rho, cfg, tol, "lambda-bisection", r.mode, r.iterations)
        if pair.norm_gap > tol:
            # steep n(lam) near a fold: finish on the sphere |u - y| = rho
            w0 = r.u.copy(r.u.values - y_cache)
            polished = boundary_solve(spec, kernel, rho, w0=w0, tol=solve_tol, cfg=cfg, grid_n=grid_n)
            if polished.converged:
                pair = _certify(spec, kernel, polished.lam, polished.u, rho, cfg, tol, "lambda-bisection+polish", polished.mode, polished.iterations)
        candidates.append(pair)
    for pair in candidates:
        problems = _accept(pair, solve_tol, tol, lambda_bar)
        if problems:
            diagnostics.append(f"candidate at lambda={pair.lambda_star:.10g} rejected: {', '.join(problems)}")
        else:
            pairs.append(pair)

    if not pairs and fallback:
        w0 = None
        if good:
            lam_g, n_g, r_g = max(good, key=lambda item: item[1])
            if n_g > 0.0:
                w0 = r_g.u.copy(r_g.u.values - y_cache)
        res = boundary_solve(spec, kernel, rho, w0=w0, tol=solve_tol, cfg=cfg, grid_n=grid_n)
        if res.converged:
            pair = _certify(spec, kernel, res.lam, res.u, rho, cfg, tol, "norm-constrained", res.mode, res.iterations)
            problems = _accept(pair, solve_tol, tol, lambda_bar)
            if problems:
                diagnostics.append(f"norm-constrained candidate lambda={res.lam:.10g} rejected: {', '.join(problems)}")
            else:
                diagnostics.append("no sign change of n(lambda)-rho on the grid; eigenpair found by the norm-constrained iteration")
                pairs.append(pair)
        else:
            diagnostics.append(f"norm-constrained iteration failed ({res.mode}, step {res.residual:.3e})")
    if not pairs:
        diagnostics.append("no eigenpair located: solver/resolution failure (existence holds when all hypotheses pass)")
    pairs.sort(key=lambda p: p.lambda_star)
    return ScanResult(pairs, samples, lambda_bar, threshold, diagnostics)


def power_iteration(spec: ProblemSpec, grid_n: int = 400, tol: float = 1e-12, max_iter: int = 10000, cfg: QuadConfig | None = None):
    """Dominant eigenvalue of the linear positive map ``u -> T u`` (f linear in u, y = 0).

    Returns ``(mu, v)`` with ``|v|_[0,1] = 1``.
    """
    v = GridFunction.uniform(spec.r, grid_n)
    pos = v.nonneg
    v.values = np.where(pos, v.nodes * (1.0 - v.nodes) * 4.0, 0.0)
    mu = 0.0
    for _ in range(max_iter):
        Tv = hammerstein_apply(v, spec, spec.kernel, cfg).values
        mu_new = _sup(Tv, pos) / _sup(v.values, pos)
        v = v.copy(Tv / _sup(Tv, pos))
        if abs(mu_new - mu) < tol * max(1.0, mu_new):
            return mu_new, v
        mu = mu_new
    raise ConvergenceError("power iteration did not converge")
