"""Boundary value problem data and sampled checks of the existence hypotheses.

Problem: ``u'' + lam f(t, u(t), u(sigma(t))) = 0`` on [0, 1], ``u = omega`` on
[-r, 0], ``u(1) = 0``.  The checks below are finite-sample versions of the
bounds (H2)/(H3), the admissibility of discontinuity curves (H4) and the
deviated-argument condition (D).  "For a.a. t" statements are verified on
cell midpoints, so a passing check means "sampled", not "proved".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, HypothesisFailure
from .kernel import GreenKernel, VertexFunction
from .quadrature import QuadConfig, integrate

__all__ = [
    "DiscontinuityCurve",
    "ProblemSpec",
    "BoundData",
    "SamplingPlan",
    "CheckResult",
    "HypothesisReport",
    "DeltaBar",
    "compute_delta_bar",
    "lambda_bar_threshold",
    "abstract_lambda_threshold",
    "check_majorant",
    "check_minorant",
    "check_admissible_curve",
    "check_condition_D",
    "run_hypothesis_checks",
]

PASS, FAIL, NOT_CHECKABLE = "pass", "fail", "not-checkable"


@dataclass(frozen=True)
class DiscontinuityCurve:
    """Curve ``gamma`` on [a, b] across which f may jump.

    ``value`` and ``second_derivative`` are vectorised evaluators.  ``psi`` is
    optional; the checkers pick a default when it is missing.
    """

    a: float
    b: float
    value: Callable
    second_derivative: Callable
    epsilon: float = 0.1
    psi: Callable | None = None
    label: str = ""

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise DomainError(f"curve interval [{self.a}, {self.b}] not inside [0, 1]")
        if not self.epsilon > 0.0:
            raise DomainError("curve epsilon must be positive")

    def samples(self, n: int = 512) -> np.ndarray:
        """Cell midpoints of a uniform n-cell partition of [a, b]."""
        return self.a + (self.b - self.a) * (np.arange(n) + 0.5) / n


@dataclass
class ProblemSpec:
    """Data of the delay/deviated-argument BVP.

    All evaluators take and return numpy arrays (broadcasting).  ``f`` must be
    non-negative; ``sigma`` maps [0, 1] into [-r, 1]; ``omega`` is the
    non-negative history on [-r, 0].  ``sigma_slope`` is +1/-1 when sigma has
    constant slope (needed for condition (D)).
    """

    f: Callable
    sigma: Callable
    omega: Callable
    r: float = 0.0
    gamma_curves: Sequence[DiscontinuityCurve] = ()
    Gamma_curves: Sequence[DiscontinuityCurve] = ()
    sigma_slope: int | None = None
    sigma_kinks: Sequence[float] = ()
    singularities: tuple = ()
    name: str = "custom"
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.r >= 0.0:
            raise DomainError("r must be non-negative")
        if self.sigma_slope not in (None, 1, -1):
            raise DomainError("sigma_slope must be None, +1 or -1")
        self.gamma_curves = tuple(self.gamma_curves)
        self.Gamma_curves = tuple(self.Gamma_curves)
        self.singularities = tuple(tuple(p) for p in self.singularities)
        self._vertex = VertexFunction(self.omega, self.r)
        self._kernel = GreenKernel(self.r)

    @property
    def vertex(self) -> VertexFunction:
        return self._vertex

    @property
    def kernel(self) -> GreenKernel:
        return self._kernel

    def omega_norm(self, n: int = 1024) -> float:
        return self._vertex.history_norm(n)

    def validate(self, n: int = 257) -> list[str]:
        """Sampled invariant checks; returns a list of violations (empty if fine)."""
        issues = []
        t = np.linspace(0.0, 1.0, n)
        sig = np.asarray(self.sigma(t), dtype=float) * np.ones_like(t)
        if np.any(sig < -self.r - 1e-12) or np.any(sig > 1.0 + 1e-12):
            issues.append("sigma leaves [-r, 1]")
        _, hist = self._vertex.samples(n)
        if np.any(hist < 0.0):
            issues.append("omega takes negative values")
        tm = (np.arange(n) + 0.5) / n
        R = self.omega_norm() + 1.0
        grid = np.linspace(0.0, R, 9)
        vals = self.f(tm[:, None, None], grid[None, :, None], grid[None, None, :])
        if np.any(np.asarray(vals) < 0.0):
            issues.append("f takes negative values")
        for c in self.gamma_curves + self.Gamma_curves:
            if np.any(np.asarray(c.value(c.samples(n))) < -1e-12):
                issues.append(f"curve {c.label or '?'} is negative")
        return issues


@dataclass(frozen=True)
class BoundData:
    """Majorant ``M_rho`` on [0, 1] and minorant ``delta_rho`` on [1/4, 3/4]."""

    M_rho: Callable
    delta_rho: Callable
    rho: float
    M_label: str = ""
    delta_label: str = ""

    def __post_init__(self):
        if not self.rho > 0.0:
            raise DomainError("rho must be positive")


@dataclass(frozen=True)
class SamplingPlan:
    nt: int = 512
    nu: int = 17
    nv: int = 17
    ny: int = 9
    nz: int = 17
    tail: bool = True
    lambda_samples: int = 16
    omega_samples: int = 1024
    rel_tol: float = 1e-12
    zero_tol: float = 1e-12


@dataclass
class CheckResult:
    name: str
    status: str
    witness: dict | None = None
    mode: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "witness": self.witness, "mode": self.mode, "detail": self.detail}


class DeltaBar(NamedTuple):
    value: float
    t_max: float
    error: float


def _midpoints(a, b, n):
    return a + (b - a) * (np.arange(n) + 0.5) / n


def _box_radius(spec: ProblemSpec, rho: float, plan: SamplingPlan) -> float:
    return rho + spec.omega_norm(plan.omega_samples)


def compute_delta_bar(bounds: BoundData, kernel: GreenKernel, quad_cfg: QuadConfig | None = None, nt: int = 65, full: bool = False):
    """``sup_{t in [1/4,3/4]} int_{1/4}^{3/4} k(t,s) delta_rho(s) ds``.

    Evaluated on a uniform t-grid, then refined by bounded scalar maximisation
    around the best grid point (the profile is concave for delta_rho >= 0).
    """
    cfg = quad_cfg or QuadConfig(tol=1e-12)
    lo, hi = 0.25, 0.75
    errs = {}

    def profile(t):
        res = integrate(lambda s: kernel.eval_array(t, s) * bounds.delta_rho(s), lo, hi, [t], cfg)
        errs[t] = res.error
        return res.value

    ts = np.linspace(lo, hi, nt)
    vals = np.array([profile(t) for t in ts])
    k = int(np.argmax(vals))
    best_t, best = float(ts[k]), float(vals[k])
    a, b = float(ts[max(k - 1, 0)]), float(ts[min(k + 1, nt - 1)])
    if b > a:
        opt = minimize_scalar(lambda t: -profile(float(t)), bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        if -opt.fun > best:
            best_t, best = float(opt.x), float(-opt.fun)
    best = max(best, 0.0)
    if full:
        return DeltaBar(best, best_t, errs.get(best_t, 0.0))
    return best


def lambda_bar_threshold(rho: float, delta_bar: float) -> float:
    """Any admissible lambda-bar must exceed ``rho / delta_bar``."""
    if not delta_bar > 0.0:
        raise HypothesisFailure(f"delta_bar={delta_bar} is not positive")
    return rho / delta_bar


def abstract_lambda_threshold(c: float, sup_boundary_norm: float, inf_envelope_norm: float) -> float:
    if not inf_envelope_norm > 0.0:
        raise HypothesisFailure("envelope norm lower bound is not positive")
    return c * sup_boundary_norm / inf_envelope_norm


def _bound_check(name, spec, fn, t, R, plan, upper):
    u = np.linspace(0.0, R, plan.nu)
    v = np.linspace(0.0, R, plan.nv)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        F = np.asarray(spec.f(t[:, None, None], u[None, :, None], v[None, None, :]), dtype=float)
        F = np.broadcast_to(F, (t.size, u.size, v.size))
        B = np.asarray(fn(t), dtype=float) * np.ones_like(t)
    slack = plan.rel_tol * np.maximum(1.0, np.abs(B))
    B3 = B[:, None, None]
    viol = (F - B3 - slack[:, None, None]) if upper else (B3 - slack[:, None, None] - F)
    viol = np.where(np.isnan(viol), np.inf, viol)
    detail = {"t_range": [float(t[0]), float(t[-1])], "uv_range": [0.0, R], "samples": int(F.size), "sampled": True}
    if np.all(viol <= 0.0):
        return CheckResult(name, PASS, mode="sampled", detail=detail)
    i, j, k = np.unravel_index(int(np.argmax(viol)), viol.shape)
    witness = {"t": float(t[i]), "u": float(u[j]), "v": float(v[k]), "f": float(F[i, j, k]), "bound": float(B[i])}
    return CheckResult(name, FAIL, witness=witness, mode="sampled", detail=detail)


def check_majorant(spec: ProblemSpec, bounds: BoundData, plan: SamplingPlan | None = None) -> CheckResult:
    """(H2): ``f(t,u,v) <= M_rho(t)`` for t in [0,1], u, v in [0, rho + |omega|]."""
    plan = plan or SamplingPlan()
    t = _midpoints(0.0, 1.0, plan.nt)
    return _bound_check("H2", spec, bounds.M_rho, t, _box_radius(spec, bounds.rho, plan), plan, upper=True)


def check_minorant(spec: ProblemSpec, bounds: BoundData, plan: SamplingPlan | None = None) -> CheckResult:
    """(H3): ``f(t,u,v) >= delta_rho(t)`` for t in [1/4,3/4]."""
    plan = plan or SamplingPlan()
    t = _midpoints(0.25, 0.75, plan.nt)
    return _bound_check("H3-minorant", spec, bounds.delta_rho, t, _box_radius(spec, bounds.rho, plan), plan, upper=False)


def _f_range(fn, t, centre, eps, R, plan):
    """Per-t min and max of ``fn(t, y, z)`` over y in [centre-eps, centre+eps] (clipped at 0), z in [0, R] + tail."""
    s = np.linspace(-1.0, 1.0, plan.ny)
    y = np.maximum(centre[:, None] + eps * s[None, :], 0.0)
    z = np.linspace(0.0, R, plan.nz)
    if plan.tail:
        z = np.append(z, 10.0 * R)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        F = np.asarray(fn(t[:, None, None], y[:, :, None], z[None, None, :]), dtype=float)
    F = np.broadcast_to(F, (t.size, y.shape[1], z.size))
    F = np.where(np.isnan(F), np.inf, F)
    return F.min(axis=(1, 2)), F.max(axis=(1, 2)), z


def _admissibility(name, t, gamma, gpp, eps, psi_vals, psi_desc, lams, fn, R, plan):
    """Test eq_ad1 / eq_ad2 at every t sample for every lambda in ``lams``."""
    detail = {"psi": psi_desc, "z_range": [0.0, R], "tail_probe": 10.0 * R if plan.tail else None, "sampled": True, "lambdas": [float(x) for x in lams]}
    if np.any(~(psi_vals > 0.0)):
        i = int(np.argmax(~(psi_vals > 0.0)))
        return CheckResult(name, FAIL, witness={"t": float(t[i]), "psi": float(psi_vals[i])}, mode="none", detail=detail)
    fmin, fmax, _ = _f_range(fn, t, gamma, eps, R, plan)
    worst = None
    for mode in ("eq_ad1", "eq_ad2"):
        ok = True
        for lam in lams:
            if mode == "eq_ad1":
                gap = lam * fmin - (-gpp + psi_vals)
            else:
                gap = (-gpp - psi_vals) - lam * fmax
            if not np.all(gap > 0.0):
                ok = False
                i = int(np.argmin(gap))
                cand = {"mode": mode, "t": float(t[i]), "lambda": float(lam), "gap": float(gap[i])}
                if worst is None or cand["gap"] > worst["gap"]:
                    worst = cand
                break
        if ok:
            return CheckResult(name, PASS, mode=mode, detail=detail)
    return CheckResult(name, FAIL, witness=worst, mode="none", detail=detail)


def _lambda_list(lam):
    return np.atleast_1d(np.asarray(lam, dtype=float))


def check_admissible_curve(
    curve: DiscontinuityCurve,
    spec: ProblemSpec,
    lam,
    rho: float,
    plan: SamplingPlan | None = None,
    psi: Callable | None = None,
    minorant: Callable | None = None,
) -> CheckResult:
    """lambda-admissibility of ``curve`` (one lambda or an array of lambdas).

    ``gamma'' > 0`` at every sample passes for all lambda > 0 with
    ``psi = gamma''/2``.  Otherwise psi is, in order of preference: the
    ``psi`` argument, ``curve.psi``, ``lam * minorant``.
    """
    plan = plan or SamplingPlan()
    lams = _lambda_list(lam)
    if np.any(lams <= 0.0):
        raise DomainError("lambda must be positive")
    name = f"admissible[{curve.label}]" if curve.label else "admissible"
    t = curve.samples(plan.nt)
    gpp = np.asarray(curve.second_derivative(t), dtype=float) * np.ones_like(t)
    if np.all(gpp > 0.0):
        return CheckResult(name, PASS, mode="convexity-shortcut", detail={"psi": "gamma''/2", "lambda_independent": True})
    R = _box_radius(spec, rho, plan)
    gamma = np.asarray(curve.value(t), dtype=float) * np.ones_like(t)
    psi_fn = psi or curve.psi
    if psi_fn is not None:
        psi_rows = [np.asarray(psi_fn(t), dtype=float) * np.ones_like(t)] * len(lams)
        desc = "supplied"
    elif minorant is not None:
        base = np.asarray(minorant(t), dtype=float) * np.ones_like(t)
        psi_rows = [lam_k * base for lam_k in lams]
        desc = "lambda*delta"
    else:
        return CheckResult(name, NOT_CHECKABLE, mode="none", detail={"reason": "no psi available"})
    # psi may depend on lambda, so test each lambda separately
    result = None
    for lam_k, psi_vals in zip(lams, psi_rows):
        result = _admissibility(name, t, gamma, gpp, curve.epsilon, psi_vals, desc, [lam_k], spec.f, R, plan)
        if not result.passed:
            result.detail["lambdas"] = [float(x) for x in lams]
            return result
    result.detail["lambdas"] = [float(x) for x in lams]
    return result


def _sigma_on(spec, t):
    return np.asarray(spec.sigma(t), dtype=float) * np.ones_like(t)


def check_condition_D(
    spec: ProblemSpec,
    lam,
    rho: float,
    plan: SamplingPlan | None = None,
    minorant: Callable | None = None,
) -> list[CheckResult]:
    """Condition (D) for every curve in ``spec.Gamma_curves``.

    (a) ``Gamma(t) != omega(sigma(t))`` off isolated points where sigma(t) <= 0:
    fails on two consecutive samples with a zero difference.
    (b) admissibility with ``f(sigma(t), ., .)`` where sigma(t) >= 0.
    """
    plan = plan or SamplingPlan()
    if spec.sigma_slope not in (1, -1):
        return [CheckResult("D", NOT_CHECKABLE, mode="none", detail={"reason": "sigma lacks constant slope +-1"})]
    lams = _lambda_list(lam)
    R = _box_radius(spec, rho, plan)
    out = []
    for c in spec.Gamma_curves:
        name = f"D[{c.label}]" if c.label else "D"
        t = c.samples(plan.nt)
        sig = _sigma_on(spec, t)
        sub = {}
        hist = sig <= 0.0
        if np.any(hist):
            th = t[hist]
            d = np.asarray(c.value(th), dtype=float) - np.asarray(spec.omega(sig[hist]), dtype=float)
            zero = np.abs(d) <= plan.zero_tol * np.maximum(1.0, np.abs(np.asarray(c.value(th), dtype=float)))
            plateau = zero[:-1] & zero[1:]
            if np.any(plateau):
                i = int(np.argmax(plateau))
                sub["a"] = {"status": FAIL, "witness": {"t": float(th[i]), "t_next": float(th[i + 1])}}
            else:
                sub["a"] = {"status": PASS, "isolated_zeros": int(zero.sum()), "sign_changes": int(np.sum(np.sign(d[:-1]) * np.sign(d[1:]) < 0))}
        else:
            sub["a"] = {"status": PASS, "note": "empty"}
        fwd = sig >= 0.0
        if np.any(fwd):
            tf = t[fwd]
            gpp = np.asarray(c.second_derivative(tf), dtype=float) * np.ones_like(tf)
            if np.all(gpp > 0.0):
                sub["b"] = {"status": PASS, "mode": "convexity-shortcut"}
            else:
                gamma = np.asarray(c.value(tf), dtype=float) * np.ones_like(tf)
                sig_f = sig[fwd]
                fn = lambda tt, y, z, sig_f=sig_f: spec.f(sig_f[:, None, None], y, z)
                res = None
                psi_fn = c.psi
                for lam_k in lams:
                    if psi_fn is not None:
                        psi_vals, desc = np.asarray(psi_fn(tf), dtype=float) * np.ones_like(tf), "supplied"
                    elif minorant is not None:
                        psi_vals, desc = lam_k * np.asarray(minorant(sig_f), dtype=float) * np.ones_like(tf), "lambda*delta(sigma)"
                    else:
                        res = CheckResult(name, NOT_CHECKABLE, detail={"reason": "no psi available"})
                        break
                    res = _admissibility(name, tf, gamma, gpp, c.epsilon, psi_vals, desc, [lam_k], fn, R, plan)
                    if not res.passed:
                        break
                sub["b"] = {"status": res.status, "mode": res.mode, "witness": res.witness}
        else:
            sub["b"] = {"status": PASS, "note": "empty"}
        statuses = {sub["a"]["status"], sub["b"]["status"]}
        status = FAIL if FAIL in statuses else (NOT_CHECKABLE if NOT_CHECKABLE in statuses else PASS)
        witness = None
        if status == FAIL:
            witness = sub["a"].get("witness") if sub["a"]["status"] == FAIL else sub["b"].get("witness")
        out.append(CheckResult(name, status, witness=witness, mode="sampled", detail=sub))
    return out


@dataclass
class HypothesisReport:
    rho: float
    omega_norm: float
    delta_bar: float
    lambda_bar_threshold: float | None
    lambda_bar: float | None
    checks: list = field(default_factory=list)
    M_label: str = ""
    delta_label: str = ""
    assumptions: list = field(default_factory=list)
    problem: str = ""

    @property
    def passed(self) -> bool:
        return self.delta_bar > 0.0 and all(c.status != FAIL for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "rho": self.rho,
            "omega_norm": self.omega_norm,
            "M_rho": self.M_label,
            "delta_rho": self.delta_label,
            "delta_bar": self.delta_bar,
            "lambda_bar_threshold": self.lambda_bar_threshold,
            "lambda_bar": self.lambda_bar,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "assumptions": list(self.assumptions),
        }

    def render(self) -> str:
        lines = [f"problem: {self.problem}", f"rho = {self.rho:g}", f"|omega|_[-r,0] = {self.omega_norm:.12g}"]
        if self.M_label:
            lines.append(f"M_ρ(t)={self.M_label}")
        if self.delta_label:
            lines.append(f"δ(t)={self.delta_label}")
        lines.append(f"delta_bar = {self.delta_bar:.15g}")
        if self.lambda_bar_threshold is not None:
            lines.append(f"rho/delta_bar = {self.lambda_bar_threshold:.15g}")
            lines.append(f"lambda_bar (checked) = {self.lambda_bar:.15g}")
        for c in self.checks:
            line = f"  [{c.status:>13}] {c.name}"
            if c.mode:
                line += f"  ({c.mode})"
            if c.witness:
                line += f"  witness={c.witness}"
            lines.append(line)
        for a in self.assumptions:
            lines.append(f"  note: {a}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def run_hypothesis_checks(
    spec: ProblemSpec,
    bounds: BoundData,
    lambda_bar: float | None = None,
    plan: SamplingPlan | None = None,
    quad_cfg: QuadConfig | None = None,
) -> HypothesisReport:
    """Run every sampled check and collect the constants delta_bar and rho/delta_bar.

    ``lambda_bar`` defaults to 1.25 * rho/delta_bar; admissibility is tested on
    ``lambda_bar * k / plan.lambda_samples``, k = 1..lambda_samples.
    """
    plan = plan or SamplingPlan()
    rho = bounds.rho
    checks = [check_majorant(spec, bounds, plan), check_minorant(spec, bounds, plan)]
    dbar = compute_delta_bar(bounds, spec.kernel, quad_cfg)
    assumptions = [
        "(H1) measurability of compositions is assumed, not checked",
        "a.a.-t conditions verified on cell-midpoint samples; z in [0, rho+|omega|] plus a tail probe stands in for z in [0, inf)",
    ]
    threshold = None
    if dbar > 0.0:
        threshold = lambda_bar_threshold(rho, dbar)
        checks.append(CheckResult("H3", PASS, mode="delta_bar>0", detail={"delta_bar": dbar}))
        if lambda_bar is None:
            lambda_bar = 1.25 * threshold
        if not lambda_bar > threshold:
            checks.append(CheckResult("H4-lambda_bar", FAIL, witness={"lambda_bar": lambda_bar, "threshold": threshold}))
    else:
        checks.append(CheckResult("H3", FAIL, witness={"delta_bar": dbar}, mode="delta_bar>0"))
    lam_for_curves = lambda_bar if lambda_bar is not None else 1.0
    lams = lam_for_curves * np.arange(1, plan.lambda_samples + 1) / plan.lambda_samples
    needs_lambda_sampling = False
    for c in spec.gamma_curves:
        res = check_admissible_curve(c, spec, lams, rho, plan, minorant=bounds.delta_rho)
        res.name = "H4:" + res.name
        needs_lambda_sampling |= res.mode in ("eq_ad1", "eq_ad2")
        checks.append(res)
    if spec.Gamma_curves:
        for res in check_condition_D(spec, lams, rho, plan, minorant=bounds.delta_rho):
            checks.append(res)
    if needs_lambda_sampling:
        assumptions.append(f"admissibility verified on {plan.lambda_samples} lambda samples in (0, lambda_bar], not uniformly")
    return HypothesisReport(
        rho=rho,
        omega_norm=spec.omega_norm(plan.omega_samples),
        delta_bar=dbar,
        lambda_bar_threshold=threshold,
        lambda_bar=lambda_bar,
        checks=checks,
        M_label=bounds.M_label,
        delta_label=bounds.delta_label,
        assumptions=assumptions,
        problem=spec.name,
    )
