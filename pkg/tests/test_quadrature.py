import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hameig.catalog import const_f_problem, example_problem
from hameig.errors import DomainError, IntegrationError
from hameig.kernel import green_eval
from hameig.problem import ProblemSpec
from hameig.quadrature import GridFunction, QuadConfig, find_crossings, hammerstein_apply, integrate


def test_integrate_constant():
    assert integrate(lambda s: np.ones_like(s), 0.0, 1.0).value == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("rule", ["simpson", "gauss7"])
def test_integrate_inverse_sqrt(rule):
    cfg = QuadConfig(rule=rule, singularities=((0.0, -0.5),))
    res = integrate(lambda s: 1.0 / np.sqrt(s), 0.0, 1.0, cfg=cfg)
    assert abs(res.value - 2.0) < 1e-10
    assert res.error < 1e-10


def test_integrate_green_column():
    res = integrate(lambda s: np.array([green_eval(0.5, x) for x in s]), 0.0, 1.0, [0.5])
    assert abs(res.value - 0.125) < 1e-12


def test_integrate_reports_location():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda s: np.where(s > 0.5, np.inf, 1.0), 0.0, 1.0)
    assert info.value.location > 0.5


def test_integrate_rejects_bad_input():
    with pytest.raises(DomainError):
        integrate(np.sin, 1.0, 0.0)
    with pytest.raises(DomainError):
        integrate(np.sin, 0.0, 1.0, [2.0])
    with pytest.raises(DomainError):
        QuadConfig(panels=2)
    with pytest.raises(DomainError):
        QuadConfig(tol=0.0)


@given(st.floats(0.05, 0.95))
@settings(max_examples=30, deadline=None)
def test_integrate_additive_across_breakpoint(c):
    g = lambda s: np.exp(s) * np.cos(3 * s)
    whole = integrate(g, 0.0, 1.0)
    split = integrate(g, 0.0, 1.0, [c])
    assert abs(whole.value - split.value) <= max(whole.error, split.error, 1e-13)


def test_simpson_convergence_order():
    g = lambda s: np.exp(np.sin(3 * s))
    exact = integrate(g, 0.0, 1.0, cfg=QuadConfig(rule="gauss7", panels=64, tol=1e-15)).value
    errs = []
    for p in (8, 16, 32, 64):
        cfg = QuadConfig(panels=p, max_doublings=0)
        errs.append(abs(integrate(g, 0.0, 1.0, cfg=cfg).value - exact))
    orders = [math.log2(a / b) for a, b in zip(errs[:-1], errs[1:])]
    assert min(orders) >= 3.5


def test_gridfunction_invariants():
    g = GridFunction.uniform(0.5, 9)
    assert g.nodes[0] == -0.5 and g.nodes[-1] == 1.0 and 0.0 in g.nodes
    assert np.all(np.diff(g.nodes) > 0)
    assert np.allclose(np.diff(g.nodes), 1.0 / 8)
    with pytest.raises(DomainError):
        GridFunction(np.array([0.0, 0.5, 0.4, 1.0]), np.zeros(4))
    with pytest.raises(DomainError):
        GridFunction(np.array([0.1, 1.0]), np.zeros(2))
    f = GridFunction.from_function(lambda t: t**2, 0.0, 5)
    assert f.eval(0.25) == 0.0625 and f.eval(0.125) == pytest.approx(0.03125)


def test_find_crossings_refined():
    pts = np.linspace(0.0, 1.0, 11)
    roots = find_crossings(lambda s: s - 1.0 / math.pi, pts)
    assert len(roots) == 1 and abs(roots[0] - 1.0 / math.pi) < 1e-12


def test_constant_f_closed_form():
    spec, _ = const_f_problem(1.0)
    u = GridFunction.uniform(0.0, 257, values=np.linspace(0.0, 3.0, 257))
    Tu = hammerstein_apply(u, spec)
    t = Tu.nodes
    assert np.max(np.abs(Tu.values - t * (1 - t) / 2)) < 1e-12
    assert Tu.values.max() == pytest.approx(0.125)


def test_history_indicator_closed_form():
    from scipy.integrate import quad

    r = 0.3
    spec = ProblemSpec(
        f=lambda t, u, v: np.asarray(v, dtype=float) + 0.0 * np.asarray(t, dtype=float),
        sigma=lambda t: np.asarray(t, dtype=float) - r,
        omega=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        r=r,
    )
    u = GridFunction.uniform(r, 201)
    u.values = np.where(u.nodes <= 0.0, 1.0, 0.0)
    h = u.nodes[1] - u.nodes[0]
    Tu = hammerstein_apply(u, spec)
    t = Tu.nodes[Tu.nonneg]
    # int_0^r G(t,s) ds in closed form, plus the ramp u(s - r) = 1 - (s - r)/h on [r, r + h]
    exact = np.where(t <= r, (1 - t) * t**2 / 2 + t * ((r - t) - (r**2 - t**2) / 2), (1 - t) * r**2 / 2)
    ramp = np.array([quad(lambda s: green_eval(ti, s) * (1 - (s - r) / h), r, r + h, points=[ti] if r < ti < r + h else None, epsabs=1e-14)[0] for ti in t])
    assert np.max(np.abs(Tu.values[Tu.nonneg] - exact - ramp)) < 1e-8


def test_example_at_vertex_matches_oracle():
    from oracles import ExampleOracle

    spec, _ = example_problem(1.0)
    u = GridFunction.uniform(0.5, 257)
    u.values = spec.vertex.eval_array(u.nodes)
    Tu = hammerstein_apply(u, spec)
    oracle = ExampleOracle(257)
    ref = oracle.apply(oracle.y)
    mid = np.argmin(np.abs(Tu.nodes - 0.5))
    assert abs(Tu.values[mid] - ref[128]) < 1e-10
    assert np.max(np.abs(Tu.values[Tu.nonneg] - ref)) < 1e-9


def test_output_vanishes_on_history_and_is_nonnegative():
    spec, _ = example_problem(1.0)
    rng = np.random.default_rng(3)
    u = GridFunction.uniform(0.5, 129)
    u.values = spec.vertex.eval_array(u.nodes)
    u.values[u.nonneg] += rng.uniform(0, 1, u.nonneg.sum()) * np.sin(np.pi * u.nodes[u.nonneg])
    Tu = hammerstein_apply(u, spec)
    assert np.all(Tu.values[u.nodes <= 0] == 0.0)
    assert np.all(Tu.values >= 0.0)
