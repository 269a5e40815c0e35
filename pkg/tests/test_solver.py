import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hameig.catalog import const_f_problem, eigendir_problem, example_problem, gh_split_problem
from hameig.errors import ConvergenceError
from hameig.problem import DiscontinuityCurve, ProblemSpec
from hameig.quadrature import GridFunction
from hameig.solver import (
    boundary_scan,
    boundary_solve,
    choose_damping,
    cone_verify,
    fixed_point_solve,
    initial_guess,
    norm_response,
    power_iteration,
)

EXAMPLE_LAMBDA_STAR_257 = 2.1276344242  # oracle run, 257 nodes, rho = 1


@pytest.fixture(scope="module")
def example():
    return example_problem(1.0)


@pytest.fixture(scope="module")
def oracle_lambda_01():
    from oracles import ExampleOracle

    oracle = ExampleOracle(1025)
    return oracle.t, oracle.picard(0.1)


def test_lambda_zero_returns_vertex(example):
    spec, _ = example
    res = fixed_point_solve(spec, lam=0.0)
    assert res.converged and res.iterations == 1
    assert np.array_equal(res.u.values, spec.vertex.eval_array(res.u.nodes))
    assert norm_response(spec, lam=0.0) == 0.0


@pytest.mark.parametrize("lam", [0.5, 3.0, 8.0])
def test_constant_f_closed_form(lam):
    spec, _ = const_f_problem(1.0)
    res = fixed_point_solve(spec, lam=lam, tol=1e-12)
    t = res.u.nodes
    assert res.converged and res.residual < 1e-12
    assert np.max(np.abs(res.u.values - lam * t * (1 - t) / 2)) < 1e-12
    assert norm_response(spec, lam=lam) == pytest.approx(lam / 8, abs=1e-12)


def test_example_small_lambda_matches_fine_oracle(example, oracle_lambda_01):
    spec, _ = example
    res = fixed_point_solve(spec, lam=0.1, tol=1e-10)
    assert res.converged and res.residual < 1e-8
    t, ref = oracle_lambda_01
    # the 257 nodes are every 4th node of the oracle grid
    assert np.max(np.abs(res.u.values[res.u.nonneg] - ref[::4])) < 1e-6
    n_ref = np.max(ref - (1 - t))
    assert abs(norm_response(spec, lam=0.1) - n_ref) < 1e-6


def test_non_convergence_is_reported(example):
    spec, _ = example
    res = fixed_point_solve(spec, lam=5.0, max_iter=300)
    assert not res.converged and res.mode in ("diverged", "max-iter")
    with pytest.raises(ConvergenceError) as info:
        norm_response(spec, lam=5.0, max_iter=300)
    assert info.value.report.mode == res.mode


@given(st.lists(st.floats(0.0, 5.0), min_size=5, max_size=5))
@settings(max_examples=10, deadline=None)
def test_history_stays_pinned(noise):
    spec, _ = example_problem(1.0)
    u0 = initial_guess(spec, 33)
    hist = u0.nodes < 0
    u0.values[np.nonzero(hist)[0][: len(noise)]] += noise
    res = fixed_point_solve(spec, lam=0.5, u0=u0, max_iter=50)
    assert np.array_equal(res.u.values[hist], spec.omega(res.u.nodes[hist]))
    assert res.u.values[res.u.nodes == 0.0][0] == spec.vertex.omega0


def test_damping_choice():
    spec, _ = const_f_problem(1.0)
    assert choose_damping(spec, 100.0, 2.0) == 1.0
    spec, _ = eigendir_problem(1.0, ftilde="u")
    assert choose_damping(spec, 1.0, 2.0) == 1.0
    assert choose_damping(spec, 20.0, 2.0) == 0.5


def test_cone_verify_examples():
    spec, _ = example_problem(1.0)
    y = spec.vertex
    u = initial_guess(spec, 65)
    assert cone_verify(u, y).passed
    bump = u.copy(u.values + np.where(u.nonneg, u.nodes * (1 - u.nodes), 0.0))
    cert = cone_verify(bump, y)
    assert cert.passed and cert.harnack_margin == pytest.approx(3 / 16 - 1 / 16)
    late = u.copy(u.values + np.where(u.nonneg, np.maximum(0.0, u.nodes - 0.9), 0.0))
    cert = cone_verify(late, y)
    assert cert.history_pinned and cert.nonneg and not cert.harnack
    moved = u.copy(u.values + np.where(u.nodes < 0, 1e-3, 0.0))
    assert not cone_verify(moved, y).history_pinned
    dip = u.copy(u.values - np.where(u.nonneg, 1e-3 * u.nodes * (1 - u.nodes), 0.0))
    assert not cone_verify(dip, y).nonneg


def relay_problem(A=4.0, c=0.2):
    gamma = lambda t: c * np.asarray(t, dtype=float) * (1 - np.asarray(t, dtype=float))
    return ProblemSpec(
        f=lambda t, u, v: A * (np.asarray(u) < gamma(t)) * np.ones_like(np.asarray(t, dtype=float)),
        sigma=lambda t: np.asarray(t, dtype=float),
        omega=lambda t: 0.0 * np.asarray(t, dtype=float),
        gamma_curves=[DiscontinuityCurve(0.0, 1.0, gamma, lambda t: -2 * c * np.ones_like(np.asarray(t, dtype=float)))],
    ), gamma


@pytest.mark.parametrize("damping", [1.0, None])
def test_relay_chatter_resolved_as_sliding_mode(damping):
    spec, gamma = relay_problem()
    res = fixed_point_solve(spec, lam=1.0, damping=damping, tol=1e-10)
    assert res.converged and res.mode == "sliding"
    assert res.relaxed_residual < 1e-10
    assert np.max(np.abs(res.u.values - gamma(res.u.nodes))) < 1e-10
    # the single-valued residual is not small: u sits on the jump of f
    assert res.residual > 0.1
    assert res.chatter["rounds"] >= 1


def test_boundary_solve_example(example):
    spec, _ = example
    res = boundary_solve(spec, rho=1.0, tol=1e-11)
    y = spec.vertex.eval_array(res.u.nodes)
    assert res.converged
    assert abs(np.max(res.u.values - y) - 1.0) < 1e-12
    assert abs(res.lam - EXAMPLE_LAMBDA_STAR_257) < 1e-9


@pytest.mark.parametrize("rho,expected", [(1.0, 8.0), (2.0, 16.0), (0.5, 4.0)])
def test_scan_constant_f(rho, expected):
    spec, b = const_f_problem(rho)
    scan = boundary_scan(spec, bounds=b)
    assert len(scan.pairs) == 1
    pair = scan.pairs[0]
    assert abs(pair.lambda_star - expected) < 1e-9 and pair.cone_cert.passed
    assert pair.method == "lambda-bisection"


def test_scan_eigendir_unit_forcing():
    spec, b = eigendir_problem(1.0)
    (pair,) = boundary_scan(spec, bounds=b).pairs
    assert abs(pair.lambda_star - 8.0) < 1e-9


def test_scan_root_on_grid_point():
    spec, b = const_f_problem(1.0)
    scan = boundary_scan(spec, bounds=b, lambda_grid=np.linspace(1, 12, 12))
    assert [p.lambda_star for p in scan.pairs] == [8.0]


def _assert_pair_invariants(scan, tol, solve_tol=1e-10):
    for p in scan.pairs:
        assert p.residual <= max(tol, solve_tol)
        assert p.norm_gap <= tol
        assert p.cone_cert.passed
        assert 0 < p.lambda_star < scan.lambda_bar


def test_scan_gh_split_monotone_and_threads():
    spec, b = gh_split_problem(1.0)
    serial = boundary_scan(spec, bounds=b, threads=1)
    n = [s["n"] for s in serial.samples]
    assert all(x is not None for x in n)
    assert np.all(np.diff(n) >= -1e-12)
    _assert_pair_invariants(serial, 1e-8)
    parallel = boundary_scan(spec, bounds=b, threads=4)
    assert len(parallel.pairs) == len(serial.pairs) == 1
    assert abs(parallel.pairs[0].lambda_star - serial.pairs[0].lambda_star) < 1e-8


def test_scan_example_fallback(example):
    spec, b = example
    scan = boundary_scan(spec, bounds=b)
    assert scan.pairs
    _assert_pair_invariants(scan, 1e-8)
    pair = scan.pairs[0]
    assert abs(pair.lambda_star - EXAMPLE_LAMBDA_STAR_257) < 1e-8
    assert pair.method == "norm-constrained"
    assert scan.failed_cells and any("norm-constrained" in d for d in scan.diagnostics)


def test_scan_reports_unreachable_level():
    spec, b = const_f_problem(1.0)
    scan = boundary_scan(spec, bounds=b, lambda_grid=np.linspace(0.5, 4.0, 8), fallback=False)
    assert scan.pairs == []
    assert any("resolution failure" in d for d in scan.diagnostics)
    assert any("does not exceed" in d for d in scan.diagnostics)


def test_grid_refinement_constant_f():
    spec, b = const_f_problem(1.0)
    a = boundary_scan(spec, bounds=b, grid_n=257).pairs[0].lambda_star
    c = boundary_scan(spec, bounds=b, grid_n=513).pairs[0].lambda_star
    assert abs(a - c) < 10 * 1e-8


def test_grid_refinement_gh_split():
    # piecewise-linear discretisation error is O(h^2) ~ 1e-5 here
    spec, b = gh_split_problem(1.0)
    a = boundary_scan(spec, bounds=b, grid_n=257).pairs[0].lambda_star
    c = boundary_scan(spec, bounds=b, grid_n=513).pairs[0].lambda_star
    assert abs(a - c) < 1e-4


def test_power_iteration_dirichlet():
    spec, _ = eigendir_problem(1.0, ftilde="u")
    mu, v = power_iteration(spec, grid_n=400)
    assert abs(mu - 1 / np.pi**2) < 1e-4
    t = v.nodes
    assert np.max(np.abs(v.values - np.sin(np.pi * t) / np.max(np.sin(np.pi * t)))) < 1e-3
