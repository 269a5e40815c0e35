from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hameig.catalog import (
    RationalEnumeration,
    calkin_wilf,
    eigendir_problem,
    example_problem,
    get_problem,
    gh_split_problem,
    list_catalog,
    phi_eval,
)
from hameig.errors import DomainError


def test_calkin_wilf_prefix():
    assert calkin_wilf(8) == [Fraction(1), Fraction(1, 2), Fraction(2), Fraction(1, 3), Fraction(3, 2), Fraction(2, 3), Fraction(3), Fraction(1, 4)]


def test_enumeration_matches_stern_oracle():
    from oracles import rationals

    assert tuple(RationalEnumeration(200).rationals) == rationals(200)


def test_enumeration_distinct_and_covers_small_rationals():
    q = RationalEnumeration(4001).rationals
    assert len(set(q)) == len(q)
    for a in range(-5, 6):
        for b in range(1, 6):
            assert Fraction(a, b) in q


def test_phi_trivial_bounds():
    enum = RationalEnumeration(40)
    assert phi_eval(enum.q.min() - 1.0) == 0.0
    assert phi_eval(enum.q.max() + 1.0) == 1.0 - 2.0**-40
    assert phi_eval(0.5) >= 0.5
    with pytest.raises(DomainError):
        RationalEnumeration(0)


@given(st.floats(-50, 50, allow_nan=False))
@settings(max_examples=200)
def test_phi_matches_direct_sum(x):
    from oracles import phi_reference

    assert phi_eval(x, 40) == pytest.approx(phi_reference(x, 40), abs=1e-15)


@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=50))
def test_phi_monotone(xs):
    xs = np.sort(np.array(xs))
    assert np.all(np.diff(phi_eval(xs)) >= 0.0)


def test_phi_strict_at_rationals():
    enum = RationalEnumeration(40)
    assert enum[1] == 0
    assert enum.phi(0.0) == enum.phi(-1e-300)
    assert enum.phi(1e-12) - enum.phi(0.0) == pytest.approx(0.5)


def test_example_data():
    spec, b = example_problem(1.0)
    assert spec.r == 0.5 and spec.sigma_slope == 1
    assert spec.singularities == ((0.0, -0.5),)
    assert spec.omega_norm() == 1.0
    assert b.M_label == "2/√t+8" and b.delta_label == "1/√t"
    t = np.linspace(0.01, 1, 50)
    assert np.allclose(b.M_rho(t), 2 / np.sqrt(t) + 8)
    assert np.allclose(spec.sigma(t), t - 0.5)
    # below every truncated q_n
    assert spec.f(0.25, 0.0625 - 1000.0, 0.0625 - 1000.0) == pytest.approx(4.0)
    assert spec.vertex.eval(0.5) == 0.5
    with pytest.raises(DomainError):
        example_problem(0.0)


def test_example_curves():
    spec, _ = example_problem(1.0, depth=40)
    assert len(spec.gamma_curves) == len(spec.Gamma_curves) <= 40
    for c in spec.gamma_curves:
        t = c.samples(33)
        assert np.all(c.value(t) >= -1e-15)
        assert np.all(c.second_derivative(t) == 2.0)


@given(st.floats(0.01, 1.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
@settings(max_examples=200)
def test_example_bounds_and_depth_stability(t, u, v):
    spec, b = example_problem(1.0)
    fv = spec.f(t, u, v)
    assert 1 / np.sqrt(t) - 1e-12 <= fv <= b.M_rho(t) + 1e-12
    spec41, _ = example_problem(1.0, depth=41)
    assert abs(spec41.f(t, u, v) - fv) <= (1 / np.sqrt(t) + u**3) * 2.0**-40 * (1 + 1e-12)


def test_other_catalog_entries():
    assert set(list_catalog()) == {"example-delay-phi", "eigendir", "gh-split", "const-f"}
    spec, b = eigendir_problem(1.0, ftilde="1 + u")
    assert spec.f(0.5, 0.5, 0.0) == 1.5
    assert b.M_rho(0.3) == pytest.approx(2.0) and b.delta_rho(0.3) == pytest.approx(1.0)
    spec, b = gh_split_problem(1.0)
    assert spec.f(0.5, 0.75, 0.0) == pytest.approx(2.0)
    assert spec.f(0.5, 1.5, 1.0) == pytest.approx(3.0)
    assert [c.value(0.3) for c in spec.gamma_curves] == [0.5, 1.0]
    assert get_problem("const-f", 1.0)[0].name == "const-f"
    with pytest.raises(DomainError):
        get_problem("nope", 1.0)
