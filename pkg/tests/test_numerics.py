import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from workbench.errors import PoleAtEndpoint, UnresolvedCell
from workbench.logdet import kernel_k
from workbench.numerics import (QuadratureSpec, integrate_adaptive, integrate_pv, max_on_circle,
                                solve_levels)


def test_constant_integrand():
    r = integrate_adaptive(lambda t: np.ones_like(t), 0.0, 1.0)
    assert r.converged and r.value == pytest.approx(1.0, abs=1e-14)


def test_log_singularity_matches_antiderivative():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14)
    r = integrate_adaptive(lambda t: np.log(np.abs(t)), -1.0, 1.0, known_singularities=[0.0], spec=spec)
    assert r.value == pytest.approx(-2.0, abs=1e-12)


def test_spurious_singularity_is_harmless():
    f = lambda t: np.exp(-t) * np.cos(3 * t)
    a = integrate_adaptive(f, 0.0, 2.0)
    b = integrate_adaptive(f, 0.0, 2.0, known_singularities=[5.0, 1.0])
    assert b.converged and b.value == pytest.approx(a.value, abs=1e-12)


def test_infinite_interval_against_scipy():
    f = lambda t: 1.0 / (1.0 + t * t) ** 1.5
    ref, _ = integrate.quad(lambda t: 1.0 / (1.0 + t * t) ** 1.5, 0, np.inf, epsabs=1e-13)
    assert integrate_adaptive(f, 0.0, math.inf).value == pytest.approx(ref, abs=1e-10)


def test_pv_odd_about_pole():
    r = integrate_pv(lambda t: 1.0 / (t - 0.5), 0.5, 0.0, 1.0)
    assert r.value == pytest.approx(0.0, abs=1e-12)


def test_pv_log_ratio():
    r = integrate_pv(lambda t: 1.0 / (t - 0.5), 0.5, 0.0, 2.0)
    assert r.value == pytest.approx(math.log(3.0), abs=1e-10)


def test_pv_pole_at_endpoint():
    with pytest.raises(PoleAtEndpoint):
        integrate_pv(lambda t: 1.0 / t, 0.0, 0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-5, -0.1), b=st.floats(0.1, 5), p=st.floats(-0.05, 0.05), c=st.floats(-2, 2))
def test_pv_smooth_numerator(a, b, p, c):
    # pv of (c + t)/(t - p) = (b - a) + (c + p) ln|(b - p)/(a - p)|
    r = integrate_pv(lambda t: (c + t) / (t - p), p, a, b)
    exact = (b - a) + (c + p) * math.log(abs((b - p) / (a - p)))
    assert r.value == pytest.approx(exact, abs=1e-8 * (1 + abs(exact)))


@settings(max_examples=40, deadline=None)
@given(coef=st.lists(st.floats(-3, 3), min_size=1, max_size=6), a=st.floats(-3, 0), w=st.floats(0.1, 4))
def test_polynomials_integrate_exactly(coef, a, w):
    b = a + w
    P = np.polynomial.Polynomial(coef)
    exact = P.integ()(b) - P.integ()(a)
    r = integrate_adaptive(P, a, b)
    assert r.value == pytest.approx(exact, abs=1e-11 * (1 + abs(exact)))


def test_solve_levels_atom_transform():
    F = lambda x: -1.0 / (math.pi * x)
    sol = solve_levels(F, [0.0], 1 / math.pi, (-math.inf, 0.0))
    assert [c.x for c in sol.crossings] == [pytest.approx(-1.0, abs=1e-12)]


def test_solve_levels_log_ratio():
    F = lambda x: np.log(np.abs((1 - x) / x)) / math.pi
    sol = solve_levels(F, [0.0, 1.0], 0.0, (0.0, 1.0))
    assert [c.x for c in sol.crossings] == [pytest.approx(0.5, abs=1e-12)]


def test_solve_levels_flat_segment_reports_nothing():
    try:
        sol = solve_levels(lambda x: np.full_like(x, 2.0), [], 2.0, (0.0, 1.0))
    except UnresolvedCell:
        return
    assert sol.crossings == []


@settings(max_examples=30, deadline=None)
@given(level=st.floats(-20, 20).filter(lambda v: abs(v) > 1e-3))
def test_solve_levels_tangent_inverse(level):
    # tan is increasing on (-pi/2, pi/2): exactly one crossing at atan(level)
    sol = solve_levels(np.tan, [-math.pi / 2, math.pi / 2], level, (-math.pi / 2, math.pi / 2))
    assert len(sol.crossings) == 1
    assert sol.crossings[0].x == pytest.approx(math.atan(level), abs=1e-10)


def _u_i(z):
    return kernel_k(np.asarray(z) / 1j)


def test_max_on_circle_single_atom():
    m, ang = max_on_circle(_u_i, 2.0)
    assert m == pytest.approx(2.0, abs=1e-9)
    assert ang % (2 * math.pi) == pytest.approx(math.pi / 2, abs=1e-6)


def test_max_on_circle_zero():
    m, _ = max_on_circle(lambda z: np.zeros(np.shape(z)), 1.0)
    assert m == 0.0


@pytest.mark.parametrize("r", [1e-3, 1e-4])
def test_max_on_circle_small_radius(r):
    m, _ = max_on_circle(_u_i, r)
    assert m / r < 10 * r


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0, rel_tol=0.0)
