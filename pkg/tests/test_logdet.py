import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from conftest import pair, step_functions
from workbench.errors import NonZeroMean
from workbench.hilbert import hilbert_step
from workbench.logdet import (case_scale, kernel_k, logdet_analytic, logdet_identity_checks,
                              logdet_real, poisson_check, positivity_scan)
from workbench.stepfn import StepFunction, distribution_profile


def test_kernel_values():
    assert kernel_k(0) == 0.0
    assert kernel_k(2) == pytest.approx(2.0, abs=1e-15)
    assert kernel_k(1) == -math.inf


@settings(max_examples=100, deadline=None)
@given(r=st.floats(1e-8, 0.5), th=st.floats(0, 2 * math.pi))
def test_kernel_small_argument_series(r, th):
    # K(z) = -Re(z^2/2 + z^3/3 + ...) agrees with the direct formula where it is well conditioned
    z = r * complex(math.cos(th), math.sin(th))
    direct = math.log(abs(1 - z)) + z.real
    assert kernel_k(z) == pytest.approx(direct, abs=1e-15 + 1e-9 * abs(direct))
    assert abs(kernel_k(z)) <= 2 * r * r


def test_logdet_real_pair():
    for x in (2.0, 0.5, -3.0):
        assert logdet_real(pair(), x) == pytest.approx(math.log(abs(1 - x * x)), abs=1e-14)


def test_logdet_real_trivial_cases():
    assert logdet_real(pair(), 0.0) == 0.0
    assert logdet_real(StepFunction.indicator(0, 3, 2.0), 0.5) == -math.inf


def test_analytic_pair_at_i():
    # oracle: mpmath quadrature of K(i(g + iHg)) with the closed-form transform
    r = logdet_analytic(pair(), 1j)
    assert r.value == pytest.approx(1.3353166582285779, abs=1e-9)
    assert r.value >= 0


def test_analytic_trivial():
    assert logdet_analytic(pair(), 0).value == 0.0
    assert logdet_analytic(StepFunction.zero(), 1 + 1j).value == 0.0


@pytest.mark.parametrize("z", [0.3 + 0.4j, -1.2 + 0.1j, 2.5 - 1j])
def test_analytic_against_scipy(z):
    g = StepFunction([0.0, 0.5, 2.0, 2.25], [1.5, -0.25, -1.5])
    hg = hilbert_step(g)

    def integrand(t):
        f = g(np.array([t]))[0] + 1j * hg.evaluate(np.array([t]))[0]
        return float(kernel_k(z * f))

    ref = sum(integrate.quad(integrand, a, b, limit=400, epsabs=1e-12)[0]
              for a, b in [(-np.inf, -1), (-1, 0), (0, 0.5), (0.5, 2), (2, 2.25), (2.25, 4), (4, np.inf)])
    assert logdet_analytic(g, z).value == pytest.approx(ref, abs=1e-7)


def test_identity_battery_pair():
    recs = {r.name: r for r in logdet_identity_checks(pair())}
    assert set(recs) >= {"eq2_3a", "eq2_3b", "eq2_4", "eq2_5", "eq2_6"}
    assert all(r.passed for r in recs.values())


def test_identity_battery_nonzero_mean():
    with pytest.raises(NonZeroMean):
        logdet_identity_checks(StepFunction.indicator(0, 1))


def test_reciprocal_identity_sign_closed_form():
    # both sides equal ln|1 - 1/t^2| for the pair: the plus sign is the right one
    n = distribution_profile(pair())
    hn = hilbert_step(StepFunction(n.breakpoints, n.values))
    for t in (0.3, 1.7, -2.5):
        assert logdet_real(pair(), 1 / t) == pytest.approx(math.pi * hn.evaluate(np.array([t]))[0], abs=1e-13)
        assert logdet_real(pair(), 1 / t) == pytest.approx(math.log(abs(1 - 1 / t ** 2)), abs=1e-13)


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
def test_poisson_representation(y):
    direct, res = poisson_check(pair(), y)
    assert res.value == pytest.approx(direct, abs=1e-5)


def test_positivity_pair():
    low, _, _ = positivity_scan(pair(), (-3, 3, -3, 3), 500)
    assert low >= -1e-7


def test_positivity_zero():
    assert positivity_scan(StepFunction.zero(), (-3, 3, -3, 3), 500)[0] == 0.0


def test_positivity_far_region():
    g = pair()
    low, _, _ = positivity_scan(g, (-3e3, 3e3, -3e3, 3e3), 200)
    assert low >= -1e-6 * case_scale(g) * 1e3


@settings(max_examples=15, deadline=None)
@given(g=step_functions(max_blocks=5, zero_mean=True))
def test_identity_battery_property(g):
    if g.is_zero:
        return
    assert all(r.passed for r in logdet_identity_checks(g))
