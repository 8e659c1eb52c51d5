import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import pair, step_functions
from workbench.errors import Divergent, SingularPoint
from workbench.hilbert import (Segments, TailedProfile, hilbert_measure, hilbert_step, hilbert_tailed,
                               inverse_hilbert_regularized, l1_norm_transform)
from workbench.linemeasure import RealLineMeasure
from workbench.numerics import integrate_pv
from workbench.stepfn import StepFunction


def test_symmetric_point():
    assert hilbert_step(StepFunction.indicator(0, 1)).evaluate(np.array([0.5]))[0] == pytest.approx(0, abs=1e-15)


def test_outside_point_against_pv_quadrature():
    v = hilbert_step(StepFunction.indicator(0, 1)).evaluate(np.array([2.0]))[0]
    assert v == pytest.approx(math.log(0.5) / math.pi, abs=1e-14)
    assert v == pytest.approx(-0.22064, abs=1e-5)


def test_pair_closed_form():
    v = hilbert_step(pair()).evaluate(np.array([4.0]))[0]
    assert v == pytest.approx(math.log(9 / 8) / math.pi, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(g=step_functions(max_blocks=5), x=st.floats(-6, 8))
def test_step_transform_against_pv_oracle(g, x):
    if np.min(np.abs(g.breakpoints - x)) < 1e-3:
        return
    a, b = g.support
    lo, hi = min(a, x - 1), max(b, x + 1)
    pv = integrate_pv(lambda t: g(t) / (t - x), x, lo, hi, known_singularities=g.breakpoints.tolist())
    assert hilbert_step(g).evaluate(np.array([x]))[0] == pytest.approx(pv.value / math.pi, abs=1e-8)


def test_measure_transforms():
    d0 = RealLineMeasure(np.array([0.0]), np.array([1.0]), StepFunction.zero())
    assert hilbert_measure(d0).evaluate(np.array([1.0]))[0] == pytest.approx(-1 / math.pi, abs=1e-15)
    dens = RealLineMeasure(np.empty(0), np.empty(0), StepFunction.indicator(0, 1))
    assert hilbert_measure(dens).evaluate(np.array([0.5]))[0] == pytest.approx(0, abs=1e-15)
    two = RealLineMeasure(np.array([0.0, 1.0]), np.array([1.0, 1.0]), StepFunction.zero())
    assert hilbert_measure(two).evaluate(np.array([0.5]))[0] == pytest.approx(0, abs=1e-15)


def test_tailed_matches_step():
    g = pair()
    x = np.array([-1.5, 0.3, 1.7, 4.0])
    assert np.allclose(hilbert_tailed(TailedProfile.from_step(g))(x), hilbert_step(g).evaluate(x),
                       rtol=1e-13, atol=1e-15)


def test_tailed_pure_tail_cancels():
    v = hilbert_tailed(TailedProfile(tail=1.0, cutoff=1e-8))(np.array([2.0]))[0]
    assert abs(v) <= 1e-6


def test_tailed_single_block():
    # kernel 1/(s - t): (1/pi) int_0^1 ds/(s - 3) = (1/pi) ln(2/3)
    v = hilbert_tailed(TailedProfile.from_step(StepFunction.indicator(0, 1)))(np.array([3.0]))[0]
    assert v == pytest.approx(math.log(2 / 3) / math.pi, abs=1e-14)


def test_inverse_vanishes_on_hyperbola():
    N = TailedProfile(hyperbolic=1 / math.pi)
    for t in (0.5, 2.0, -3.0):
        assert inverse_hilbert_regularized(N, t) == 0.0


def test_inverse_single_block():
    N = TailedProfile.from_step(StepFunction.indicator(0, 1))
    assert inverse_hilbert_regularized(N, 2.0) == pytest.approx(math.log(2) / math.pi, abs=1e-14)


def test_inverse_at_origin():
    with pytest.raises(SingularPoint):
        inverse_hilbert_regularized(TailedProfile(hyperbolic=1.0), 0.0)


def test_linear_core_against_mpmath():
    seg = Segments.from_knots(np.array([0.0, 1.0, 3.0]), np.array([0.0, 2.0, 1.0]))
    N = TailedProfile(seg)
    t = 1.7
    # principal value: smooth remainder by mpmath plus the exact log singular part
    core = lambda s: (2 * s if s < 1 else 2 - (s - 1) / 2)
    c_t = core(t)
    smooth = mp.quad(lambda s: (core(s) - c_t) / (s - t), [0, 1, t, 3])
    pv = (smooth + c_t * mp.log(abs((3 - t) / (0 - t)))) / mp.pi
    assert hilbert_tailed(N)(np.array([t]))[0] == pytest.approx(float(pv), abs=1e-12)


def test_l1_divergent_for_nonzero_mean():
    with pytest.raises(Divergent):
        l1_norm_transform(hilbert_step(StepFunction.indicator(0, 1)))


def test_l1_pair_regression():
    # oracle: mpmath quadrature of the closed form split at its zeros 1 +- 1/sqrt 2
    r = l1_norm_transform(hilbert_step(pair()))
    assert r.value == pytest.approx(2.2443994093567205, abs=1e-10)


def test_l1_zero():
    assert l1_norm_transform(hilbert_step(StepFunction.zero())).value == 0.0


@settings(max_examples=25, deadline=None)
@given(g=step_functions(max_blocks=5, zero_mean=True))
def test_l1_exact_matches_quadrature(g):
    if g.is_zero:
        return
    F = hilbert_step(g)
    a = l1_norm_transform(F).value
    b = l1_norm_transform(F, method="quadrature").value
    assert b == pytest.approx(a, rel=1e-7, abs=1e-9)


def test_l1_far_zero_and_near_node_zeros():
    # zeros at +-4.87e-6 around the log node at 0 and one at -186.9, beyond the default cutoff;
    # reference from the closed-form primitive at mpmath-located zeros (50 digits)
    g = StepFunction([0.0, 0.0625, 3.3125, 4.4375, 6.0625, 10.0625], [0.125, -0.375, -0.75, 2.5, -0.501953125])
    F = hilbert_step(g)
    exact = l1_norm_transform(F)
    quad = l1_norm_transform(F, method="quadrature")
    assert exact.value == pytest.approx(7.6947896440525409, rel=1e-13)
    assert quad.converged and quad.value == pytest.approx(7.6947896440525409, rel=1e-9)
