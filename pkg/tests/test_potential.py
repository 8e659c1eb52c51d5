import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from conftest import pair
from workbench.errors import HypothesisViolated, InvalidP
from workbench.potential import (PlanarPointMeasure, canonical_eval, characteristic_integrals,
                                 counting_bound_rhs, counting_moment_integrals, counting_profiles,
                                 discretized_logdet, imaginary_pairs, levin_formula_sides,
                                 marcinkiewicz_sides, max_modulus, nevanlinna_characteristic, nstar,
                                 positivity_certificate, tsuji_characteristic)
from workbench.stepfn import StepFunction

UNIT = PlanarPointMeasure.from_atoms([(0.0, 1.0, 1.0)])
EMPTY = PlanarPointMeasure.from_atoms([])

configs = st.lists(st.tuples(st.floats(0.3, 3.0), st.floats(0.05, 2 * math.pi - 0.05), st.floats(0.2, 1.0)),
                   min_size=1, max_size=4).map(
    lambda xs: PlanarPointMeasure(np.array([r * np.exp(1j * t) for r, t, _ in xs]),
                                  np.array([w for _, _, w in xs])))


def test_canonical_examples():
    assert float(canonical_eval(UNIT, np.array([2j]))[0]) == pytest.approx(2.0, abs=1e-15)
    assert float(canonical_eval(UNIT, np.array([0j]))[0]) == 0.0
    one = PlanarPointMeasure.from_atoms([(1.0, 0.0, 1.0)])
    assert float(canonical_eval(one, np.array([1 + 0j]))[0]) == -math.inf


def test_counting_profiles_unit():
    m, n = counting_profiles(UNIT)
    assert [float(m(r)) for r in (0.5, 1.0, 2.0)] == [0.0, 1.0, 1.0]
    assert [float(n(r)) for r in (0.5, 1.0, 2.0)] == [0.0, 1.0, 1.0]


def test_levin_tsuji_counting_radius():
    # zeta = a + bi enters the two disks at r = |zeta|^2/|b|
    mu = PlanarPointMeasure.from_atoms([(1.0, 0.5, 2.0)])
    _, n = counting_profiles(mu)
    assert float(n(2.5 - 1e-12)) == 0.0 and float(n(2.5)) == 2.0


def test_characteristics_unit():
    # oracles: mpmath angular quadrature of (log|1+iz| + Im z)^+ split at its zeros
    assert nevanlinna_characteristic(UNIT, 2.0).value == pytest.approx(0.8921409366492218, abs=1e-9)
    assert tsuji_characteristic(UNIT, 2.0).value == pytest.approx(0.5996652051953439, abs=1e-8)
    assert nevanlinna_characteristic(EMPTY, 2.0).value == 0.0
    assert tsuji_characteristic(EMPTY, 2.0).value == 0.0


def test_levin_unit():
    lhs, rhs = levin_formula_sides(UNIT, 2.0)
    assert rhs == 0.5 and lhs.value == pytest.approx(0.5, abs=1e-6)
    lhs, rhs = levin_formula_sides(UNIT, 0.5)
    assert rhs == 0.0 and abs(lhs.value) <= 1e-6


def test_levin_real_atom():
    with pytest.raises(HypothesisViolated):
        levin_formula_sides(PlanarPointMeasure.from_atoms([(0.5, 0.0, 1.0)]), 1.0)


@settings(max_examples=10, deadline=None)
@given(mu=configs, R=st.floats(0.2, 4.0))
def test_levin_identity_random(mu, R):
    lhs, rhs = levin_formula_sides(mu, R)
    assert lhs.value == pytest.approx(rhs, abs=1e-6 * max(rhs, 1e-3))


def test_counting_closed_forms():
    assert counting_bound_rhs(UNIT, 2.0, "borel") == pytest.approx(1.5, abs=1e-12)
    _, n = counting_profiles(UNIT)
    assert nstar(n, 0.5) == pytest.approx(0.25 * (0.75 + math.log(2) / 2), abs=1e-12)
    for which in ("borel", "thm45", "nstar", "thm61", "cor64"):
        assert counting_bound_rhs(EMPTY, 1.0, which) == 0.0


def test_moment_closed_forms():
    rec = counting_moment_integrals(UNIT, 1.5)
    assert rec.riesz_lhs == pytest.approx(2 / 3, abs=1e-12)
    assert rec.riesz_rhs == pytest.approx(2 / 3, abs=1e-12)
    assert (rec.kolmo_lhs, rec.kolmo_rhs) == (pytest.approx(1.0, abs=1e-12), pytest.approx(1.0, abs=1e-12))
    with pytest.raises(InvalidP):
        counting_moment_integrals(UNIT, 2.0)


@settings(max_examples=20, deadline=None)
@given(mu=configs, r=st.floats(0.1, 5.0))
def test_counting_integrals_against_quadrature(mu, r):
    # n(r) inner/outer pieces against scipy on the piecewise-constant counting function
    _, n = counting_profiles(mu)
    jumps = sorted(set(n.radii.tolist()))
    inner_pts = [p for p in jumps if p < r]
    ref_in = sum(integrate.quad(lambda t: float(n(t)) / t ** 2, a, b)[0]
                 for a, b in zip([min(jumps[0], r) / 2] + inner_pts, inner_pts + [r]) if b > a)
    assert n.inner(r) == pytest.approx(ref_in, abs=1e-9)
    outer_pts = [r] + [p for p in jumps if p > r]
    ref_out = sum(integrate.quad(lambda t: float(n(t)) / t ** 3, a, b)[0]
                  for a, b in zip(outer_pts, outer_pts[1:] + [np.inf]))
    assert n.outer(r) == pytest.approx(ref_out, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(mu=configs, r=st.floats(0.1, 5.0))
def test_jensen_and_poisson_bounds(mu, r):
    m, _ = counting_profiles(mu)
    assert float(m(r)) <= max_modulus(mu, math.e * r) + 1e-9
    assert max_modulus(mu, r) <= 3 * nevanlinna_characteristic(mu, 2 * r).value + 1e-9


def test_characteristic_integrals_unit():
    for c in characteristic_integrals(UNIT, (0.5, 1.0, 2.0)):
        assert c.nevanlinna_side + c.tail_bound <= c.tsuji_side + c.error_estimate


def test_positivity_certificates():
    low, _ = positivity_certificate(UNIT, "plane")
    assert low < 0 and low <= math.log(0.5) + 0.5 + 1e-12
    assert positivity_certificate(EMPTY, "plane")[0] == 0.0


@settings(max_examples=15, deadline=None)
@given(h=st.lists(st.floats(0.2, 3.0), min_size=1, max_size=5), data=st.data())
def test_imaginary_pairs_nonnegative_on_line(h, data):
    w = data.draw(st.lists(st.floats(0.1, 1.0), min_size=len(h), max_size=len(h)))
    mu = imaginary_pairs(np.array(h), np.array(w))
    xs = np.linspace(-50, 50, 2001)
    assert np.min(canonical_eval(mu, xs.astype(complex))) >= 0.0
    assert positivity_certificate(mu, "realline")[0] >= 0.0


def test_discretized_logdet_budget():
    d = discretized_logdet(pair())
    assert len(d.measure.weights) <= 64
    z = np.array([0.3 + 0.2j])
    assert d.budget(z) >= 0


def test_marcinkiewicz_box_closed_form():
    lam = np.array([1.0, 1.7, 3.0, 5.0])
    mf, rhs = marcinkiewicz_sides(StepFunction.indicator(0, 1), lam)
    assert np.allclose(rhs, 1 / (2 * lam ** 2), rtol=1e-12)
    assert np.all(np.isfinite(mf / rhs))


def test_serialization_round_trip():
    mu = PlanarPointMeasure.from_atoms([(0.5, -1.0, 0.3), (2.0, 1.0, 1.0)])
    assert PlanarPointMeasure.from_dict(mu.to_dict()).to_dict() == mu.to_dict()


def test_tsuji_integrand_axis_limit_vectorized():
    from workbench.potential import _tsuji_integrand
    th = np.array([0.0, 1e-9, math.pi - 1e-9, 0.3])
    pos = _tsuji_integrand(UNIT, 2.0, True)(th)
    signed = _tsuji_integrand(UNIT, 2.0, False)(th)
    # S2 = sum w/zeta^2 = -1, so the folded limit is r Re(e^{2i theta}) = 2
    assert pos[:3] == pytest.approx([2.0, 2.0, 2.0], abs=1e-6)
    assert signed[:3] == pytest.approx([2.0, 2.0, 2.0], abs=1e-6)


def test_characteristic_certificate_holds_at_every_radius():
    # the certificate adds left-tail upper minus right-tail lower bounds, so it is stricter than the inequality
    for c in characteristic_integrals(UNIT, (0.5, 1.0, 2.0)):
        assert c.nevanlinna_side + c.tail_bound <= c.tsuji_side + c.error_estimate
