"""Time-profile algebra and the weighted-kernel tail calculus."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nlheat.coefficients import (
    CoefficientDescriptor,
    Tail,
    TimeProfile,
    weight_class,
    WeightClass,
    weighted_integral,
    weighted_limit,
    weighted_profile,
    weighted_tail_diverges,
    weighted_value,
    windowed_smoothing_constant,
)

profiles = st.builds(
    TimeProfile,
    amplitude=st.floats(0.1, 5.0),
    rho=st.sampled_from([-1.5, -0.3, 0.0, 0.4]),
    alpha=st.sampled_from([-2.0, -1.0, -0.5, 0.0, 1.0]),
    beta=st.sampled_from([-2.0, -1.0, 0.0, 0.5, 2.0]),
)


@settings(max_examples=40, deadline=None)
@given(profiles, st.floats(0.1, 8.0))
def test_closed_form_integral_matches_quadrature(profile, t):
    direct, _ = integrate.quad(profile.value, 0.0, t, limit=300)
    assert profile.integral(t) == pytest.approx(direct, rel=1e-8, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(profiles, profiles)
def test_product_and_power_stay_in_family(a, b):
    t = 1.7
    assert (a * b).value(t) == pytest.approx(a.value(t) * b.value(t), rel=1e-12)
    assert a.powered(2.5).value(t) == pytest.approx(a.value(t) ** 2.5, rel=1e-12)


@pytest.mark.parametrize(
    "profile,diverges",
    [
        (TimeProfile(1.0), True),                       # constant
        (TimeProfile(1.0, rho=-0.5), False),            # decaying exponential
        (TimeProfile(1.0, rho=0.5), True),              # growing exponential
        (TimeProfile(1.0, alpha=-0.5), True),
        (TimeProfile(1.0, alpha=-1.0), True),           # 1/(1+t)
        (TimeProfile(1.0, alpha=-1.0, beta=-2.0), False),
        (TimeProfile(1.0, alpha=-2.0), False),
        (TimeProfile(0.0), False),
    ],
)
def test_tail_divergence_rules(profile, diverges):
    assert profile.tail_diverges() is diverges
    # numeric evidence: partial-integral increments over growing decades keep
    # pace for divergent tails and decay geometrically for convergent ones
    if profile.amplitude == 0.0:
        assert profile.integral(100.0) == 0.0
        return
    v1, v2, v3 = (profile.integral(t) for t in (10.0, 100.0, 1000.0))
    ratio = (v3 - v2) / max(v2 - v1, 1e-300)
    if diverges:
        assert ratio >= 0.9
    else:
        assert ratio < 0.9


def test_weighted_profile_exact_for_constant_absorption():
    # kernel 1, absorption 1, exponent gap 1: the weighted bound is e^{-t}
    k = TimeProfile(1.0)
    c = TimeProfile(1.0)
    wp = weighted_profile(k, c, kappa=1.0)
    assert wp is not None and wp.rho == -1.0
    ts = np.linspace(0.0, 5.0, 7)
    assert np.allclose(wp.value(ts), np.exp(-ts), rtol=1e-14)
    # integral over the half line equals 1
    assert weighted_integral(k, c, 1.0, 60.0) == pytest.approx(1.0, rel=1e-10)
    assert weighted_tail_diverges(k, c, 1.0) is False
    assert weighted_limit(k, c, 1.0) == Tail.ZERO


def test_weighted_profile_exact_for_hyperbolic_absorption():
    # c ~ 2/(1+t) turns the weight into the power (1+t)^(-2 kappa)
    k = TimeProfile(3.0, alpha=1.0)
    c = TimeProfile(2.0, alpha=-1.0)
    wp = weighted_profile(k, c, kappa=1.0)
    assert wp is not None and wp.alpha == pytest.approx(-1.0)
    assert weighted_tail_diverges(k, c, 1.0) is True  # 3 (1+t)^(-1)


@pytest.mark.parametrize(
    "c,expected",
    [
        (TimeProfile(0.0), WeightClass.ONE),
        (TimeProfile(2.0), WeightClass.EXACT_EXP),
        (TimeProfile(1.0, alpha=-1.0), WeightClass.EXACT_POW),
        (TimeProfile(1.0, rho=-1.0), WeightClass.BOUNDED),
        (TimeProfile(1.0, rho=0.5), WeightClass.SUPEREXP),
        (TimeProfile(1.0, alpha=1.0), WeightClass.SUPEREXP),
        (TimeProfile(1.0, alpha=-0.5), WeightClass.MIDDLE),
        (TimeProfile(1.0, alpha=-1.0, beta=1.0), WeightClass.MIDDLE),
        (TimeProfile(1.0, alpha=-1.0, beta=-0.5), WeightClass.SUBPOLY),
        (TimeProfile(1.0, alpha=-1.0, beta=-1.0), WeightClass.UNDECIDED),
    ],
)
def test_weight_classes(c, expected):
    assert weight_class(c)[0] == expected


def test_weighted_value_matches_brute_force_in_all_classes():
    k = TimeProfile(2.0, alpha=0.5)
    for c in (TimeProfile(1.0), TimeProfile(0.7, alpha=-0.5), TimeProfile(1.2, rho=-1.0)):
        for t in (0.5, 2.0, 7.0):
            brute = k.value(t) * math.exp(-1.4 * integrate.quad(c.value, 0, t, limit=300)[0])
            assert weighted_value(k, c, 1.4, t) == pytest.approx(brute, rel=1e-8)


def test_exponential_scaling_commutes_with_weighted_construction():
    # scaling the kernel and the absorption by the same exponential factor
    # keeps construction == definition on the closed family
    k = TimeProfile(1.0)
    c = TimeProfile(1.0)
    g = TimeProfile(1.0, rho=0.3)
    k2, c2 = k * g, c * g
    for t in (0.3, 1.1, 4.0):
        definition = k2.value(t) * math.exp(-2.0 * integrate.quad(c2.value, 0, t, limit=200)[0])
        assert weighted_value(k2, c2, 2.0, t) == pytest.approx(definition, rel=1e-9)


def test_windowed_smoothing_constant_for_decaying_bound():
    # direct oracle: int_{t-t0}^t e^{-tau}/sqrt(t-tau) dtau = e^{-t} int_0^{t0} e^u/sqrt(u) du
    t0 = 1.0
    inner, _ = integrate.quad(lambda u: math.exp(u) / math.sqrt(u), 0.0, t0, limit=300)
    ts = [2.0, 3.0, 6.0]
    expected = max(math.exp(-t) * inner for t in ts)
    got = windowed_smoothing_constant(lambda tau: math.exp(-tau), t0, ts)
    assert got == pytest.approx(expected, rel=1e-6)
    assert got <= 2.0 * math.sqrt(t0) * math.exp(-(ts[0] - t0))


def test_descriptor_kinds_map_to_profiles():
    d = CoefficientDescriptor("product", 2.0, rate=-0.5, alpha=1.0, beta=-1.0)
    prof = d.profile()
    assert (prof.amplitude, prof.rho, prof.alpha, prof.beta) == (2.0, -0.5, 1.0, -1.0)
    t = 2.5
    assert d.time_value(t) == pytest.approx(
        2.0 * math.exp(-0.5 * t) * (1 + t) ** 1.0 * math.log(math.e + t) ** -1.0
    )
    # the constant kind ignores the shape parameters
    d2 = CoefficientDescriptor("constant", 2.0, rate=-0.5, alpha=1.0)
    assert d2.profile().rho == 0.0 and d2.profile().alpha == 0.0


def test_bounds_envelopes_ordered():
    from nlheat.coefficients import SpatialModulation

    mod = SpatialModulation(fn=lambda x: 1.0 + 0.5 * np.sin(6 * x) ** 2, lower=1.0, upper=1.5)
    d = CoefficientDescriptor("exponential", 2.0, rate=-0.2, spatial=mod)
    bounds = d.bounds()
    ts = np.linspace(0.0, 5.0, 11)
    assert np.all(bounds.lower.value(ts) <= bounds.upper.value(ts))
    assert bounds.lower.value(0.0) == pytest.approx(2.0)
    assert bounds.upper.value(0.0) == pytest.approx(3.0)
