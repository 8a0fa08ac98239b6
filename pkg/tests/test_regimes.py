"""Regime classification against the catalog of sufficient conditions."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlheat.coefficients import CoefficientDescriptor, TimeProfile
from nlheat.errors import HypothesisNotMetError, NoSolutionError
from nlheat.regimes import (
    RegimeVerdict,
    blowup_time_bound,
    classify_regime,
    classify_spec,
    psi_height_infimum,
)
from conftest import const_spec


def bounds_of(amplitude, kind="constant", **kw):
    return CoefficientDescriptor(kind, amplitude, **kw).bounds()


def classify(p, l, c_amp=1.0, k_amp=1.0, c_kind="constant", k_kind="constant", c_kw=None, k_kw=None, **kw):
    return classify_regime(
        p,
        l,
        bounds_of(c_amp, c_kind, **(c_kw or {})),
        bounds_of(k_amp, k_kind, **(k_kw or {})),
        **kw,
    )


def test_sublinear_coupling_is_global_for_all_data():
    pred = classify(0.5, 0.8)
    assert pred.verdict is RegimeVerdict.GLOBAL_ALL_DATA
    assert pred.citations == ("G1",)


def test_dominant_absorption_is_global_for_all_data():
    pred = classify(2.0, 1.5)
    assert pred.verdict is RegimeVerdict.GLOBAL_ALL_DATA
    assert pred.citations == ("G2",)


def test_divergent_weighted_kernel_blows_up_everything():
    pred = classify(1.0, 2.0, c_amp=0.0, u0_mass=1.0)
    assert pred.verdict is RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP
    assert pred.citations == ("A1",)
    assert pred.blow_up_time_bound == pytest.approx(0.5, rel=1e-10)


def test_integrable_weighted_bound_gives_small_data_global():
    # with unit absorption the weighted kernel bound is e^{-t}: integrable,
    # bounded, and the moving-window smoothing condition follows in-family
    pred = classify(1.0, 2.0)
    assert pred.verdict is RegimeVerdict.SMALL_DATA_GLOBAL
    assert pred.citations == ("S2",)
    assert (RegimeVerdict.BLOW_UP_LARGE_DATA, ("B1",)) in pred.secondary


def test_sublinear_absorption_pairs_blowup_with_small_data_global():
    pred = classify(0.5, 2.0)
    assert pred.verdict is RegimeVerdict.BLOW_UP_LARGE_DATA
    assert pred.citations == ("B1",)
    assert (RegimeVerdict.SMALL_DATA_GLOBAL, ("S1",)) in pred.secondary
    # without initial absorption the small-data companion disappears
    pred0 = classify(0.5, 2.0, c_amp=0.0)
    assert pred0.verdict is RegimeVerdict.BLOW_UP_LARGE_DATA
    assert pred0.secondary == ()


def test_balanced_exponents_return_conditional_ratios():
    pred = classify(2.0, 2.0, c_amp=3.0, k_amp=1.5)
    assert pred.verdict is RegimeVerdict.CONDITIONAL_EIGEN_RATIO
    assert pred.lambda_under == pytest.approx(2.0)
    assert pred.lambda_bar == pytest.approx(2.0)
    assert set(pred.citations) == {"C1", "C2"}


def test_growing_kernel_against_decaying_absorption_blows_up_everything():
    # l > p > 1 with absorption decaying exponentially but slower than the
    # profile-height threshold, and a constant kernel: the ratio diverges
    pred = classify(1.5, 3.0, c_kind="exponential", c_kw={"rate": -1.0})
    assert pred.verdict is RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP
    assert pred.citations == ("A2",)


def test_matched_kernel_growth_gives_small_data_global():
    pred = classify(1.5, 3.0)
    assert pred.verdict is RegimeVerdict.SMALL_DATA_GLOBAL
    assert pred.citations == ("S3",)


def test_absorption_free_steep_stratum_blows_up_everything():
    pred = classify(1.5, 3.0, c_amp=0.0)
    assert pred.verdict is RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP
    assert pred.citations == ("A2",)


def test_undecidable_exotic_family_falls_back_with_note():
    # log-log cumulative growth is outside the decidable tail algebra; the
    # classifier keeps only the kernel-positivity existence verdict and says why
    pred = classify(
        1.0,
        2.0,
        c_kind="power-log",
        c_kw={"alpha": -1.0, "beta": -1.0},
    )
    assert pred.verdict is RegimeVerdict.BLOW_UP_LARGE_DATA
    assert any("undecidable" in n for n in pred.notes)


def test_profile_height_infimum_is_strict():
    assert psi_height_infimum(1.0) == pytest.approx(0.125)
    # the threshold is used strictly: a kernel decaying exactly at the
    # critical rate is not claimed
    crit = -(3.0 - 1.0) / psi_height_infimum(1.0)
    pred = classify(1.5, 3.0, c_amp=0.0, k_kind="exponential", k_kw={"rate": crit})
    assert pred.verdict is not RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP
    pred2 = classify(1.5, 3.0, c_amp=0.0, k_kind="exponential", k_kw={"rate": crit * 0.95})
    assert pred2.verdict is RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(0.2, 3.0),
    l=st.floats(0.2, 1.0),
    c_amp=st.floats(0.0, 5.0),
    k_amp=st.floats(0.0, 5.0),
)
def test_every_sublinear_coupling_is_global(p, l, c_amp, k_amp):
    pred = classify(p, l, c_amp=c_amp, k_amp=k_amp)
    assert pred.verdict is RegimeVerdict.GLOBAL_ALL_DATA


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(0.3, 2.5),
    l=st.floats(1.1, 3.0),
    k_amp=st.floats(0.1, 4.0),
    factor=st.floats(1.1, 10.0),
    rate=st.sampled_from([0.0, -0.4, 0.6]),
)
def test_enlarging_the_kernel_never_globalizes_a_blowup_verdict(p, l, k_amp, factor, rate):
    kw = {"k_kind": "exponential", "k_kw": {"rate": rate}} if rate else {}
    before = classify(p, l, k_amp=k_amp, **kw)
    after = classify(p, l, k_amp=k_amp * factor, **kw)
    if before.is_blowup_class():
        assert not after.is_global_class()


def test_blowup_bound_examples():
    spec = const_spec(p=1.0, l=2.0, c=0.0, k=1.0)
    assert blowup_time_bound(spec, 1.0) == pytest.approx(0.5, rel=1e-10)
    assert blowup_time_bound(spec, 2.0) == pytest.approx(0.25, rel=1e-10)


def test_blowup_bound_with_weighting_matches_closed_form():
    # kernel 1, absorption 1, l = 2: lhs(T) = 2 (1 - e^{-T}); mass 1 needs 1/2
    spec = const_spec(p=1.0, l=2.0, c=1.0, k=1.0)
    assert blowup_time_bound(spec, 1.0) == pytest.approx(math.log(2.0), rel=1e-10)


def test_blowup_bound_monotone_in_mass_and_kernel():
    spec = const_spec(p=1.0, l=2.0, c=0.0, k=1.0)
    masses = [0.5, 1.0, 2.0, 8.0]
    ts = [blowup_time_bound(spec, m) for m in masses]
    assert all(a > b for a, b in zip(ts, ts[1:]))
    spec_big_k = const_spec(p=1.0, l=2.0, c=0.0, k=3.0)
    assert blowup_time_bound(spec_big_k, 1.0) < blowup_time_bound(spec, 1.0)
    assert blowup_time_bound(spec, 1e9) < 1e-8


def test_blowup_bound_saturation_raises():
    # weighted mass saturates at 2 while small data demand more
    spec = const_spec(p=1.0, l=2.0, c=1.0, k=1.0)
    with pytest.raises(NoSolutionError):
        blowup_time_bound(spec, 0.4)


def test_blowup_bound_hypothesis_gates():
    with pytest.raises(HypothesisNotMetError):
        blowup_time_bound(const_spec(p=2.0, l=2.0), 1.0)
    with pytest.raises(HypothesisNotMetError):
        blowup_time_bound(const_spec(p=1.0, l=2.0), 0.0)


def test_classify_spec_aggregates_endpoint_kernels():
    pred = classify_spec(const_spec(p=1.0, l=2.0, c=0.0, k=1.0), u0_mass=2.0)
    assert pred.verdict is RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP
    assert pred.blow_up_time_bound == pytest.approx(0.25, rel=1e-10)


def test_committed_verdicts_always_carry_citations():
    with pytest.raises(ValueError):
        from nlheat.regimes import RegimePrediction

        RegimePrediction(RegimeVerdict.GLOBAL_ALL_DATA, ())
