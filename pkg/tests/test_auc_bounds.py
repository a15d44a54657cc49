import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covselauc.auc_bounds import (
    asymptotic_lower,
    asymptotic_upper,
    bound_report,
    chernoff_complement,
    chernoff_lower,
    feasible_region_curve,
    feasible_region_tail,
    kl_upper_bound,
    mgf_at_half,
)
from covselauc.divergences import divergences_from_spectrum
from covselauc.errors import OutOfDomain
from covselauc.generators import chain_model, star_model, toeplitz_equicorrelation
from covselauc.matrix_core import CamSpectrum, spectrum_of
from covselauc.spectral_auc import auc_complement, auc_exact


def _spec_with_alphas(alphas):
    lam = [1 + a / 2 + math.sqrt(a + a * a / 4) for a in alphas]
    return CamSpectrum.from_lambdas(lam)


def test_chernoff_hand_values():
    assert chernoff_lower(CamSpectrum.from_lambdas([1.0, 1.0])) == 0.5
    assert chernoff_lower(_spec_with_alphas([12.0])) == pytest.approx(0.5, abs=1e-12)
    assert chernoff_lower(_spec_with_alphas([12.0, 12.0])) == pytest.approx(0.75, abs=1e-12)


def test_chernoff_mgf_identity():
    a = np.array([0.0, 0.3, 4.0, 80.0])
    np.testing.assert_allclose(mgf_at_half(a), 2.0 / np.sqrt(4.0 + a), rtol=1e-12)
    np.testing.assert_allclose(mgf_at_half(a), 1.0 / np.sqrt(1.0 + a / 4.0), rtol=1e-12)


def test_asymptotic_lower_hand_values():
    s = _spec_with_alphas([8.0])
    assert asymptotic_lower(s, clamp=False) == pytest.approx(1 - math.exp(-0.5), abs=1e-12)
    assert asymptotic_lower(s) == 0.5
    assert asymptotic_lower(s, clamp=False) < 1 - 2 / math.sqrt(12)
    assert asymptotic_lower(CamSpectrum.from_lambdas([1.0])) == 0.5


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 200.0), min_size=1, max_size=20))
def test_asymptotic_lower_below_chernoff(alphas):
    s = _spec_with_alphas(alphas)
    unclamped_chernoff = 1 - math.exp(-0.5 * sum(math.log1p(a / 4) for a in s.alphas))
    assert asymptotic_lower(s, clamp=False) <= unclamped_chernoff + 1e-12


def test_feasible_region_limits():
    auc, d = feasible_region_curve(1e-9)
    assert auc == pytest.approx(0.5, abs=1e-9) and d == pytest.approx(0.0, abs=1e-17)
    auc, _ = feasible_region_curve(700.0)
    assert abs(auc - (1 - 1 / 700)) < 1e-3
    with pytest.raises(OutOfDomain):
        feasible_region_curve(0.0)


@pytest.mark.parametrize("a", [1e-3, 9.9e-3, 1.01e-2, 0.2, 3.0, 40.0, 1e4])
def test_feasible_region_against_high_precision(a):
    mpmath.mp.dps = 40
    x = mpmath.mpf(a)
    auc_ref = 1 / (1 - mpmath.exp(-x)) - 1 / x
    d_ref = mpmath.log(x) + x / mpmath.expm1(x) - 1 - mpmath.log(1 - mpmath.exp(-x))
    auc, d = feasible_region_curve(a)
    assert d == pytest.approx(float(d_ref), rel=1e-9)
    assert feasible_region_tail(a) == pytest.approx(float(1 - auc_ref), rel=1e-12)


def test_feasible_region_monotone_scan():
    grid = np.geomspace(1e-3, 100.0, 10**4)
    pts = np.array([feasible_region_curve(a) for a in grid])
    assert np.all(np.diff(pts[:, 0]) > 0)
    assert np.all(np.diff(pts[:, 1]) > 0)


def test_upper_bound_round_trip():
    assert kl_upper_bound(0.0) == (0.5, 0.0)
    _, d = feasible_region_curve(3.0)
    _, a = kl_upper_bound(d)
    assert a == pytest.approx(3.0, abs=1e-8)


@pytest.mark.parametrize("d", [1e-10, 0.01, 0.5, 2.0, 10.0, 13.0, 17.0, 40.0, 300.0])
def test_upper_below_asymptote(d):
    upper, a = kl_upper_bound(d)
    assert upper <= asymptotic_upper(d) + 1e-9
    assert feasible_region_curve(a)[1] == pytest.approx(d, rel=1e-10)


def test_report_identity_model():
    s = CamSpectrum.from_lambdas([1.0] * 4)
    r = bound_report(s, divergences_from_spectrum(s))
    assert r.lower == 0.5 and r.upper == 0.5


def test_report_sandwich_worked_example(four_node_sigma, four_node_model):
    s = spectrum_of(four_node_sigma, four_node_model)
    d = divergences_from_spectrum(s)
    r = bound_report(s, d)
    assert r.d_star == min(d.kl, d.reverse_kl)
    assert r.lower <= auc_exact(s) <= r.upper
    assert r.lower_asymptotic <= r.lower and r.upper <= r.upper_asymptotic
    assert 0.5 <= r.lower <= r.upper <= 1.0


@pytest.mark.parametrize("model_fn", [star_model, chain_model])
@pytest.mark.parametrize("rho", [0.1, 0.9])
def test_bounds_decay_exponentially(model_fn, rho):
    ns = np.arange(5, 61)
    low, up, exact = [], [], []
    for n in ns:
        s = spectrum_of(toeplitz_equicorrelation(n, rho), model_fn(n, rho))
        r = bound_report(s, divergences_from_spectrum(s))
        tail = auc_complement(s)
        assert r.one_minus_upper - 1e-7 <= tail <= r.one_minus_lower + 1e-7
        # the reported lower is clamped at 1/2 for weak models; test the exponent itself
        low.append(chernoff_complement(s))
        up.append(r.one_minus_upper)
    for series in (low, up):
        slope = np.polyfit(ns, -np.log(series), 1)[0]
        assert slope > 0
