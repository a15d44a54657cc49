import math

import numpy as np
import pytest

from covselauc.divergences import divergences_from_spectrum
from covselauc.errors import DimensionMismatch, EmptyBin, OutOfDomain, ValidationError
from covselauc.matrix_core import spectrum_of
from covselauc.mc_oracle import (
    _binned_kl,
    LlrtSamples,
    binned_kl_from_scores,
    bootstrap_kl_se,
    empirical_roc,
    gal_cdf,
    gal_component_check,
    gal_moment,
    gal_pdf,
    mann_whitney_auc,
    roc_kl_estimate,
    sample_llrt,
)


@pytest.fixture(scope="module")
def worked_samples(four_node_sigma, four_node_model):
    return sample_llrt(four_node_sigma, four_node_model, 200_000, seed=8)


def test_reproducible(four_node_sigma, four_node_model):
    a = sample_llrt(four_node_sigma, four_node_model, 5000, seed=1)
    b = sample_llrt(four_node_sigma, four_node_model, 5000, seed=1)
    assert np.array_equal(a.h0_scores, b.h0_scores) and np.array_equal(a.h1_scores, b.h1_scores)


def test_sampling_preconditions(four_node_sigma, four_node_model):
    with pytest.raises(ValidationError):
        sample_llrt(four_node_sigma, four_node_model, 999)
    with pytest.raises(DimensionMismatch):
        sample_llrt(four_node_sigma, np.eye(3), 5000)
    with pytest.raises(ValidationError):
        LlrtSamples(np.array([]), np.array([1.0]), None)


def test_identity_model_is_uninformative(four_node_sigma):
    s = sample_llrt(four_node_sigma, four_node_sigma, 20_000, seed=2)
    assert np.allclose(s.h0_scores, 0.0, atol=1e-12)
    roc = empirical_roc(s)
    assert roc.auc_mw == 0.5


def test_mann_whitney_basics():
    h0 = np.array([0.0, 1.0, 2.0])
    assert mann_whitney_auc(h0, h0 + 10) == 1.0
    assert mann_whitney_auc(h0, h0) == 0.5
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=3000), rng.normal(0.3, size=2000)
    assert mann_whitney_auc(a, b) == pytest.approx(1 - mann_whitney_auc(b, a), abs=1e-15)
    brute = (np.sum(b[:, None] > a[None, :]) + 0.5 * np.sum(b[:, None] == a[None, :])) / (a.size * b.size)
    assert mann_whitney_auc(a, b) == pytest.approx(brute, abs=1e-15)


def test_roc_shape_and_area(worked_samples):
    roc = empirical_roc(worked_samples)
    assert roc.false_alarm[0] == 0 and roc.detection[0] == 0
    assert roc.false_alarm[-1] == 1 and roc.detection[-1] == 1
    assert np.all(np.diff(roc.false_alarm) >= 0) and np.all(np.diff(roc.detection) >= 0)
    assert roc.trapezoid_area() == pytest.approx(roc.auc_mw, abs=1e-9)
    swapped = empirical_roc(worked_samples.swapped())
    assert swapped.auc_mw == pytest.approx(1 - roc.auc_mw, abs=1e-12)


def test_roc_with_ties():
    s = LlrtSamples(np.array([0.0, 1.0, 1.0, 2.0] * 300), np.array([1.0, 2.0, 3.0] * 400), None)
    roc = empirical_roc(s)
    assert roc.trapezoid_area() == pytest.approx(roc.auc_mw, abs=1e-12)


def test_llrt_means(worked_samples, four_node_sigma, four_node_model):
    d = divergences_from_spectrum(spectrum_of(four_node_sigma, four_node_model))
    h0, h1 = worked_samples.h0_scores, worked_samples.h1_scores
    assert abs(h0.mean() + d.kl) <= 3 * h0.std() / math.sqrt(h0.size)
    assert abs(h1.mean() - d.reverse_kl) <= 3 * h1.std() / math.sqrt(h1.size)


def test_roc_kl_routes_agree(worked_samples):
    roc = empirical_roc(worked_samples)
    a = roc_kl_estimate(roc, 50)
    b = binned_kl_from_scores(worked_samples.h0_scores, worked_samples.h1_scores, 50)
    assert a.kl10 == pytest.approx(b.kl10, rel=1e-3)
    assert a.kl01 == pytest.approx(b.kl01, rel=1e-3)


def test_roc_kl_below_gaussian(worked_samples, four_node_sigma, four_node_model):
    d = divergences_from_spectrum(spectrum_of(four_node_sigma, four_node_model))
    est = roc_kl_estimate(empirical_roc(worked_samples), 100)
    se10, se01 = bootstrap_kl_se(worked_samples, 100, replicates=10, seed=0)
    assert est.kl10 <= d.reverse_kl + 3 * se10
    assert est.kl01 <= d.kl + 3 * se01
    # the -int log h' route converges fast; the other is biased low by the top bin
    assert est.kl01 == pytest.approx(d.kl, rel=0.15)


def test_roc_kl_identity_and_errors():
    rng = np.random.default_rng(3)
    x = rng.normal(size=100_000)
    y = rng.normal(size=100_000)
    est = binned_kl_from_scores(x, y, 20)
    assert est.kl10 <= 0.02 and est.kl01 <= 0.02
    with pytest.raises(EmptyBin):
        binned_kl_from_scores(x, x + 100.0, 20)
    # only the top bin has hits; merging leaves one bin and zero divergence
    merged = binned_kl_from_scores(x, x + 100.0, 20, merge_empty=True)
    assert merged.kl10 == pytest.approx(0.0, abs=1e-12) and merged.kl01 == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        binned_kl_from_scores(x, y, 10)


# ---- GAL ----

@pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
def test_gal_normalization_and_mean(alpha):
    assert gal_moment(alpha, np.ones_like) == pytest.approx(1.0, abs=1e-6)
    assert gal_moment(alpha, lambda u: u) == pytest.approx(alpha / 2, abs=1e-6)
    assert gal_cdf(alpha, 1e6) == pytest.approx(1.0, abs=1e-6)


def test_gal_mgf_at_half():
    assert gal_moment(4.0, lambda u: np.exp(-0.5 * u)) == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_gal_pdf_domain_and_overflow():
    with pytest.raises(OutOfDomain):
        gal_pdf(1.0, 0.0)
    with pytest.raises(OutOfDomain):
        gal_pdf(0.0, 1.0)
    assert gal_pdf(1000.0, 5000.0) > 0 and math.isfinite(gal_pdf(1000.0, 5000.0))


def test_gal_cdf_zero_closed_form():
    # P(L < 0) = (2/pi) atan(1/sqrt(lambda)) for lambda > 1
    for lam in (2.0, 5.0):
        alpha = (lam - 1) ** 2 / lam
        assert gal_cdf(alpha, 0.0) == pytest.approx(2 / math.pi * math.atan(1 / math.sqrt(lam)), abs=1e-9)


@pytest.mark.parametrize("lam", [0.5, 2.0, 5.0])
def test_gal_component_ks(lam):
    rep = gal_component_check(lam, 100_000, seed=int(lam * 10))
    assert rep.passed
    assert abs(rep.mean - rep.alpha / 2) <= 3 * rep.mean_se


def test_gal_inverse_lambda_same_law():
    a = gal_component_check(4.0, 50_000, seed=1)
    b = gal_component_check(0.25, 50_000, seed=1)
    assert a.alpha == pytest.approx(b.alpha)
    assert a.passed and b.passed
    with pytest.raises(OutOfDomain):
        gal_component_check(1.0, 1000)


def test_merge_empty_keeps_nonempty_partition():
    p0 = np.full(5, 0.2)
    p1 = np.array([0.0, 0.0, 0.3, 0.0, 0.7])
    with pytest.raises(EmptyBin):
        _binned_kl(p0, p1)
    merged = _binned_kl(p0, p1, merge_empty=True)
    # bins {0,1,2} and {3,4}: masses (0.6, 0.3) and (0.4, 0.7)
    q0, q1 = np.array([0.6, 0.4]), np.array([0.3, 0.7])
    assert merged.kl10 == pytest.approx(float(np.sum(q1 * np.log(q1 / q0))), abs=1e-15)
    assert merged.kl01 == pytest.approx(float(np.sum(q0 * np.log(q0 / q1))), abs=1e-15)
    # trailing empty bins fold back into the last non-empty one
    merged = _binned_kl(p0, np.array([0.5, 0.5, 0.0, 0.0, 0.0]), merge_empty=True)
    assert merged.kl01 == pytest.approx(0.2 * math.log(0.2 / 0.5) + 0.8 * math.log(0.8 / 0.5), abs=1e-15)


def test_roc_kl_against_long_run_reference(four_node_sigma, four_node_model):
    # self-oracle: same estimator and bins, ten times the samples
    ref_samples = sample_llrt(four_node_sigma, four_node_model, 10**7, seed=77)
    ref = binned_kl_from_scores(ref_samples.h0_scores, ref_samples.h1_scores, 100)
    del ref_samples
    s = sample_llrt(four_node_sigma, four_node_model, 10**6, seed=78)
    est = roc_kl_estimate(empirical_roc(s), 100)
    assert est.kl10 == pytest.approx(ref.kl10, rel=0.15)
    assert est.kl01 == pytest.approx(ref.kl01, rel=0.15)
