import numpy as np
import pytest

from abflat.deform import (
    DeformationFactors,
    build_model,
    check_condition,
    deform,
    factor_odes,
    model_checks,
    model_pipeline,
    transcription_report,
    verify_stage1,
    verify_stage2,
    verify_stage3,
)
from abflat.errors import DomainError, InputError
from abflat.fields import ModelParams, euclidean, flat_conformal, random_polynomial_data, spray_riemann
from abflat.sampling import sample_xy

STAGES = [verify_stage1, verify_stage2, verify_stage3]


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("verify", STAGES, ids=["stage1", "stage2", "stage3"])
def test_stage_formulas_on_random_data(seed, verify):
    alpha, beta = random_polynomial_data(seed, 3)
    x, y = sample_xy(seed, 50, 3, 0.5)
    assert verify(alpha, beta, DeformationFactors.polynomial(), x, y).max <= 1e-12


@pytest.mark.parametrize("mu, sigma", [(-1.0, 1.0), (0.7, 2.0), (0.0, 1.0)])
def test_stage_formulas_with_model_factors(mu, sigma):
    model = build_model(ModelParams(mu, 1.0, sigma, (0.1, -0.2, 0.0)))
    x, y = sample_xy(1, 50, 3, model.sample_radius())
    for verify in STAGES:
        assert verify(model.base_alpha, model.base_beta, model.factors, x, y).max <= 1e-12


def test_identity_factors_change_nothing():
    alpha, beta = random_polynomial_data(3, 3)
    bar, bform = deform(alpha, beta, DeformationFactors.identity())[3]
    x, y = sample_xy(0, 10, 3, 0.5)
    np.testing.assert_allclose(bar.matrix(x), alpha.matrix(x), atol=1e-15)
    np.testing.assert_allclose(bform(x), beta(x), atol=1e-15)


def test_printed_s0_reading_is_flagged():
    alpha, beta = random_polynomial_data(3, 3)
    x, y = sample_xy(1, 50, 3, 0.5)
    table, verdict = transcription_report(alpha, beta, DeformationFactors.polynomial(), x, y)
    assert max(table["corrected"].values()) <= 1e-12
    assert max(table["printed"].values()) > 1e-6
    assert verdict.startswith("typo suspect")


@pytest.mark.parametrize("mu, lam, sigma, a", [
    (-1.0, 1.0, 1.0, (0, 0, 0)),
    (0.7, 1.0, 2.0, (0.1, -0.2, 0.0)),
    (-0.5, 1.0, 1.0, (0.1, 0, 0)),
    (0.0, 1.0, 1.0, (0.1, -0.2, 0.0)),
])
def test_model_pipeline_matches_closed_form(mu, lam, sigma, a):
    params = ModelParams(mu, lam, sigma, a)
    model = build_model(params)
    x, y = sample_xy(2, 50, 3, model.sample_radius())
    checks = model_checks(mu, lam, a, x, y, sigma)
    assert max(float(np.max(v)) for v in checks.values()) <= 1e-12
    alpha, beta = model_pipeline(params)
    np.testing.assert_allclose(alpha.matrix(x), model.alpha.matrix(x), atol=1e-14)
    np.testing.assert_allclose(beta(x), model.beta(x), atol=1e-14)


@pytest.mark.parametrize("mu", [-0.5, 0.0, 1.0, 3.0])
def test_factor_odes(mu):
    rep = factor_odes(mu, 1.5)
    assert rep.max <= 1e-12
    assert rep.trivial == (mu == 0)
    assert len(rep.family) == 6


def test_condition_violation_raises():
    alpha, beta = euclidean(3), flat_conformal(1.0, (2.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        check_condition(alpha, beta, lambda t: 1.0 + 0 * t, np.zeros((1, 3)))
    with pytest.raises(DomainError):
        factor_odes(-1.0, b2=[0.5, 1.5])


def test_model_rejects_bad_inputs():
    with pytest.raises(InputError):
        build_model((0.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        build_model(ModelParams(-1.0, 1.0, 1.0, (1.2, 0, 0))).sample_radius()


def test_model_flat_case_is_scaled_euclidean():
    model = build_model(ModelParams(0.0, 1.0, 1.0, (0, 0, 0)))
    x, y = sample_xy(0, 10, 3, 1.0)
    assert np.max(np.abs(spray_riemann(model.alpha, x, y))) == 0.0
