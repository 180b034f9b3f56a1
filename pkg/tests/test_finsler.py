import numpy as np
import pytest

from abflat.catalog import catalog
from abflat.deform import build_model
from abflat.errors import ContractError, DomainError, InputError
from abflat.fields import (
    ModelParams,
    closed_conformal,
    constant_curvature,
    euclidean,
    flat_conformal,
    random_polynomial_data,
    spray_riemann,
)
from abflat.finsler import (
    GeneralABMetric,
    dual_flat_equivalence,
    dual_flat_residual,
    eval_F,
    eval_F2,
    fundamental_tensor,
    navigation_to_randers,
    navigation_value,
    oneone_breve_value,
    oneone_value,
    projective_flat_residual,
    randers_value,
    s_y_identity,
    sample_admissible,
    spray_finsler,
    structure_identities,
)
from abflat.phifunc import CheckPhiFunction, projective_from_dual
from abflat.sampling import sample_xy


@pytest.fixture(scope="module")
def model():
    return build_model(ModelParams(0.7, 1.0, 2.0, (0.1, -0.2, 0.0)))


def metric_on(model, name):
    return GeneralABMetric(model.alpha, model.beta, catalog(name))


def test_homogeneity_and_fundamental_tensor(model):
    m = metric_on(model, "example3")
    x, y = sample_admissible(m, 0, 20, model.sample_radius())
    F = eval_F(m, x, y).val
    np.testing.assert_allclose(eval_F(m, x, 2.5 * y).val, 2.5 * F, rtol=1e-13)
    g = fundamental_tensor(m, x, y)
    np.testing.assert_allclose(np.einsum("...ij,...i,...j->...", g, y, y), F * F, rtol=1e-12)
    h = 1e-5
    e = np.eye(3)[0]
    F2 = lambda yy: eval_F2(m, x, yy).val
    fd = (F2(y + h * e) - 2 * F2(y) + F2(y - h * e)) / (2 * h * h)
    np.testing.assert_allclose(g[:, 0, 0], fd, rtol=1e-5)


def test_riemannian_spray_recovered():
    alpha, beta = random_polynomial_data(2, 3)
    m = GeneralABMetric(alpha, beta, catalog("one"))
    x, y = sample_xy(1, 20, 3, 0.5)
    np.testing.assert_allclose(spray_finsler(m, x, y), spray_riemann(alpha, x, y), atol=1e-13)


@pytest.mark.parametrize("name", ["example3", "funk", "example6", "example8"])
def test_model_metric_is_dually_flat(model, name):
    m = metric_on(model, name)
    x, y = sample_admissible(m, 3, 50, model.sample_radius())
    assert np.max(np.abs(dual_flat_residual(m, x, y, normalized=True))) <= 1e-10


def test_equivalence_both_directions(model):
    for name, direction in (("example3", "direction_i"), ("example3-perturbed", "direction_ii")):
        m = metric_on(model, name)
        x, y = sample_admissible(m, 42, 60, model.sample_radius())
        rep = dual_flat_equivalence(m, model.data, x, y)
        assert getattr(rep, direction) is True
        assert rep.passed and rep.factor_mismatch < 1e-9


def test_trivial_data_accepts_any_phi():
    trivial = build_model(ModelParams(0.5, 0.0, 1.0, (0.3, 0.1, 0.0)))
    m = GeneralABMetric(trivial.alpha, trivial.beta, catalog("example3-perturbed"))
    x, y = sample_admissible(m, 42, 60, 1.0)
    rep = dual_flat_equivalence(m, trivial.data, x, y)
    assert rep.inconclusive and not rep.passed
    assert np.max(np.abs(dual_flat_residual(m, x, y))) <= 1e-12


@pytest.mark.parametrize("params", [ModelParams(-1.0, 1.0, 1.0, (0, 0, 0)), ModelParams(0.0, 2.0, 1.0, (0.1, 0, 0))])
def test_structure_identities(params):
    model = build_model(params)
    x, y = sample_xy(3, 50, 3, model.sample_radius())
    out = structure_identities(model.alpha, model.beta, model.data, x, y)
    assert set(out) == {"r_ij", "s_ij", "b2_x", "alpha_x", "beta_x", "s_y"}
    assert max(float(np.max(v)) for v in out.values()) <= 1e-12


def test_structure_identities_refuse_generic_data(model):
    alpha, beta = random_polynomial_data(0, 3)
    x, y = sample_xy(0, 5, 3, 0.5)
    with pytest.raises(ContractError):
        structure_identities(alpha, beta, model.data, x, y)
    assert np.max(s_y_identity(alpha, beta, x, y)) <= 1e-14


@pytest.mark.parametrize("mu, phi", [(1.0, "example3"), (-0.5, "example2"), (0.7, "example8")])
def test_forward_map_is_projectively_flat(mu, phi):
    alpha, beta = constant_curvature(mu, 3), closed_conformal(mu, 1.0, (0.1, -0.2, 0.0))
    m = GeneralABMetric(alpha, beta, projective_from_dual(catalog(phi)))
    x, y = sample_admissible(m, 5, 40, 0.8 / np.sqrt(-mu) if mu < 0 else 1.0)
    assert np.max(np.abs(projective_flat_residual(m, x, y))) <= 1e-11


def test_perturbed_forward_map_is_not_projectively_flat():
    alpha, beta = euclidean(3), flat_conformal(1.0, (0.1, 0, 0))
    known = catalog("example3-check")
    vphi = CheckPhiFunction(lambda b2, s: known.expr(b2, s) + 0.01 * s * s * s, name="bent")
    m = GeneralABMetric(alpha, beta, vphi)
    x, y = sample_admissible(m, 5, 20, 0.5)
    assert np.max(np.abs(projective_flat_residual(m, x, y))) > 1e-4


def test_navigation_forms_agree():
    x, y = sample_xy(9, 50, 3, 0.9)
    abar = np.broadcast_to(np.eye(3), (50, 3, 3))
    F = navigation_value(abar, -x, y)
    a, b = navigation_to_randers(abar, -x)
    np.testing.assert_allclose(randers_value(a, b, y), F, rtol=1e-13)
    X2, xy = (x * x).sum(-1), (x * y).sum(-1)
    funk = (np.sqrt((1 - X2) + xy ** 2) + xy) / (1 - X2)
    np.testing.assert_allclose(F, funk, rtol=1e-13)
    with pytest.raises(DomainError):
        navigation_value(np.eye(3), np.array([1.0, 0, 0]), y[0])


def test_oneone_forms_agree():
    model = build_model(ModelParams(0.5, 1.0, 1.5, (0.1, 0.0, -0.1)))
    x, y = sample_xy(4, 50, 3, model.sample_radius())
    o = oneone_value(0.5, 1.5, 1.0, (0.1, 0.0, -0.1), x, y)
    np.testing.assert_allclose(oneone_breve_value(0.5, 1.5, 1.0, (0.1, 0.0, -0.1), x, y), o, rtol=1e-13)
    np.testing.assert_allclose(eval_F(metric_on(model, "example3"), x, y).val, o, rtol=1e-13)


def test_input_validation(model):
    m = metric_on(model, "example3")
    with pytest.raises(InputError):
        eval_F2(m, np.zeros(3), np.zeros(3))
    with pytest.raises(InputError):
        GeneralABMetric(euclidean(2), flat_conformal(1.0, (0, 0, 0)), catalog("one"))
