import numpy as np
import pytest

from abflat import jets as J
from abflat.deform import build_model
from abflat.errors import InputError
from abflat.fields import (
    ModelParams,
    check_dually_flat_spray,
    check_dually_related,
    christoffel,
    closed_conformal,
    conformal_factor,
    constant_curvature,
    contractions,
    covariant_derivative,
    euclidean,
    fit_dually_flat_data,
    norm2,
    projective_factor,
    random_polynomial_data,
    spray_riemann,
)
from abflat.sampling import sample_xy


def fd_christoffel(metric, x, h=1e-6):
    n = metric.dim
    dA = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dA[:, :, k] = (metric.matrix(x + e) - metric.matrix(x - e)) / (2 * h)
    low = 0.5 * (np.einsum("ljk->ljk", dA) + np.einsum("lkj->ljk", dA) - np.einsum("jkl->ljk", dA))
    return np.einsum("il,ljk->ijk", np.linalg.inv(metric.matrix(x)), low)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_christoffel_matches_finite_differences(seed):
    alpha, _ = random_polynomial_data(seed, 3)
    x = np.array([0.2, -0.1, 0.3])
    np.testing.assert_allclose(christoffel(alpha, x), fd_christoffel(alpha, x), atol=1e-8)


def test_euclidean_is_flat():
    x, y = sample_xy(0, 10, 3, 1.0)
    assert np.max(np.abs(spray_riemann(euclidean(3), x, y))) == 0.0


@pytest.mark.parametrize("mu", [-1.0, 0.5, 2.0])
def test_constant_curvature_spray_is_projective(mu):
    r = 0.8 / np.sqrt(-mu) if mu < 0 else 1.0
    x, y = sample_xy(1, 50, 3, r)
    G = spray_riemann(constant_curvature(mu, 3), x, y)
    np.testing.assert_allclose(G, projective_factor(mu, x, y)[:, None] * y, atol=1e-13)


@pytest.mark.parametrize("mu, lam, a", [(0.0, 1.0, (0.1, 0.2, 0.0)), (-1.0, 2.0, (0.0, 0.3, -0.1)), (0.7, 1.0, (0.2, 0, 0))])
def test_closed_conformal_form(mu, lam, a):
    alpha = constant_curvature(mu, 3)
    x, _ = sample_xy(2, 50, 3, 0.5)
    bij = covariant_derivative(alpha, closed_conformal(mu, lam, a), x)
    expect = conformal_factor(mu, lam, a, x)[:, None, None] * alpha.matrix(x)
    np.testing.assert_allclose(bij, expect, atol=1e-13)


def test_contractions_are_consistent():
    alpha, beta = random_polynomial_data(4, 3)
    x, y = sample_xy(3, 20, 3, 0.5)
    con = contractions(alpha, beta, x, y)
    np.testing.assert_allclose(con.rij, np.swapaxes(con.rij, -1, -2))
    np.testing.assert_allclose(con.sij, -np.swapaxes(con.sij, -1, -2))
    np.testing.assert_allclose(con.b2, norm2(alpha, beta, x), rtol=1e-14)
    np.testing.assert_allclose(con.s0, np.einsum("...ij,...i,...j->...", con.sij, con.b_up, y), atol=1e-15)
    np.testing.assert_allclose(con.r0, np.einsum("...i,...i->...", con.r_low, y))


@pytest.mark.parametrize("mu, sigma, a", [(-1.0, 1.0, (0, 0, 0)), (0.7, 2.0, (0.1, -0.2, 0.0)), (0.0, 1.0, (0.1, 0, 0))])
def test_model_data_is_dually_flat_and_related(mu, sigma, a):
    model = build_model(ModelParams(mu, 1.0, sigma, a))
    x, y = sample_xy(5, 50, 3, model.sample_radius())
    assert np.max(check_dually_flat_spray(model.alpha, model.data.theta, x, y)) < 1e-13
    assert np.max(check_dually_related(model.alpha, model.beta, model.data, x)) < 1e-13
    fit = fit_dually_flat_data(model.alpha, model.beta)
    np.testing.assert_allclose(fit.theta(x), model.data.theta(x), atol=1e-12)
    np.testing.assert_allclose(fit.c(x), model.data.c(x), atol=1e-12)


def test_fields_evaluate_on_jets():
    alpha, beta = random_polynomial_data(0, 3)
    X = J.variables(np.array([[0.1, 0.2, 0.3]]))
    assert J.is_jet(alpha.matrix(X)) and J.is_jet(beta(X))


def test_wrong_dimension_rejected():
    with pytest.raises(InputError):
        christoffel(euclidean(3), np.zeros(2))


def test_polynomial_data_positive_definite():
    alpha, _ = random_polynomial_data(9, 4)
    x, _ = sample_xy(0, 200, 4, 0.5)
    assert np.min(np.linalg.eigvalsh(alpha.matrix(x))) > 0
