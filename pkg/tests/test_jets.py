import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abflat import jets as J
from abflat.errors import DomainError


def fd_grad(f, x, h=1e-6):
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def fd_hess(f, x, h=1e-4):
    n = x.size
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return H


def composite(x):
    u, v, w = x[0], x[1], x[2]
    return J.sqrt(1 + u * u + v * v) * J.exp(0.3 * w) + J.log(2 + u * v) - J.arctan(v - w) / (1.5 + J.arcsinh(u))


def test_variables_seed_identity():
    x = J.variables(np.array([[0.1, 0.2, 0.3]]))
    assert x.val.shape == (1, 3)
    np.testing.assert_array_equal(x.grad[0], np.eye(3))
    assert np.all(x.hess == 0)


@pytest.mark.parametrize("fn, ref", [
    (J.sqrt, np.sqrt),
    (J.exp, np.exp),
    (J.log, np.log),
    (J.arcsin, np.arcsin),
    (J.arcsinh, np.arcsinh),
    (J.arctan, np.arctan),
])
def test_elementary_matches_finite_differences(fn, ref):
    t = np.array([0.35])
    j = fn(J.variables(t[None, :], order=3)[:, 0])
    scalar = lambda v: ref(v[0])
    assert j.val[0] == pytest.approx(ref(0.35), rel=1e-15)
    assert j.grad[0, 0] == pytest.approx(fd_grad(scalar, t)[0], rel=1e-8)
    assert j.hess[0, 0, 0] == pytest.approx(fd_hess(scalar, t)[0, 0], rel=1e-5)


def test_third_order_power():
    t = J.variables(np.array([[0.7]]), order=3)[:, 0]
    j = J.power(t, 2.5)
    assert j.tens[0, 0, 0, 0] == pytest.approx(2.5 * 1.5 * 0.5 * 0.7 ** -0.5, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.8, 0.8), min_size=3, max_size=3))
def test_composite_against_finite_differences(point):
    x = np.array(point)
    j = composite(J.variables(x[None, :]).T)
    f = lambda v: float(composite(v))
    g_fd, h_fd = fd_grad(f, x), fd_hess(f, x)
    assert np.max(np.abs(j.grad[0] - g_fd)) <= 1e-6 * (1 + np.max(np.abs(g_fd)))
    assert np.max(np.abs(j.hess[0] - h_fd)) <= 1e-6 * (1 + np.max(np.abs(h_fd))) * 100


def test_quadratic_is_exact():
    A = np.array([[2.0, -1.0], [-1.0, 3.0]])
    c = np.array([0.5, -0.25])
    x = np.array([[0.3, -0.7]])
    v = J.variables(x).T
    q = 0.5 * (A[0, 0] * v[0] * v[0] + 2 * A[0, 1] * v[0] * v[1] + A[1, 1] * v[1] * v[1]) + c[0] * v[0] + c[1] * v[1]
    np.testing.assert_array_equal(q.hess[0], A)
    np.testing.assert_allclose(q.grad[0], A @ x[0] + c, rtol=0, atol=4 * np.finfo(float).eps)


def test_domain_errors_raise_for_jets_only():
    with pytest.raises(DomainError):
        J.sqrt(J.variables(np.array([[-1.0]]))[:, 0])
    with pytest.raises(DomainError):
        J.log(J.variables(np.array([[0.0]]))[:, 0])
    with np.errstate(invalid="ignore"):
        assert np.isnan(J.sqrt(-1.0))


def test_complex_jets_carry_through_real():
    t = J.variables(np.array([[0.4]]))[:, 0]
    j = J.real(J.log(np.exp(0.5j) + t))
    ref = lambda v: np.real(np.log(np.exp(0.5j) + v[0]))
    assert j.grad[0, 0] == pytest.approx(fd_grad(ref, np.array([0.4]))[0], rel=1e-8)


def test_contract_and_inverse():
    rng = np.random.default_rng(0)
    x = J.variables(rng.uniform(-0.5, 0.5, (4, 2)))
    a = x.T
    M = J.stack([J.stack([2 + a[0] * a[0], a[0] * a[1]], -1), J.stack([a[0] * a[1], 3 + a[1]], -1)], -2)
    I = J.contract("...ij,...jk->...ik", M, J.inv(M))
    np.testing.assert_allclose(I.val, np.broadcast_to(np.eye(2), (4, 2, 2)), atol=1e-14)
    assert np.max(np.abs(I.grad)) < 1e-13
    assert np.max(np.abs(I.hess)) < 1e-12
