import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abflat.catalog import catalog
from abflat.errors import ContractError, DomainError, InputError
from abflat.phifunc import (
    CheckPhiFunction,
    PhiFunction,
    SolutionSpec,
    checkp_residual,
    dual_from_projective,
    finsler_positivity,
    grid,
    pde1_residual,
    perturbed,
    phi_from_fg,
    projective_from_dual,
    psi22_residual,
    varphi_residual,
)

from conftest import CATALOG

IDS = [name for name, _ in CATALOG]


def small_grid(phi, shape=(12, 12)):
    b2, s = grid(phi.domain, shape, 1e-3, phi.b_o)
    return b2.ravel(), s.ravel()


@pytest.mark.parametrize("name, params", CATALOG, ids=IDS)
def test_catalog_solves_basic_pde(name, params):
    phi = catalog(name, **params)
    b2, s = small_grid(phi)
    assert np.max(np.abs(pde1_residual(phi, b2, s))) <= 1e-9
    assert np.max(np.abs(psi22_residual(phi, b2, s) - 2 * pde1_residual(phi, b2, s))) <= 1e-9


@pytest.mark.parametrize("name, params", CATALOG, ids=IDS)
def test_perturbation_is_detected(name, params):
    phi = perturbed(catalog(name, **params))
    b2, s = small_grid(phi)
    assert np.max(np.abs(pde1_residual(phi, b2, s))) > 1e-4


@pytest.mark.parametrize("name", ["example2", "example4", "example8"])
def test_partials_against_finite_differences(name):
    phi = catalog(name)
    b2, s = small_grid(phi, (4, 4))
    b2 = b2 + 1e-3      # keep the b² stencil off the cone apex
    p = phi.partials(b2, s)
    h = 1e-6
    d1 = (phi(b2 + h, s) - phi(b2 - h, s)) / (2 * h)
    d2 = (phi(b2, s + h) - phi(b2, s - h)) / (2 * h)
    np.testing.assert_allclose(p["phi1"], d1, atol=1e-7)
    np.testing.assert_allclose(p["phi2"], d2, atol=1e-7)
    h = 1e-4
    d22 = (phi(b2, s + h) - 2 * phi(b2, s) + phi(b2, s - h)) / (h * h)
    np.testing.assert_allclose(p["phi22"], d22, atol=1e-5)


@pytest.mark.parametrize("name", ["funk", "example3", "example5", "example7"])
def test_generator_reproduces_closed_form(name):
    phi = catalog(name)
    built = phi_from_fg(phi.spec, b_o=phi.b_o)
    b2, s = small_grid(phi, (6, 6))
    a, b = built.jet(b2, s), phi.jet(b2, s)
    np.testing.assert_allclose(a.val, b.val, rtol=1e-10)
    np.testing.assert_allclose(a.grad, b.grad, rtol=1e-9, atol=1e-10)
    np.testing.assert_allclose(a.hess, b.hess, rtol=1e-8, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-0.3, 0.3), min_size=5, max_size=5))
def test_generator_solves_for_polynomial_pairs(c):
    spec = SolutionSpec(
        f=lambda t: c[0] + c[1] * t + c[2] * t * t,
        df=lambda t: c[1] + 2 * c[2] * t,
        g=lambda t: 1 + c[3] * t + c[4] * t * t,
        dg=lambda t: c[3] + 2 * c[4] * t,
    )
    phi = phi_from_fg(spec)
    b2, s = grid((0.0, 1.0, -1.0, 1.0), (6, 6))
    ok = phi.valid(b2, s)
    assert np.max(np.abs(pde1_residual(phi, b2[ok], s[ok], normalized=True)), initial=0.0) <= 1e-9


@pytest.mark.parametrize("name, params", CATALOG[1:], ids=IDS[1:])
def test_forward_map_and_round_trip(name, params):
    phi = catalog(name, **params)
    vphi = projective_from_dual(phi)
    b2, s = small_grid(phi, (5, 5))
    assert np.max(np.abs(checkp_residual(vphi, b2, s))) <= 1e-9
    back = dual_from_projective(vphi, phi(0.0, 0.0) ** 2)
    np.testing.assert_allclose(back(b2, s), phi(b2, s), atol=1e-8)


def test_forward_map_matches_known_pair():
    phi, known = catalog("example3"), catalog("example3-check")
    b2, s = small_grid(phi)
    vphi = projective_from_dual(phi)
    a, b = vphi.jet(b2, s), known.jet(b2, s)
    np.testing.assert_allclose(a.val, b.val, rtol=1e-12)
    np.testing.assert_allclose(a.grad, b.grad, rtol=1e-12)
    np.testing.assert_allclose(varphi_residual(known, b2, s), 0.0, atol=1e-12)


def test_forward_map_rejects_non_solutions_and_flags_constants():
    with pytest.raises(ContractError):
        projective_from_dual(catalog("example3-perturbed"))
    assert projective_from_dual(catalog("one")).degenerate


def test_values_outside_cone_raise():
    phi = catalog("example3")
    with pytest.raises(DomainError):
        phi(0.25, 0.6)
    with pytest.raises(DomainError):
        catalog("example5")(1.2, 0.0)


def test_constructor_needs_one_definition():
    with pytest.raises(InputError):
        PhiFunction()
    assert not CheckPhiFunction.positive


def test_positivity_scan():
    rep = finsler_positivity(catalog("example3"), 4.0, shape=(40, 40))
    assert rep.finsler_n3 and rep.skipped == 0
    bad = finsler_positivity(PhiFunction(lambda b2, s: 1 - s * s, name="bad"), 1.0, shape=(40, 40))
    assert bad.min_first > 0 and not bad.finsler_n2
    assert bad.violation_n2[0] > 0.5
