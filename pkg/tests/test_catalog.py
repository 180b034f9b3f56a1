import numpy as np
import pytest

from abflat.catalog import PARAMS, catalog, names
from abflat.errors import InputError
from abflat.phifunc import CheckPhiFunction, grid


def test_names_cover_perturbed_variants():
    n = names()
    assert "example3" in n and "example3-perturbed" in n
    assert "example3-check-perturbed" not in n


@pytest.mark.parametrize("name", [n for n in names() if not n.endswith("-perturbed")])
def test_domain_is_positive_and_in_cone(name):
    phi = catalog(name)
    b2, s = grid(phi.domain, (30, 30), 1e-3, phi.b_o)
    assert np.all(phi.valid(b2, s, positive=not isinstance(phi, CheckPhiFunction)))


@pytest.mark.parametrize("name, kw", [
    ("example1", {"a0": 0.0}),
    ("example2", {"kappa": 1.0, "eps": 2.0}),
    ("example8", {"p": 4.0}),
    ("example3", {"p": 1.0}),
    ("nope", {}),
])
def test_bad_requests(name, kw):
    with pytest.raises(InputError):
        catalog(name, **kw)


@pytest.mark.parametrize("kappa, eps", [(1.0, 1.0), (0.0, 0.5), (-1.0, 1.0), (-0.5, -0.5), (2.0, 0.3)])
def test_example2_family(kappa, eps):
    phi = catalog("example2", kappa=kappa, eps=eps)
    b2, s = grid(phi.domain, (15, 15), 1e-3, phi.b_o)
    assert np.all(phi.valid(b2, s))
    assert set(PARAMS["example2"]) == set(phi.params)


def test_navigation_entry_is_randers():
    # φ = sqrt(1 - b² + s²)/(1 - b²) - s/(1 - b²) reproduces the Randers form of navigation data
    phi = catalog("randers_navigation")
    b2, s = grid(phi.domain, (10, 10), 1e-3, phi.b_o)
    q = 1 - b2
    np.testing.assert_allclose(phi(b2, s), (np.sqrt(q + s * s) - s) / q, rtol=1e-13)
