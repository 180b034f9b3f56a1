"""Riemannian metrics, 1-forms and the dual-flatness conditions.

Metrics and forms are coordinate fields: callables taking a point ``x`` of
shape ``(..., n)`` and returning ``a_ij(x)`` of shape ``(..., n, n)`` or
``b_i(x)`` of shape ``(..., n)``.  They are written with the dispatching
functions of :mod:`abflat.jets`, so the same callable evaluates on plain
arrays and on jets; every derivative below comes from jets.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .errors import DomainError, InputError

__all__ = [
    "RiemannianMetric",
    "OneForm",
    "DuallyFlatData",
    "ModelParams",
    "Contractions",
    "christoffel",
    "spray_riemann",
    "covariant_derivative",
    "contractions",
    "norm2",
    "check_dually_flat_spray",
    "check_dually_related",
    "nontriviality",
    "fit_theta",
    "fit_dually_flat_data",
    "euclidean",
    "constant_curvature",
    "closed_conformal",
    "flat_conformal",
    "dually_flat_model",
    "dually_related_model",
    "projective_factor",
    "conformal_factor",
    "random_polynomial_data",
]


def _points(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise InputError(f"expected points of dimension {n}, got shape {x.shape}")
    return x


class RiemannianMetric:
    """``α = sqrt(a_ij(x) y^i y^j)`` given by its coefficient field."""

    def __init__(self, dim, matrix, name="metric", radius=np.inf):
        self.dim = int(dim)
        self._matrix = matrix
        self.name = name
        self.radius = radius

    def __repr__(self):
        return f"RiemannianMetric({self.name!r}, dim={self.dim})"

    def matrix(self, x):
        return self._matrix(x)

    def inverse(self, x):
        return J.inv(self.matrix(x))

    def alpha2(self, x, y):
        return J.contract("...i,...i->...", J.contract("...ij,...j->...i", self.matrix(x), y), y)

    def alpha(self, x, y):
        return J.sqrt(self.alpha2(x, y))

    def lower(self, x, y):
        """``y_i = a_ij y^j``."""
        return J.contract("...ij,...j->...i", self.matrix(x), y)

    def check_positive(self, x):
        """Cholesky test at every point; raises :class:`DomainError`."""
        x = _points(x, self.dim)
        A = np.asarray(J.value_of(self.matrix(x)))
        finite = np.all(np.isfinite(A), axis=(-1, -2))
        if np.all(finite):
            try:
                np.linalg.cholesky(A)
                return True
            except np.linalg.LinAlgError:
                pass
        safe = np.where(finite[..., None, None], A, np.eye(self.dim))
        bad = ~finite | (np.linalg.eigvalsh(safe)[..., 0] <= 0)
        raise DomainError(f"{self.name} is not positive definite", point=x[bad][0])


class OneForm:
    """``β = b_i(x) y^i`` given by its covector field."""

    def __init__(self, dim, covector, name="form"):
        self.dim = int(dim)
        self._covector = covector
        self.name = name

    def __repr__(self):
        return f"OneForm({self.name!r}, dim={self.dim})"

    def __call__(self, x):
        return self._covector(x)

    def beta(self, x, y):
        return J.contract("...i,...i->...", self(x), y)


def norm2(metric, form, x):
    """``b² = a^{ij} b_i b_j`` (jet-aware)."""
    b = form(x)
    return J.contract("...i,...i->...", J.contract("...ij,...j->...i", metric.inverse(x), b), b)


@dataclass
class DuallyFlatData:
    """The 1-form ``θ`` of the adapted spray and the scalar ``c(x)``.

    ``theta`` and ``c`` are callables on points; ``nontrivial`` declares that
    ``c + 2 θ_k b^k`` should stay away from zero.
    """

    theta: object
    c: object
    nontrivial: bool = True
    name: str = "data"


@dataclass
class ModelParams:
    """Constants of the model data: curvature ``mu``, ``lam``, ``sigma``, ``a_vec``."""

    mu: float = 0.0
    lam: float = 1.0
    sigma: float = 1.0
    a_vec: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        self.a_vec = tuple(float(v) for v in self.a_vec)

    @property
    def dim(self):
        return len(self.a_vec)

    @property
    def radius(self):
        """``1/sqrt(-mu)`` for negative ``mu``, else infinity."""
        return 1.0 / np.sqrt(-self.mu) if self.mu < 0 else np.inf

    def sample_radius(self, cap=1.0, fraction=0.8):
        return min(fraction * self.radius, cap)


# ----------------------------------------------------------------- connection
def _x_jets(x):
    return J.variables(np.asarray(x, dtype=float))


def christoffel(metric, x):
    """Levi-Civita symbols ``Γ^i_jk`` with shape ``(..., n, n, n)``."""
    x = _points(x, metric.dim)
    A = metric.matrix(_x_jets(x))
    a = A.val
    dA = A.grad                                   # dA[..., i, j, k] = ∂_k a_ij
    ainv = J._safe_inv(a)
    low = 0.5 * (np.einsum("...lkj->...ljk", dA) + np.einsum("...ljk->...ljk", dA)
                 - np.einsum("...jkl->...ljk", dA))
    # low[l, j, k] = ½(∂_j a_lk + ∂_k a_lj - ∂_l a_jk)
    return np.einsum("...il,...ljk->...ijk", ainv, low)


def spray_riemann(metric, x, y):
    """``G^i = ½ Γ^i_jk y^j y^k``."""
    y = _points(y, metric.dim)
    return 0.5 * np.einsum("...ijk,...j,...k->...i", christoffel(metric, x), y, y)


def covariant_derivative(metric, form, x):
    """``b_{i|j} = ∂_j b_i - Γ^k_ij b_k``."""
    x = _points(x, metric.dim)
    b = form(_x_jets(x))
    gamma = christoffel(metric, x)
    return b.grad - np.einsum("...kij,...k->...ij", gamma, b.val)


@dataclass
class Contractions:
    r00: np.ndarray
    r_low: np.ndarray
    r_up: np.ndarray
    r0: np.ndarray
    r: np.ndarray
    s_i0: np.ndarray
    s_up0: np.ndarray
    s_low: np.ndarray
    s_up: np.ndarray
    s0: np.ndarray
    rij: np.ndarray
    sij: np.ndarray
    bij: np.ndarray
    b_low: np.ndarray
    b_up: np.ndarray
    b2: np.ndarray


def contractions(metric, form, x, y):
    """All contracted quantities of ``r_ij``/``s_ij`` at ``(x, y)``."""
    x = _points(x, metric.dim)
    y = _points(y, metric.dim)
    bij = covariant_derivative(metric, form, x)
    rij = 0.5 * (bij + np.swapaxes(bij, -1, -2))
    sij = 0.5 * (bij - np.swapaxes(bij, -1, -2))
    ainv = np.asarray(J.value_of(metric.inverse(x)))
    b_low = np.asarray(J.value_of(form(x)))
    b_up = np.einsum("...ij,...j->...i", ainv, b_low)
    r_low = np.einsum("...li,...l->...i", rij, b_up)
    s_low = np.einsum("...li,...l->...i", sij, b_up)
    s_i0 = np.einsum("...ij,...j->...i", sij, y)
    return Contractions(
        r00=np.einsum("...ij,...i,...j->...", rij, y, y),
        r_low=r_low,
        r_up=np.einsum("...ij,...j->...i", ainv, r_low),
        r0=np.einsum("...i,...i->...", r_low, y),
        r=np.einsum("...i,...i->...", r_low, b_up),
        s_i0=s_i0,
        s_up0=np.einsum("...ij,...j->...i", ainv, s_i0),
        s_low=s_low,
        s_up=np.einsum("...ij,...j->...i", ainv, s_low),
        s0=np.einsum("...i,...i->...", s_low, y),
        rij=rij,
        sij=sij,
        bij=bij,
        b_low=b_low,
        b_up=b_up,
        b2=np.einsum("...i,...i->...", b_low, b_up),
    )


# -------------------------------------------------------- dual flatness tests
def _theta_values(theta, x):
    return np.asarray(J.value_of(theta(x)), dtype=float)


def adapted_spray(metric, theta, x, y):
    """``2θ y^i + α² θ^i`` for a given 1-form ``θ``."""
    th = _theta_values(theta, x)
    a = np.asarray(J.value_of(metric.matrix(x)))
    th_up = np.linalg.solve(a, th[..., None])[..., 0]
    alpha2 = np.einsum("...ij,...i,...j->...", a, y, y)
    t0 = np.einsum("...i,...i->...", th, y)
    return 2 * t0[..., None] * y + alpha2[..., None] * th_up


def check_dually_flat_spray(metric, theta, x, y):
    """Max-norm of ``G^i - 2θ y^i - α² θ^i`` per sample."""
    x = _points(x, metric.dim)
    y = _points(y, metric.dim)
    diff = spray_riemann(metric, x, y) - adapted_spray(metric, theta, x, y)
    return np.max(np.abs(diff), axis=-1)


def check_dually_related(metric, form, data, x):
    """Max-norm of ``b_{i|j} - 2θ_i b_j - c a_ij`` per point."""
    x = _points(x, metric.dim)
    bij = covariant_derivative(metric, form, x)
    th = _theta_values(data.theta, x)
    c = np.asarray(J.value_of(data.c(x)), dtype=float)
    a = np.asarray(J.value_of(metric.matrix(x)))
    b = np.asarray(J.value_of(form(x)))
    diff = bij - 2 * th[..., :, None] * b[..., None, :] - c[..., None, None] * a
    return np.max(np.abs(diff), axis=(-1, -2))


def nontriviality(metric, form, data, x):
    """``c̄ = c + 2 θ_k b^k``; zero means every φ gives a dually flat metric."""
    x = _points(x, metric.dim)
    th = _theta_values(data.theta, x)
    c = np.asarray(J.value_of(data.c(x)), dtype=float)
    a = np.asarray(J.value_of(metric.matrix(x)))
    b = np.asarray(J.value_of(form(x)))
    b_up = np.linalg.solve(a, b[..., None])[..., 0]
    return c + 2 * np.einsum("...k,...k->...", th, b_up)


def _fit_directions(n):
    eye = np.eye(n)
    extra = [np.ones(n) / np.sqrt(n), np.array([(-1.0) ** k for k in range(n)]) / np.sqrt(n)]
    ramp = np.arange(1.0, n + 1)
    extra.append(ramp / np.linalg.norm(ramp))
    return np.vstack([eye, *extra])


def fit_theta(metric, x, directions=None):
    """Least-squares ``θ_i(x)`` from spray samples along fixed directions.

    Solves ``G^i(x, y) = 2 θ_k y^k y^i + α² a^{ik} θ_k`` stacked over the
    directions.  Assumes the directions are in general position.
    """
    x = _points(x, metric.dim)
    n = metric.dim
    Y = _fit_directions(n) if directions is None else np.asarray(directions, float)
    a = np.asarray(J.value_of(metric.matrix(x)))
    ainv = np.linalg.inv(a)
    gamma = christoffel(metric, x)
    rows, rhs = [], []
    for y in Y:
        G = 0.5 * np.einsum("...ijk,j,k->...i", gamma, y, y)
        alpha2 = np.einsum("...ij,i,j->...", a, y, y)
        M = 2 * np.einsum("i,k->ik", y, y) + alpha2[..., None, None] * ainv
        rows.append(np.broadcast_to(M, G.shape + (n,)))
        rhs.append(G)
    M = np.concatenate(rows, axis=-2)
    G = np.concatenate(rhs, axis=-1)
    return np.einsum("...ij,...j->...i", np.linalg.pinv(M), G)


def fit_dually_flat_data(metric, form, name="fitted"):
    """:class:`DuallyFlatData` whose ``θ`` and ``c`` are fitted pointwise.

    ``θ`` comes from :func:`fit_theta`; ``c`` is then the least-squares
    coefficient of ``a_ij`` in ``b_{i|j} - 2θ_i b_j``.
    """

    def theta(x):
        return fit_theta(metric, J.value_of(x))

    def c(x):
        x = np.asarray(J.value_of(x), float)
        th = fit_theta(metric, x)
        bij = covariant_derivative(metric, form, x)
        b = np.asarray(J.value_of(form(x)))
        a = np.asarray(J.value_of(metric.matrix(x)))
        rest = bij - 2 * th[..., :, None] * b[..., None, :]
        return np.einsum("...ij,...ij->...", rest, a) / np.einsum("...ij,...ij->...", a, a)

    return DuallyFlatData(theta=theta, c=c, name=name)


# ----------------------------------------------------------------- model data
def _sq(x):
    return (x * x).sum(axis=-1)


def euclidean(n):
    """``α = |y|``."""

    def matrix(x):
        shape = J.value_of(x).shape[:-1]
        return np.broadcast_to(np.eye(n), shape + (n, n)) + 0.0 * _sq(x)[..., None, None]

    return RiemannianMetric(n, matrix, name="euclidean")


def constant_curvature(mu, n):
    """Metric of constant sectional curvature ``mu`` in projective coordinates.

    ``α² = ((1+μ|x|²)|y|² - μ<x,y>²) / (1+μ|x|²)²``; valid for ``1+μ|x|²>0``.
    """
    mu = float(mu)

    def matrix(x):
        w = 1.0 + mu * _sq(x)
        xx = x[..., :, None] * x[..., None, :]
        return np.eye(n) / w[..., None, None] - (mu * xx) / (w * w)[..., None, None]

    radius = 1.0 / np.sqrt(-mu) if mu < 0 else np.inf
    return RiemannianMetric(n, matrix, name=f"constant_curvature(mu={mu:g})", radius=radius)


def closed_conformal(mu, lam, a_vec):
    """Closed conformal 1-form of the constant-curvature metric.

    ``β = (λ<x,y> + (1+μ|x|²)<a,y> - μ<a,x><x,y>) / (1+μ|x|²)^{3/2}``.
    """
    mu, lam = float(mu), float(lam)
    a = np.asarray(a_vec, float)
    n = a.shape[0]

    def covector(x):
        w = 1.0 + mu * _sq(x)
        ax = (x * a).sum(axis=-1)
        num = x * lam + a * w[..., None] - x * (mu * ax)[..., None]
        return num / J.power(w, 1.5)[..., None]

    return OneForm(n, covector, name=f"closed_conformal(mu={mu:g}, lam={lam:g})")


def flat_conformal(lam, a_vec):
    """``β = λ<x,y> + <a,y>`` (the closed conformal form of ``|y|``)."""
    lam = float(lam)
    a = np.asarray(a_vec, float)

    def covector(x):
        return x * lam + a

    return OneForm(a.shape[0], covector, name=f"flat_conformal(lam={lam:g})")


def dually_flat_model(mu, n):
    """``α = sqrt((1+μ|x|²)|y|² - μ<x,y>²) / (1+μ|x|²)^{3/4}``."""
    mu = float(mu)

    def matrix(x):
        w = 1.0 + mu * _sq(x)
        xx = x[..., :, None] * x[..., None, :]
        num = np.eye(n) * w[..., None, None] - xx * mu
        return num / J.power(w, 1.5)[..., None, None]

    radius = 1.0 / np.sqrt(-mu) if mu < 0 else np.inf
    return RiemannianMetric(n, matrix, name=f"dually_flat_model(mu={mu:g})", radius=radius)


def dually_related_model(mu, lam, n):
    """``β = λ<x,y> / (1+μ|x|²)^{5/4}``."""
    mu, lam = float(mu), float(lam)

    def covector(x):
        w = 1.0 + mu * _sq(x)
        return x * lam / J.power(w, 1.25)[..., None]

    return OneForm(n, covector, name=f"dually_related_model(mu={mu:g}, lam={lam:g})")


def projective_factor(mu, x, y):
    """``P = -μ<x,y>/(1+μ|x|²)``; the constant-curvature spray is ``P y``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return -mu * np.einsum("...i,...i->...", x, y) / (1.0 + mu * np.einsum("...i,...i->...", x, x))


def conformal_factor(mu, lam, a_vec, x):
    """``τ = (λ - μ<a,x>)/sqrt(1+μ|x|²)`` with ``b_{i|j} = τ a_ij``."""
    x = np.asarray(x, float)
    a = np.asarray(a_vec, float)
    return (lam - mu * np.einsum("...i,i->...", x, a)) / np.sqrt(1.0 + mu * np.einsum("...i,...i->...", x, x))


def random_polynomial_data(seed, n=3, scale=0.1):
    """Generic ``(α, β)``: ``a_ij = δ_ij + small symmetric quadratic``, affine ``b_i``.

    Positive definite for ``|x| ≲ 1`` at the default scale.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, 7]))
    L = rng.uniform(-1, 1, (n, n, n)) * scale
    Q = rng.uniform(-1, 1, (n, n, n, n)) * scale
    L = 0.5 * (L + np.swapaxes(L, 0, 1))
    Q = 0.5 * (Q + np.swapaxes(Q, 0, 1))
    b0 = rng.uniform(-0.5, 0.5, n)
    B1 = rng.uniform(-0.5, 0.5, (n, n))

    def matrix(x):
        lin = J.contract("ijk,...k->...ij", L, x)
        quad = J.contract("...ijk,...k->...ij", J.contract("ijkl,...l->...ijk", Q, x), x)
        return lin + quad + np.eye(n)

    def covector(x):
        return J.contract("ij,...j->...i", B1, x) + b0

    return (RiemannianMetric(n, matrix, name=f"polynomial(seed={seed})"),
            OneForm(n, covector, name=f"affine(seed={seed})"))
