"""General (α,β)-metrics ``F = α φ(b², β/α)`` and their flatness residuals.

``F²`` is evaluated as one jet over the ``2n`` joint variables
``(x¹..xⁿ, y¹..yⁿ)``; the dual-flatness and Hamel residuals, the
fundamental tensor and the spray are read off its gradient and Hessian.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .errors import ContractError, DomainError, InputError, SingularityError
from .fields import (
    check_dually_flat_spray,
    check_dually_related,
    contractions,
    nontriviality,
    norm2,
)
from .phifunc import _pde1_terms
from .sampling import sample_xy

__all__ = [
    "GeneralABMetric",
    "eval_F2",
    "eval_F",
    "fundamental_tensor",
    "spray_finsler",
    "dual_flat_residual",
    "projective_flat_residual",
    "structure_identities",
    "s_y_identity",
    "dual_flat_equivalence",
    "EquivalenceReport",
    "sample_admissible",
    "navigation_value",
    "navigation_to_randers",
    "randers_value",
    "oneone_value",
    "oneone_breve_value",
]

S_MARGIN = 0.999


def _xy(x, y, n):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    x, y = np.broadcast_arrays(x, y)
    if x.shape[-1] != n:
        raise InputError(f"expected points of dimension {n}, got shape {x.shape}")
    if np.any(np.all(y == 0, axis=-1)):
        raise InputError("y must be nonzero")
    return x, y


class GeneralABMetric:
    """``F = α φ(b², β/α)`` from a metric, a 1-form and a φ-function."""

    def __init__(self, alpha, beta, phi, name=None):
        if alpha.dim != beta.dim:
            raise InputError("alpha and beta dimensions differ")
        self.alpha = alpha
        self.beta = beta
        self.phi = phi
        self.dim = alpha.dim
        self.name = name or f"{phi.name} on ({alpha.name}, {beta.name})"

    def __repr__(self):
        return f"GeneralABMetric({self.name!r})"

    def arguments(self, x, y):
        """``(b², s)`` at numeric points."""
        x, y = _xy(x, y, self.dim)
        b2 = np.asarray(J.value_of(norm2(self.alpha, self.beta, x)))
        a = np.asarray(J.value_of(self.alpha.alpha(x, y)))
        s = np.asarray(J.value_of(self.beta.beta(x, y))) / a
        return b2, s

    def admissible(self, x, y, margin=S_MARGIN):
        """Mask of samples inside φ's working region with ``|s| <= margin·b``."""
        b2, s = self.arguments(x, y)
        b = np.sqrt(np.maximum(b2, 0.0))
        ok = (np.abs(s) <= margin * b + 1e-300) & (b < self.phi.b_o)
        if self.phi.domain is not None:
            lo, hi, tlo, thi = self.phi.domain
            t = np.where(b > 0, s / np.where(b > 0, b, 1.0), 0.0)
            ok &= (b2 >= lo) & (b2 <= hi) & (t >= tlo) & (t <= thi)
        return ok & self.phi.valid(b2, s, positive=True)

    def _check(self, b2, s):
        b = np.sqrt(np.maximum(b2, 0.0))
        bad = ~(np.abs(s) <= b * (1 + 1e-12) + 1e-300)
        if np.any(bad):
            raise DomainError("|β/α| exceeds b", point=(b2[bad].ravel()[0], s[bad].ravel()[0]))


def _joint(x, y):
    V = J.variables(np.concatenate([x, y], axis=-1))
    n = x.shape[-1]
    return V[..., :n], V[..., n:]


def eval_F2(metric, x, y):
    """``F²`` as a jet over the joint variables ``(x, y)``."""
    x, y = _xy(x, y, metric.dim)
    X, Y = _joint(x, y)
    a2 = metric.alpha.alpha2(X, Y)
    a = J.sqrt(a2)
    b2 = norm2(metric.alpha, metric.beta, X)
    s = metric.beta.beta(X, Y) / a
    metric._check(b2.val, s.val)
    phi = metric.phi.compose(b2, s)
    return a2 * phi * phi


def eval_F(metric, x, y):
    return J.sqrt(eval_F2(metric, x, y))


def fundamental_tensor(metric, x, y):
    """``g_ij = ½[F²]_{y^i y^j}``."""
    n = metric.dim
    return 0.5 * eval_F2(metric, x, y).hess[..., n:, n:]


def _flat_parts(jet, y, n):
    mixed = np.einsum("...kl,...k->...l", jet.hess[..., :n, n:], y)
    return mixed, jet.grad[..., :n]


def spray_finsler(metric, x, y):
    """``G^i = ¼ g^{il}([F²]_{x^k y^l} y^k - [F²]_{x^l})``."""
    x, y = _xy(x, y, metric.dim)
    n = metric.dim
    F2 = eval_F2(metric, x, y)
    mixed, dx = _flat_parts(F2, y, n)
    g = 0.5 * F2.hess[..., n:, n:]
    return 0.25 * _solve(g, mixed - dx)


def _solve(g, rhs):
    try:
        return np.linalg.solve(g, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularityError("singular fundamental tensor", point=g) from exc


def dual_flat_residual(metric, x, y, normalized=False):
    """``[F²]_{x^k y^l} y^k - 2[F²]_{x^l}`` per component."""
    x, y = _xy(x, y, metric.dim)
    mixed, dx = _flat_parts(eval_F2(metric, x, y), y, metric.dim)
    res = mixed - 2 * dx
    if normalized:
        return res / (1 + np.abs(mixed) + 2 * np.abs(dx))
    return res


def projective_flat_residual(metric, x, y, normalized=False):
    """Hamel residual ``F_{x^k y^l} y^k - F_{x^l}`` per component."""
    x, y = _xy(x, y, metric.dim)
    mixed, dx = _flat_parts(eval_F(metric, x, y), y, metric.dim)
    res = mixed - dx
    if normalized:
        return res / (1 + np.abs(mixed) + np.abs(dx))
    return res


# ------------------------------------------------------------ sampling helper
def sample_admissible(metric, seed, count, radius, margin=S_MARGIN, channel=0):
    """``count`` samples ``(x, y)`` with ``|x| < radius`` that the metric accepts."""
    def accept(x, y):
        with np.errstate(all="ignore"):
            return metric.admissible(x, y, margin)

    return sample_xy(seed, count, metric.dim, radius, accept=accept, channel=channel)


# ------------------------------------------------------- structure identities
def s_y_identity(alpha, beta, x, y):
    """Max-norm of ``s_{y^l} - α⁻²(α b_l - s y_l)``; holds for any ``(α, β)``."""
    x, y = _xy(x, y, alpha.dim)
    n = alpha.dim
    X, Y = _joint(x, y)
    a = alpha.alpha(X, Y)
    s = beta.beta(X, Y) / a
    yl = np.asarray(J.value_of(alpha.lower(x, y)))
    b = np.asarray(J.value_of(beta(x)))
    av = a.val[..., None]
    rhs = (av * b - s.val[..., None] * yl) / (av * av)
    return np.max(np.abs(s.grad[..., n:] - rhs), axis=-1)


def structure_identities(alpha, beta, data, x, y, tol=1e-8):
    """Residuals of the six identities implied by the adapted spray and dual relation.

    Returns a dict ``name -> per-sample max-norm``.  Raises
    :class:`ContractError` when the conditions themselves fail at ``tol``.
    """
    x, y = _xy(x, y, alpha.dim)
    n = alpha.dim
    spray = check_dually_flat_spray(alpha, data.theta, x, y)
    if np.max(spray) > tol:
        raise ContractError(f"alpha is not in adapted dually flat form (residual {np.max(spray):.3g})")
    related = check_dually_related(alpha, beta, data, x)
    if np.max(related) > tol:
        raise ContractError(f"beta is not dually related (residual {np.max(related):.3g})")

    A = np.asarray(J.value_of(alpha.matrix(x)))
    b = np.asarray(J.value_of(beta(x)))
    th = np.asarray(J.value_of(data.theta(x)), float)
    c = np.asarray(J.value_of(data.c(x)), float)
    cbar = nontriviality(alpha, beta, data, x)
    con = contractions(alpha, beta, x, y)
    tb = th[..., :, None] * b[..., None, :]
    r_pred = c[..., None, None] * A + tb + np.swapaxes(tb, -1, -2)
    s_pred = tb - np.swapaxes(tb, -1, -2)

    X, Y = _joint(x, y)
    b2 = norm2(alpha, beta, X)
    a = alpha.alpha(X, Y)
    be = beta.beta(X, Y)
    yl = np.einsum("...ij,...j->...i", A, y)
    av = a.val[..., None]
    t0 = np.einsum("...i,...i->...", th, y)[..., None]
    beta_v = be.val[..., None]
    out = {
        "r_ij": np.max(np.abs(con.rij - r_pred), axis=(-1, -2)),
        "s_ij": np.max(np.abs(con.sij - s_pred), axis=(-1, -2)),
        "b2_x": np.max(np.abs(b2.grad[..., :n] - 2 * cbar[..., None] * b), axis=-1),
        "alpha_x": np.max(np.abs(a.grad[..., :n] - 2 / av * (av * av * th + 2 * t0 * yl)), axis=-1),
        "beta_x": np.max(np.abs(be.grad[..., :n] - (cbar[..., None] * yl + 2 * beta_v * th + 4 * t0 * b)), axis=-1),
        "s_y": s_y_identity(alpha, beta, x, y),
    }
    return out


# ------------------------------------------------------------- equivalence
@dataclass
class EquivalenceReport:
    """Outcome of comparing the dual-flatness residual with the basic PDE."""

    pde1_max: float
    dual_max: float
    factor_mismatch: float
    cbar_min_abs: float
    inconclusive: bool
    direction_i: object = None
    direction_ii: object = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        checks = [d for d in (self.direction_i, self.direction_ii) if d is not None]
        return bool(checks) and all(checks) and not self.inconclusive


def _predicted_dual_residual(metric, x, y):
    """``2α·c̄·E·(α b_l - s y_l)`` with ``E`` the basic-PDE expression."""
    b2, s = metric.arguments(x, y)
    E = sum(_pde1_terms(metric.phi, b2, s))
    a = np.asarray(J.value_of(metric.alpha.alpha(x, y)))
    b = np.asarray(J.value_of(metric.beta(x)))
    yl = np.asarray(J.value_of(metric.alpha.lower(x, y)))
    return E, a, b, yl, s


def dual_flat_equivalence(metric, data, x, y, tol=1e-9, tol_dual=1e-9, detect=1e-4, tol_factor=1e-8,
                         cbar_floor=1e-8):
    """Check that ``F`` is dually flat exactly when φ solves the basic PDE.

    Direction (i) applies when the basic-PDE residual is at most ``tol``:
    then the dual-flatness residual must be at most ``tol_dual``.  Direction
    (ii) applies otherwise: the dual-flatness residual must exceed ``detect``.
    In both cases the dual-flatness residual must match the factorized
    prediction ``2α c̄ E (α b_l - s y_l)`` to ``tol_factor`` (relative).
    """
    x, y = _xy(x, y, metric.dim)
    cbar = nontriviality(metric.alpha, metric.beta, data, x)
    E, a, b, yl, s = _predicted_dual_residual(metric, x, y)
    terms = _pde1_terms(metric.phi, *metric.arguments(x, y))
    scale = 1 + sum(np.abs(t) for t in terms)
    pde1 = np.abs(E) / scale
    dual = dual_flat_residual(metric, x, y)
    pred = 2 * (a * cbar * E)[..., None] * (a[..., None] * b - s[..., None] * yl)
    mismatch = np.max(np.abs(dual - pred) / (1 + np.abs(pred)))
    dual_n = np.max(np.abs(dual_flat_residual(metric, x, y, normalized=True)))
    rep = EquivalenceReport(
        pde1_max=float(np.max(pde1)),
        dual_max=float(dual_n),
        factor_mismatch=float(mismatch),
        cbar_min_abs=float(np.min(np.abs(cbar))),
        inconclusive=bool(np.max(np.abs(cbar)) < cbar_floor),
    )
    if rep.inconclusive:
        rep.notes.append("c̄ vanishes on the samples: every φ gives a dually flat metric")
        return rep
    if rep.pde1_max <= tol:
        rep.direction_i = bool(rep.dual_max <= tol_dual and mismatch <= tol_factor)
    else:
        rep.direction_ii = bool(np.max(np.abs(dual)) > detect and mismatch <= tol_factor)
    return rep


# --------------------------------------------------- closed-form re-expressions
def navigation_value(abar, bbar, y):
    """Randers metric from navigation data ``(ᾱ, β̄)`` (matrix and covector)."""
    abar = np.asarray(abar, float)
    bbar = np.asarray(bbar, float)
    y = np.asarray(y, float)
    inv = np.linalg.inv(abar)
    bb2 = np.einsum("...i,...ij,...j->...", bbar, inv, bbar)
    if np.any(bb2 >= 1):
        raise DomainError("navigation data needs |β̄| < 1", point=bb2)
    a2 = np.einsum("...ij,...i,...j->...", abar, y, y)
    be = np.einsum("...i,...i->...", bbar, y)
    q = 1 - bb2
    return (np.sqrt(q * a2 + be * be) - be) / q


def navigation_to_randers(abar, bbar):
    """``(a_ij, b_i)`` with ``F = sqrt(a_ij y^i y^j) + b_i y^i``."""
    abar = np.asarray(abar, float)
    bbar = np.asarray(bbar, float)
    bb2 = np.einsum("...i,...ij,...j->...", bbar, np.linalg.inv(abar), bbar)
    q = (1 - bb2)[..., None]
    a = (q[..., None] * abar + bbar[..., :, None] * bbar[..., None, :]) / (q * q)[..., None]
    return a, -bbar / q


def randers_value(a, b, y):
    a = np.asarray(a, float)
    y = np.asarray(y, float)
    return np.sqrt(np.einsum("...ij,...i,...j->...", a, y, y)) + np.einsum("...i,...i->...", b, y)


def _base(mu, lam, a_vec, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    bvec = lam * x + np.asarray(a_vec, float)
    b2 = np.einsum("...i,...i->...", bvec, bvec)
    return b2, np.einsum("...i,...i->...", y, y), np.einsum("...i,...i->...", bvec, y)


def oneone_value(mu, sigma, lam, a_vec, x, y):
    """The dually flat metric obtained from ``(sqrt(1+b²)+s)^{3/2}`` in closed form."""
    b2, a2, be = _base(mu, lam, a_vec, x, y)
    w = 1 + mu * b2
    core = w * a2 - mu * be * be
    num = (np.sqrt(1 + (mu + sigma ** 2) * b2) * np.sqrt(core) + sigma * be) ** 1.5
    return num / (w ** 1.5 * core ** 0.25)


def oneone_breve_value(mu, sigma, lam, a_vec, x, y):
    """The same metric as ``sqrt((ᾰ+β̆)³/ᾰ)``."""
    b2, a2, be = _base(mu, lam, a_vec, x, y)
    w = 1 + mu * b2
    k = 1 + (mu + sigma ** 2) * b2
    a_br = k ** 0.75 * np.sqrt(w * a2 - mu * be * be) / w ** 1.5
    b_br = sigma * k ** 0.25 * be / w ** 1.5
    return np.sqrt((a_br + b_br) ** 3 / a_br)
