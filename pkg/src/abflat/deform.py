"""β-deformations of a pair ``(α, β)`` and checks of their transformation rules.

The three stages are

* ``α̃ = sqrt(α² - κ(b²)β²)``, ``β̃ = β``
* ``α̂ = e^{ρ(b²)} α̃``, ``β̂ = β̃``
* ``ᾱ = α̂``, ``β̄ = ν(b²) β̂``

where ``b`` is always the norm of ``β`` with respect to the original ``α``.
Each stage's spray and covariant derivative are computed directly (through
Christoffel symbols of the deformed metric) and compared with the closed
transformation formulas built from the contractions of the original pair.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .errors import DomainError, InputError
from .fields import (
    DuallyFlatData,
    ModelParams,
    OneForm,
    RiemannianMetric,
    check_dually_flat_spray,
    check_dually_related,
    contractions,
    covariant_derivative,
    euclidean,
    flat_conformal,
    norm2,
    spray_riemann,
)

__all__ = [
    "DeformationFactors",
    "StageResidual",
    "deform_stage1",
    "deform_stage2",
    "deform_stage3",
    "deform",
    "stage1_rhs",
    "stage2_rhs",
    "stage3_rhs",
    "verify_stage1",
    "verify_stage2",
    "verify_stage3",
    "model_checks",
    "factor_odes",
    "FactorReport",
    "ModelData",
    "build_model",
    "model_pipeline",
    "transcription_report",
]

CONVENTIONS = ("corrected", "printed")


def _d1(fn, t):
    """``fn(t), fn'(t)`` at numeric ``t`` via a one-variable jet."""
    t = np.asarray(t, float)
    out = fn(J.variables(t[..., None])[..., 0])
    if not J.is_jet(out):
        v = np.broadcast_to(np.asarray(out, float), t.shape)
        return v, np.zeros_like(t)
    return np.asarray(out.val, float), np.asarray(out.grad[..., 0], float)


@dataclass
class DeformationFactors:
    """Deformation factors ``κ, ρ, ν`` as functions of ``b²`` (jet-evaluable)."""

    kappa: object
    rho: object
    nu: object
    name: str = "factors"

    def at(self, b2):
        """``κ, κ', ρ, ρ', ν, ν'`` at numeric ``b2``."""
        k, dk = _d1(self.kappa, b2)
        r, dr = _d1(self.rho, b2)
        v, dv = _d1(self.nu, b2)
        return k, dk, r, dr, v, dv

    @classmethod
    def identity(cls):
        return cls(lambda t: 0.0, lambda t: 0.0, lambda t: 1.0, name="identity")

    @classmethod
    def polynomial(cls, k0=0.3, k1=0.1, r1=0.05, v0=1.0, v1=0.2):
        """``κ = k0 + k1 t``, ``ρ = r1 t``, ``ν = v0 + v1 t``."""
        return cls(lambda t: k0 + k1 * t, lambda t: r1 * t, lambda t: v0 + v1 * t, name="polynomial")

    @classmethod
    def model(cls, mu, sigma=1.0):
        """``κ = μ/(1+μt)``, ``ρ = -¼ln(1+μt)``, ``ν = σ(1+μt)^{-5/4}``."""
        mu, sigma = float(mu), float(sigma)
        return cls(
            lambda t: mu / (1 + mu * t),
            lambda t: -0.25 * J.log(1 + mu * t),
            lambda t: sigma * J.power(1 + mu * t, -1.25),
            name=f"model(mu={mu:g}, sigma={sigma:g})",
        )


# ------------------------------------------------------------------- stages
def _bb(b):
    return b[..., :, None] * b[..., None, :]


def deform_stage1(alpha, beta, kappa):
    """``(α̃, β)`` with ``ã_ij = a_ij - κ(b²) b_i b_j``."""

    def matrix(x):
        b = beta(x)
        k = kappa(norm2(alpha, beta, x))
        if J.is_jet(k):
            k = k[..., None, None]
        elif np.ndim(k):
            k = np.asarray(k)[..., None, None]
        return alpha.matrix(x) - _bb(b) * k

    return RiemannianMetric(alpha.dim, matrix, name=f"tilde({alpha.name})", radius=alpha.radius), beta


def _scalar_field(fn, alpha, beta, x):
    v = fn(norm2(alpha, beta, x))
    if J.is_jet(v):
        return v
    return np.asarray(v, float)


def deform_stage2(alpha, beta, kappa, rho):
    """``(α̂, β)`` with ``â_ij = e^{2ρ(b²)} ã_ij``."""
    tilde, _ = deform_stage1(alpha, beta, kappa)

    def matrix(x):
        e = J.exp(2 * _scalar_field(rho, alpha, beta, x))
        e = e[..., None, None] if J.is_jet(e) else np.asarray(e)[..., None, None]
        return tilde.matrix(x) * e

    return RiemannianMetric(alpha.dim, matrix, name=f"hat({alpha.name})", radius=alpha.radius), beta


def deform_stage3(alpha, beta, kappa, rho, nu):
    """``(ᾱ, β̄)`` with ``ᾱ = α̂`` and ``b̄_i = ν(b²) b_i``."""
    hat, _ = deform_stage2(alpha, beta, kappa, rho)

    def covector(x):
        v = _scalar_field(nu, alpha, beta, x)
        v = v[..., None] if J.is_jet(v) else np.asarray(v)[..., None]
        return beta(x) * v

    return hat, OneForm(beta.dim, covector, name=f"bar({beta.name})")


def deform(alpha, beta, factors):
    """All three stages as a dict ``stage -> (metric, form)``."""
    return {
        1: deform_stage1(alpha, beta, factors.kappa),
        2: deform_stage2(alpha, beta, factors.kappa, factors.rho),
        3: deform_stage3(alpha, beta, factors.kappa, factors.rho, factors.nu),
    }


def check_condition(alpha, beta, kappa, x):
    """Raise :class:`DomainError` where ``1 - κ b² <= 0``."""
    b2 = np.asarray(J.value_of(norm2(alpha, beta, x)))
    k, _ = _d1(kappa, b2)
    bad = 1 - k * b2 <= 0
    if np.any(bad):
        raise DomainError("1 - kappa b^2 must stay positive", point=np.asarray(x)[bad][0])
    return 1 - k * b2


# ----------------------------------------------------------- formula sides
@dataclass
class _Pieces:
    con: object
    beta: np.ndarray
    s0: np.ndarray
    a: np.ndarray
    G: np.ndarray


def _pieces(alpha, beta, x, y, convention):
    if convention not in CONVENTIONS:
        raise InputError(f"convention must be one of {CONVENTIONS}")
    con = contractions(alpha, beta, x, y)
    be = np.einsum("...i,...i->...", con.b_low, y)
    # as printed, s_0 := s_i b^i, which vanishes identically; s_i y^i is the reading that works
    s0 = con.s0 if convention == "corrected" else np.einsum("...i,...i->...", con.s_low, con.b_up)
    a = np.asarray(J.value_of(alpha.matrix(x)))
    return _Pieces(con, be, s0, a, spray_riemann(alpha, x, y))


def _col(v):
    return np.asarray(v)[..., None]


def stage1_rhs(alpha, beta, kappa, x, y, convention="corrected"):
    """Predicted ``(G̃^i, b̃_{i|j})`` from the original pair."""
    p = _pieces(alpha, beta, x, y, convention)
    c = p.con
    k, dk = _d1(kappa, c.b2)
    q = 1 - k * c.b2
    G = (p.G
         - _col(k / (2 * q)) * (2 * _col(q * p.beta) * c.s_up0 + _col(c.r00) * c.b_up
                                + _col(2 * k * p.s0 * p.beta) * c.b_up)
         + _col(dk / (2 * q)) * (_col(q * p.beta ** 2) * (c.r_up + c.s_up) + _col(k * c.r * p.beta ** 2) * c.b_up
                                 - _col(2 * (c.r0 + p.s0) * p.beta) * c.b_up))
    b, rs = c.b_low, c.r_low + c.s_low
    kq = (k / q)[..., None, None]
    dq = (dk / q)[..., None, None]
    B2 = c.b2[..., None, None]
    bij = (c.bij
           + kq * (B2 * c.rij + b[..., :, None] * c.s_low[..., None, :] + c.s_low[..., :, None] * b[..., None, :])
           - dq * (c.r[..., None, None] * _bb(b) - B2 * b[..., :, None] * rs[..., None, :]
                   - B2 * rs[..., :, None] * b[..., None, :]))
    return G, bij


def stage2_rhs(alpha, beta, kappa, rho, x, y, convention="corrected"):
    """Predicted ``(Ĝ^i, b̂_{i|j})`` from the directly computed stage-1 pair."""
    p = _pieces(alpha, beta, x, y, convention)
    c = p.con
    tilde, _ = deform_stage1(alpha, beta, kappa)
    Gt = spray_riemann(tilde, x, y)
    bt = covariant_derivative(tilde, beta, x)
    k, _ = _d1(kappa, c.b2)
    _, dr = _d1(rho, c.b2)
    q = 1 - k * c.b2
    alpha2 = np.einsum("...ij,...i,...j->...", p.a, y, y)
    at2 = alpha2 - k * p.beta ** 2
    G = Gt + _col(dr) * (_col(2 * (c.r0 + p.s0)) * y
                         - _col(at2) * (c.r_up + c.s_up + _col(k * c.r / q) * c.b_up))
    b, rs = c.b_low, c.r_low + c.s_low
    bij = bt - 2 * dr[..., None, None] * (
        b[..., :, None] * rs[..., None, :] + rs[..., :, None] * b[..., None, :]
        - (c.r / q)[..., None, None] * (p.a - k[..., None, None] * _bb(b)))
    return G, bij


def stage3_rhs(alpha, beta, kappa, rho, nu, x, y):
    """Predicted ``(Ḡ^i, b̄_{i|j})`` from the directly computed stage-2 pair."""
    c = contractions(alpha, beta, x, y)
    hat, _ = deform_stage2(alpha, beta, kappa, rho)
    Gh = spray_riemann(hat, x, y)
    bh = covariant_derivative(hat, beta, x)
    v, dv = _d1(nu, c.b2)
    rs = c.r_low + c.s_low
    return Gh, v[..., None, None] * bh + 2 * dv[..., None, None] * c.b_low[..., :, None] * rs[..., None, :]


@dataclass
class StageResidual:
    """Per-sample max-norm residuals of the spray and covariant-derivative formulas."""

    spray: np.ndarray
    covariant: np.ndarray

    @property
    def max(self):
        return float(max(np.max(self.spray), np.max(self.covariant)))


def _residual(G_direct, b_direct, G_pred, b_pred):
    return StageResidual(np.max(np.abs(G_direct - G_pred), axis=-1),
                         np.max(np.abs(b_direct - b_pred), axis=(-1, -2)))


def _xy(alpha, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape[-1] != alpha.dim or y.shape[-1] != alpha.dim:
        raise InputError("points do not match the metric dimension")
    return np.broadcast_arrays(x, y)


def verify_stage1(alpha, beta, factors, x, y, convention="corrected"):
    x, y = _xy(alpha, x, y)
    check_condition(alpha, beta, factors.kappa, x)
    tilde, _ = deform_stage1(alpha, beta, factors.kappa)
    G, b = stage1_rhs(alpha, beta, factors.kappa, x, y, convention)
    return _residual(spray_riemann(tilde, x, y), covariant_derivative(tilde, beta, x), G, b)


def verify_stage2(alpha, beta, factors, x, y, convention="corrected"):
    x, y = _xy(alpha, x, y)
    check_condition(alpha, beta, factors.kappa, x)
    hat, _ = deform_stage2(alpha, beta, factors.kappa, factors.rho)
    G, b = stage2_rhs(alpha, beta, factors.kappa, factors.rho, x, y, convention)
    return _residual(spray_riemann(hat, x, y), covariant_derivative(hat, beta, x), G, b)


def verify_stage3(alpha, beta, factors, x, y):
    x, y = _xy(alpha, x, y)
    check_condition(alpha, beta, factors.kappa, x)
    bar, bform = deform_stage3(alpha, beta, factors.kappa, factors.rho, factors.nu)
    G, b = stage3_rhs(alpha, beta, factors.kappa, factors.rho, factors.nu, x, y)
    return _residual(spray_riemann(bar, x, y), covariant_derivative(bar, bform, x), G, b)


# ------------------------------------------------------------ model checks
def model_checks(mu, lam, a_vec, x, y, sigma=1.0):
    """Residuals of the Euclidean-model displays after each stage.

    With ``α = |y|``, ``β = λ<x,y> + <a,y>`` and the model factors:

    * ``G̃ = -λκ/(2(1-κb²)) α̃² b^i`` and ``b̃_{i|j} = λ/(1-κb²) ã_ij + λκ b_i b_j``
    * ``Ĝ = 2θ̂ y^i + α̂² θ̂^i`` with ``θ̂ = -¼λκβ``
    * ``b̄_{i|j} = c ā_ij + 2θ̄_i b̄_j``
    """
    a_vec = np.asarray(a_vec, float)
    n = a_vec.shape[0]
    alpha, beta = euclidean(n), flat_conformal(lam, a_vec)
    f = DeformationFactors.model(mu, sigma)
    x, y = _xy(alpha, x, y)
    b = np.asarray(beta(x))
    b2 = np.einsum("...i,...i->...", b, b)
    k, _ = _d1(f.kappa, b2)
    q = 1 - k * b2
    tilde, _ = deform_stage1(alpha, beta, f.kappa)
    at = np.asarray(J.value_of(tilde.matrix(x)))
    at2 = np.einsum("...ij,...i,...j->...", at, y, y)
    G1 = -_col(lam * k / (2 * q) * at2) * b
    b1 = (lam / q)[..., None, None] * at + (lam * k)[..., None, None] * _bb(b)
    model = build_model(ModelParams(mu, lam, sigma, tuple(a_vec)))
    hat = model.alpha
    out = {
        "stage1_spray": np.max(np.abs(spray_riemann(tilde, x, y) - G1), axis=-1),
        "stage1_covariant": np.max(np.abs(covariant_derivative(tilde, beta, x) - b1), axis=(-1, -2)),
        "stage2_spray": check_dually_flat_spray(hat, model.data.theta, x, y),
        "stage3_related": check_dually_related(model.alpha, model.beta, model.data, x),
    }
    return out


# ------------------------------------------------------------ factor ODEs
@dataclass
class FactorReport:
    kappa_ode: float
    rho_ode: float
    nu_ode: float
    family: dict = field(default_factory=dict)
    trivial: bool = False

    @property
    def max(self):
        return float(max(self.kappa_ode, self.rho_ode, self.nu_ode, *self.family.values()))


def factor_odes(mu, sigma=1.0, b2=None, constants=(0.5, 1.0, 2.0)):
    """Residuals of ``κ' = -κ²``, ``κ + 4ρ' = 0`` and ``ν'/ν = -(5/4)κ``.

    Also checks the two one-parameter families ``κ = 1/(t+c)`` and
    ``κ = -1/(c-t)`` against ``κ' = -κ²`` on ``t`` where they are defined.
    """
    mu = float(mu)
    if b2 is None:
        top = 0.9 / -mu if mu < 0 else 2.0
        b2 = np.linspace(0.0, top, 101)
    b2 = np.asarray(b2, float)
    if np.any(1 + mu * b2 <= 0):
        raise DomainError("1 + mu b^2 must stay positive", point=b2[1 + mu * b2 <= 0][0])
    f = DeformationFactors.model(mu, sigma)
    k, dk, _, dr, v, dv = f.at(b2)
    rep = FactorReport(
        kappa_ode=float(np.max(np.abs(dk + k * k))),
        rho_ode=float(np.max(np.abs(k + 4 * dr))),
        nu_ode=float(np.max(np.abs(dv / v + 1.25 * k))),
        trivial=(mu == 0),
    )
    for c in constants:
        for label, fam, t in (
            (f"1/(t+{c:g})", lambda t, c=c: 1 / (t + c), b2),
            (f"-1/({c:g}-t)", lambda t, c=c: -1 / (c - t), b2[b2 < 0.9 * c]),
        ):
            kk, dkk = _d1(fam, t)
            rep.family[label] = float(np.max(np.abs(dkk + kk * kk)))
    return rep


# ---------------------------------------------------------------- model data
@dataclass
class ModelData:
    """The dually flat ``ᾱ``, its dually related ``β̄`` and their data."""

    params: object
    alpha: object
    beta: object
    data: object
    base_alpha: object
    base_beta: object
    factors: object

    @property
    def nontrivial(self):
        return self.params.lam != 0

    def sample_radius(self, fraction=0.8, cap=1.0):
        """Radius in ``x`` keeping ``|λx + a|`` inside ``fraction`` of the valid ball."""
        p = self.params
        if p.mu >= 0:
            return cap
        limit = fraction / np.sqrt(-p.mu) - np.linalg.norm(p.a_vec)
        if limit <= 0:
            raise DomainError("a lies outside the valid ball", point=p.a_vec)
        return cap if p.lam == 0 else min(cap, limit / abs(p.lam))


def _bvec(lam, a):
    def bvec(x):
        return x * lam + a

    return bvec


def build_model(params):
    """Closed forms of ``ᾱ``, ``β̄``, ``θ̄`` and ``c`` for the model data."""
    if not isinstance(params, ModelParams):
        raise InputError("build_model expects ModelParams")
    mu, lam, sigma = params.mu, params.lam, params.sigma
    a = np.asarray(params.a_vec, float)
    n = a.shape[0]
    bvec = _bvec(lam, a)

    def w_of(x):
        b = bvec(x)
        return 1 + mu * (b * b).sum(axis=-1), b

    def check(w):
        if np.any(J.value_of(w) <= 0):
            raise DomainError("1 + mu b^2 must stay positive", point=np.min(J.value_of(w)))

    def matrix(x):
        w, b = w_of(x)
        check(w)
        num = np.eye(n) * w[..., None, None] - _bb(b) * mu
        return num / J.power(w, 1.5)[..., None, None]

    def covector(x):
        w, b = w_of(x)
        check(w)
        return b * (sigma / J.power(w, 1.25))[..., None]

    def theta(x):
        w, b = w_of(x)
        return b * (-0.25 * lam * mu / w)[..., None]

    def c(x):
        w, b = w_of(x)
        return lam * sigma * (1 + 0.5 * mu * (b * b).sum(axis=-1)) / J.power(w, 0.75)

    tag = f"mu={mu:g}, lam={lam:g}, sigma={sigma:g}"
    radius = np.inf if mu >= 0 else 1 / np.sqrt(-mu)
    return ModelData(
        params=params,
        alpha=RiemannianMetric(n, matrix, name=f"bar_alpha({tag})", radius=radius),
        beta=OneForm(n, covector, name=f"bar_beta({tag})"),
        data=DuallyFlatData(theta=theta, c=c, nontrivial=lam != 0, name=f"model({tag})"),
        base_alpha=euclidean(n),
        base_beta=flat_conformal(lam, a),
        factors=DeformationFactors.model(mu, sigma),
    )


def model_pipeline(params):
    """``(ᾱ, β̄)`` produced by running the three stages on the Euclidean model."""
    a = np.asarray(params.a_vec, float)
    f = DeformationFactors.model(params.mu, params.sigma)
    return deform_stage3(euclidean(a.shape[0]), flat_conformal(params.lam, a), f.kappa, f.rho, f.nu)


# -------------------------------------------------------- transcription audit
def transcription_report(alpha, beta, factors, x, y, tol=1e-8):
    """Compare the stage formulas under both readings of ``s_0``.

    Returns ``{reading: {"stage1": max, "stage2": max}}`` and a verdict
    string; a reading that fails on these samples is reported as suspect.
    """
    out = {}
    for conv in CONVENTIONS:
        out[conv] = {
            "stage1": verify_stage1(alpha, beta, factors, x, y, conv).max,
            "stage2": verify_stage2(alpha, beta, factors, x, y, conv).max,
        }
    ok = {conv: max(v.values()) <= tol for conv, v in out.items()}
    if ok["printed"]:
        verdict = "printed formulas hold"
    elif ok["corrected"]:
        verdict = "typo suspect: s_0 as printed (s_i b^i) vanishes identically; s_0 = s_i y^i holds"
    else:
        verdict = "transcription suspect: neither reading holds"
    return out, verdict
