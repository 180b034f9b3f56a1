"""Functions ``φ(b², s)`` and the PDEs that characterize them.

A :class:`PhiFunction` is evaluated on numbers or on jets over the two
variables ``(b², s)``.  Closed forms are plain expressions; functions built
from integrals (:func:`phi_from_fg`, :func:`dual_from_projective`) assemble
their jets from quadratures of the differentiated integrand plus the
boundary terms of the Leibniz rule.
"""

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .errors import ContractError, DomainError, InputError
from .quadrature import integrate

__all__ = [
    "PhiFunction",
    "CheckPhiFunction",
    "SolutionSpec",
    "PositivityReport",
    "pde1_residual",
    "psi22_residual",
    "varphi_residual",
    "checkp_residual",
    "phi_from_fg",
    "projective_from_dual",
    "dual_from_projective",
    "finsler_positivity",
    "perturbed",
    "grid",
]

CONE_SLACK = 1e-12


class PhiFunction:
    """``φ(b², s)`` on the cone ``|s| <= b < b_o``.

    Either ``expr(b2, s)`` (any mix of numbers and jets) or
    ``jet_fn(b2, s, order)`` (numeric arrays in, jet over 2 variables out)
    must be given.  ``max_order`` caps the jet order the function supports.
    """

    positive = True

    def __init__(self, expr=None, *, name="phi", b_o=np.inf, jet_fn=None, max_order=3,
                 spec=None, domain=None, params=None, square=None):
        if (expr is None) == (jet_fn is None):
            raise InputError("give exactly one of expr and jet_fn")
        self.expr = expr
        self.jet_fn = jet_fn
        self.name = name
        self.b_o = float(b_o)
        self.max_order = max_order if jet_fn is not None else 3
        self.spec = spec
        # domain = (b2_lo, b2_hi, t_lo, t_hi) with t = s/b; the scan region of
        # the function, inside its cone and inside its positive region
        self.domain = domain
        self.params = dict(params or {})
        # optional expression for φ² itself, usable where φ² <= 0 (e.g. on s = 0)
        self.square = square

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    # --------------------------------------------------------------- domain
    def in_cone(self, b2, s):
        b2, s = np.broadcast_arrays(np.asarray(b2, float), np.asarray(s, float))
        b = np.sqrt(np.maximum(b2, 0.0))
        return (b2 >= 0) & (np.abs(s) <= b * (1 + CONE_SLACK) + 1e-300) & (b < self.b_o)

    def check_cone(self, b2, s):
        ok = self.in_cone(b2, s)
        if not np.all(ok):
            b2, s = np.broadcast_arrays(np.asarray(b2, float), np.asarray(s, float))
            raise DomainError(f"{self.name}: (b2, s) outside |s| <= b < b_o",
                              point=(b2[~ok].ravel()[0], s[~ok].ravel()[0]))

    def valid(self, b2, s, positive=None):
        """Mask of points in the cone where φ is finite (and positive).

        ``positive`` overrides the class default (``CheckPhiFunction`` does
        not require positivity unless asked to).
        """
        positive = self.positive if positive is None else positive
        b2, s = np.broadcast_arrays(np.asarray(b2, float), np.asarray(s, float))
        ok = self.in_cone(b2, s)
        vals = np.full(b2.shape, np.nan)
        if np.any(ok):
            with np.errstate(all="ignore"):
                try:
                    vals[ok] = self._values(b2[ok], s[ok])
                except (DomainError, ArithmeticError):
                    vals[ok] = np.array([self._safe_value(u, v) for u, v in zip(b2[ok], s[ok])])
        ok &= np.isfinite(vals)
        if positive:
            ok &= vals > 0
        return ok

    def _safe_value(self, u, v):
        try:
            return float(self._values(np.array([u]), np.array([v]))[0])
        except (DomainError, ArithmeticError):
            return np.nan

    # ----------------------------------------------------------- evaluation
    def _values(self, b2, s):
        if self.expr is not None:
            out = self.expr(b2, s)
            return np.broadcast_to(np.real_if_close(np.asarray(J.value_of(out))), np.shape(b2)).astype(float)
        return self.jet_fn(b2, s, 2).val

    def __call__(self, b2, s):
        b2, s = np.broadcast_arrays(np.asarray(b2, float), np.asarray(s, float))
        self.check_cone(b2, s)
        with np.errstate(invalid="ignore"):
            out = self._values(b2, s)
        if not np.all(np.isfinite(out)):
            bad = ~np.isfinite(out)
            raise DomainError(f"{self.name}: not real", point=(b2[bad].ravel()[0], s[bad].ravel()[0]))
        return out

    def jet(self, b2, s, order=2):
        """Jet over ``(b², s)`` at numeric points (batched)."""
        if order > self.max_order:
            raise InputError(f"{self.name} supports jets up to order {self.max_order}")
        b2, s = np.broadcast_arrays(np.asarray(b2, float), np.asarray(s, float))
        self.check_cone(b2, s)
        if self.jet_fn is not None:
            return self.jet_fn(b2, s, order)
        V = J.variables(np.stack([b2, s], axis=-1), order=order)
        out = self.expr(V[..., 0], V[..., 1])
        if not J.is_jet(out):
            out = J.constant(np.broadcast_to(np.asarray(out, float), b2.shape), 2, order)
        elif out.shape != b2.shape:
            out = out.broadcast_to(b2.shape)
        return out

    def partials(self, b2, s):
        """``φ, φ₁, φ₂, φ₁₁, φ₁₂, φ₂₂`` as a dict of arrays."""
        j = self.jet(b2, s)
        return {
            "phi": j.val, "phi1": j.grad[..., 0], "phi2": j.grad[..., 1],
            "phi11": j.hess[..., 0, 0], "phi12": j.hess[..., 0, 1], "phi22": j.hess[..., 1, 1],
        }

    def compose(self, b2, s):
        """``φ(b2, s)`` for jets ``b2`` and ``s`` over any number of variables."""
        local = self.jet(b2.val, s.val, order=2)
        return J.compose(local, [b2, s])


class CheckPhiFunction(PhiFunction):
    """``φ̌(b², s)``; no positivity requirement."""

    positive = False
    degenerate = False


@dataclass
class SolutionSpec:
    """Generating pair of a solution: ``f`` and ``g > 0`` with derivatives.

    All four callables take numbers or jets of one variable.
    """

    f: object
    df: object
    g: object
    dg: object
    C: float = 0.0
    name: str = "fg"


# ------------------------------------------------------------------ residuals
def _pde1_terms(phi, b2, s):
    p = phi.partials(b2, s)
    s = np.asarray(s, float)
    f, f1, f2, f12, f22 = p["phi"], p["phi1"], p["phi2"], p["phi12"], p["phi22"]
    return [f2 * f2, f * f22, 2 * s * f1 * f2, 2 * s * f * f12, -4 * f * f1]


def _finish(terms, normalized):
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    if normalized:
        return total / (1.0 + sum(np.abs(t) for t in terms))
    return total


def pde1_residual(phi, b2, s, normalized=False):
    """``φ₂² + φφ₂₂ + 2sφ₁φ₂ + 2sφφ₁₂ - 4φφ₁``."""
    return _finish(_pde1_terms(phi, b2, s), normalized)


def psi22_residual(phi, b2, s, normalized=False):
    """``ψ₂₂ + 2sψ₁₂ - 4ψ₁`` for ``ψ = φ²``."""
    j = phi.jet(b2, s)
    psi = j * j
    s = np.asarray(s, float)
    terms = [psi.hess[..., 1, 1], 2 * s * psi.hess[..., 0, 1], -4 * psi.grad[..., 0]]
    return _finish(terms, normalized)


def _varphi_terms(vphi, b2, s):
    j = vphi.jet(b2, s)
    s = np.asarray(s, float)
    return [j.hess[..., 1, 1], 2 * s * j.hess[..., 0, 1], -2 * j.grad[..., 0]]


def varphi_residual(vphi, b2, s, normalized=False):
    """``φ̌₂₂ + 2sφ̌₁₂ - 2φ̌₁``."""
    return _finish(_varphi_terms(vphi, b2, s), normalized)


def checkp_residual(vphi, b2, s, normalized=False):
    """``φ̌₂₂ - 2(φ̌₁ - sφ̌₁₂)``: the projective-flatness form of the same equation."""
    return varphi_residual(vphi, b2, s, normalized)


# ----------------------------------------------------------------- generators
def _derivs1(fn, t):
    """``fn, fn', fn''`` at numeric points ``t`` via a one-variable jet."""
    t = np.asarray(t, float)
    u = J.variables(t[..., None])[..., 0]
    out = fn(u)
    if not J.is_jet(out):
        z = np.zeros_like(t)
        return np.broadcast_to(np.asarray(out, float), t.shape), z, z
    return np.asarray(out.val, float), np.asarray(out.grad[..., 0], float), np.asarray(out.hess[..., 0, 0], float)


def _jet2(val, gb, gs, hbb, hbs, hss):
    grad = np.stack([gb, gs], axis=-1)
    hess = np.stack([np.stack([hbb, hbs], axis=-1), np.stack([hbs, hss], axis=-1)], axis=-2)
    return J.Jet2(val, grad, hess)


def _as_jet(out, shape):
    if J.is_jet(out):
        return out if out.shape == shape else out.broadcast_to(shape)
    return J.constant(np.broadcast_to(np.asarray(out, float), shape), 2)


def _as_jet3(out, shape):
    if J.is_jet(out):
        return out if out.shape == shape else out.broadcast_to(shape)
    return J.constant(np.broadcast_to(np.asarray(out, float), shape), 2, order=3)


def _fg_integrals(spec, b2, s):
    """Quadratures of ``(s²+σ²)f^(k)(b²-σ²)`` and ``f^(k)(b²-σ²)`` (k=1,2,3) over ``[0, s]``."""

    def integrand(sig):
        t = b2[..., None] - sig * sig
        f1, f2, f3 = _derivs1(spec.df, t)
        w = s[..., None] ** 2 + sig * sig
        return np.stack([w * f1, w * f2, w * f3, f1, f2, f3], axis=-1)

    return integrate(integrand, np.zeros_like(s), s)


def phi_from_fg(spec, b_o=np.inf, name=None, domain=None):
    """The solution ``sqrt(g + 2g's² + s f(b²-s²) + ∫₀ˢ(s²+σ²)f'(b²-σ²)dσ)``."""

    def jet_fn(b2, s, order):
        V = J.variables(np.stack([b2, s], axis=-1))
        B, S = V[..., 0], V[..., 1]
        closed = (_as_jet(spec.g(B), b2.shape) + 2 * _as_jet(spec.dg(B), b2.shape) * S * S
                  + S * _as_jet(spec.f(B - S * S), b2.shape))
        I = _fg_integrals(spec, b2, s)
        f1, f2, _ = _derivs1(spec.df, b2 - s * s)
        integral = _jet2(
            I[..., 0],
            I[..., 1],
            2 * s * s * f1 + 2 * s * I[..., 3],
            I[..., 2],
            2 * s * s * f2 + 2 * s * I[..., 4],
            6 * s * f1 - 4 * s ** 3 * f2 + 2 * I[..., 3],
        )
        psi = closed + integral
        if np.any(psi.val <= 0):
            bad = psi.val <= 0
            raise DomainError("nonpositive radicand", point=(b2[bad].ravel()[0], s[bad].ravel()[0]))
        return J.sqrt(psi)

    return PhiFunction(jet_fn=jet_fn, name=name or f"fg[{spec.name}]", b_o=b_o, max_order=2,
                       spec=spec, domain=domain)


def _forward_fg(spec):
    def jet_fn(b2, s, order):
        V = J.variables(np.stack([b2, s], axis=-1))
        B, S = V[..., 0], V[..., 1]
        I = _fg_integrals(spec, b2, s)
        f1, f2, _ = _derivs1(spec.df, b2 - s * s)
        K = _jet2(I[..., 3], I[..., 4], f1, I[..., 5], f2, -2 * s * f2)
        return 4 * _as_jet(spec.dg(B), b2.shape) * S + _as_jet(spec.f(B - S * S), b2.shape) + 2 * S * K

    return jet_fn



def _forward_expr(phi):
    def jet_fn(b2, s, order):
        if order > 2:
            raise InputError("forward map supports jets up to order 2")
        if phi.square is not None:
            V = J.variables(np.stack([b2, s], axis=-1), order=3)
            psi = _as_jet3(phi.square(V[..., 0], V[..., 1]), b2.shape)
        else:
            j = phi.jet(b2, s, order=3)
            psi = j * j
        return J.Jet2(psi.grad[..., 1], psi.hess[..., :, 1], psi.tens[..., :, :, 1])

    return jet_fn


def grid(domain, shape=(50, 50), inset=1e-3, b_o=np.inf):
    """Points ``(b², s)`` on a ``shape`` grid over ``domain``.

    ``domain = (b2_lo, b2_hi, t_lo, t_hi)`` with ``s = t·b``; the ``t`` range
    is pulled in by ``inset`` on each side so the cone boundary is avoided.
    """
    lo, hi, tlo, thi = domain
    if np.isfinite(b_o):
        hi = min(hi, (b_o * (1 - inset)) ** 2)
    B = np.linspace(lo, hi, shape[0])
    T = np.linspace(tlo + inset, thi - inset, shape[1])
    BB, TT = np.meshgrid(B, T, indexing="ij")
    return BB, TT * np.sqrt(BB)


def _probe(phi, inset=1e-3):
    domain = phi.domain or (0.0, 1.0, -1.0, 1.0)
    b2, s = grid(domain, (7, 7), inset=max(inset, 1e-2), b_o=phi.b_o)
    ok = phi.valid(b2, s)
    return b2[ok], s[ok]


def projective_from_dual(phi, tol=1e-8, probe=None):
    """``φ̌ = (φ²)₂``, after probing that ``φ`` solves the basic PDE."""
    b2, s = _probe(phi) if probe is None else probe
    if b2.size:
        res = np.max(np.abs(pde1_residual(phi, b2, s, normalized=True)))
        if not res <= tol:
            raise ContractError(f"{phi.name} does not satisfy the basic PDE (residual {res:.3g})")
    jet_fn = _forward_fg(phi.spec) if (phi.spec is not None and phi.expr is None) else _forward_expr(phi)
    out = CheckPhiFunction(jet_fn=jet_fn, name=f"forward({phi.name})", b_o=phi.b_o, max_order=2,
                           domain=phi.domain)
    # φ̌ ≡ 0 (e.g. from φ ≡ 1) never gives a Finsler metric
    out.degenerate = bool(b2.size) and bool(np.all(out.jet(b2, s).val == 0))
    return out


def dual_from_projective(vphi, C, name=None, b_o=None, domain=None):
    """``φ = sqrt(∫₀ˢ φ̌(b², ς)dς + ¼∫₀^{b²} φ̌₂(ι, 0)dι + C)``."""
    C = float(C)

    def jet_fn(b2, s, order):
        def along_s(sig):
            j = vphi.jet(np.broadcast_to(b2[..., None], sig.shape), sig)
            return np.stack([j.val, j.grad[..., 0], j.hess[..., 0, 0]], axis=-1)

        def along_b(iota):
            j = vphi.jet(iota, np.zeros_like(iota))
            return j.grad[..., 1]

        I = integrate(along_s, np.zeros_like(s), s)
        K = 0.25 * integrate(along_b, np.zeros_like(b2), b2)
        here = vphi.jet(b2, s)
        axis = vphi.jet(b2, np.zeros_like(b2))
        psi = _jet2(
            I[..., 0] + K + C,
            I[..., 1] + 0.25 * axis.grad[..., 1],
            here.val,
            I[..., 2] + 0.25 * axis.hess[..., 0, 1],
            here.grad[..., 0],
            here.grad[..., 1],
        )
        if np.any(psi.val <= 0):
            bad = psi.val <= 0
            raise DomainError("nonpositive radicand", point=(b2[bad].ravel()[0], s[bad].ravel()[0]))
        return J.sqrt(psi)

    return PhiFunction(jet_fn=jet_fn, name=name or f"inverse({vphi.name}, C={C:g})",
                       b_o=vphi.b_o if b_o is None else b_o, max_order=2, domain=domain or vphi.domain)


def perturbed(phi, eps=0.01):
    """``φ + eps·s³``: a deliberate non-solution."""
    if phi.expr is None:
        raise InputError("perturbation needs a closed-form φ")
    base = phi.expr

    def expr(b2, s):
        return base(b2, s) + eps * s * s * s

    return PhiFunction(expr, name=f"{phi.name}-perturbed", b_o=phi.b_o, domain=phi.domain,
                       params=dict(phi.params, eps=eps))


# ----------------------------------------------------------------- positivity
@dataclass
class PositivityReport:
    min_first: float
    min_second: float
    violation_n3: tuple = None
    violation_n2: tuple = None
    evaluated: int = 0
    skipped: int = 0

    @property
    def finsler_n3(self):
        return self.min_first > 0 and self.min_second > 0

    @property
    def finsler_n2(self):
        return self.min_second > 0


def finsler_positivity(phi, b2_max, shape=(200, 200), inset=0.0):
    """Scan ``φ - sφ₂ > 0`` and ``φ - sφ₂ + (b²-s²)φ₂₂ > 0`` over the cone."""
    b2, s = grid((0.0, b2_max, -1.0, 1.0), shape, inset=inset, b_o=phi.b_o)
    ok = phi.valid(b2, s)
    B, S = b2[ok], s[ok]
    p = phi.partials(B, S)
    first = p["phi"] - S * p["phi2"]
    second = first + (B - S * S) * p["phi22"]

    def violation(values):
        bad = np.flatnonzero(values <= 0)
        return (float(B[bad[0]]), float(S[bad[0]]), float(values[bad[0]])) if bad.size else None

    return PositivityReport(
        min_first=float(np.min(first)) if first.size else np.nan,
        min_second=float(np.min(second)) if second.size else np.nan,
        violation_n3=violation(np.minimum(first, second)),
        violation_n2=violation(second),
        evaluated=int(ok.sum()),
        skipped=int((~ok).sum()),
    )
