"""Built-in solutions of the basic PDE, keyed by name.

Every entry carries the generating pair ``(f, g)`` it comes from, so the
closed form can be compared with the quadrature-built solution, and a scan
region ``(b2_lo, b2_hi, t_lo, t_hi)`` (with ``s = t·b``) on which the
radicand is comfortably positive.
"""

import numpy as np

from . import jets as J
from .errors import InputError
from .phifunc import CheckPhiFunction, PhiFunction, SolutionSpec, perturbed

__all__ = ["catalog", "names", "PARAMS"]


def _zero(t):
    return 0.0


def _root(psi, **kw):
    def expr(b2, s):
        return J.sqrt(psi(b2, s))

    return PhiFunction(expr, square=psi, **kw)


def _const(c):
    def fn(t):
        return c

    return fn


# ------------------------------------------------------------------ entries
def one():
    spec = SolutionSpec(_zero, _zero, _const(1.0), _zero, name="one")
    return PhiFunction(lambda b2, s: 1.0, name="one", spec=spec, domain=(0.0, 4.0, -1.0, 1.0))


def example1(a0=1.0, a1=1.0, a2=0.0):
    if a0 <= 0:
        raise InputError("example1 needs g(0) = a0 > 0")

    def g(t):
        return a0 + a1 * t + a2 * t * t

    def dg(t):
        return a1 + 2 * a2 * t

    def psi(b2, s):
        return g(b2) + 2 * dg(b2) * s * s

    # keep g and g + 2g's² >= g + 2 min(g', 0) b² away from zero on [0, hi]
    hi = 1.0
    t = np.linspace(0.0, hi, 201)
    low = g(t) + 2 * np.minimum(dg(t), 0.0) * t
    if np.min(low) <= 0:
        raise InputError("example1 radicand not positive on b² in [0, 1]")
    spec = SolutionSpec(_zero, _zero, g, dg, name="example1")
    return _root(psi, name="example1", spec=spec, domain=(0.0, hi, -1.0, 1.0),
                       params=dict(a0=a0, a1=a1, a2=a2))


def example2(kappa=1.0, eps=1.0, name="example2"):
    kappa, eps = float(kappa), float(eps)
    b_o = 1.0 / np.sqrt(kappa) if kappa > 0 else np.inf

    def psi(b2, s):
        q = 1 - kappa * b2
        return (q + 2 * kappa * s * s + 2 * eps * s * J.sqrt(q + kappa * s * s)) / (q * q)

    def f(t):
        return 2 * eps * J.power(1 - kappa * t, -1.5)

    def df(t):
        return 3 * eps * kappa * J.power(1 - kappa * t, -2.5)

    def g(t):
        return 1 / (1 - kappa * t)

    def dg(t):
        return kappa / ((1 - kappa * t) * (1 - kappa * t))

    hi = 0.81 * b_o ** 2 if np.isfinite(b_o) else 1.0
    # with |eps| <= 1 the radicand is >= (sqrt(q+ks²) - |s|sqrt(k))² > 0 for k>0;
    # otherwise confine s to where it stays positive
    tlo, thi = -1.0, 1.0
    if kappa == 0 and eps != 0:
        # radicand 1 + 2 eps s
        bound = 0.9 / (2 * abs(eps))
        tlo, thi = (-min(1.0, bound), 1.0) if eps > 0 else (-1.0, min(1.0, bound))
    elif kappa != 0 and abs(eps) > 1:
        raise InputError("example2 supports |eps| <= 1 when kappa != 0")
    if kappa < 0 and eps != 0:
        # 1 - κb² + 2κs² stays >= 1/2 for b² <= 1/(2|κ|); keep εs >= 0
        hi = 0.5 / abs(kappa)
        tlo, thi = (0.0, 1.0) if eps > 0 else (-1.0, 0.0)
    spec = SolutionSpec(f, df, g, dg, name=name)
    return _root(psi, name=name, b_o=b_o, spec=spec, domain=(0.0, hi, tlo, thi),
                       params=dict(kappa=kappa, eps=eps))


def randers_navigation():
    return example2(1.0, -1.0, name="randers_navigation")


def sqrt_alpha_alpha_beta():
    return example2(0.0, 0.5, name="sqrt_alpha_alpha_beta")


def funk():
    def expr(b2, s):
        q = J.power(1 + b2, 0.25)
        return q + s / q

    def psi(b2, s):
        q = J.sqrt(1 + b2)
        return q + 2 * s + s * s / q

    def f(t):
        return 2.0

    def g(t):
        return J.sqrt(1 + t)

    def dg(t):
        return 0.5 / J.sqrt(1 + t)

    spec = SolutionSpec(f, _zero, g, dg, name="funk")
    return PhiFunction(expr, square=psi, name="funk", spec=spec, domain=(0.0, 25.0, -1.0, 1.0))


def example3():
    def expr(b2, s):
        return J.power(J.sqrt(1 + b2) + s, 1.5)

    def psi(b2, s):
        r = J.sqrt(1 + b2) + s
        return r * r * r

    def f(t):
        return 3 * (1 + t)

    def df(t):
        return 3.0

    def g(t):
        return J.power(1 + t, 1.5)

    def dg(t):
        return 1.5 * J.sqrt(1 + t)

    spec = SolutionSpec(f, df, g, dg, name="example3")
    return PhiFunction(expr, square=psi, name="example3", spec=spec, domain=(0.0, 4.0, -1.0, 1.0))


def example3_check():
    def expr(b2, s):
        r = J.sqrt(1 + b2) + s
        return 3 * r * r

    return CheckPhiFunction(expr, name="example3-check", domain=(0.0, 4.0, -1.0, 1.0))


def example4():
    def psi(b2, s):
        q = 1 + b2
        return 0.5 * J.log(q) + J.arcsin(s / J.sqrt(q)) + s * (J.sqrt(q - s * s) + s) / q

    def f(t):
        return 2 / J.sqrt(1 + t)

    def df(t):
        return -J.power(1 + t, -1.5)

    def g(t):
        return 0.5 * J.log(1 + t)

    def dg(t):
        return 0.5 / (1 + t)

    spec = SolutionSpec(f, df, g, dg, name="example4")
    return _root(psi, name="example4", spec=spec, domain=(0.25, 2.0, 0.05, 1.0))


def example5():
    # includes the ln sqrt(1 - b²) term that the stated g contributes at s = 0
    def psi(b2, s):
        q = 1 - b2
        return 0.5 * J.log(q) + J.arcsinh(s / J.sqrt(q)) + s / (J.sqrt(q + s * s) + s)

    def f(t):
        return 2 / J.sqrt(1 - t)

    def df(t):
        return J.power(1 - t, -1.5)

    def g(t):
        return 0.5 * J.log(1 - t)

    def dg(t):
        return -0.5 / (1 - t)

    spec = SolutionSpec(f, df, g, dg, name="example5")
    return _root(psi, name="example5", b_o=1.0, spec=spec, domain=(0.04, 0.64, 0.3, 1.0))


def example6():
    def psi(b2, s):
        q = 1 + b2
        return 1 + 3 * s * J.sqrt(q - s * s) + (q + 2 * s * s) * J.arcsin(s / J.sqrt(q))

    def f(t):
        return 4 * J.sqrt(1 + t)

    def df(t):
        return 2 / J.sqrt(1 + t)

    spec = SolutionSpec(f, df, _const(1.0), _zero, name="example6")
    return _root(psi, name="example6", spec=spec, domain=(0.0, 1.0, 0.0, 1.0))


def example7():
    # g = 1 + ½(1-t)ln(1-t) contributes g + 2g's² = 1 + ½(1-b²)ln(1-b²) - s²(1 + ln(1-b²))
    def psi(b2, s):
        q = 1 - b2
        lq = J.log(q)
        return (1 + 0.5 * q * lq - s * s * (1 + lq) + 3 * s * J.sqrt(q + s * s)
                + (q - 2 * s * s) * J.arcsinh(s / J.sqrt(q)))

    def f(t):
        return 4 * J.sqrt(1 - t)

    def df(t):
        return -2 / J.sqrt(1 - t)

    def g(t):
        return 1 + 0.5 * (1 - t) * J.log(1 - t)

    def dg(t):
        return -0.5 * (J.log(1 - t) + 1)

    spec = SolutionSpec(f, df, g, dg, name="example7")
    return _root(psi, name="example7", b_o=1.0, spec=spec, domain=(0.0, 0.64, 0.0, 1.0))


def example8(p=1.0):
    p = float(p)
    if not 0 < p < np.pi:
        raise InputError("example8 needs p in (0, pi)")
    w0 = np.exp(1j * p)

    def psi(b2, s):
        w = w0 + b2
        r = J.sqrt(w - s * s)
        return J.real(0.5 * J.log(w) + 1j * J.arctan(s / r) + 1j * s / (r + 1j * s))

    def f(t):
        return J.real(2j / J.sqrt(w0 + t))

    def df(t):
        return J.real(-1j * J.power(w0 + t, -1.5))

    def g(t):
        return J.real(0.5 * J.log(w0 + t))

    def dg(t):
        return J.real(0.5 / (w0 + t))

    spec = SolutionSpec(f, df, g, dg, name="example8")
    return _root(psi, name="example8", spec=spec, domain=_EXAMPLE8_DOMAIN, params=dict(p=p))


_EXAMPLE8_DOMAIN = (0.25, 1.0, 0.2, 1.0)

_ENTRIES = {
    "one": one,
    "funk": funk,
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "example4": example4,
    "example5": example5,
    "example6": example6,
    "example7": example7,
    "example8": example8,
    "randers_navigation": randers_navigation,
    "sqrt_alpha_alpha_beta": sqrt_alpha_alpha_beta,
    "example3-check": example3_check,
}

PARAMS = {
    "example1": ("a0", "a1", "a2"),
    "example2": ("kappa", "eps"),
    "example8": ("p",),
}


def names():
    """All catalog names, perturbed variants included."""
    base = list(_ENTRIES)
    return base + [f"{n}-perturbed" for n in base if n != "example3-check"]


def catalog(name, **params):
    """The named φ (or φ̌); ``<name>-perturbed`` adds ``0.01·s³``."""
    if name.endswith("-perturbed"):
        return perturbed(catalog(name[: -len("-perturbed")], **params))
    if name not in _ENTRIES:
        raise InputError(f"unknown catalog entry {name!r}")
    allowed = PARAMS.get(name, ())
    unknown = set(params) - set(allowed)
    if unknown:
        raise InputError(f"{name} takes no parameter(s) {sorted(unknown)}")
    return _ENTRIES[name](**{k: float(v) for k, v in params.items()})
