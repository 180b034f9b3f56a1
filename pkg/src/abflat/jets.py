"""Truncated Taylor jets for exact forward-mode differentiation.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar quantity
with respect to ``m`` independent variables.  Jets may be *batched*: ``val``
has an arbitrary batch shape ``B``, ``grad`` has shape ``B + (m,)`` and
``hess`` has shape ``B + (m, m)``.  All arithmetic broadcasts over the batch
shape exactly like numpy does, so a vector or matrix of jets is simply a jet
with a batch shape of ``(n,)`` or ``(n, n)``.

:class:`Jet3` adds the third-derivative tensor.  It is only used for
functions of the two variables ``(b², s)`` where third partials are needed
(e.g. the s-derivative of ``φ²``).

Elementary functions (:func:`sqrt`, :func:`exp`, :func:`log`,
:func:`arcsin`, :func:`arcsinh`, :func:`arctan`, :func:`power`) dispatch on
their argument, so field definitions can be written once and evaluated on
plain floats, numpy arrays, real jets or complex jets.

Example::

    >>> x = variables([2.0, 3.0])
    >>> f = x[0] * x[1]
    >>> f.val, f.grad, f.hess[0, 1]
    (array(6.), array([3., 2.]), np.float64(1.0))
"""

import numpy as np

from .errors import DomainError, InputError, SingularityError

__all__ = [
    "Jet2",
    "Jet3",
    "seed",
    "variables",
    "constant",
    "sqrt",
    "exp",
    "log",
    "arcsin",
    "arcsinh",
    "arctan",
    "power",
    "real",
    "contract",
    "inv",
    "compose",
    "stack",
    "value_of",
    "is_jet",
]


def _outer(u, v):
    return u[..., :, None] * v[..., None, :]


def _sym_outer(u, v):
    # bitwise symmetric u⊗v + v⊗u
    o = _outer(u, v)
    return o + np.swapaxes(o, -1, -2)


def _sym3(t):
    # t[i,j,k] + t[i,k,j] + t[j,k,i] for t = X_ij ⊗ y_k with X symmetric
    return t + np.swapaxes(t, -1, -2) + np.moveaxis(t, -1, -3)


class Jet2:
    """Second-order jet: value, gradient and Hessian over ``m`` variables."""

    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None
    order = 2

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val)
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)

    # ------------------------------------------------------------------ shape
    @property
    def m(self):
        return self.grad.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    @property
    def dtype(self):
        return self.val.dtype

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"{type(self).__name__}(val={self.val!r}, m={self.m})"

    def _derivs(self):
        return (self.grad, self.hess)

    @classmethod
    def _make(cls, val, derivs):
        return cls(val, *derivs)

    def _check_m(self, other):
        if other.m != self.m:
            raise InputError(f"jet variable counts differ: {self.m} vs {other.m}")

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        d = [np.asarray(t)[key + (slice(None),) * (k + 1)] for k, t in enumerate(self._derivs())]
        return self._make(self.val[key], d)

    def _axis(self, axis):
        if axis < 0:
            axis += self.ndim
        if not 0 <= axis < self.ndim:
            raise InputError(f"axis {axis} out of range for batch shape {self.shape}")
        return axis

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(self.ndim))
        else:
            axes = (self._axis(axis),)
        return self._make(self.val.sum(axis=axes), [t.sum(axis=axes) for t in self._derivs()])

    def swapaxes(self, a, b):
        a, b = self._axis(a), self._axis(b)
        return self._make(np.swapaxes(self.val, a, b), [np.swapaxes(t, a, b) for t in self._derivs()])

    @property
    def T(self):
        return self.swapaxes(-1, -2)

    def broadcast_to(self, shape):
        shape = tuple(shape)
        d = [np.broadcast_to(t, shape + t.shape[self.ndim:]) for t in self._derivs()]
        return self._make(np.broadcast_to(self.val, shape), d)

    def real(self):
        return self._make(self.val.real, [t.real for t in self._derivs()])

    # ------------------------------------------------------------- arithmetic
    def __neg__(self):
        return self._make(-self.val, [-t for t in self._derivs()])

    def __pos__(self):
        return self

    def _const_deriv(self, c, val):
        # derivatives of self broadcast to the batch shape of ``val``
        if val.shape == self.shape:
            return list(self._derivs())
        return [np.broadcast_to(t, val.shape + t.shape[self.ndim:]) for t in self._derivs()]

    def __add__(self, other):
        if is_jet(other):
            self._check_m(other)
            return self._make(self.val + other.val, [a + b for a, b in zip(self._derivs(), other._derivs())])
        val = self.val + np.asarray(other)
        return self._make(val, self._const_deriv(other, val))

    __radd__ = __add__

    def __sub__(self, other):
        if is_jet(other):
            self._check_m(other)
            return self._make(self.val - other.val, [a - b for a, b in zip(self._derivs(), other._derivs())])
        val = self.val - np.asarray(other)
        return self._make(val, self._const_deriv(other, val))

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, c):
        c = np.asarray(c)
        d = [t * c.reshape(c.shape + (1,) * (k + 1)) for k, t in enumerate(self._derivs())]
        return self._make(self.val * c, d)

    def __mul__(self, other):
        if not is_jet(other):
            return self._scale(other)
        self._check_m(other)
        av, ag, ah = self.val, self.grad, self.hess
        bv, bg, bh = other.val, other.grad, other.hess
        val = av * bv
        grad = ag * bv[..., None] + av[..., None] * bg
        hess = ah * bv[..., None, None] + _sym_outer(ag, bg) + av[..., None, None] * bh
        return Jet2(val, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not is_jet(other):
            other = np.asarray(other)
            if np.any(other == 0):
                raise SingularityError("division by zero", point=other)
            return self._scale(1.0 / other)
        self._check_m(other)
        bv = other.val
        if np.any(bv == 0):
            raise SingularityError("division by a jet with zero value", point=bv)
        q = self.val / bv
        gq = (self.grad - q[..., None] * other.grad) / bv[..., None]
        hq = (self.hess - q[..., None, None] * other.hess - _sym_outer(gq, other.grad)) / bv[..., None, None]
        return Jet2(q, gq, hq)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, p):
        if is_jet(p):
            return exp(log(self) * p)
        return power(self, p)

    def __rpow__(self, base):
        return exp(self * np.log(base))


class Jet3(Jet2):
    """Third-order jet; adds ``tens`` of shape ``B + (m, m, m)``."""

    __slots__ = ("tens",)
    order = 3

    def __init__(self, val, grad, hess, tens):
        super().__init__(val, grad, hess)
        self.tens = np.asarray(tens)

    def _derivs(self):
        return (self.grad, self.hess, self.tens)

    def truncate(self):
        """Drop the third-order part."""
        return Jet2(self.val, self.grad, self.hess)

    def __mul__(self, other):
        if not is_jet(other):
            return self._scale(other)
        if not isinstance(other, Jet3):
            raise InputError("cannot mix Jet3 with a lower-order jet")
        self._check_m(other)
        av, ag, ah, at = self.val, self.grad, self.hess, self.tens
        bv, bg, bh, bt = other.val, other.grad, other.hess, other.tens
        val = av * bv
        grad = ag * bv[..., None] + av[..., None] * bg
        hess = ah * bv[..., None, None] + _sym_outer(ag, bg) + av[..., None, None] * bh
        tens = (at * bv[..., None, None, None] + av[..., None, None, None] * bt
                + _sym3(ah[..., :, :, None] * bg[..., None, None, :])
                + _sym3(bh[..., :, :, None] * ag[..., None, None, :]))
        return Jet3(val, grad, hess, tens)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not is_jet(other):
            return Jet2.__truediv__(self, other)
        return self * _reciprocal(other)

    def __add__(self, other):
        if is_jet(other) and not isinstance(other, Jet3):
            raise InputError("cannot mix Jet3 with a lower-order jet")
        return Jet2.__add__(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if is_jet(other) and not isinstance(other, Jet3):
            raise InputError("cannot mix Jet3 with a lower-order jet")
        return Jet2.__sub__(self, other)


def is_jet(x):
    return isinstance(x, Jet2)


def value_of(x):
    """Plain value of a jet or number."""
    return x.val if is_jet(x) else np.asarray(x)


# ------------------------------------------------------------------ creation
def seed(values, index):
    """Jet of the coordinate function ``x -> x[index]`` at ``values``."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise InputError("seed expects a 1-d point")
    m = values.shape[0]
    if not (isinstance(index, (int, np.integer)) and 0 <= index < m):
        raise InputError(f"seed index {index!r} out of range for {m} variables")
    grad = np.zeros(m)
    grad[index] = 1.0
    return Jet2(values[index], grad, np.zeros((m, m)))


def variables(values, order=2):
    """All coordinate jets of ``values`` as one batched jet.

    ``values`` has shape ``B + (m,)``; the result has batch shape ``B + (m,)``
    with ``result[..., k]`` the jet of the k-th coordinate.
    """
    values = np.asarray(values)
    if values.ndim == 0:
        raise InputError("variables expects at least a 1-d point")
    m = values.shape[-1]
    shape = values.shape
    grad = np.broadcast_to(np.eye(m), shape + (m,))
    hess = np.zeros(shape + (m, m))
    if order == 2:
        return Jet2(values, grad, hess)
    if order == 3:
        return Jet3(values, grad, hess, np.zeros(shape + (m, m, m)))
    raise InputError(f"unsupported jet order {order}")


def constant(value, m, order=2):
    """A jet with zero derivatives."""
    value = np.asarray(value)
    shape = value.shape
    d = [np.zeros(shape + (m,) * (k + 1)) for k in range(order)]
    return Jet2(value, *d) if order == 2 else Jet3(value, *d)


def stack(items, axis=0):
    """Stack jets (all with equal batch shape) along a new batch axis."""
    items = list(items)
    if not items:
        raise InputError("stack of nothing")
    first = items[0]
    nd = first.ndim + 1
    if axis < 0:
        axis += nd
    vals = np.stack([j.val for j in items], axis=axis)
    derivs = [np.stack([j._derivs()[k] for j in items], axis=axis) for k in range(first.order)]
    return first._make(vals, derivs)


# ------------------------------------------------------- elementary functions
def _apply(a, f0, f1, f2, f3=None):
    ag = a.grad
    val = f0
    grad = f1[..., None] * ag
    hess = f1[..., None, None] * a.hess + f2[..., None, None] * _outer(ag, ag)
    if a.order == 2:
        return Jet2(val, grad, hess)
    tens = (f1[..., None, None, None] * a.tens
            + f2[..., None, None, None] * _sym3(a.hess[..., :, :, None] * ag[..., None, None, :])
            + f3[..., None, None, None] * (_outer(ag, ag)[..., :, :, None] * ag[..., None, None, :]))
    return Jet3(val, grad, hess, tens)


def _reciprocal(a):
    x = a.val
    if np.any(x == 0):
        raise SingularityError("division by a jet with zero value", point=x)
    r = 1.0 / x
    return _apply(a, r, -r * r, 2 * r * r * r, -6 * r ** 4)


def _check(cond, name, x):
    if np.iscomplexobj(x):
        return
    bad = ~cond
    if np.any(bad):
        raise DomainError(f"{name} outside its real domain", point=np.asarray(x)[bad])


def _dispatch(name, numeric, table, domain=None):
    def fn(a):
        if not is_jet(a):
            return numeric(a)
        x = a.val
        if domain is not None:
            _check(domain(x), name, x)
        return _apply(a, *table(x))

    fn.__name__ = name
    return fn


def _sqrt_table(x):
    r = np.sqrt(x)
    return r, 0.5 / r, -0.25 / (x * r), 0.375 / (x * x * r)


def _exp_table(x):
    e = np.exp(x)
    return e, e, e, e


def _log_table(x):
    r = 1.0 / x
    return np.log(x), r, -r * r, 2 * r * r * r


def _arcsin_table(x):
    w = 1.0 - x * x
    q = 1.0 / np.sqrt(w)
    return np.arcsin(x), q, x * q / w, (1 + 2 * x * x) * q / (w * w)


def _arcsinh_table(x):
    w = 1.0 + x * x
    q = 1.0 / np.sqrt(w)
    return np.arcsinh(x), q, -x * q / w, (2 * x * x - 1) * q / (w * w)


def _arctan_table(x):
    w = 1.0 / (1.0 + x * x)
    return np.arctan(x), w, -2 * x * w * w, (6 * x * x - 2) * w * w * w


sqrt = _dispatch("sqrt", np.sqrt, _sqrt_table, lambda x: x > 0)
exp = _dispatch("exp", np.exp, _exp_table)
log = _dispatch("log", np.log, _log_table, lambda x: x > 0)
arcsin = _dispatch("arcsin", np.arcsin, _arcsin_table, lambda x: np.abs(x) < 1)
arcsinh = _dispatch("arcsinh", np.arcsinh, _arcsinh_table)
arctan = _dispatch("arctan", np.arctan, _arctan_table)


def power(a, p):
    """``a**p`` for a constant real exponent ``p``.

    Integer exponents accept any base; other exponents need a positive base.
    """
    if not is_jet(a):
        return np.power(a, p)
    x = a.val
    integral = float(p).is_integer()
    if not integral:
        _check(x > 0, "power", x)
    coeffs = [1.0, p, p * (p - 1), p * (p - 1) * (p - 2)]
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            terms.append(np.zeros_like(x, dtype=np.result_type(x, float)))
        elif integral:
            e = int(p) - k
            terms.append(c * (x ** e if e >= 0 else 1.0 / x ** (-e)))
        else:
            terms.append(c * x ** (p - k))
    return _apply(a, *terms)


def real(a):
    """Real part, derivative-wise."""
    return a.real() if is_jet(a) else np.real(a)


# ------------------------------------------------------------- linear algebra
_RESERVED = "YW"


def _expand(sub):
    if any(c in sub for c in _RESERVED):
        raise InputError(f"subscripts may not use {_RESERVED!r}")
    return sub


def contract(subscripts, a, b):
    """``einsum`` of two operands, either of which may be a :class:`Jet2`.

    Subscripts describe the batch axes only, e.g. ``'...ij,...j->...i'``.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = (_expand(s) for s in lhs.split(","))
    out = _expand(out)
    ja, jb = is_jet(a), is_jet(b)
    if not (ja or jb):
        return np.einsum(subscripts, a, b)
    if ja and jb:
        a._check_m(b)
        val = np.einsum(f"{sa},{sb}->{out}", a.val, b.val)
        grad = (np.einsum(f"{sa}Y,{sb}->{out}Y", a.grad, b.val)
                + np.einsum(f"{sa},{sb}Y->{out}Y", a.val, b.grad))
        cross = np.einsum(f"{sa}Y,{sb}W->{out}YW", a.grad, b.grad)
        hess = (np.einsum(f"{sa}YW,{sb}->{out}YW", a.hess, b.val)
                + (cross + np.swapaxes(cross, -1, -2))
                + np.einsum(f"{sa},{sb}YW->{out}YW", a.val, b.hess))
    elif ja:
        val = np.einsum(f"{sa},{sb}->{out}", a.val, b)
        grad = np.einsum(f"{sa}Y,{sb}->{out}Y", a.grad, b)
        hess = np.einsum(f"{sa}YW,{sb}->{out}YW", a.hess, b)
    else:
        val = np.einsum(f"{sa},{sb}->{out}", a, b.val)
        grad = np.einsum(f"{sa},{sb}Y->{out}Y", a, b.grad)
        hess = np.einsum(f"{sa},{sb}YW->{out}YW", a, b.hess)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return Jet2(val, grad, hess)


def inv(a):
    """Inverse of a (batched) matrix; jets differentiate through it."""
    if not is_jet(a):
        return _safe_inv(np.asarray(a))
    V = _safe_inv(a.val)
    Ag, Ah = a.grad, a.hess
    grad = -np.einsum("...ij,...jlk,...lq->...iqk", V, Ag, V)
    T = np.einsum("...ij,...jpk->...ipk", V, Ag)          # V A_k
    U = np.einsum("...ipk,...pql->...iqkl", T, T)         # V A_k V A_l
    P = np.einsum("...iqkl,...qj->...ijkl", U, V)
    H = P + np.swapaxes(P, -1, -2) - np.einsum("...ij,...jpkl,...pq->...iqkl", V, Ah, V)
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    return Jet2(V, grad, H)


def _safe_inv(M):
    try:
        V = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("singular matrix", point=M) from exc
    if not np.all(np.isfinite(V)):
        raise SingularityError("singular matrix", point=M)
    return V


def compose(outer, inners):
    """Second-order chain rule.

    ``outer`` is a jet over ``k`` variables holding the derivatives of some
    function ``h`` at the point ``(u_1..u_k)``; ``inners`` are ``k`` jets over
    ``m`` variables whose values are that point.  Returns the jet of
    ``h(u_1, .., u_k)`` over the ``m`` variables.
    """
    inners = list(inners)
    if len(inners) != outer.m:
        raise InputError(f"compose needs {outer.m} inner jets, got {len(inners)}")
    m = inners[0].m
    for j in inners[1:]:
        inners[0]._check_m(j)
    shape = np.broadcast_shapes(outer.shape, *[j.shape for j in inners])
    G = np.stack([np.broadcast_to(j.grad, shape + (m,)) for j in inners], axis=-2)
    H = np.stack([np.broadcast_to(j.hess, shape + (m, m)) for j in inners], axis=-3)
    og = np.broadcast_to(outer.grad, shape + outer.grad.shape[-1:])
    oh = np.broadcast_to(outer.hess, shape + outer.hess.shape[-2:])
    grad = np.einsum("...a,...am->...m", og, G)
    hess = (np.einsum("...a,...amn->...mn", og, H)
            + np.einsum("...am,...ab,...bn->...mn", G, oh, G))
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return Jet2(np.broadcast_to(outer.val, shape), grad, hess)
