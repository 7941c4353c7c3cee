"""Order-2 jet arithmetic over the four phase variables.

A :class:`Jet2` carries a value together with all first and second partial
derivatives with respect to ``(xi, eta, p_xi, p_eta)``, propagated through
arithmetic by truncated Taylor rules.  Everything is batched: the value may
be a scalar or an ndarray of sample points, and derivatives ride along with
a leading axis of size 4 (gradient) / 10 (packed Hessian).

A :class:`Dual4` is the order-1 little sibling (value + gradient, plain
Python floats) used where only first derivatives are needed at scalar
points and per-call overhead matters, e.g. inside the ODE right-hand side.

:func:`fd_derivatives` is the independent finite-difference oracle used to
cross-check jet propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "PhasePoint",
    "Jet2",
    "Dual4",
    "Observable",
    "jet_seed",
    "fd_derivatives",
    "norm_residual",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "tan",
    "arctan",
]

VAR_NAMES = ("xi", "eta", "p_xi", "p_eta")

# Packed storage of the symmetric 4x4 Hessian: upper triangle, row major.
_IU = np.array([0, 0, 0, 0, 1, 1, 1, 2, 2, 3])
_JU = np.array([0, 1, 2, 3, 1, 2, 3, 2, 3, 3])
_PACK = {}
for _p, (_i, _j) in enumerate(zip(_IU, _JU)):
    _PACK[(_i, _j)] = _p
    _PACK[(_j, _i)] = _p


@dataclass(frozen=True)
class PhasePoint:
    """A phase-space point (or batch of points) in Liouville/Lie coordinates."""

    xi: np.ndarray
    eta: np.ndarray
    p_xi: np.ndarray
    p_eta: np.ndarray

    def __post_init__(self):
        for name in VAR_NAMES:
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise DomainError("PhasePoint", name, f"non-finite component {name}")
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return np.broadcast_shapes(
            self.xi.shape, self.eta.shape, self.p_xi.shape, self.p_eta.shape
        )

    def components(self):
        return (self.xi, self.eta, self.p_xi, self.p_eta)

    def as_array(self):
        """Stack components into shape (4,) + batch shape."""
        return np.stack(np.broadcast_arrays(*self.components()))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls(arr[0], arr[1], arr[2], arr[3])

    def shifted(self, var: int, delta: float) -> "PhasePoint":
        parts = list(self.components())
        parts[var] = parts[var] + delta
        return PhasePoint(*parts)


class Jet2:
    """Value with first and second partials w.r.t. the 4 phase variables.

    ``val`` has an arbitrary batch shape S; ``grad`` has shape (4,)+S and
    ``hess`` has shape (10,)+S holding the upper triangle of the symmetric
    second-derivative matrix (single storage, so hess[i,j] and hess[j,i]
    are the identical entry by construction).
    """

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, batch_shape=()):
        val = np.broadcast_to(np.asarray(value, dtype=float), batch_shape).copy()
        return cls(val, np.zeros((4,) + batch_shape), np.zeros((10,) + batch_shape))

    @classmethod
    def seed(cls, value, var: int):
        """Jet of coordinate ``var`` at ``value``: unit gradient, zero Hessian."""
        val = np.asarray(value, dtype=float)
        grad = np.zeros((4,) + val.shape)
        grad[var] = 1.0
        return cls(val, grad, np.zeros((10,) + val.shape))

    # -- accessors ----------------------------------------------------

    def hess_at(self, i: int, j: int):
        """Second partial w.r.t. variables i, j (symmetric single storage)."""
        return self.hess[_PACK[(i, j)]]

    def order1(self):
        return self.val, self.grad

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        return Jet2(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.val - other.val, self.grad - other.grad, self.hess - other.hess)
        return Jet2(self.val - other, self.grad, self.hess)

    def __rsub__(self, other):
        return Jet2(other - self.val, -self.grad, -self.hess)

    def __neg__(self):
        return Jet2(-self.val, -self.grad, -self.hess)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            a, b = self, other
            cross = a.grad[_IU] * b.grad[_JU] + b.grad[_IU] * a.grad[_JU]
            return Jet2(
                a.val * b.val,
                a.grad * b.val + b.grad * a.val,
                a.hess * b.val + b.hess * a.val + cross,
            )
        return Jet2(self.val * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.inv()
        return Jet2(self.val / other, self.grad / other, self.hess / other)

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer()):
            n = int(p)
            if n == 0:
                return Jet2.constant(1.0, self.val.shape)
            if n == 1:
                return self
            return self._chain(
                self.val**n, n * self.val ** (n - 1),
                n * (n - 1) * self.val ** (n - 2),
            )
        self._require(self.val > 0.0, "pow_real")
        return self._chain(
            self.val**p, p * self.val ** (p - 1.0),
            p * (p - 1.0) * self.val ** (p - 2.0),
        )

    # -- primitive functions -------------------------------------------

    def _require(self, ok, primitive):
        ok = np.broadcast_to(np.asarray(ok), np.broadcast_shapes(np.shape(ok), self.val.shape))
        if not np.all(ok):
            bad = np.broadcast_to(self.val, ok.shape)[~ok]
            raise DomainError(primitive, float(bad.flat[0]))

    def _chain(self, f, f1, f2):
        """Order-2 chain rule for a scalar function applied to this jet."""
        grad = f1 * self.grad
        hess = f1 * self.hess + f2 * (self.grad[_IU] * self.grad[_JU])
        return Jet2(f, grad, hess)

    def inv(self):
        self._require(self.val != 0.0, "inv")
        v = self.val
        return self._chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def sqrt(self):
        self._require(self.val > 0.0, "sqrt")
        r = np.sqrt(self.val)
        return self._chain(r, 0.5 / r, -0.25 / (r * self.val))

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self):
        self._require(self.val > 0.0, "ln")
        v = self.val
        return self._chain(np.log(v), 1.0 / v, -1.0 / v**2)

    def sin(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._chain(c, -s, -c)

    def tan(self):
        t = np.tan(self.val)
        sec2 = 1.0 + t * t
        return self._chain(t, sec2, 2.0 * t * sec2)

    def arctan(self):
        v = self.val
        d = 1.0 / (1.0 + v * v)
        return self._chain(np.arctan(v), d, -2.0 * v * d * d)


class Dual4:
    """Order-1 forward-mode number over the 4 phase variables (scalar only)."""

    __slots__ = ("val", "d")

    def __init__(self, val, d=(0.0, 0.0, 0.0, 0.0)):
        self.val = val
        self.d = d

    @classmethod
    def seed(cls, value, var: int):
        d = [0.0, 0.0, 0.0, 0.0]
        d[var] = 1.0
        return cls(float(value), tuple(d))

    def _lift(self, f, f1):
        a, b, c, e = self.d
        return Dual4(f, (f1 * a, f1 * b, f1 * c, f1 * e))

    def __add__(self, other):
        if isinstance(other, Dual4):
            a, b = self.d, other.d
            return Dual4(self.val + other.val,
                         (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]))
        return Dual4(self.val + other, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual4):
            a, b = self.d, other.d
            return Dual4(self.val - other.val,
                         (a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]))
        return Dual4(self.val - other, self.d)

    def __rsub__(self, other):
        a = self.d
        return Dual4(other - self.val, (-a[0], -a[1], -a[2], -a[3]))

    def __neg__(self):
        a = self.d
        return Dual4(-self.val, (-a[0], -a[1], -a[2], -a[3]))

    def __mul__(self, other):
        if isinstance(other, Dual4):
            u, v = self.val, other.val
            a, b = self.d, other.d
            return Dual4(u * v, (a[0] * v + b[0] * u, a[1] * v + b[1] * u,
                                 a[2] * v + b[2] * u, a[3] * v + b[3] * u))
        return self._lift(self.val * other, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual4):
            return self * other.inv()
        return self._lift(self.val / other, 1.0 / other)

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer()):
            n = int(p)
            if n == 0:
                return Dual4(1.0)
            if n == 1:
                return self
            return self._lift(self.val**n, n * self.val ** (n - 1))
        if self.val <= 0.0:
            raise DomainError("pow_real", self.val)
        return self._lift(self.val**p, p * self.val ** (p - 1.0))

    def inv(self):
        if self.val == 0.0:
            raise DomainError("inv", self.val)
        return self._lift(1.0 / self.val, -1.0 / self.val**2)

    def sqrt(self):
        if self.val <= 0.0:
            raise DomainError("sqrt", self.val)
        r = math.sqrt(self.val)
        return self._lift(r, 0.5 / r)

    def exp(self):
        e = math.exp(self.val)
        return self._lift(e, e)

    def log(self):
        if self.val <= 0.0:
            raise DomainError("ln", self.val)
        return self._lift(math.log(self.val), 1.0 / self.val)

    def sin(self):
        return self._lift(math.sin(self.val), math.cos(self.val))

    def cos(self):
        return self._lift(math.cos(self.val), -math.sin(self.val))

    def tan(self):
        t = math.tan(self.val)
        return self._lift(t, 1.0 + t * t)

    def arctan(self):
        return self._lift(math.atan(self.val), 1.0 / (1.0 + self.val**2))


# Generic math entry points so the same formula code runs on Jet2, Dual4
# or plain floats/ndarrays.

def sqrt(x):
    return x.sqrt() if isinstance(x, (Jet2, Dual4)) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, (Jet2, Dual4)) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, (Jet2, Dual4)) else np.log(x)


def sin(x):
    return x.sin() if isinstance(x, (Jet2, Dual4)) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, (Jet2, Dual4)) else np.cos(x)


def tan(x):
    return x.tan() if isinstance(x, (Jet2, Dual4)) else np.tan(x)


def arctan(x):
    return x.arctan() if isinstance(x, (Jet2, Dual4)) else np.arctan(x)


def jet_seed(point: PhasePoint):
    """The four coordinate jets at ``point``: val = component, grad = e_i, hess = 0."""
    shape = point.shape
    comps = [np.broadcast_to(c, shape) for c in point.components()]
    return tuple(Jet2.seed(val, i) for i, val in enumerate(comps))


_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}

_FNS = {
    "neg": lambda a: -a,
    "inv": lambda a: a.inv(),
    "sqrt": lambda a: a.sqrt(),
    "exp": lambda a: a.exp(),
    "ln": lambda a: a.log(),
    "sin": lambda a: a.sin(),
    "cos": lambda a: a.cos(),
    "tan": lambda a: a.tan(),
    "arctan": lambda a: a.arctan(),
}


def jet_arith(a: Jet2, b: Jet2, op: str) -> Jet2:
    """Binary jet arithmetic by name: add, sub, mul, div."""
    return _ARITH[op](a, b)


def jet_fn(a: Jet2, fn: str, exponent=None) -> Jet2:
    """Unary jet function by name; pow_int/pow_real take ``exponent``."""
    if fn in ("pow_int", "pow_real"):
        return a ** (int(exponent) if fn == "pow_int" else float(exponent))
    return _FNS[fn](a)


@dataclass(frozen=True)
class Observable:
    """A pure, deterministic map from a phase point to a scalar.

    ``fn`` operates on four generic numbers (Jet2, Dual4 or plain arrays)
    so a single definition serves jet evaluation, fast first-order
    evaluation and raw value evaluation.
    """

    fn: Callable
    label: str = ""

    def eval(self, point: PhasePoint) -> Jet2:
        """Evaluate with order-2 jets (value + gradient + Hessian)."""
        out = self.fn(*jet_seed(point))
        if not isinstance(out, Jet2):
            out = Jet2.constant(out, point.shape)
        return out

    __call__ = eval

    def value(self, point: PhasePoint):
        """Plain value, no derivatives."""
        out = self.fn(*(np.broadcast_to(c, point.shape) for c in point.components()))
        return np.asarray(out, dtype=float)

    def dual(self, point: PhasePoint):
        """Value and gradient at a single (scalar) point via Dual4 numbers."""
        args = [Dual4.seed(float(c), i) for i, c in enumerate(point.components())]
        out = self.fn(*args)
        if isinstance(out, Dual4):
            return out.val, np.array(out.d)
        return float(out), np.zeros(4)


def fd_derivatives(obs: Observable, point: PhasePoint, h: float = 1e-5,
                   h_hess: float = 1e-4):
    """Finite-difference gradient and packed Hessian of ``obs`` at ``point``.

    Central second-order stencils: gradient error O(h^2), Hessian error
    O(h_hess^2).  This is the oracle against which jet propagation is
    certified; it shares no code with the jet rules.
    """

    def f(p):
        return obs.value(p)

    grad = np.empty((4,) + point.shape)
    for i in range(4):
        grad[i] = (f(point.shifted(i, +h)) - f(point.shifted(i, -h))) / (2.0 * h)

    hess = np.empty((10,) + point.shape)
    f0 = f(point)
    for p, (i, j) in enumerate(zip(_IU, _JU)):
        if i == j:
            hess[p] = (
                f(point.shifted(i, +h_hess)) - 2.0 * f0 + f(point.shifted(i, -h_hess))
            ) / h_hess**2
        else:
            pp = f(point.shifted(i, +h_hess).shifted(j, +h_hess))
            pm = f(point.shifted(i, +h_hess).shifted(j, -h_hess))
            mp = f(point.shifted(i, -h_hess).shifted(j, +h_hess))
            mm = f(point.shifted(i, -h_hess).shifted(j, -h_hess))
            hess[p] = (pp - pm - mp + mm) / (4.0 * h_hess**2)
    return grad, hess


def norm_residual(lhs, rhs):
    """Magnitude-normalized comparison |lhs-rhs| / (1 + max(|lhs|, |rhs|))."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return np.abs(lhs - rhs) / (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))
