"""
Truncated univariate Taylor jets.

A jet of order n carries the derivatives f(t0), f'(t0), ..., f^(n)(t0) of a
scalar function of the curve parameter. Arithmetic and the analytic
primitives propagate those derivatives exactly (up to roundoff), which is
what every primed quantity of the curvature formulas is built from.

The module level functions (sin, cos, ..., power, integer_power) dispatch on
the argument: plain reals go through numpy, anything else through the method
of the same name. The spatial bundle in manifold.py implements the same
method names, so expressions evaluate over reals, jets and bundles alike.
"""
import logging
from functools import lru_cache
from math import factorial

import numpy as np

import equiaffine.configs as conf
from equiaffine.common import (DegenerateJet, DivisionByNearZero, DomainError,
                               JetOrderMismatch, is_plain)

logger = logging.getLogger(__name__)

PRIMITIVES = ('sin', 'cos', 'tan', 'sinh', 'cosh', 'tanh', 'exp', 'log',
              'sqrt', 'cbrt', 'abs_sqrt', 'abs', 'pow')


@lru_cache(maxsize=None)
def _factorials(n):
    f = np.array([factorial(k) for k in range(n)], dtype=float)
    f.setflags(write=False)
    return f


def _threshold(threshold):
    return conf.jet_threshold if threshold is None else threshold


class TaylorJet:
    """
    Immutable truncated Taylor jet in the derivative convention.

    ``coeffs[k]`` is the k-th derivative at the expansion point. Internally the
    factorial-normalised coefficients are stored so that products are plain
    truncated convolutions.
    """
    __slots__ = ('_tc',)
    __array_ufunc__ = None

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("jet coefficients must be a non-empty sequence")
        self._set(coeffs / _factorials(coeffs.size))

    def _set(self, tc):
        tc = np.array(tc, dtype=float)
        tc.setflags(write=False)
        object.__setattr__(self, '_tc', tc)

    def __setattr__(self, name, value):
        raise AttributeError("TaylorJet is immutable")

    @classmethod
    def _from_taylor(cls, tc):
        jet = cls.__new__(cls)
        jet._set(tc)
        return jet

    @property
    def order(self):
        return self._tc.size - 1

    @property
    def coeffs(self):
        c = self._tc * _factorials(self._tc.size)
        c.setflags(write=False)
        return c

    @property
    def value(self):
        return float(self._tc[0])

    def __repr__(self):
        return f"TaylorJet({[float(c) for c in self.coeffs]})"

    def __len__(self):
        return self._tc.size

    def derivative(self):
        """Jet of f' (one order lower)"""
        if self.order == 0:
            raise JetOrderMismatch("cannot differentiate an order-0 jet")
        k = np.arange(1, self._tc.size)
        return TaylorJet._from_taylor(k * self._tc[1:])

    def truncate(self, order):
        if order > self.order or order < 0:
            raise JetOrderMismatch(f"cannot truncate order {self.order} jet to {order}")
        return TaylorJet._from_taylor(self._tc[:order + 1])

    # Arithmetic ---------------------------------------------------------------
    def _other(self, other):
        if isinstance(other, TaylorJet):
            if other.order != self.order:
                raise JetOrderMismatch(f"order {self.order} and {other.order} jets")
            return other._tc
        if is_plain(other):
            tc = np.zeros(self._tc.size)
            tc[0] = other
            return tc
        return None

    def __add__(self, other):
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(self._tc + tc)

    __radd__ = __add__

    def __sub__(self, other):
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(self._tc - tc)

    def __rsub__(self, other):
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(tc - self._tc)

    def __neg__(self):
        return TaylorJet._from_taylor(-self._tc)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if is_plain(other):
            return TaylorJet._from_taylor(self._tc * other)
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(np.convolve(self._tc, tc)[:self._tc.size])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if is_plain(other):
            if abs(other) < _threshold(None):
                raise DivisionByNearZero(f"division by {other}")
            return TaylorJet._from_taylor(self._tc / other)
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(_divide(self._tc, tc, None))

    def __rtruediv__(self, other):
        tc = self._other(other)
        if tc is None:
            return NotImplemented
        return TaylorJet._from_taylor(_divide(tc, self._tc, None))

    def __pow__(self, exponent):
        if float(exponent).is_integer():
            return integer_power(self, int(exponent))
        return self.power(exponent)

    # Primitives ---------------------------------------------------------------
    def exp(self):
        return TaylorJet._from_taylor(_exp(self._tc))

    def log(self):
        if self._tc[0] <= 0:
            raise DomainError(f"log of nonpositive value {self.value}")
        return TaylorJet._from_taylor(_log(self._tc))

    def sin(self):
        return TaylorJet._from_taylor(_sincos(self._tc)[0])

    def cos(self):
        return TaylorJet._from_taylor(_sincos(self._tc)[1])

    def tan(self):
        s, c = _sincos(self._tc)
        q = _divide(s, c, None)
        # same leading value as the real evaluation
        q[0] = np.tan(self._tc[0])
        return TaylorJet._from_taylor(q)

    def sinh(self):
        return TaylorJet._from_taylor(_sinhcosh(self._tc)[0])

    def cosh(self):
        return TaylorJet._from_taylor(_sinhcosh(self._tc)[1])

    def tanh(self):
        s, c = _sinhcosh(self._tc)
        q = _divide(s, c, None)
        q[0] = np.tanh(self._tc[0])
        return TaylorJet._from_taylor(q)

    def sqrt(self):
        u0 = self._tc[0]
        if u0 < 0:
            raise DomainError(f"sqrt of negative value {u0}")
        if self.order > 0 and u0 < _threshold(None):
            raise DegenerateJet(f"sqrt is not smooth at {u0}")
        return TaylorJet._from_taylor(_power(self._tc, 0.5, np.sqrt(u0)))

    def power(self, p):
        """u**p for a real exponent, defined for a positive leading value only"""
        u0 = self._tc[0]
        if u0 <= 0:
            raise DomainError(f"real power {p} of nonpositive value {u0}")
        return TaylorJet._from_taylor(_power(self._tc, p, u0 ** p))

    def cbrt(self, threshold=None):
        """Signed (real) cube root"""
        u0 = self._tc[0]
        if abs(u0) < _threshold(threshold):
            raise DegenerateJet(f"cube root of near-zero value {u0}")
        return TaylorJet._from_taylor(_power(self._tc, 1.0 / 3.0, np.cbrt(u0)))

    def abs_sqrt(self, threshold=None):
        """|u|**(1/2) with the sign of u0 propagated analytically"""
        u0 = self._tc[0]
        if abs(u0) < _threshold(threshold):
            raise DegenerateJet(f"abs-sqrt of near-zero value {u0}")
        eps = 1.0 if u0 > 0 else -1.0
        return TaylorJet._from_taylor(_power(eps * self._tc, 0.5, np.sqrt(eps * u0)))

    def abs(self, threshold=None):
        u0 = self._tc[0]
        if abs(u0) < _threshold(threshold):
            raise DegenerateJet(f"abs is not smooth at {u0}")
        return self if u0 > 0 else -self

    def reciprocal(self, threshold=None):
        """1/u, with a leading coefficient floor of ``threshold`` (0.0 rejects an exact zero only)"""
        one = np.zeros(self._tc.size)
        one[0] = 1.0
        return TaylorJet._from_taylor(_divide(one, self._tc, threshold))


# Recurrences on factorial-normalised coefficients ----------------------------
def _divide(a, b, threshold):
    if b[0] == 0 or abs(b[0]) < _threshold(threshold):
        raise DivisionByNearZero(f"jet division by leading coefficient {b[0]}")
    q = np.zeros(a.size)
    q[0] = a[0] / b[0]
    for k in range(1, a.size):
        q[k] = (a[k] - np.dot(b[1:k + 1], q[k - 1::-1])) / b[0]
    return q


def _exp(u):
    e = np.zeros(u.size)
    e[0] = np.exp(u[0])
    for k in range(1, u.size):
        j = np.arange(1, k + 1)
        e[k] = np.sum(j * u[j] * e[k - j]) / k
    return e


def _log(u):
    out = np.zeros(u.size)
    out[0] = np.log(u[0])
    for k in range(1, u.size):
        j = np.arange(1, k)
        out[k] = (u[k] - np.sum(j * out[j] * u[k - j]) / k) / u[0]
    return out


def _sincos(u):
    s = np.zeros(u.size)
    c = np.zeros(u.size)
    s[0], c[0] = np.sin(u[0]), np.cos(u[0])
    for k in range(1, u.size):
        j = np.arange(1, k + 1)
        s[k] = np.sum(j * u[j] * c[k - j]) / k
        c[k] = -np.sum(j * u[j] * s[k - j]) / k
    return s, c


def _sinhcosh(u):
    s = np.zeros(u.size)
    c = np.zeros(u.size)
    s[0], c[0] = np.sinh(u[0]), np.cosh(u[0])
    for k in range(1, u.size):
        j = np.arange(1, k + 1)
        s[k] = np.sum(j * u[j] * c[k - j]) / k
        c[k] = np.sum(j * u[j] * s[k - j]) / k
    return s, c


def _power(u, p, w0):
    # from u w' = p w u', valid for any real branch w0 with w0 = u0**p
    w = np.zeros(u.size)
    w[0] = w0
    for k in range(1, u.size):
        j = np.arange(1, k + 1)
        w[k] = np.sum(((p + 1) * j - k) * u[j] * w[k - j]) / (k * u[0])
    return w


# Operations -------------------------------------------------------------------
def jet_variable(value, order):
    """
    The identity function seeded at ``value``.

    Args:
        value (float): expansion point
        order (int): highest derivative carried

    Returns:
        TaylorJet: [value, 1, 0, ..., 0]
    """
    if order < 0:
        raise ValueError("jet order must be nonnegative")
    coeffs = np.zeros(order + 1)
    coeffs[0] = value
    if order:
        coeffs[1] = 1.0
    return TaylorJet(coeffs)


def jet_constant(value, order):
    coeffs = np.zeros(order + 1)
    coeffs[0] = value
    return TaylorJet(coeffs)


def jet_mul(a, b):
    return a * b


def jet_div(a, b, threshold=None):
    if isinstance(a, TaylorJet) and isinstance(b, TaylorJet):
        if a.order != b.order:
            raise JetOrderMismatch(f"order {a.order} and {b.order} jets")
        return TaylorJet._from_taylor(_divide(a._tc, b._tc, threshold))
    return a / b


def jet_lift(fn, a, *args):
    """
    Compose a primitive with a jet.

    Args:
        fn (str): one of PRIMITIVES
        a (TaylorJet): argument
        *args: the real exponent for 'pow'

    Returns:
        TaylorJet
    """
    if fn not in PRIMITIVES:
        raise ValueError(f"unknown primitive {fn}")
    if fn == 'pow':
        return a.power(*args)
    return getattr(a, fn)()


def as_jet(scalar, order):
    """Lift a plain real to a constant jet, or truncate a higher order jet"""
    if is_plain(scalar):
        return jet_constant(scalar, order)
    if scalar.order == order:
        return scalar
    return scalar.truncate(order)


# Algebra-generic primitives ------------------------------------------------------
_NUMPY = {
    'sin': np.sin, 'cos': np.cos, 'tan': np.tan,
    'sinh': np.sinh, 'cosh': np.cosh, 'tanh': np.tanh,
    'exp': np.exp, 'cbrt': np.cbrt,
}


def _apply(name, u):
    if is_plain(u):
        return float(_NUMPY[name](u))
    return getattr(u, name)()


def sin(u):
    return _apply('sin', u)


def cos(u):
    return _apply('cos', u)


def tan(u):
    return _apply('tan', u)


def sinh(u):
    return _apply('sinh', u)


def cosh(u):
    return _apply('cosh', u)


def tanh(u):
    return _apply('tanh', u)


def exp(u):
    return _apply('exp', u)


def cbrt(u):
    return _apply('cbrt', u)


def log(u):
    if is_plain(u):
        if u <= 0:
            raise DomainError(f"log of nonpositive value {u}")
        return float(np.log(u))
    return u.log()


def sqrt(u):
    if is_plain(u):
        if u < 0:
            raise DomainError(f"sqrt of negative value {u}")
        return float(np.sqrt(u))
    return u.sqrt()


def abs_sqrt(u):
    if is_plain(u):
        return float(np.sqrt(abs(u)))
    return u.abs_sqrt()


def absolute(u):
    if is_plain(u):
        return abs(float(u))
    return u.abs()


def power(u, p):
    """Real power; integral exponents use repeated multiplication"""
    if float(p).is_integer():
        return integer_power(u, int(p))
    if is_plain(u):
        if u <= 0:
            raise DomainError(f"real power {p} of nonpositive value {u}")
        return float(u) ** float(p)
    return u.power(p)


def integer_power(u, n):
    """u**n by square-and-multiply, exact products only"""
    if n == 0:
        return 1.0
    result, base, k = None, u, abs(n)
    while True:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if not k:
            break
        base = base * base
    if n < 0:
        if is_plain(result) and result == 0:
            raise DivisionByNearZero("negative power of zero")
        result = 1.0 / result
    return result
