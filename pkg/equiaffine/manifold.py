"""
Pointwise pseudo-Riemannian structure of a user-defined metric on a chart.

Metric partials come from evaluating the component expressions on a
two-direction, order-2 perturbation bundle (SpatialJet) about the point. The
bundle coefficients may themselves be t-jets, which is how metric quantities
along a curve become functions of the curve parameter.

Index conventions for the arrays below (0-based, x = 0, y = 1):
    g[i, j]            g_ij
    dg[k, i, j]        d_k g_ij
    ddg[k, l, i, j]    d_k d_l g_ij
    gamma[k, i, j]     Gamma^k_ij
    dgamma[l, k, i, j] d_l Gamma^k_ij
    J[i, j]            J^i_j
"""
import logging
from collections import namedtuple
from itertools import product

import numpy as np

import equiaffine.configs as conf
import equiaffine.jets as jets
from equiaffine.common import (DegenerateJet, DegenerateMetric, DomainError,
                               UnboundIdentifier, is_plain, value_of)
from equiaffine.expr import METRIC_VARIABLES, compile_expression, evaluate, free_parameters

logger = logging.getLogger(__name__)

MetricSpec = namedtuple('MetricSpec', ['g11', 'g12', 'g22', 'params', 'sources'])
SpatialEval = namedtuple('SpatialEval', ['point', 'g', 'dg', 'ddg', 'G', 'sqrt_abs_G', 'omega', 'bundle'])
ChristoffelEval = namedtuple('ChristoffelEval', ['gamma', 'dgamma'])
JTensor = namedtuple('JTensor', ['components', 'omega'])
StructureReport = namedtuple('StructureReport', [
    'x', 'y', 'omega', 'scalar_curvature',
    'j_square', 'omega_j', 'nabla_j', 'nabla_omega', 'metric_compat',
])


# Helpers that skip exact plain zeros, most bundle terms are zero
def _is_zero(a):
    return is_plain(a) and a == 0


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return 0.0
    return a * b


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return a + b


def _total(terms):
    result = 0.0
    for term in terms:
        result = _add(result, term)
    return result


# Only an exact zero is rejected here, the same for reals and t-jets. Metric
# degeneracy is decided relative to the metric scale in metric_eval.
def _reciprocal(a):
    if is_plain(a):
        if a == 0:
            raise DomainError("division by zero")
        return 1.0 / a
    if isinstance(a, jets.TaylorJet):
        return a.reciprocal(threshold=0.0)
    return a.reciprocal()


def _abs_sqrt(u, threshold=None):
    if is_plain(u):
        return float(np.sqrt(abs(u)))
    return u.abs_sqrt(threshold=threshold)


class SpatialJet:
    """
    Second order Taylor polynomial in two spatial directions,

        c + cx dx + cy dy + cxx dx^2 + cxy dx dy + cyy dy^2

    stored as ``terms = (c, cx, cy, cxx, cxy, cyy)``. Coefficients are reals or
    TaylorJets.
    """
    __slots__ = ('terms',)
    __array_ufunc__ = None

    def __init__(self, terms):
        terms = tuple(terms)
        if len(terms) != 6:
            raise ValueError("a spatial jet has six terms")
        object.__setattr__(self, 'terms', terms)

    def __setattr__(self, name, value):
        raise AttributeError("SpatialJet is immutable")

    @classmethod
    def constant(cls, value):
        return cls((value, 0.0, 0.0, 0.0, 0.0, 0.0))

    @classmethod
    def coordinate(cls, value, direction):
        if direction == 0:
            return cls((value, 1.0, 0.0, 0.0, 0.0, 0.0))
        return cls((value, 0.0, 1.0, 0.0, 0.0, 0.0))

    @property
    def value(self):
        return self.terms[0]

    def partial(self, k):
        return self.terms[1 + k]

    def second_partial(self, k, l):
        if k != l:
            return self.terms[4]
        return _mul(2.0, self.terms[3 + 2 * k])

    def __repr__(self):
        return f"SpatialJet({self.terms!r})"

    def _other(self, other):
        if isinstance(other, SpatialJet):
            return other.terms
        if is_plain(other) or isinstance(other, jets.TaylorJet):
            return (other, 0.0, 0.0, 0.0, 0.0, 0.0)
        return None

    def __add__(self, other):
        b = self._other(other)
        if b is None:
            return NotImplemented
        return SpatialJet(_add(x, y) for x, y in zip(self.terms, b))

    __radd__ = __add__

    def __neg__(self):
        return SpatialJet(_mul(-1.0, x) for x in self.terms)

    def __pos__(self):
        return self

    def __sub__(self, other):
        b = self._other(other)
        if b is None:
            return NotImplemented
        return self + (-SpatialJet(b))

    def __rsub__(self, other):
        b = self._other(other)
        if b is None:
            return NotImplemented
        return SpatialJet(b) + (-self)

    def __mul__(self, other):
        if is_plain(other) or isinstance(other, jets.TaylorJet):
            return SpatialJet(_mul(x, other) for x in self.terms)
        b = self._other(other)
        if b is None:
            return NotImplemented
        a0, ax, ay, axx, axy, ayy = self.terms
        b0, bx, by, bxx, bxy, byy = b
        return SpatialJet((
            _mul(a0, b0),
            _add(_mul(a0, bx), _mul(ax, b0)),
            _add(_mul(a0, by), _mul(ay, b0)),
            _total((_mul(a0, bxx), _mul(ax, bx), _mul(axx, b0))),
            _total((_mul(a0, bxy), _mul(ax, by), _mul(ay, bx), _mul(axy, b0))),
            _total((_mul(a0, byy), _mul(ay, by), _mul(ayy, b0))),
        ))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if is_plain(other) or isinstance(other, jets.TaylorJet):
            return self * _reciprocal(other)
        if not isinstance(other, SpatialJet):
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        b = self._other(other)
        if b is None:
            return NotImplemented
        return SpatialJet(b) * self.reciprocal()

    def __pow__(self, exponent):
        return jets.power(self, exponent)

    def _compose(self, f0, f1, f2):
        # f(a0 + d) = f0 + f1 d + f2 d^2 / 2, truncated at second order
        _, ax, ay, axx, axy, ayy = self.terms
        half = _mul(0.5, f2)
        return SpatialJet((
            f0,
            _mul(f1, ax),
            _mul(f1, ay),
            _add(_mul(f1, axx), _mul(half, _mul(ax, ax))),
            _add(_mul(f1, axy), _mul(f2, _mul(ax, ay))),
            _add(_mul(f1, ayy), _mul(half, _mul(ay, ay))),
        ))

    def reciprocal(self):
        r = _reciprocal(self.value)
        r2 = r * r
        return self._compose(r, -r2, 2.0 * r2 * r)

    def sin(self):
        s, c = jets.sin(self.value), jets.cos(self.value)
        return self._compose(s, c, -s)

    def cos(self):
        s, c = jets.sin(self.value), jets.cos(self.value)
        return self._compose(c, -s, -c)

    def tan(self):
        t = jets.tan(self.value)
        sec2 = 1.0 + t * t
        return self._compose(t, sec2, 2.0 * t * sec2)

    def sinh(self):
        s, c = jets.sinh(self.value), jets.cosh(self.value)
        return self._compose(s, c, s)

    def cosh(self):
        s, c = jets.sinh(self.value), jets.cosh(self.value)
        return self._compose(c, s, c)

    def tanh(self):
        t = jets.tanh(self.value)
        d = 1.0 - t * t
        return self._compose(t, d, -2.0 * t * d)

    def exp(self):
        e = jets.exp(self.value)
        return self._compose(e, e, e)

    def log(self):
        a0 = self.value
        r = _reciprocal(a0)
        return self._compose(jets.log(a0), r, -(r * r))

    def sqrt(self):
        s = jets.sqrt(self.value)
        r = _reciprocal(s)
        return self._compose(s, 0.5 * r, -0.25 * r * r * r)

    def power(self, p):
        a0 = self.value
        return self._compose(jets.power(a0, p),
                             p * jets.power(a0, p - 1),
                             p * (p - 1) * jets.power(a0, p - 2))

    def cbrt(self):
        r = jets.cbrt(self.value)
        inv = _reciprocal(r)
        inv2 = inv * inv
        return self._compose(r, inv2 / 3.0, -2.0 / 9.0 * inv2 * inv2 * inv)

    def abs_sqrt(self, threshold=None):
        a0 = self.value
        eps = 1.0 if value_of(a0) >= 0 else -1.0
        s = _abs_sqrt(a0, threshold)
        r = _reciprocal(s)
        return self._compose(s, 0.5 * eps * r, -0.25 * r * r * r)

    def abs(self):
        a0 = self.value
        if abs(value_of(a0)) < conf.jet_threshold:
            raise DegenerateJet(f"abs is not smooth at {value_of(a0)}")
        eps = 1.0 if value_of(a0) > 0 else -1.0
        return self._compose(eps * a0, eps, 0.0)


# Metric ---------------------------------------------------------------------------
def metric_spec(g11, g12, g22, params=None):
    """
    Compile the three metric components.

    Args:
        g11, g12, g22 (str): expressions in x and y
        params (dict, optional): parameter values

    Raises:
        LexError, ExpressionSyntaxError: for malformed expressions
        UnboundIdentifier: for parameters without a value

    Returns:
        MetricSpec
    """
    params = dict(params or {})
    sources = (g11, g12, g22)
    asts = [compile_expression(str(s), METRIC_VARIABLES) for s in sources]
    for ast in asts:
        for name in free_parameters(ast):
            if name not in params:
                raise UnboundIdentifier(name)
    return MetricSpec(*asts, params=params, sources=sources)


def _lift(scalar):
    if isinstance(scalar, SpatialJet):
        return scalar
    return SpatialJet.constant(scalar)


def metric_eval(spec, point, threshold=None):
    """
    Metric components and their first and second spatial partials at a point.

    Args:
        spec (MetricSpec): metric
        point (tuple): (x, y), plain reals or TaylorJets in t
        threshold (float, optional): relative degeneracy threshold.
            Defaults to conf.metric_threshold.

    Raises:
        DegenerateMetric: when |G| is below threshold * (scale of g)^2
        DomainError: from the component expressions

    Returns:
        SpatialEval
    """
    threshold = conf.metric_threshold if threshold is None else threshold
    x, y = point
    bindings = {'x': SpatialJet.coordinate(x, 0), 'y': SpatialJet.coordinate(y, 1)}
    b11, b12, b22 = [_lift(evaluate(ast, bindings, spec.params))
                     for ast in (spec.g11, spec.g12, spec.g22)]

    comps = {(0, 0): b11, (0, 1): b12, (1, 0): b12, (1, 1): b22}
    g = np.empty((2, 2), dtype=object)
    dg = np.empty((2, 2, 2), dtype=object)
    ddg = np.empty((2, 2, 2, 2), dtype=object)
    for (i, j), b in comps.items():
        g[i, j] = b.value
        for k in range(2):
            dg[k, i, j] = b.partial(k)
            for l in range(2):
                ddg[k, l, i, j] = b.second_partial(k, l)

    G = _add(_mul(g[0, 0], g[1, 1]), _mul(-1.0, _mul(g[0, 1], g[0, 1])))
    scale = max(abs(value_of(g[i, j])) for i, j in comps)
    G0 = value_of(G)
    if scale == 0 or abs(G0) < threshold * scale ** 2:
        raise DegenerateMetric(f"metric degenerates at {_describe(point)}: G = {G0}")
    omega = 1 if G0 > 0 else -1
    sqrt_abs_G = _abs_sqrt(G, threshold=0.0)
    return SpatialEval(point, g, dg, ddg, G, sqrt_abs_G, omega, (b11, b12, b22))


def _describe(point):
    return '(' + ', '.join(f"{value_of(p):.6g}" for p in point) + ')'


def metric_scale(se):
    return max(abs(value_of(se.g[i, j])) for i, j in product(range(2), repeat=2))


def metric_product(se, u, v):
    """g(u, v) for component pairs u, v"""
    return _total(_mul(se.g[i, j], _mul(u[i], v[j])) for i, j in product(range(2), repeat=2))


def volume_form(se, u, v):
    """
    Omega(u, v) = sqrt|G| (u^1 v^2 - u^2 v^1).

    Jet components give a jet of their own order, plain components a float.
    """
    cross = u[0] * v[1] - u[1] * v[0]
    if isinstance(cross, jets.TaylorJet):
        return jets.as_jet(se.sqrt_abs_G, cross.order) * cross
    return value_of(se.sqrt_abs_G) * cross


# Connection -----------------------------------------------------------------------
def _inverse(se):
    r = _reciprocal(se.G)
    g = se.g
    ginv = np.empty((2, 2), dtype=object)
    ginv[0, 0] = _mul(g[1, 1], r)
    ginv[1, 1] = _mul(g[0, 0], r)
    ginv[0, 1] = ginv[1, 0] = _mul(-1.0, _mul(g[0, 1], r))
    return ginv


def christoffel(se):
    """
    Levi-Civita symbols and their first spatial partials.

    Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), differentiated
    with the second metric partials for d_m Gamma^k_ij.

    Args:
        se (SpatialEval): nondegenerate metric data

    Returns:
        ChristoffelEval
    """
    dg, ddg = se.dg, se.ddg
    ginv = _inverse(se)
    first = np.empty((2, 2, 2), dtype=object)
    dfirst = np.empty((2, 2, 2, 2), dtype=object)
    for l, i, j in product(range(2), repeat=3):
        first[l, i, j] = _mul(0.5, _total((dg[i, j, l], dg[j, i, l], _mul(-1.0, dg[l, i, j]))))
        for m in range(2):
            dfirst[m, l, i, j] = _mul(0.5, _total((ddg[m, i, j, l], ddg[m, j, i, l],
                                                   _mul(-1.0, ddg[m, l, i, j]))))

    # d_m g^kl = -g^ka d_m g_ab g^bl
    dginv = np.empty((2, 2, 2), dtype=object)
    for m, k, l in product(range(2), repeat=3):
        dginv[m, k, l] = _mul(-1.0, _total(_mul(ginv[k, a], _mul(dg[m, a, b], ginv[b, l]))
                                           for a, b in product(range(2), repeat=2)))

    gamma = np.empty((2, 2, 2), dtype=object)
    dgamma = np.empty((2, 2, 2, 2), dtype=object)
    for k in range(2):
        for i, j in ((0, 0), (0, 1), (1, 1)):
            gamma[k, i, j] = gamma[k, j, i] = _total(_mul(ginv[k, l], first[l, i, j]) for l in range(2))
            for m in range(2):
                dgamma[m, k, i, j] = dgamma[m, k, j, i] = _total(
                    _add(_mul(dginv[m, k, l], first[l, i, j]), _mul(ginv[k, l], dfirst[m, l, i, j]))
                    for l in range(2))
    return ChristoffelEval(gamma, dgamma)


def _j_components(g11, g12, g22, sqrt_abs_G, omega):
    r = _reciprocal(sqrt_abs_G)
    J = np.empty((2, 2), dtype=object)
    J[0, 0] = _mul(omega, _mul(g12, r))
    J[1, 1] = _mul(-1.0, J[0, 0])
    J[1, 0] = _mul(-omega, _mul(g11, r))
    J[0, 1] = _mul(omega, _mul(g22, r))
    return J


def j_tensor(se):
    """
    The (1,1)-tensor J with g(X, JY) = Omega(X, Y).

    J^1_1 = -J^2_2 = omega g12 / sqrt|G|, J^2_1 = -omega g11 / sqrt|G|,
    J^1_2 = omega g22 / sqrt|G|.
    """
    g = se.g
    return JTensor(_j_components(g[0, 0], g[0, 1], g[1, 1], se.sqrt_abs_G, se.omega), se.omega)


def apply_j(J, v):
    return [_add(_mul(J.components[i, 0], v[0]), _mul(J.components[i, 1], v[1])) for i in range(2)]


def gauss_curvature(se, christoffels=None):
    """
    Scalar curvature (twice the Gauss curvature) at the point.

    Uses R^l_212 = d_1 Gamma^l_22 - d_2 Gamma^l_12
                   + Gamma^l_1m Gamma^m_22 - Gamma^l_2m Gamma^m_12
    and K = g_1l R^l_212 / G.
    """
    ch = christoffels or christoffel(se)
    gamma, dgamma = ch.gamma, ch.dgamma
    riemann = [
        _total([dgamma[0, l, 1, 1], _mul(-1.0, dgamma[1, l, 0, 1])]
               + [_mul(gamma[l, 0, m], gamma[m, 1, 1]) for m in range(2)]
               + [_mul(-1.0, _mul(gamma[l, 1, m], gamma[m, 0, 1])) for m in range(2)])
        for l in range(2)
    ]
    r1212 = _total(_mul(se.g[0, l], riemann[l]) for l in range(2))
    return 2.0 * _mul(r1212, _reciprocal(se.G))


def structure_check(spec, point, threshold=None):
    """
    Residuals of the structure identities at a real point.

    J^2 = -omega Id, Omega(X, JY) = -omega g(X, Y) on coordinate vectors,
    nabla J = 0, nabla Omega = 0 and metric compatibility of the connection.

    Args:
        spec (MetricSpec): metric
        point (tuple): (x, y) reals
        threshold (float, optional): metric degeneracy threshold

    Returns:
        StructureReport
    """
    se = metric_eval(spec, point, threshold)
    ch = christoffel(se)
    omega = se.omega
    gamma = ch.gamma

    b11, b12, b22 = se.bundle
    sb = _abs_sqrt(b11 * b22 - b12 * b12, threshold=0.0)
    Jb = _j_components(b11, b12, b22, sb, omega)
    J = np.vectorize(lambda b: value_of(b.value), otypes=[float])(Jb)
    dJ = np.array([[[value_of(Jb[i, j].partial(k)) for j in range(2)] for i in range(2)] for k in range(2)])
    g = np.array([[value_of(v) for v in row] for row in se.g])
    dg = np.vectorize(value_of, otypes=[float])(se.dg)
    G = np.vectorize(value_of, otypes=[float])(gamma)
    s = value_of(se.sqrt_abs_G)

    j_square = np.max(np.abs(J @ J + omega * np.eye(2)))

    # Omega(e_a, J e_b) = s (delta_a0 J^2_b - delta_a1 J^1_b)
    omega_j = max(abs(s * (J[1, b] if a == 0 else -J[0, b]) + omega * g[a, b])
                  for a, b in product(range(2), repeat=2))

    nabla_j = np.max(np.abs(dJ
                            + np.einsum('ikm,mj->kij', G, J)
                            - np.einsum('mkj,im->kij', G, J)))

    nabla_omega = max(abs(value_of(sb.partial(k)) - s * (G[0, k, 0] + G[1, k, 1])) for k in range(2))

    metric_compat = np.max(np.abs(dg
                                  - np.einsum('lki,lj->kij', G, g)
                                  - np.einsum('lkj,il->kij', G, g)))

    return StructureReport(
        x=float(point[0]), y=float(point[1]), omega=omega,
        scalar_curvature=value_of(gauss_curvature(se, ch)),
        j_square=float(j_square), omega_j=float(omega_j), nabla_j=float(nabla_j),
        nabla_omega=float(nabla_omega), metric_compat=float(metric_compat),
    )
