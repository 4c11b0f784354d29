"""
Curves t -> (x(t), y(t)) in the chart, evaluated as Taylor jets in t.

Every quantity here is either a jet in t (velocity, covariant acceleration,
speed, Omega(a', A)) or a pointwise vector (frames, the second covariant
derivative).
"""
import logging
from collections import namedtuple
from itertools import product

import numpy as np

import equiaffine.configs as conf
import equiaffine.jets as jets
from equiaffine.common import (DegenerateCurve, DomainError, ScenarioError, SingularCurve,
                               UnboundIdentifier, value_of)
from equiaffine.expr import CURVE_VARIABLES, compile_expression, evaluate, free_parameters
from equiaffine.manifold import christoffel, j_tensor, metric_eval, metric_scale, volume_form

logger = logging.getLogger(__name__)

SINGULAR = 'singular'
GEODESIC = 'geodesic'
NONDEGENERATE = 'nondegenerate'
INVALID = 'invalid'

CurveSpec = namedtuple('CurveSpec', ['x', 'y', 'domain', 'params', 'sources'])
CurveJets = namedtuple('CurveJets', ['t0', 'x', 'y', 'se', 'christoffels', 'order'])
Classification = namedtuple('Classification', ['kind', 'epsilon', 'orientation'])
FrameState = namedtuple('FrameState', ['T', 'N', 'e1', 'e2', 'epsilon', 'nu'])


def curve_spec(x, y, domain, params=None):
    """
    Compile a curve.

    Args:
        x, y (str): component expressions in t
        domain (tuple): open parameter interval (a, b), finite, a < b
        params (dict, optional): parameter values

    Returns:
        CurveSpec
    """
    params = dict(params or {})
    a, b = (float(v) for v in domain)
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise ScenarioError(f"curve domain must be a finite interval a < b, got ({a}, {b})")
    sources = (x, y)
    asts = [compile_expression(str(s), CURVE_VARIABLES) for s in sources]
    for ast in asts:
        for name in free_parameters(ast):
            if name not in params:
                raise UnboundIdentifier(name)
    return CurveSpec(asts[0], asts[1], (a, b), params, sources)


def position(curve, t):
    """Plain real point of the curve at t"""
    bindings = {'t': float(t)}
    return (float(evaluate(curve.x, bindings, curve.params)),
            float(evaluate(curve.y, bindings, curve.params)))


def curve_jets(curve, metric, t, order=None):
    """
    Seed the curve at t and pull the metric back along it.

    Args:
        curve (CurveSpec): curve
        metric (MetricSpec): metric
        t (float): parameter value inside the open domain
        order (int, optional): jet order. Defaults to conf.jet_order.

    Raises:
        DomainError: t outside the domain, or from the expressions
        DegenerateMetric: at a degenerate point of the metric

    Returns:
        CurveJets
    """
    order = conf.jet_order if order is None else order
    if order < 2:
        raise ValueError(f"curve jets need order >= 2, got {order}")
    a, b = curve.domain
    t = float(t)
    if not a < t < b:
        raise DomainError(f"t = {t} outside the curve domain ({a}, {b})")

    tj = jets.jet_variable(t, order)
    x, y = [jets.as_jet(evaluate(ast, {'t': tj}, curve.params), order) for ast in (curve.x, curve.y)]
    se = metric_eval(metric, (x, y))
    return CurveJets(t, x, y, se, christoffel(se), order)


# Jet helpers --------------------------------------------------------------------
def _at(scalar, order):
    return jets.as_jet(scalar, order)


def _g(cj, order):
    return [[_at(cj.se.g[i, j], order) for j in range(2)] for i in range(2)]


def _gamma(cj, order):
    gamma = cj.christoffels.gamma
    return {(k, i, j): _at(gamma[k, i, j], order) for k, i, j in product(range(2), repeat=3)}


def _values(array):
    return np.vectorize(value_of, otypes=[float])(array)


def velocity(cj):
    """alpha' as jets of order (order - 1)"""
    return [cj.x.derivative(), cj.y.derivative()]


def acceleration(cj):
    """alpha'' as jets of order (order - 2)"""
    return [cj.x.derivative().derivative(), cj.y.derivative().derivative()]


def product_jet(cj, u, v):
    """g(u, v) for jet vectors of a common order"""
    order = u[0].order
    g = _g(cj, order)
    return sum(g[i][j] * u[i] * v[j] for i, j in product(range(2), repeat=2))


def _covariant(cj, along, field, derivative):
    # (nabla_along field)^k = derivative^k + Gamma^k_ij along^i field^j, pointwise
    gamma = _values(cj.christoffels.gamma)
    return np.array([derivative[k] + sum(gamma[k, i, j] * along[i] * field[j]
                                         for i, j in product(range(2), repeat=2))
                     for k in range(2)])


def _jet_values(vector):
    return np.array([v.value for v in vector])


# Operations ---------------------------------------------------------------------
def speed_squared(cj):
    v = velocity(cj)
    return product_jet(cj, v, v)


def _check_singular(cj, threshold=None):
    threshold = conf.classify_threshold if threshold is None else threshold
    q = speed_squared(cj)
    v = _jet_values(velocity(cj))
    if abs(q.value) <= threshold * metric_scale(cj.se) * float(v @ v):
        raise SingularCurve(f"g(a', a') = {q.value} vanishes at t = {cj.t0}")
    return q


def speed(cj, threshold=None):
    """
    nu = |g(a', a')|^(1/2) as a jet of order (order - 1).

    Raises:
        SingularCurve: when the velocity is (numerically) null
    """
    q = _check_singular(cj, threshold)
    return q.abs_sqrt(threshold=0.0)


def cov_accel(cj):
    """
    A = nabla_{a'} a' as jets of order (order - 2).

    A^k = a''^k + Gamma^k_ij a'^i a'^j with the Christoffel symbols pulled back
    along the curve.
    """
    order = cj.order - 2
    v = [c.truncate(order) for c in velocity(cj)]
    acc = acceleration(cj)
    gamma = _gamma(cj, order)
    return [acc[k] + sum(gamma[k, i, j] * v[i] * v[j] for i, j in product(range(2), repeat=2))
            for k in range(2)]


def cov_accel2(cj):
    """B = nabla_{a'} nabla_{a'} a' at t0, as a real 2-vector"""
    if cj.order < 3:
        raise ValueError("the second covariant derivative needs jets of order >= 3")
    A = cov_accel(cj)
    dA = [c.coeffs[1] for c in A]
    return _covariant(cj, _jet_values(velocity(cj)), _jet_values(A), dA)


def accel_volume(cj):
    """F = Omega(a', nabla_{a'} a') as a jet of order (order - 2)"""
    order = cj.order - 2
    v = [c.truncate(order) for c in velocity(cj)]
    return volume_form(cj.se, v, cov_accel(cj))


def _gamma_max(cj):
    return float(np.max(np.abs(_values(cj.christoffels.gamma))))


def classify(cj, threshold=None):
    """
    Classify the curve at t0.

    Singular when g(a', a') vanishes relative to the metric scale and |a'|^2,
    geodesic when Omega(a', A) vanishes relative to
    sqrt|G| |a'| (|a''| + |a'|^2 max|Gamma|), nondegenerate otherwise.

    Args:
        cj (CurveJets): curve data at t0
        threshold (float, optional): defaults to conf.classify_threshold

    Returns:
        Classification: kind, epsilon = sign g(a', a') and orientation =
            sign Omega(a', A) (0 where undefined)
    """
    threshold = conf.classify_threshold if threshold is None else threshold
    try:
        q = _check_singular(cj, threshold)
    except SingularCurve:
        return Classification(SINGULAR, 0, 0)
    epsilon = 1 if q.value > 0 else -1

    v = _jet_values(velocity(cj))
    acc = _jet_values(acceleration(cj))
    F = accel_volume(cj).value
    speed_v = float(np.linalg.norm(v))
    scale = value_of(cj.se.sqrt_abs_G) * speed_v * (float(np.linalg.norm(acc)) + speed_v ** 2 * _gamma_max(cj))
    if abs(F) <= threshold * scale:
        return Classification(GEODESIC, epsilon, 0)
    return Classification(NONDEGENERATE, epsilon, 1 if F > 0 else -1)


def frenet_frame(cj, threshold=None):
    """
    Unit tangent T = a'/nu and normal N = -omega epsilon J T.

    Returns:
        tuple: T, N (real 2-vectors), epsilon, nu (jet)
    """
    nu = speed(cj, threshold)
    epsilon = 1 if speed_squared(cj).value > 0 else -1
    T = _jet_values(velocity(cj)) / nu.value
    J = _values(j_tensor(cj.se).components)
    N = -cj.se.omega * epsilon * (J @ T)
    return T, N, epsilon, nu


def _psi(cj):
    # the psi operation of the curvature module
    from equiaffine.curvature import psi
    return psi(cj)


def affine_frame_jets(cj, order=1):
    """
    e1 = psi a' and e2 = psi psi' a' + psi^2 A as jet vectors.

    Args:
        cj (CurveJets): nondegenerate curve data, jet order >= order + 3
        order (int): order of the returned jets

    Returns:
        tuple: e1, e2 (lists of two TaylorJets)
    """
    p = _psi(cj)
    dp = p.derivative()
    p, dp = p.truncate(order), dp.truncate(order)
    v = [c.truncate(order) for c in velocity(cj)]
    A = [c.truncate(order) for c in cov_accel(cj)]
    e1 = [p * c for c in v]
    e2 = [p * dp * v[k] + p * p * A[k] for k in range(2)]
    return e1, e2


def frames(cj, threshold=None):
    """
    Frenet and equi-affine frames at t0.

    Raises:
        SingularCurve: null velocity, no Frenet frame
        DegenerateCurve: geodesic point, no equi-affine frame

    Returns:
        FrameState
    """
    T, N, epsilon, nu = frenet_frame(cj, threshold)
    if classify(cj, threshold).kind == GEODESIC:
        raise DegenerateCurve(f"geodesic point at t = {cj.t0}, the equi-affine frame is undefined")
    e1, e2 = affine_frame_jets(cj, order=0)
    return FrameState(T, N, _jet_values(e1), _jet_values(e2), epsilon, nu)


def frenet_residual(cj, kappa_r=None, threshold=None):
    """
    max |nabla_T T - kappa_r N| at t0.

    T is carried as a jet along the curve, so nabla_T T = (dT/dt + Gamma a' T) / nu.

    Args:
        cj (CurveJets): non-singular curve data
        kappa_r (float, optional): Frenet curvature at t0. Defaults to
            Omega(a', A) / nu^3, or 0 at a geodesic point.
        threshold (float, optional): classification threshold
    """
    T, N, _, nu = frenet_frame(cj, threshold)
    if kappa_r is None:
        if classify(cj, threshold).kind == GEODESIC:
            kappa_r = 0.0
        else:
            kappa_r = accel_volume(cj).value / nu.value ** 3
    tangent = [jets.jet_div(c, nu, threshold=0.0) for c in velocity(cj)]
    dT = [c.coeffs[1] for c in tangent]
    along = _jet_values(velocity(cj))
    nabla_T_T = _covariant(cj, along, T, dT) / nu.value
    return float(np.max(np.abs(nabla_T_T - kappa_r * N)))


def affine_frenet_residual(cj, kappa_a):
    """
    max of |nabla_{a'} e1 - mu e2| and |nabla_{a'} e2 + mu kappa_a e1| at t0.
    """
    e1, e2 = affine_frame_jets(cj, order=1)
    along = _jet_values(velocity(cj))
    e1v, e2v = _jet_values(e1), _jet_values(e2)
    mu = 1.0 / _psi(cj).value
    de1 = _covariant(cj, along, e1v, [c.coeffs[1] for c in e1])
    de2 = _covariant(cj, along, e2v, [c.coeffs[1] for c in e2])
    return float(max(np.max(np.abs(de1 - mu * e2v)),
                     np.max(np.abs(de2 + mu * kappa_a * e1v))))
