"""
Frenet and equi-affine curvatures of a curve and the relation between them.

Conventions:
    F     = Omega(a', nabla_{a'} a')
    mu    = F^(1/3)      (signed real cube root), the equi-affine arclength rate
    psi   = 1 / mu
    nu    = |g(a', a')|^(1/2)
    kappa_r = F / nu^3

All fractional powers of F and kappa_r go through the signed cube root and
integer powers of it, so both are allowed to be negative.
"""
import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import integrate

import equiaffine.configs as conf
import equiaffine.jets as jets
from equiaffine.common import (ConsistencyError, DegenerateCurve, DegenerateJet, DegenerateMetric,
                               DivisionByNearZero, DomainError, GeodesicRelationUndefined,
                               QuadratureFailure, ScenarioError, SingularCurve, value_of)
from equiaffine.curve import (GEODESIC, INVALID, NONDEGENERATE, SINGULAR, accel_volume,
                              affine_frame_jets, affine_frenet_residual, classify, cov_accel,
                              cov_accel2, curve_jets, frenet_residual, speed, velocity)
from equiaffine.manifold import volume_form

logger = logging.getLogger(__name__)

CurvatureSample = namedtuple('CurvatureSample', [
    't', 'point', 'nu', 'nu_prime',
    'kappa_r', 'kappa_r_prime', 'kappa_r_double_prime',
    'psi', 'psi_prime', 'psi_double_prime', 'mu',
    'kappa_a_intrinsic', 'kappa_a_relation', 'relation_residual',
    'kappa_a_explicit', 'kappa_a_frame', 'formula_residual', 'identity_residual',
    'ode_residual', 'ode_residual_norm', 'frenet_residual', 'affine_frenet_residual',
    'classification', 'epsilon', 'orientation', 'omega', 'condition',
])

ProofIdentities = namedtuple('ProofIdentities', [
    'volume_speed', 'psi_speed', 'accel_pair', 'psi_square', 'psi_cubed_volume', 'psi_jerk',
])

EVAL_COLUMNS = [
    't', 'x', 'y', 'nu', 'kappa_r', 'kappa_r_prime', 'kappa_r_double_prime',
    'kappa_a_intrinsic', 'kappa_a_relation', 'relation_residual',
    'ode_residual_norm', 'frenet_residual', 'classification',
]

# Failures that turn a grid sample into an 'invalid' row instead of aborting the run
SAMPLE_ERRORS = (DomainError, DegenerateMetric, DegenerateJet, DivisionByNearZero)


def _require_nondegenerate(cj, threshold=None):
    kind = classify(cj, threshold).kind
    if kind == SINGULAR:
        raise SingularCurve(f"null velocity at t = {cj.t0}")
    if kind == GEODESIC:
        raise DegenerateCurve(f"Omega(a', A) vanishes at t = {cj.t0}")


def psi(cj, threshold=None):
    """
    psi = F^(-1/3) as a jet of order (order - 2).

    Raises:
        DegenerateCurve: at a geodesic point, where F vanishes
    """
    _require_nondegenerate(cj, threshold)
    return accel_volume(cj).cbrt(threshold=0.0).reciprocal(threshold=0.0)


def mu(cj, threshold=None):
    """mu = sigma' = F^(1/3), the reciprocal of psi"""
    _require_nondegenerate(cj, threshold)
    return accel_volume(cj).cbrt(threshold=0.0)


def kappa_r(cj, threshold=None):
    """
    Frenet curvature F / nu^3 as a jet of order (order - 2).

    Zero at geodesic points.

    Raises:
        SingularCurve: null velocity
    """
    nu = speed(cj, threshold).truncate(cj.order - 2)
    if classify(cj, threshold).kind == GEODESIC:
        return jets.jet_constant(0.0, cj.order - 2)
    return jets.jet_div(accel_volume(cj), jets.integer_power(nu, 3), threshold=0.0)


def _pair(cj):
    A = np.array([c.value for c in cov_accel(cj)])
    B = cov_accel2(cj)
    v = np.array([c.value for c in velocity(cj)])
    return v, A, B


def kappa_a_intrinsic(cj, threshold=None):
    """
    Equi-affine curvature -1/2 (psi^2)'' + psi^5 Omega(A, B).

    Args:
        cj (CurveJets): nondegenerate curve data, jet order >= 4
        threshold (float, optional): classification threshold

    Returns:
        float
    """
    p = psi(cj, threshold)
    _, A, B = _pair(cj)
    return -0.5 * (p * p).coeffs[2] + jets.integer_power(p.value, 5) * volume_form(cj.se, A, B)


def kappa_a_explicit(cj, threshold=None):
    """
    The unsimplified intrinsic formula

        (2 psi^3 psi'^2 - psi^4 psi'') Omega(a', A) + psi^4 psi' Omega(a', B)
        + psi^5 Omega(A, B)
    """
    p = psi(cj, threshold)
    p0, p1, p2 = p.coeffs[:3]
    v, A, B = _pair(cj)
    return ((2 * p0 ** 3 * p1 ** 2 - p0 ** 4 * p2) * volume_form(cj.se, v, A)
            + p0 ** 4 * p1 * volume_form(cj.se, v, B)
            + p0 ** 5 * volume_form(cj.se, A, B))


def kappa_a_from_frame(cj, threshold=None):
    """kappa_a = psi Omega(e2, nabla_{a'} e2)"""
    p = psi(cj, threshold)
    _, e2 = affine_frame_jets(cj, order=1)
    v = np.array([c.value for c in velocity(cj)])
    e2v = np.array([c.value for c in e2])
    gamma = np.vectorize(value_of, otypes=[float])(cj.christoffels.gamma)
    de2 = np.array([c.coeffs[1] for c in e2]) + np.einsum('kij,i,j->k', gamma, v, e2v)
    return p.value * volume_form(cj.se, e2v, de2)


def _relation_root(k0, threshold):
    threshold = conf.relation_threshold if threshold is None else threshold
    if abs(k0) < threshold:
        raise GeodesicRelationUndefined(f"|kappa_r| = {abs(k0)} below {threshold}")
    return float(np.cbrt(k0))


def kappa_a_via_relation(kr, nu, omega, threshold=None):
    """
    Equi-affine curvature from the Frenet curvature and the speed,

        (3 nu^-2 k k'' - 5 nu^-2 k'^2 - 3 nu^-3 nu' k k' + 9 omega k^4) / (9 k^(8/3))

    with k^(8/3) = cbrt(k)^8.

    Args:
        kr (TaylorJet): kappa_r, order >= 2
        nu (TaylorJet): speed, order >= 1
        omega (int): metric signature sign
        threshold (float, optional): |kappa_r| floor, defaults to
            conf.relation_threshold

    Raises:
        GeodesicRelationUndefined: when |kappa_r| is below the floor

    Returns:
        float
    """
    k0, k1, k2 = kr.coeffs[:3]
    n0, n1 = nu.coeffs[:2]
    r = _relation_root(k0, threshold)
    numerator = (3 * k0 * k2 / n0 ** 2 - 5 * k1 ** 2 / n0 ** 2
                 - 3 * n1 * k0 * k1 / n0 ** 3 + 9 * omega * k0 ** 4)
    return numerator / (9 * jets.integer_power(r, 8))


def kappa_a_arclength(kr, omega, threshold=None, tolerance=1e-10):
    """
    The relation for an arclength parametrised curve, in both forms

        (3 k k'' - 5 k'^2 + 9 omega k^4) / (9 k^(8/3))
        -1/2 (k^(-2/3))'' + omega k^(4/3)

    Raises:
        GeodesicRelationUndefined: for |kappa_r| below the floor
        ConsistencyError: when the two forms disagree beyond tolerance

    Returns:
        float: the first form
    """
    k0, k1, k2 = kr.coeffs[:3]
    r = _relation_root(k0, threshold)
    first = (3 * k0 * k2 - 5 * k1 ** 2 + 9 * omega * k0 ** 4) / (9 * jets.integer_power(r, 8))

    root = kr.truncate(2).cbrt(threshold=0.0)
    second = -0.5 * (root * root).reciprocal(threshold=0.0).coeffs[2] + omega * jets.integer_power(r, 4)
    if abs(first - second) > tolerance * max(1.0, abs(first)):
        raise ConsistencyError(f"arclength relation forms disagree: {first} != {second}")
    return first


def _ode_terms(cj, kappa_a, threshold=None):
    p = psi(cj, threshold)
    p0, p1, p2 = p.coeffs[:3]
    v, A, B = _pair(cj)
    return p0 ** 2 * B, 3 * p0 * p1 * A, (p1 ** 2 + p0 * p2 + kappa_a) * v


def ode_residual(cj, kappa_a, threshold=None):
    """
    psi^2 B + 3 psi psi' A + (psi'^2 + psi psi'' + kappa_a) a', zero for the
    correct kappa_a.
    """
    return sum(_ode_terms(cj, kappa_a, threshold))


def ode_residual_norm(cj, kappa_a, threshold=None):
    """Max-abs ode residual relative to max(1, largest term)"""
    terms = _ode_terms(cj, kappa_a, threshold)
    scale = max(1.0, *(float(np.max(np.abs(term))) for term in terms))
    return float(np.max(np.abs(sum(terms)))) / scale


def proof_identities(cj, threshold=None):
    """
    Relative residuals of the identities linking the Frenet and equi-affine
    descriptions of the curve at t0.

    Returns:
        ProofIdentities
    """
    omega = cj.se.omega
    nu = speed(cj, threshold).truncate(cj.order - 2)
    kr = kappa_r(cj, threshold)
    p = psi(cj, threshold)
    F = accel_volume(cj)
    v, A, B = _pair(cj)
    n0, n1, n2 = nu.coeffs[:3]
    k0, k1 = kr.coeffs[:2]

    def rel(lhs, rhs):
        return abs(lhs - rhs) / max(1.0, abs(lhs))

    # psi = nu^-1 kappa_r^-1/3 as jets
    psi_from_frenet = (nu * kr.cbrt(threshold=0.0)).reciprocal(threshold=0.0)
    accel_pair = (3 * n0 * n1 ** 2 - n0 ** 2 * n2) * k0 + n0 ** 2 * n1 * k1 + omega * n0 ** 5 * k0 ** 3
    return ProofIdentities(
        volume_speed=rel(F.value, n0 ** 3 * k0),
        psi_speed=rel(p.value, psi_from_frenet.value),
        accel_pair=rel(volume_form(cj.se, A, B), accel_pair),
        psi_square=rel((p * p).coeffs[2], (psi_from_frenet * psi_from_frenet).coeffs[2]),
        psi_cubed_volume=rel(jets.integer_power(p.value, 3) * F.value, 1.0),
        psi_jerk=rel(jets.integer_power(p.value, 4) * volume_form(cj.se, v, B), -3 * p.coeffs[1]),
    )


# Arclength ----------------------------------------------------------------------
def _integrate(fn, a, b, tol):
    result = integrate.quad(fn, a, b, epsabs=tol, epsrel=tol, limit=conf.quad_limit, full_output=1)
    if len(result) > 3:
        raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {result[3]}")
    return result[0], result[1]


def reparametrize(curve, metric, t0, grid, tol=None, threads=None, threshold=None):
    """
    Metric arclength s(t) = int_t0^t nu and equi-affine arclength
    sigma(t) = int_t0^t F^(1/3) over a grid.

    Args:
        curve (CurveSpec): curve
        metric (MetricSpec): metric
        t0 (float): origin of both parameters
        grid (iterable): parameter values inside the domain
        tol (float, optional): absolute and relative quadrature tolerance.
            Defaults to conf.quad_tol.
        threads (int, optional): joblib threads over grid intervals
        threshold (float, optional): classification threshold

    Raises:
        QuadratureFailure: when an interval misses the tolerance
        SingularCurve, DegenerateCurve: from the integrands

    Returns:
        pandas.DataFrame: columns t, s, sigma, s_error, sigma_error
    """
    tol = conf.quad_tol if tol is None else tol
    threads = conf.threads if threads is None else threads
    grid = [float(t) for t in grid]
    if not grid:
        raise ScenarioError("empty grid")
    knots = sorted(set(grid) | {float(t0)})

    def nu_at(u):
        return speed(curve_jets(curve, metric, u, order=2), threshold).value

    def mu_at(u):
        cj = curve_jets(curve, metric, u, order=2)
        _require_nondegenerate(cj, threshold)
        return float(np.cbrt(accel_volume(cj).value))

    def interval(a, b):
        return _integrate(nu_at, a, b, tol), _integrate(mu_at, a, b, tol)

    pieces = Parallel(n_jobs=threads, prefer="threads")(
        delayed(interval)(a, b) for a, b in zip(knots[:-1], knots[1:]))

    s = np.concatenate([[0.0], np.cumsum([p[0][0] for p in pieces])])
    sigma = np.concatenate([[0.0], np.cumsum([p[1][0] for p in pieces])])
    s_err = np.concatenate([[0.0], np.cumsum([p[0][1] for p in pieces])])
    sigma_err = np.concatenate([[0.0], np.cumsum([p[1][1] for p in pieces])])
    origin = knots.index(float(t0))
    s, sigma = s - s[origin], sigma - sigma[origin]
    s_err, sigma_err = np.abs(s_err - s_err[origin]), np.abs(sigma_err - sigma_err[origin])

    if np.any(np.diff(s) <= 0):
        logger.warning("metric arclength is not strictly increasing on the grid")
    dsigma = np.diff(sigma)
    if not (np.all(dsigma > 0) or np.all(dsigma < 0)):
        logger.warning("equi-affine arclength is not strictly monotone on the grid")

    table = pd.DataFrame({'t': knots, 's': s, 'sigma': sigma, 's_error': s_err, 'sigma_error': sigma_err})
    return table.set_index('t').loc[grid].reset_index()


# Grid sampling --------------------------------------------------------------------
def _empty_sample(t, point, classification, **fields):
    sample = dict.fromkeys(CurvatureSample._fields, np.nan)
    sample.update(t=t, point=point, classification=classification,
                  ode_residual=np.full(2, np.nan), epsilon=0, orientation=0, omega=0)
    sample.update(fields)
    return CurvatureSample(**sample)


def _formula_residual(cj, intrinsic, threshold):
    scale = max(1.0, abs(intrinsic))
    explicit = kappa_a_explicit(cj, threshold)
    frame = kappa_a_from_frame(cj, threshold)
    return explicit, frame, max(abs(explicit - intrinsic), abs(frame - intrinsic)) / scale


def _sample(cj, threshold, relation_threshold, flip_omega):
    t = cj.t0
    point = (cj.x.value, cj.y.value)
    omega = cj.se.omega
    c = classify(cj, threshold)
    if c.kind == SINGULAR:
        logger.info(f"t = {t}: singular sample")
        return _empty_sample(t, point, SINGULAR, omega=omega)

    nu = speed(cj, threshold)
    kr = kappa_r(cj, threshold)
    fields = dict(
        nu=nu.value, nu_prime=nu.coeffs[1],
        kappa_r=kr.value, kappa_r_prime=kr.coeffs[1], kappa_r_double_prime=kr.coeffs[2],
        frenet_residual=frenet_residual(cj, kr.value, threshold),
        epsilon=c.epsilon, orientation=c.orientation, omega=omega,
    )
    if c.kind == GEODESIC:
        logger.info(f"t = {t}: geodesic sample, kappa_a undefined")
        return _empty_sample(t, point, GEODESIC, **fields)

    p = psi(cj, threshold)
    intrinsic = kappa_a_intrinsic(cj, threshold)
    try:
        relation = kappa_a_via_relation(kr, nu, -omega if flip_omega else omega, relation_threshold)
    except GeodesicRelationUndefined as err:
        logger.info(f"t = {t}: {err}")
        relation = np.nan
    explicit, frame, formula = _formula_residual(cj, intrinsic, threshold)
    fields.update(
        psi=p.value, psi_prime=p.coeffs[1], psi_double_prime=p.coeffs[2], mu=1.0 / p.value,
        kappa_a_intrinsic=intrinsic, kappa_a_relation=relation,
        relation_residual=abs(intrinsic - relation),
        kappa_a_explicit=explicit, kappa_a_frame=frame, formula_residual=formula,
        identity_residual=max(proof_identities(cj, threshold)),
        ode_residual=ode_residual(cj, intrinsic, threshold),
        ode_residual_norm=ode_residual_norm(cj, intrinsic, threshold),
        affine_frenet_residual=affine_frenet_residual(cj, intrinsic),
        condition=abs(nu.value ** 3 / accel_volume(cj).value),
    )
    return _empty_sample(t, point, NONDEGENERATE, **fields)


def sample_point(curve, metric, t, order=None, threshold=None, relation_threshold=None, flip_omega=False):
    """
    Every curvature quantity at one parameter value.

    Degenerate points come back flagged through ``classification`` instead of
    raising: 'singular' (null velocity), 'geodesic' (kappa_a undefined) or
    'invalid' (outside the domain of the expressions or the metric, or a
    division that breaks down at the point).

    Besides the two routes to kappa_a compared by ``relation_residual``, the
    sample carries the unsimplified formula and the frame formula
    (``formula_residual`` is their worst relative deviation from the intrinsic
    value) and the worst of the proof identities (``identity_residual``).

    Args:
        curve (CurveSpec): curve
        metric (MetricSpec): metric
        t (float): parameter value
        order (int, optional): jet order, at least 4. Defaults to conf.jet_order.
        threshold (float, optional): classification threshold
        relation_threshold (float, optional): |kappa_r| floor of the relation
        flip_omega (bool): evaluate the relation with -omega (debugging aid)

    Returns:
        CurvatureSample
    """
    order = conf.jet_order if order is None else order
    t = float(t)
    point = (np.nan, np.nan)
    try:
        cj = curve_jets(curve, metric, t, order)
        point = (cj.x.value, cj.y.value)
        return _sample(cj, threshold, relation_threshold, flip_omega)
    except SAMPLE_ERRORS as err:
        logger.info(f"t = {t}: invalid sample ({err})")
        return _empty_sample(t, point, INVALID)


def sample_curve(curve, metric, grid, order=None, threads=None, threshold=None,
                 relation_threshold=None, flip_omega=False):
    """
    Sample every curvature quantity over a parameter grid.

    Args:
        curve (CurveSpec): curve
        metric (MetricSpec): metric
        grid (iterable): parameter values inside the curve domain
        order (int, optional): jet order, at least 4. Defaults to conf.jet_order.
        threads (int, optional): joblib threads. Defaults to conf.threads.
        threshold (float, optional): classification threshold
        relation_threshold (float, optional): |kappa_r| floor of the relation
        flip_omega (bool): evaluate the relation with -omega

    Raises:
        ScenarioError: empty grid, a grid point outside the domain or a jet
            order below 4

    Returns:
        list: CurvatureSample per grid point, in grid order
    """
    order = conf.jet_order if order is None else order
    threads = conf.threads if threads is None else threads
    grid = [float(t) for t in grid]
    if not grid:
        raise ScenarioError("empty grid")
    if order < 4:
        raise ScenarioError(f"curvature sampling needs jet order >= 4, got {order}")
    a, b = curve.domain
    outside = [t for t in grid if not a < t < b]
    if outside:
        raise ScenarioError(f"grid points outside the domain ({a}, {b}): {outside[:3]}")

    samples = Parallel(n_jobs=threads, prefer="threads")(
        delayed(sample_point)(curve, metric, t, order, threshold, relation_threshold, flip_omega)
        for t in grid)

    flagged = sum(s.classification != NONDEGENERATE for s in samples)
    if flagged:
        logger.warning(f"{flagged} of {len(samples)} samples are not nondegenerate")
    return samples


def samples_frame(samples, columns=None):
    """
    Tabulate samples.

    Args:
        samples (list): CurvatureSample
        columns (list, optional): output columns. Defaults to EVAL_COLUMNS,
            pass CurvatureSample-style names (plus 'x' and 'y') for more.

    Returns:
        pandas.DataFrame
    """
    columns = columns or EVAL_COLUMNS
    rows = []
    for s in samples:
        row = s._asdict()
        row['x'], row['y'] = s.point
        row['ode_residual_1'], row['ode_residual_2'] = s.ode_residual
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)
