"""
Finite-difference cross-checks of the jet engine.

The oracle works on plain reals only: it evaluates the expressions at real
points and differentiates numerically (central differences refined by one
Richardson step), then rebuilds the Levi-Civita symbols and the curve
quantities with numpy. Nothing here goes through jets or spatial bundles.
"""
import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import equiaffine.configs as conf
from equiaffine.common import DegenerateMetric, EquiaffineError
from equiaffine.curvature import kappa_r, psi
from equiaffine.curve import (NONDEGENERATE, classify, cov_accel, cov_accel2, curve_jets,
                              position, speed)
from equiaffine.expr import evaluate
from equiaffine.manifold import ChristoffelEval

logger = logging.getLogger(__name__)

PointState = namedtuple('PointState', ['t', 'point', 'velocity', 'acceleration', 'g', 'gamma',
                                       'A', 'nu', 'F', 'kappa_r'])
OracleSummary = namedtuple('OracleSummary', ['rows', 'flagged', 'max_rel_error'])

REPORT_COLUMNS = ['t', 'quantity', 'jet', 'fd', 'abs_error', 'rel_error', 'step', 'flagged', 'condition']


def _central(f, t, h, order):
    if order == 1:
        return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2 * h)
    return (np.asarray(f(t + h)) - 2 * np.asarray(f(t)) + np.asarray(f(t - h))) / h ** 2


def fd_scalar_derivatives(f, t, order=1, h=None):
    """
    First or second derivative by central differences with one Richardson
    step (h and h/2).

    Args:
        f (callable): real (or numpy vector) valued function of one real
        t (float): evaluation point
        order (int): 1 or 2
        h (float, optional): step. Defaults to conf.fd_step (order 1) or
            conf.fd_step2 (order 2) times max(1, |t|).

    Returns:
        float or numpy.ndarray
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if h is None:
        h = (conf.fd_step if order == 1 else conf.fd_step2) * max(1.0, abs(t))
    if h <= 0:
        raise ValueError("step must be positive")
    coarse = _central(f, t, h, order)
    fine = _central(f, t, h / 2, order)
    estimate = (4 * fine - coarse) / 3
    return float(estimate) if np.ndim(estimate) == 0 else estimate


def _metric_matrix(metric, x, y):
    bindings = {'x': float(x), 'y': float(y)}
    g11, g12, g22 = (float(evaluate(ast, bindings, metric.params))
                     for ast in (metric.g11, metric.g12, metric.g22))
    return np.array([[g11, g12], [g12, g22]])


def fd_metric_partials(metric, point, h=None, second=True):
    """
    g, d_k g_ij and d_k d_l g_ij at a real point by central differences.

    Args:
        metric (MetricSpec): metric
        point (tuple): real (x, y)
        h (float, optional): step for both orders, defaults scale with the point
        second (bool): also estimate the second partials

    Returns:
        tuple: g (2, 2), dg (2, 2, 2), ddg (2, 2, 2, 2) or None
    """
    x, y = (float(p) for p in point)
    h1 = conf.fd_step * max(1.0, abs(x), abs(y)) if h is None else h
    h2 = conf.fd_step2 * max(1.0, abs(x), abs(y)) if h is None else h

    def along(k):
        if k == 0:
            return lambda s: _metric_matrix(metric, x + s, y)
        return lambda s: _metric_matrix(metric, x, y + s)

    g = _metric_matrix(metric, x, y)
    dg = np.array([fd_scalar_derivatives(along(k), 0.0, 1, h1) for k in range(2)])
    if not second:
        return g, dg, None
    ddg = np.empty((2, 2, 2, 2))
    for k in range(2):
        ddg[k, k] = fd_scalar_derivatives(along(k), 0.0, 2, h2)
    # mixed partial as the x-derivative of the y-derivative
    ddg[0, 1] = ddg[1, 0] = fd_scalar_derivatives(
        lambda s: fd_scalar_derivatives(lambda r: _metric_matrix(metric, x + s, y + r), 0.0, 1, h2),
        0.0, 1, h2)
    return g, dg, ddg


def _levi_civita(g, dg, ddg=None):
    det = np.linalg.det(g)
    if abs(det) < conf.metric_threshold * np.max(np.abs(g)) ** 2:
        raise DegenerateMetric(f"metric degenerates: G = {det}")
    ginv = np.linalg.inv(g)
    first = 0.5 * (np.einsum('ijl->lij', dg) + np.einsum('jil->lij', dg) - dg)
    gamma = np.einsum('kl,lij->kij', ginv, first)
    if ddg is None:
        return gamma, None
    dfirst = 0.5 * (np.einsum('mijl->mlij', ddg) + np.einsum('mjil->mlij', ddg) - ddg)
    dginv = -np.einsum('ka,mab,bl->mkl', ginv, dg, ginv)
    dgamma = np.einsum('mkl,lij->mkij', dginv, first) + np.einsum('kl,mlij->mkij', ginv, dfirst)
    return gamma, dgamma


def fd_christoffel(metric, point, h=None):
    """
    Levi-Civita symbols and their partials from finite-difference metric partials.

    Args:
        metric (MetricSpec): metric
        point (tuple): real (x, y)
        h (float, optional): step, defaults scale with the point

    Raises:
        DegenerateMetric

    Returns:
        ChristoffelEval: gamma[k, i, j] and dgamma[l, k, i, j] as float arrays
    """
    g, dg, ddg = fd_metric_partials(metric, point, h)
    return ChristoffelEval(*_levi_civita(g, dg, ddg))


def point_state(curve, metric, t):
    """Velocity, covariant acceleration, speed, F and kappa_r at t, all by finite differences"""
    t = float(t)
    point = np.array(position(curve, t))
    v = fd_scalar_derivatives(lambda u: np.array(position(curve, u)), t, 1)
    acc = fd_scalar_derivatives(lambda u: np.array(position(curve, u)), t, 2)
    g, dg, _ = fd_metric_partials(metric, point, second=False)
    gamma, _ = _levi_civita(g, dg)
    A = acc + np.einsum('kij,i,j->k', gamma, v, v)
    nu = np.sqrt(abs(v @ g @ v))
    F = np.sqrt(abs(np.linalg.det(g))) * (v[0] * A[1] - v[1] * A[0])
    return PointState(t, point, v, acc, g, gamma, A, nu, F, F / nu ** 3)


def _rows_at(curve, metric, t, order, threshold):
    try:
        cj = curve_jets(curve, metric, t, order)
        c = classify(cj, threshold)
        nu = speed(cj, threshold)
        kr = kappa_r(cj, threshold)
        A = [a.value for a in cov_accel(cj)]
        B = cov_accel2(cj)
    except EquiaffineError as err:
        logger.warning(f"t = {t}: no jet values ({err})")
        return [dict(t=t, quantity=q, jet=np.nan, fd=np.nan, step=np.nan, flagged=True,
                     condition=np.inf) for q in ('nu_prime', 'kappa_r_prime', 'kappa_r_double_prime')]

    h1, h2 = conf.fd_outer_step, conf.fd_outer_step2
    state = point_state(curve, metric, t)
    condition = abs(nu.value ** 3 / state.F) if state.F else np.inf

    def A_of(u):
        return point_state(curve, metric, u).A

    dA = fd_scalar_derivatives(A_of, t, 1, h1)
    fd_B = dA + np.einsum('kij,i,j->k', state.gamma, state.velocity, state.A)

    checks = [
        ('nu_prime', nu.coeffs[1], fd_scalar_derivatives(lambda u: point_state(curve, metric, u).nu, t, 1, h1), h1),
        ('A1', A[0], state.A[0], conf.fd_step2),
        ('A2', A[1], state.A[1], conf.fd_step2),
        ('B1', B[0], fd_B[0], h1),
        ('B2', B[1], fd_B[1], h1),
    ]
    if c.kind == NONDEGENERATE:
        p = psi(cj, threshold)

        def kappa_of(u):
            return point_state(curve, metric, u).kappa_r

        def psi_square_of(u):
            return np.cbrt(point_state(curve, metric, u).F) ** -2

        checks += [
            ('kappa_r_prime', kr.coeffs[1], fd_scalar_derivatives(kappa_of, t, 1, h1), h1),
            ('kappa_r_double_prime', kr.coeffs[2], fd_scalar_derivatives(kappa_of, t, 2, h2), h2),
            ('psi_square_double_prime', (p * p).coeffs[2], fd_scalar_derivatives(psi_square_of, t, 2, h2), h2),
        ]

    return [dict(t=t, quantity=name, jet=float(jet), fd=float(fd), step=step, condition=condition)
            for name, jet, fd, step in checks]


def cross_validate(curve, metric, grid, order=None, tol=None, threads=None, threshold=None):
    """
    Compare jet derivatives against finite differences over a grid.

    Covers nu', A, B at every sample and kappa_r', kappa_r'', (psi^2)'' at
    nondegenerate samples. Samples the jet engine cannot evaluate appear as
    flagged rows with no values.

    Args:
        curve (CurveSpec): curve
        metric (MetricSpec): metric
        grid (iterable): parameter values
        order (int, optional): jet order
        tol (float, optional): flagging threshold on the relative error.
            Defaults to conf.tol_oracle.
        threads (int, optional): joblib threads
        threshold (float, optional): classification threshold

    Returns:
        pandas.DataFrame: columns t, quantity, jet, fd, abs_error, rel_error,
            step, flagged, condition
    """
    tol = conf.tol_oracle if tol is None else tol
    threads = conf.threads if threads is None else threads
    order = conf.jet_order if order is None else order

    def rows_or_flags(t):
        try:
            return _rows_at(curve, metric, t, order, threshold)
        except EquiaffineError as err:
            logger.warning(f"t = {t}: finite differences failed ({err})")
            return [dict(t=t, quantity='fd', jet=np.nan, fd=np.nan, step=np.nan, flagged=True,
                         condition=np.inf)]

    chunks = Parallel(n_jobs=threads, prefer="threads")(delayed(rows_or_flags)(float(t)) for t in grid)
    report = pd.DataFrame([row for chunk in chunks for row in chunk])
    if report.empty:
        return pd.DataFrame(columns=REPORT_COLUMNS)

    report['abs_error'] = (report['jet'] - report['fd']).abs()
    report['rel_error'] = report['abs_error'] / np.maximum(1.0, report['jet'].abs())
    flagged = report['rel_error'] > tol
    if 'flagged' in report:
        flagged = flagged | report['flagged'].fillna(False).astype(bool)
    report['flagged'] = flagged
    report = report[REPORT_COLUMNS]

    n = int(report['flagged'].sum())
    if n:
        logger.warning(f"oracle flagged {n} of {len(report)} comparisons")
    return report


def summarize(report):
    """Row count, flagged count and worst relative error of an oracle report"""
    worst = float(report['rel_error'].max()) if len(report) and report['rel_error'].notna().any() else 0.0
    return OracleSummary(len(report), int(report['flagged'].sum()), worst)
