import numpy as np
import pytest
from numpy.testing import assert_allclose

import equiaffine.configs as conf
from equiaffine.common import DegenerateMetric, UnboundIdentifier, value_of
from equiaffine.expr import METRIC_VARIABLES, compile_expression, evaluate
from equiaffine.jets import TaylorJet, jet_variable
from equiaffine.manifold import (SpatialJet, apply_j, christoffel, gauss_curvature, j_tensor,
                                 metric_eval, metric_product, metric_spec, structure_check,
                                 volume_form)


def _real(array):
    return np.vectorize(value_of, otypes=[float])(array)


def test_spatial_jet_partials():
    bindings = {'x': SpatialJet.coordinate(2.0, 0), 'y': SpatialJet.coordinate(3.0, 1)}
    b = evaluate(compile_expression("x^2*y", METRIC_VARIABLES), bindings)
    assert b.value == 12.0
    assert (b.partial(0), b.partial(1)) == (12.0, 4.0)
    assert b.second_partial(0, 0) == 6.0
    assert b.second_partial(0, 1) == b.second_partial(1, 0) == 4.0
    assert b.second_partial(1, 1) == 0.0


def test_spatial_jet_primitives():
    x = SpatialJet.coordinate(0.5, 0)
    for name, f, df, ddf in [
        ('exp', np.exp, np.exp, np.exp),
        ('sin', np.sin, np.cos, lambda v: -np.sin(v)),
        ('log', np.log, lambda v: 1 / v, lambda v: -1 / v ** 2),
        ('sqrt', np.sqrt, lambda v: 0.5 / np.sqrt(v), lambda v: -0.25 * v ** -1.5),
        ('cbrt', np.cbrt, lambda v: v ** (-2 / 3) / 3, lambda v: -2 / 9 * v ** (-5 / 3)),
        ('tanh', np.tanh, lambda v: 1 - np.tanh(v) ** 2,
         lambda v: -2 * np.tanh(v) * (1 - np.tanh(v) ** 2)),
    ]:
        b = getattr(x, name)()
        assert b.value == pytest.approx(f(0.5)), name
        assert b.partial(0) == pytest.approx(df(0.5)), name
        assert b.second_partial(0, 0) == pytest.approx(ddf(0.5)), name
        assert b.partial(1) == 0.0


def test_spatial_jet_is_immutable():
    b = SpatialJet.constant(1.0)
    with pytest.raises(AttributeError):
        b.terms = (0.0,) * 6


def test_spatial_jet_over_taylor_jets():
    # x(t) = t near t = 1; d/dt x^2 = 2
    x = SpatialJet.coordinate(jet_variable(1.0, 2), 0)
    b = x * x
    assert isinstance(b.value, TaylorJet)
    assert_allclose(b.value.coeffs, [1, 2, 2])
    assert_allclose(b.partial(0).coeffs, [2, 2, 0])


def test_unbound_parameter():
    with pytest.raises(UnboundIdentifier):
        metric_spec("a*x", "0", "1")
    spec = metric_spec("a*x", "0", "1", {'a': 2.0})
    assert spec.params == {'a': 2.0}
    assert spec.sources == ("a*x", "0", "1")


def test_metric_eval_xcube_metric(xcube_metric):
    se = metric_eval(xcube_metric(1), (2.0, 0.0))
    assert_allclose(_real(se.g), np.eye(2) / 8)
    assert se.omega == 1
    assert value_of(se.G) == pytest.approx(1 / 64)
    assert value_of(se.sqrt_abs_G) == pytest.approx(1 / 8)
    assert value_of(se.dg[0, 0, 0]) == pytest.approx(-3 / 16)
    assert value_of(se.dg[1, 0, 0]) == 0.0
    assert value_of(se.ddg[0, 0, 1, 1]) == pytest.approx(12 / 32)


def test_metric_eval_lorentzian(xcube_metric, minkowski):
    assert metric_eval(xcube_metric(-1), (1.0, 0.0)).omega == -1
    se = metric_eval(minkowski, (0.3, -2.0))
    assert se.omega == -1
    assert value_of(se.G) == -1.0


def test_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        metric_eval(metric_spec("1", "1", "1"), (0.0, 0.0))
    with pytest.raises(DegenerateMetric):
        metric_eval(metric_spec("x", "0", "1"), (0.0, 0.0))


def test_christoffel_riemannian(xcube_metric):
    gamma = _real(christoffel(metric_eval(xcube_metric(1), (2.0, 0.0))).gamma)
    assert gamma[0, 0, 0] == pytest.approx(-0.75)
    assert gamma[1, 0, 1] == pytest.approx(-0.75)
    assert gamma[1, 1, 0] == pytest.approx(-0.75)
    assert gamma[0, 1, 1] == pytest.approx(0.75)
    assert gamma[1, 0, 0] == 0.0
    assert gamma[0, 0, 1] == 0.0
    assert gamma[1, 1, 1] == 0.0


def test_christoffel_lorentzian(xcube_metric):
    gamma = _real(christoffel(metric_eval(xcube_metric(-1), (1.0, 0.0))).gamma)
    assert gamma[0, 0, 0] == pytest.approx(-1.5)
    assert gamma[1, 0, 1] == pytest.approx(-1.5)
    assert gamma[0, 1, 1] == pytest.approx(-1.5)


def test_christoffel_partials(xcube_metric):
    # Gamma^x_xx = -3/(2x) for the conformal factor x^-3
    dgamma = _real(christoffel(metric_eval(xcube_metric(1), (2.0, 0.0))).dgamma)
    assert dgamma[0, 0, 0, 0] == pytest.approx(3 / 8)
    assert dgamma[1, 0, 0, 0] == 0.0


def test_flat_christoffels_vanish(euclid):
    ch = christoffel(metric_eval(euclid, (1.0, 2.0)))
    assert np.all(_real(ch.gamma) == 0.0)
    assert np.all(_real(ch.dgamma) == 0.0)


@pytest.mark.parametrize('x', [0.5, 1.0, 2.0, 4.0])
def test_scalar_curvature_xcube_metric(xcube_metric, x):
    se = metric_eval(xcube_metric(1), (x, 0.3))
    assert value_of(gauss_curvature(se)) == pytest.approx(-3 * x, rel=1e-10)


def test_scalar_curvature_sphere():
    sphere = metric_spec("1", "0", "sin(x)^2")
    assert value_of(gauss_curvature(metric_eval(sphere, (np.pi / 2, 0.0)))) == pytest.approx(2.0)
    assert value_of(gauss_curvature(metric_eval(sphere, (1.0, 0.7)))) == pytest.approx(2.0)


def test_j_tensor():
    spec = metric_spec("2 + x^2", "0.3*y", "1.5", {})
    se = metric_eval(spec, (0.4, -0.7))
    J = j_tensor(se)
    Jm = _real(J.components)
    assert_allclose(Jm @ Jm, -np.eye(2), atol=1e-14)
    u, v = (1.0, 0.5), (-0.2, 2.0)
    # g(u, J v) = Omega(u, v)
    assert value_of(metric_product(se, u, apply_j(J, v))) == pytest.approx(value_of(volume_form(se, u, v)))


def test_j_tensor_lorentzian(minkowski):
    se = metric_eval(minkowski, (0.0, 0.0))
    Jm = _real(j_tensor(se).components)
    assert_allclose(Jm @ Jm, np.eye(2))


def test_volume_form_orientation(euclid):
    se = metric_eval(euclid, (0.0, 0.0))
    assert value_of(volume_form(se, (1.0, 0.0), (0.0, 1.0))) == 1.0
    assert value_of(volume_form(se, (0.0, 1.0), (1.0, 0.0))) == -1.0


@pytest.mark.parametrize('metric, point', [
    (("x^(-3)", "0", "x^(-3)"), (1.0, 0.0)),
    (("x^(-3)", "0", "-x^(-3)"), (2.0, 1.0)),
    (("1", "0", "sin(x)^2"), (1.2, 0.0)),
    (("2 + sin(x*y)", "0.2*cos(x)", "-1 - 0.3*y^2"), (0.3, 0.8)),
    (("exp(x)", "0.5", "1 + y^2"), (-0.4, 1.1)),
])
def test_structure_identities(metric, point):
    report = structure_check(metric_spec(*metric), point)
    for name in ('j_square', 'omega_j', 'nabla_j', 'nabla_omega', 'metric_compat'):
        assert getattr(report, name) < conf.tol_structure, name
    assert report.x == point[0]


def test_structure_report_curvature(xcube_metric):
    report = structure_check(xcube_metric(1), (2.0, 0.0))
    assert report.omega == 1
    assert report.scalar_curvature == pytest.approx(-6.0)


def test_volume_form_over_jets(xcube_metric):
    # sqrt|G| = x^-3 along x = 2 + t
    order = 3
    se = metric_eval(xcube_metric(1), (2.0 + jet_variable(0.0, order), 0.0 * jet_variable(0.0, order)))
    e1 = [TaylorJet([1.0, 0.0, 0.0]), TaylorJet([0.0, 0.0, 0.0])]
    e2 = [TaylorJet([0.0, 0.0, 0.0]), TaylorJet([1.0, 0.0, 0.0])]
    omega = volume_form(se, e1, e2)
    assert isinstance(omega, TaylorJet)
    assert omega.order == 2
    assert_allclose(omega.coeffs, [1 / 8, -3 / 16, 12 / 32], rtol=1e-13)
    assert volume_form(se, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1 / 8)
