import pytest

from equiaffine import catalog
from equiaffine.curve import curve_jets, curve_spec
from equiaffine.manifold import metric_spec


def xcube(omega=1):
    return metric_spec("x^(-3)", "0", "omega*x^(-3)", {'omega': omega})


@pytest.fixture
def xcube_metric():
    return xcube


@pytest.fixture
def euclid():
    return metric_spec("1", "0", "1")


@pytest.fixture
def minkowski():
    return metric_spec("1", "0", "-1")


@pytest.fixture
def jets_of():
    """Curve jets of a built-in scenario at t"""
    def build(name, t, order=4, **overrides):
        scenario = catalog.builtin(name, overrides)
        return curve_jets(scenario.curve, scenario.metric, t, order)
    return build


@pytest.fixture
def plane_curve():
    """Curve jets of (x(t), y(t)) in a given metric"""
    def build(metric, x, y, t, domain=(-10, 10), params=None, order=4):
        return curve_jets(curve_spec(x, y, domain, params), metric, t, order)
    return build
