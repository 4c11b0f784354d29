import numpy as np
import pytest
from numpy.testing import assert_allclose

import equiaffine.jets as jets
from equiaffine.common import (DegenerateJet, DivisionByNearZero, DomainError,
                               JetOrderMismatch)
from equiaffine.jets import TaylorJet, as_jet, jet_constant, jet_div, jet_lift, jet_variable
from equiaffine.oracle import fd_scalar_derivatives


def test_variable_and_constant():
    assert_allclose(jet_variable(2.0, 4).coeffs, [2, 1, 0, 0, 0])
    assert_allclose(jet_constant(3.0, 2).coeffs, [3, 0, 0])
    assert jet_variable(2.0, 4).order == 4


def test_product_of_variables():
    t = jet_variable(3.0, 4)
    assert_allclose((t * t).coeffs, [9, 6, 2, 0, 0])
    assert_allclose((t * t * t).coeffs, [27, 27, 18, 6, 0])


def test_reciprocal():
    t = jet_variable(1.0, 4)
    assert_allclose((1.0 / t).coeffs, [1, -1, 2, -6, 24])
    assert_allclose(jet_div(jet_constant(1.0, 4), t).coeffs, [1, -1, 2, -6, 24])


def test_quotient_matches_product_rule():
    t = jet_variable(0.7, 4)
    q = t.sin() / t.cos()
    assert_allclose(q.coeffs, t.tan().coeffs, rtol=1e-12)


def test_exp_log_at_expansion_point():
    assert_allclose(jet_variable(0.0, 4).exp().coeffs, [1, 1, 1, 1, 1])
    assert_allclose(jet_variable(1.0, 4).log().coeffs, [0, 1, -1, 2, -6])


def test_trig_at_zero():
    t = jet_variable(0.0, 4)
    assert_allclose(t.sin().coeffs, [0, 1, 0, -1, 0], atol=1e-15)
    assert_allclose(t.cos().coeffs, [1, 0, -1, 0, 1], atol=1e-15)
    assert_allclose(t.tan().coeffs, [0, 1, 0, 2, 0], atol=1e-15)
    assert_allclose(t.sinh().coeffs, [0, 1, 0, 1, 0], atol=1e-15)
    assert_allclose(t.cosh().coeffs, [1, 0, 1, 0, 1], atol=1e-15)
    assert_allclose(t.tanh().coeffs, [0, 1, 0, -2, 0], atol=1e-15)


def test_real_powers():
    t = jet_variable(4.0, 3)
    assert_allclose(t.sqrt().coeffs, [2, 0.25, -1 / 32, 3 / 256])
    assert_allclose(t.power(0.5).coeffs, [2, 0.25, -1 / 32, 3 / 256])
    assert_allclose(jets.integer_power(jet_variable(2.0, 2), -3).coeffs, [1 / 8, -3 / 16, 12 / 32])


def test_signed_cube_root():
    r = jet_variable(-8.0, 2).cbrt()
    assert r.value == pytest.approx(-2.0)
    # d/dt t^(1/3) = t^(-2/3) / 3
    assert r.coeffs[1] == pytest.approx(1 / 12)
    assert_allclose((r * r * r).coeffs, jet_variable(-8.0, 2).coeffs, atol=1e-12)


def test_abs_sqrt_follows_sign():
    u = jet_variable(4.0, 2) * -1.0
    assert_allclose(u.abs_sqrt().coeffs, [2, 0.25, -1 / 32])
    assert_allclose(jet_variable(-3.0, 2).abs().coeffs, [3, -1, 0])


def test_derivative_and_truncate():
    t = jet_variable(0.0, 4).exp()
    assert t.derivative().order == 3
    assert_allclose(t.derivative().coeffs, [1, 1, 1, 1])
    assert_allclose(t.truncate(2).coeffs, [1, 1, 1])
    with pytest.raises(JetOrderMismatch):
        t.truncate(5)


def test_as_jet():
    assert_allclose(as_jet(2.5, 2).coeffs, [2.5, 0, 0])
    assert as_jet(jet_variable(1.0, 4), 2).order == 2


def test_jet_lift():
    t = jet_variable(0.3, 3)
    assert_allclose(jet_lift('sin', t).coeffs, t.sin().coeffs)
    assert_allclose(jet_lift('pow', t, 2.5).coeffs, t.power(2.5).coeffs)
    with pytest.raises(ValueError):
        jet_lift('gamma', t)


def test_order_mismatch():
    with pytest.raises(JetOrderMismatch):
        jet_variable(1.0, 2) + jet_variable(1.0, 3)


def test_domain_and_degenerate_errors():
    with pytest.raises(DomainError):
        jet_variable(-1.0, 2).log()
    with pytest.raises(DomainError):
        jet_variable(-1.0, 2).sqrt()
    with pytest.raises(DomainError):
        jet_variable(-1.0, 2).power(0.5)
    with pytest.raises(DegenerateJet):
        jet_variable(0.0, 2).cbrt()
    with pytest.raises(DegenerateJet):
        jet_variable(0.0, 2).abs_sqrt()
    with pytest.raises(DivisionByNearZero):
        jet_variable(1.0, 2) / jet_variable(0.0, 2)
    with pytest.raises(DivisionByNearZero):
        jet_variable(1.0, 2) / 0.0


def test_immutable():
    t = jet_variable(1.0, 2)
    with pytest.raises(AttributeError):
        t.order = 3
    with pytest.raises(ValueError):
        t.coeffs[0] = 5.0


def test_generic_dispatch_on_reals():
    assert jets.sin(0.5) == pytest.approx(np.sin(0.5))
    assert jets.cbrt(-27.0) == pytest.approx(-3.0)
    assert jets.power(2.0, 3) == 8.0
    assert jets.power(4.0, 0.5) == pytest.approx(2.0)
    assert jets.integer_power(2.0, -2) == 0.25
    assert jets.integer_power(2.0, 0) == 1.0
    with pytest.raises(DomainError):
        jets.power(-4.0, 0.5)
    with pytest.raises(DomainError):
        jets.log(0.0)


def test_generic_dispatch_on_jets():
    t = jet_variable(0.4, 3)
    assert_allclose(jets.exp(jets.log(t)).coeffs, t.coeffs, atol=1e-13)
    assert_allclose((t ** 3).coeffs, (t * t * t).coeffs)
    assert isinstance(jets.cos(t), TaylorJet)


def test_chain_rule_against_closed_form():
    # f(t) = exp(sin t), f' = cos t f, f'' = (cos^2 t - sin t) f
    t0 = 0.3
    f = jet_variable(t0, 2).sin().exp()
    e = np.exp(np.sin(t0))
    assert_allclose(f.coeffs, [e, np.cos(t0) * e, (np.cos(t0) ** 2 - np.sin(t0)) * e], rtol=1e-13)


def _random_jet(rng, order):
    return TaylorJet(rng.uniform(-2, 2, order + 1))


@pytest.mark.parametrize('order', [0, 2, 5])
def test_arithmetic_commutes(order):
    rng = np.random.default_rng(order)
    for _ in range(50):
        a, b = _random_jet(rng, order), _random_jet(rng, order)
        assert_allclose((a + b).coeffs, (b + a).coeffs)
        assert_allclose((a * b).coeffs, (b * a).coeffs, rtol=1e-14)


@pytest.mark.parametrize('order', [1, 4])
def test_division_undoes_multiplication(order):
    rng = np.random.default_rng(10 + order)
    for _ in range(50):
        a = _random_jet(rng, order)
        b = _random_jet(rng, order) + 3.0
        assert_allclose(((a * b) / b).coeffs, a.coeffs, rtol=1e-10, atol=1e-12)
        assert_allclose((jet_div(a, b) * b).coeffs, a.coeffs, rtol=1e-10, atol=1e-12)


# plain counterparts, applied to u(t) = sign * (0.3 + 0.5 t + 0.2 t^2)
PLAIN = {
    'sin': np.sin, 'cos': np.cos, 'tan': np.tan,
    'sinh': np.sinh, 'cosh': np.cosh, 'tanh': np.tanh,
    'exp': np.exp, 'log': np.log, 'sqrt': np.sqrt, 'cbrt': np.cbrt,
    'abs_sqrt': lambda v: np.sqrt(np.abs(v)), 'abs': np.abs,
    'pow': lambda v: v ** 2.5,
}
NEGATIVE_OK = ('sin', 'cos', 'tan', 'sinh', 'cosh', 'tanh', 'exp', 'cbrt', 'abs_sqrt', 'abs')


@pytest.mark.parametrize('fn, sign', [(fn, 1.0) for fn in PLAIN] + [(fn, -1.0) for fn in NEGATIVE_OK])
def test_primitive_derivatives_match_finite_differences(fn, sign):
    t0 = 0.4
    tj = jet_variable(t0, 3)
    u = (0.3 + 0.5 * tj + 0.2 * tj * tj) * sign
    jet = jet_lift(fn, u, 2.5) if fn == 'pow' else jet_lift(fn, u)

    def plain(t):
        return PLAIN[fn](sign * (0.3 + 0.5 * t + 0.2 * t * t))

    assert jet.value == pytest.approx(plain(t0), rel=1e-14)
    assert jet.coeffs[1] == pytest.approx(fd_scalar_derivatives(plain, t0), rel=1e-7, abs=1e-9)
    assert jet.coeffs[2] == pytest.approx(fd_scalar_derivatives(plain, t0, order=2), rel=1e-5, abs=1e-7)


@pytest.mark.parametrize('base', [-8.0, 8.0, 0.125, -3.5])
def test_cube_root_cubes_back(base):
    t = jet_variable(0.3, 3)
    u = base + 0.5 * t + 0.25 * t * t
    r = u.cbrt()
    assert_allclose((r * r * r).coeffs, u.coeffs, rtol=1e-12, atol=1e-12)


def test_reciprocal_threshold():
    small = TaylorJet([1e-15, 1.0, 0.0])
    with pytest.raises(DivisionByNearZero):
        small.reciprocal()
    assert_allclose(small.reciprocal(threshold=0.0).coeffs, [1e15, -1e30, 2e45])
    with pytest.raises(DivisionByNearZero):
        TaylorJet([0.0, 1.0]).reciprocal(threshold=0.0)


def test_integer_power_large_exponents():
    assert jets.power(1.0, 1e300) == 1.0
    assert jets.power(-1.0, 1e9) == 1.0
    assert jets.integer_power(2.0, -1000) == 2.0 ** -1000
    n = 10 ** 9
    assert_allclose(jets.integer_power(jet_variable(1.0, 2), n).coeffs, [1.0, n, n * (n - 1.0)], rtol=1e-12)
    t = jet_variable(0.9, 4)
    assert_allclose(jets.integer_power(t, 7).coeffs, (t * t * t * t * t * t * t).coeffs, rtol=1e-13)
