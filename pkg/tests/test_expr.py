import numpy as np
import pytest
from numpy.testing import assert_allclose

from equiaffine.common import DomainError, ExpressionSyntaxError, LexError, UnboundIdentifier, value_of
from equiaffine.expr import (CURVE_VARIABLES, METRIC_VARIABLES, Binary, Call, Constant, Negate,
                             Parameter, Variable, compile_expression, evaluate, free_parameters,
                             to_source, tokenize)
from equiaffine.jets import TaylorJet, jet_variable
from equiaffine.oracle import fd_scalar_derivatives


def test_tokenize_positions():
    tokens = tokenize(" x^(-3) + 2.5e-1*omega")
    assert [t.kind for t in tokens] == ['identifier', 'operator', 'lparen', 'operator', 'number', 'rparen',
                                        'operator', 'number', 'operator', 'identifier']
    assert tokens[0].position == 1
    assert tokens[7].text == '2.5e-1'
    assert tokens[-1].text == 'omega'


def test_lex_errors():
    with pytest.raises(LexError) as err:
        tokenize("x $ y")
    assert err.value.position == 2
    with pytest.raises(LexError) as err:
        tokenize("2x")
    assert err.value.position == 1


def test_power_binds_tighter_than_minus():
    assert compile_expression("-x^2", METRIC_VARIABLES) == Negate(Binary('^', Variable('x'), Constant(2.0)))
    assert evaluate(compile_expression("-x^2", METRIC_VARIABLES), {'x': 3.0}) == -9.0


def test_power_is_right_associative():
    node = compile_expression("2^3^2", CURVE_VARIABLES)
    assert node == Binary('^', Constant(2.0), Binary('^', Constant(3.0), Constant(2.0)))
    assert evaluate(node, {}) == 512.0


def test_negative_exponent():
    node = compile_expression("x^-3", METRIC_VARIABLES)
    assert evaluate(node, {'x': 2.0}) == pytest.approx(0.125)
    assert evaluate(compile_expression("x^(-3)", METRIC_VARIABLES), {'x': 2.0}) == pytest.approx(0.125)


def test_precedence_and_associativity():
    node = compile_expression("1 - 2 - 3 * 4 / 2", CURVE_VARIABLES)
    assert evaluate(node, {}) == pytest.approx(-7.0)


def test_parameters_and_variables():
    node = compile_expression("omega*x^(-3) + lambda*t", METRIC_VARIABLES)
    assert free_parameters(node) == ['lambda', 't', 'omega']
    node = compile_expression("lambda*t", CURVE_VARIABLES)
    assert free_parameters(node) == ['lambda']
    assert evaluate(node, {'t': 2.0}, {'lambda': 1.5}) == 3.0


def test_unbound_identifier():
    node = compile_expression("a*t", CURVE_VARIABLES)
    with pytest.raises(UnboundIdentifier) as err:
        evaluate(node, {'t': 1.0})
    assert err.value.name == 'a'
    assert str(err.value) == "UnboundIdentifier: a"


def test_calls():
    node = compile_expression("pow(t, 2) + cbrt(-8) + abs(t) + sqrt(4)", CURVE_VARIABLES)
    assert evaluate(node, {'t': -3.0}) == pytest.approx(9 - 2 + 3 + 2)
    assert isinstance(compile_expression("sin(t)", CURVE_VARIABLES), Call)


@pytest.mark.parametrize('source, position, message', [
    ("sin(x", 5, "expected ')'"),
    ("x +", 3, "expected expression"),
    ("(x))", 3, "unexpected ')'"),
    ("foo(x)", 0, "unknown function 'foo'"),
    ("pow(x)", 0, "function 'pow' takes 2 argument(s), got 1"),
    ("sin + 1", 4, "expected '(' after 'sin'"),
])
def test_syntax_errors(source, position, message):
    with pytest.raises(ExpressionSyntaxError) as err:
        compile_expression(source, METRIC_VARIABLES)
    assert err.value.position == position
    assert message in str(err.value)


def test_error_message_format():
    with pytest.raises(ExpressionSyntaxError) as err:
        compile_expression("sin(x", METRIC_VARIABLES)
    assert str(err.value) == "SyntaxError at 5: expected ')'"


def test_domain_errors():
    with pytest.raises(DomainError):
        evaluate(compile_expression("log(x)", METRIC_VARIABLES), {'x': -1.0})
    with pytest.raises(DomainError):
        evaluate(compile_expression("1/x", METRIC_VARIABLES), {'x': 0.0})
    with pytest.raises(DomainError):
        evaluate(compile_expression("x^0.5", METRIC_VARIABLES), {'x': -4.0})


def test_to_source_parses_back():
    for source in ["-x^2*omega", "sin(x)/(1+y^2)", "pow(x, y) - -3", "2^3^2"]:
        node = compile_expression(source, METRIC_VARIABLES)
        assert compile_expression(to_source(node), METRIC_VARIABLES) == node


def test_evaluate_over_jets():
    # d/dt (t^2 sin t) at t = 1
    node = compile_expression("t^2*sin(t)", CURVE_VARIABLES)
    value = evaluate(node, {'t': jet_variable(1.0, 2)})
    s, c = np.sin(1.0), np.cos(1.0)
    assert_allclose(value.coeffs, [s, 2 * s + c, 2 * s + 4 * c - s], rtol=1e-13)


def test_jet_exponent():
    # t^t = exp(t log t), derivative t^t (log t + 1)
    value = evaluate(compile_expression("t^t", CURVE_VARIABLES), {'t': jet_variable(2.0, 1)})
    assert_allclose(value.coeffs, [4.0, 4.0 * (np.log(2.0) + 1)], rtol=1e-13)


def test_parameter_node():
    assert compile_expression("omega", METRIC_VARIABLES) == Parameter('omega')


def _random_source(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        return 't' if rng.random() < 0.6 else f"{rng.uniform(0.1, 1.5):.3f}"
    a = _random_source(rng, depth - 1)
    kind = rng.integers(12)
    if kind < 3:
        op = '+-*'[kind]
        return f"({a} {op} {_random_source(rng, depth - 1)})"
    if kind == 3:
        return f"{a} / (2 + ({_random_source(rng, depth - 1)})^2)"
    if kind == 4:
        return f"-({a})"
    if kind == 5:
        return f"({a})^2"
    if kind == 6:
        return f"{rng.choice(['sin', 'cos', 'tanh', 'sinh'])}(0.5*sin({a}))"
    if kind == 7:
        return f"exp(sin({a}))"
    if kind == 8:
        return f"log(2 + ({a})^2)"
    if kind == 9:
        return f"sqrt(1 + ({a})^2)"
    if kind == 10:
        return f"tan(0.5*tanh({a}))"
    return f"cbrt(2 + ({a})^2)"


def _random_expressions(count, seed=20):
    rng = np.random.default_rng(seed)
    return [compile_expression(_random_source(rng, 4), CURVE_VARIABLES) for _ in range(count)]


def test_random_expressions_parse_back():
    for node in _random_expressions(200):
        again = compile_expression(to_source(node), CURVE_VARIABLES)
        assert again == node
        assert to_source(again) == to_source(node)


def test_order_zero_jets_match_reals_exactly():
    for node in _random_expressions(200, seed=21):
        for t in (-0.7, 0.3, 1.9):
            assert value_of(evaluate(node, {'t': jet_variable(t, 0)})) == evaluate(node, {'t': t})


@pytest.mark.parametrize('source', ["tan(t)", "tanh(t)", "cbrt(t)", "log(t)", "sqrt(t)", "t^(-3)", "t^2.5"])
def test_order_zero_primitives_match_reals(source):
    node = compile_expression(source, CURVE_VARIABLES)
    for t in (0.2, 0.7, 1.3):
        assert evaluate(node, {'t': jet_variable(t, 0)}).value == evaluate(node, {'t': t})


def test_random_expression_derivatives_match_finite_differences():
    for node in _random_expressions(100, seed=22):
        for t in (-0.4, 0.6):
            jet = evaluate(node, {'t': jet_variable(t, 1)})
            if not isinstance(jet, TaylorJet):
                continue
            fd = fd_scalar_derivatives(lambda s: evaluate(node, {'t': s}), t)
            assert abs(jet.coeffs[1] - fd) <= 1e-6 * max(1.0, abs(jet.coeffs[1])), to_source(node)


def test_huge_integer_exponent():
    assert evaluate(compile_expression("t^1e9", CURVE_VARIABLES), {'t': 1.0}) == 1.0
    assert evaluate(compile_expression("t^(-1e9)", CURVE_VARIABLES), {'t': -1.0}) == 1.0
