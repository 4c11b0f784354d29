"""
The expression language metric components and curve components are written in.

    expr     = term , { ("+" | "-") , term } ;
    term     = unary , { ("*" | "/") , unary } ;
    unary    = "-" , unary | power ;
    power    = atom , [ "^" , exponent ] ;
    exponent = "-" , exponent | power ;
    atom     = number | identifier | identifier "(" args ")" | "(" expr ")" ;
    args     = expr , { "," , expr } ;

``^`` is right-associative and binds tighter than unary minus (-x^2 is
-(x^2)). Identifiers outside the context's variable set are parameters,
bound to reals at evaluation time.
"""
import re
from collections import namedtuple
from dataclasses import dataclass
from typing import Tuple

import equiaffine.jets as jets
from equiaffine.common import (DomainError, ExpressionSyntaxError, LexError,
                               UnboundIdentifier, is_plain)

METRIC_VARIABLES = frozenset({'x', 'y'})
CURVE_VARIABLES = frozenset({'t'})

# name: arity
FUNCTIONS = {
    'sin': 1, 'cos': 1, 'tan': 1,
    'sinh': 1, 'cosh': 1, 'tanh': 1,
    'exp': 1, 'log': 1, 'sqrt': 1, 'cbrt': 1, 'abs': 1,
    'pow': 2,
}

Token = namedtuple('Token', ['kind', 'text', 'position'])

_TOKEN = re.compile(r"""
     (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    |(?P<identifier>[A-Za-z_][A-Za-z_0-9]*)
    |(?P<operator>[-+*/^])
    |(?P<lparen>\()
    |(?P<rparen>\))
    |(?P<comma>,)
    """, re.VERBOSE)

_SPACE = re.compile(r"\s*")


# Syntax tree --------------------------------------------------------------------
@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Parameter:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    function: str
    args: Tuple


def tokenize(source):
    """
    Split an expression into tokens.

    Args:
        source (str): expression text

    Raises:
        LexError: on characters outside the language, or a number running
            straight into a name ("2x")

    Returns:
        list: Token(kind, text, position) with 0-based offsets
    """
    tokens = []
    pos = _SPACE.match(source, 0).end()
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if not match:
            raise LexError(pos, source[pos])
        kind = match.lastgroup
        end = match.end()
        if kind == 'number' and end < len(source) and (source[end].isalnum() or source[end] in '_.'):
            # no implicit multiplication
            raise LexError(end, source[end])
        tokens.append(Token(kind, match.group(), pos))
        pos = _SPACE.match(source, end).end()
    return tokens


class _Parser:
    def __init__(self, tokens, variables, end):
        self.tokens = list(tokens)
        self.variables = frozenset(variables)
        self.index = 0
        self.end = end

    def peek(self):
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return None

    def position(self):
        token = self.peek()
        return token.position if token else self.end

    def accept(self, kind, text=None):
        token = self.peek()
        if token and token.kind == kind and (text is None or token.text == text):
            self.index += 1
            return token
        return None

    def expect(self, kind, text, expectation):
        token = self.accept(kind, text)
        if token is None:
            raise ExpressionSyntaxError(self.position(), expectation)
        return token

    def expression(self):
        node = self.term()
        while True:
            token = self.accept('operator', '+') or self.accept('operator', '-')
            if token is None:
                return node
            node = Binary(token.text, node, self.term())

    def term(self):
        node = self.unary()
        while True:
            token = self.accept('operator', '*') or self.accept('operator', '/')
            if token is None:
                return node
            node = Binary(token.text, node, self.unary())

    def unary(self):
        if self.accept('operator', '-'):
            return Negate(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.accept('operator', '^'):
            return Binary('^', node, self.exponent())
        return node

    def exponent(self):
        if self.accept('operator', '-'):
            return Negate(self.exponent())
        return self.power()

    def atom(self):
        token = self.peek()
        if token is None:
            raise ExpressionSyntaxError(self.end, "expected expression")
        if token.kind == 'number':
            self.index += 1
            return Constant(float(token.text))
        if token.kind == 'lparen':
            self.index += 1
            node = self.expression()
            self.expect('rparen', None, "expected ')'")
            return node
        if token.kind == 'identifier':
            self.index += 1
            if self.accept('lparen'):
                return self.call(token)
            if token.text in FUNCTIONS:
                raise ExpressionSyntaxError(self.position(), f"expected '(' after '{token.text}'")
            if token.text in self.variables:
                return Variable(token.text)
            return Parameter(token.text)
        raise ExpressionSyntaxError(token.position, f"expected expression, got '{token.text}'")

    def call(self, name):
        if name.text not in FUNCTIONS:
            raise ExpressionSyntaxError(name.position, f"unknown function '{name.text}'")
        args = [self.expression()]
        while self.accept('comma'):
            args.append(self.expression())
        self.expect('rparen', None, "expected ')'")
        if len(args) != FUNCTIONS[name.text]:
            raise ExpressionSyntaxError(
                name.position,
                f"function '{name.text}' takes {FUNCTIONS[name.text]} argument(s), got {len(args)}")
        return Call(name.text, tuple(args))


def parse(tokens, context):
    """
    Build the syntax tree of a token stream.

    Args:
        tokens (list): output of tokenize
        context (iterable): variable names, e.g. {'x', 'y'} or {'t'}

    Returns:
        syntax tree (Constant, Variable, Parameter, Negate, Binary or Call)
    """
    tokens = list(tokens)
    end = tokens[-1].position + len(tokens[-1].text) if tokens else 0
    parser = _Parser(tokens, context, end)
    node = parser.expression()
    token = parser.peek()
    if token is not None:
        raise ExpressionSyntaxError(token.position, f"unexpected '{token.text}'")
    return node


def compile_expression(source, variables):
    return parse(tokenize(source), variables)


def free_parameters(node):
    """Sorted parameter names referenced by a syntax tree"""
    found = set()

    def visit(n):
        if isinstance(n, Parameter):
            found.add(n.name)
        elif isinstance(n, Negate):
            visit(n.operand)
        elif isinstance(n, Binary):
            visit(n.left)
            visit(n.right)
        elif isinstance(n, Call):
            for arg in n.args:
                visit(arg)

    visit(node)
    return sorted(found)


def to_source(node):
    """Fully parenthesised source text that parses back to the same tree"""
    if isinstance(node, Constant):
        return repr(float(node.value))
    if isinstance(node, (Variable, Parameter)):
        return node.name
    if isinstance(node, Negate):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.function}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


# Evaluation ---------------------------------------------------------------------
def _raise_power(base, exponent):
    if is_plain(exponent):
        return jets.power(base, exponent)
    return jets.exp(exponent * jets.log(base))


def _divide(a, b):
    if is_plain(b) and b == 0:
        raise DomainError("division by zero")
    return a / b


_BINARY = {
    '+': lambda a, b: a + b,
    '-': lambda a, b: a - b,
    '*': lambda a, b: a * b,
    '/': _divide,
    '^': _raise_power,
}

_CALLS = {
    'sin': jets.sin, 'cos': jets.cos, 'tan': jets.tan,
    'sinh': jets.sinh, 'cosh': jets.cosh, 'tanh': jets.tanh,
    'exp': jets.exp, 'log': jets.log, 'sqrt': jets.sqrt,
    'cbrt': jets.cbrt, 'abs': jets.absolute,
    'pow': _raise_power,
}


def evaluate(node, bindings, params=None):
    """
    Evaluate a syntax tree over any scalar algebra.

    Args:
        node: syntax tree
        bindings (dict): variable name -> scalar (float, TaylorJet, SpatialJet)
        params (dict, optional): parameter name -> float

    Raises:
        UnboundIdentifier: for a variable or parameter without a value
        DomainError: from the primitives (log of a nonpositive value, ...)

    Returns:
        scalar of the bindings' algebra, or a float for constant expressions
    """
    params = params or {}

    def ev(n):
        if isinstance(n, Constant):
            return n.value
        if isinstance(n, Variable):
            try:
                return bindings[n.name]
            except KeyError:
                raise UnboundIdentifier(n.name) from None
        if isinstance(n, Parameter):
            try:
                return float(params[n.name])
            except KeyError:
                raise UnboundIdentifier(n.name) from None
        if isinstance(n, Negate):
            return -ev(n.operand)
        if isinstance(n, Binary):
            return _BINARY[n.op](ev(n.left), ev(n.right))
        if isinstance(n, Call):
            return _CALLS[n.function](*[ev(a) for a in n.args])
        raise TypeError(f"not an expression node: {n!r}")

    return ev(node)
