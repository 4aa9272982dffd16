#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Holomorphic function expressions.

Parses the small expression language used to describe the right-hand side of
ż = f(z), evaluates it under principal-branch complex arithmetic and builds
exact first and second derivatives by symbolic rules.

Grammar (case-sensitive, whitespace insignificant, no implicit multiplication):

    expr   := term { ("+"|"-") term }
    term   := factor { ("*"|"/") factor }
    factor := unary [ "^" uint ]
    unary  := [ "-" ] atom
    atom   := number | "z" | "i" | "pi" | "e" | ident "(" expr ")" | "(" expr ")"

Note that the unary minus binds tighter than "^": "-z^2" is (-z)^2.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np

from sepkit.exceptions import (
    DomainError,
    EvaluationOverflow,
    ExpressionSyntaxError,
    NonIntegerExponent,
    UnknownIdentifier,
)

Number = Union[complex, np.ndarray]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_UINT_RE = re.compile(r"^\d+$")

_CONSTANTS = {"i": 1j, "pi": complex(math.pi), "e": complex(math.e)}

# name -> (scalar implementation, array implementation)
_FUNCTIONS: dict[str, tuple[Callable, Callable]] = {
    "cosh": (cmath.cosh, np.cosh),
    "sinh": (cmath.sinh, np.sinh),
    "cos": (cmath.cos, np.cos),
    "sin": (cmath.sin, np.sin),
    "exp": (cmath.exp, np.exp),
    "tanh": (cmath.tanh, np.tanh),
    "tan": (cmath.tan, np.tan),
    "log": (cmath.log, np.log),
}


# AST ==================================================================================


class Node:
    """Base class of expression tree nodes."""

    def evaluate(self, z: Number, vectorized: bool) -> Number:
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def derivative(self) -> "Node":
        raise NotImplementedError

    def walk(self):
        yield self


@dataclass(frozen=True)
class Const(Node):
    value: complex
    label: str | None = None

    def evaluate(self, z, vectorized):
        if vectorized:
            return np.full(np.shape(z), self.value, dtype=complex)
        return self.value

    def to_source(self):
        if self.label is not None:
            return self.label
        re_part, im_part = self.value.real, self.value.imag
        if im_part == 0.0:
            text = repr(abs(re_part))
            return f"(-{text})" if math.copysign(1.0, re_part) < 0 else text
        return f"({_real_source(re_part)} + {_real_source(im_part)}*i)"

    def derivative(self):
        return ZERO


@dataclass(frozen=True)
class Var(Node):
    def evaluate(self, z, vectorized):
        return z

    def to_source(self):
        return "z"

    def derivative(self):
        return ONE


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def evaluate(self, z, vectorized):
        return -self.arg.evaluate(z, vectorized)

    def to_source(self):
        return f"(-{_atom_source(self.arg)})"

    def derivative(self):
        return neg(self.arg.derivative())

    def walk(self):
        yield self
        yield from self.arg.walk()


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, z, vectorized):
        a = self.left.evaluate(z, vectorized)
        b = self.right.evaluate(z, vectorized)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def to_source(self):
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"

    def derivative(self):
        a, b = self.left, self.right
        da, db = a.derivative(), b.derivative()
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))

    def walk(self):
        yield self
        yield from self.left.walk()
        yield from self.right.walk()


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def evaluate(self, z, vectorized):
        value = self.base.evaluate(z, vectorized)
        if vectorized:
            return np.power(value, self.exponent)
        return value**self.exponent

    def to_source(self):
        return f"{_atom_source(self.base)}^{self.exponent}"

    def derivative(self):
        if self.exponent == 0:
            return ZERO
        outer = mul(Const(complex(self.exponent)), power(self.base, self.exponent - 1))
        return mul(outer, self.base.derivative())

    def walk(self):
        yield self
        yield from self.base.walk()


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def evaluate(self, z, vectorized):
        scalar_fn, array_fn = _FUNCTIONS[self.name]
        value = self.arg.evaluate(z, vectorized)
        return array_fn(value) if vectorized else scalar_fn(value)

    def to_source(self):
        return f"{self.name}({self.arg.to_source()})"

    def derivative(self):
        u = self.arg
        rules = {
            "cosh": lambda: Call("sinh", u),
            "sinh": lambda: Call("cosh", u),
            "cos": lambda: neg(Call("sin", u)),
            "sin": lambda: Call("cos", u),
            "exp": lambda: Call("exp", u),
            "tanh": lambda: div(ONE, power(Call("cosh", u), 2)),
            "tan": lambda: div(ONE, power(Call("cos", u), 2)),
            "log": lambda: div(ONE, u),
        }
        return mul(rules[self.name](), u.derivative())

    def walk(self):
        yield self
        yield from self.arg.walk()


ZERO = Const(0j)
ONE = Const(1 + 0j)


def _real_source(value: float) -> str:
    text = repr(abs(value))
    return f"(-{text})" if math.copysign(1.0, value) < 0 else text


def _atom_source(node: Node) -> str:
    text = node.to_source()
    if isinstance(node, (Var, Call)) or text.startswith("("):
        return text
    if isinstance(node, Const) and node.value.imag == 0 and node.value.real >= 0:
        return text
    return f"({text})"


# Light constant folding so that derivative trees stay readable. Only the
# identities with 0 and 1 are applied; no further simplification.


def _is(node: Node, value: complex) -> bool:
    return isinstance(node, Const) and node.label is None and node.value == value


def add(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def neg(a: Node) -> Node:
    if _is(a, 0):
        return ZERO
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Node, n: int) -> Node:
    if n == 0:
        return ONE
    if n == 1:
        return a
    return Pow(a, n)


# Parser ===============================================================================


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", token.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        token = self.current
        if token.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {token.text!r}", token.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.unary()
        if self.current.text == "^":
            self.advance()
            token = self.current
            if token.kind == "end":
                raise ExpressionSyntaxError("missing exponent after '^'", token.pos)
            if token.kind != "number" or not _UINT_RE.match(token.text):
                raise NonIntegerExponent(
                    f"exponent must be a nonnegative integer literal, got {token.text!r}", token.pos
                )
            self.advance()
            node = Pow(node, int(token.text))
        return node

    def unary(self) -> Node:
        if self.current.text == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Const(complex(float(token.text)), label=token.text)
        if token.kind == "ident":
            self.advance()
            if token.text == "z":
                return Var()
            if token.text in _CONSTANTS:
                return Const(_CONSTANTS[token.text], label=token.text)
            if token.text in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifier(f"unknown identifier {token.text!r}", token.pos)
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", token.pos)


# Functions ============================================================================


@dataclass(frozen=True)
class HolomorphicFunction:
    """A parsed right-hand side f(z) with exact derivatives.

    Instances are immutable; evaluation is a pure function of z.
    """

    source: str
    tree: Node

    @cached_property
    def has_branch_cut(self) -> bool:
        return any(isinstance(n, Call) and n.name == "log" for n in self.tree.walk())

    @cached_property
    def is_entire(self) -> bool:
        for node in self.tree.walk():
            if isinstance(node, Call) and node.name in ("log", "tan", "tanh"):
                return False
            if isinstance(node, BinOp) and node.op == "/":
                return False
        return True

    def __call__(self, z: complex) -> complex:
        return self.evaluate(z)

    def evaluate(self, z: complex) -> complex:
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError(f"cannot evaluate {self.source} at non-finite point {z}")
        try:
            value = complex(self.tree.evaluate(z, vectorized=False))
        except ZeroDivisionError as e:
            raise DomainError(f"division by zero evaluating {self.source} at {z}") from e
        except ValueError as e:
            raise DomainError(f"{self.source} is undefined at {z}: {e}") from e
        except OverflowError as e:
            raise EvaluationOverflow(f"{self.source} overflows at {z}") from e
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise EvaluationOverflow(f"{self.source} is not finite at {z}")
        return value

    def evaluate_grid(self, z: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; non-finite entries are left in place."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return np.asarray(self.tree.evaluate(z, vectorized=True), dtype=complex)

    def derivative(self, order: int = 1) -> "HolomorphicFunction":
        if order == 1:
            return self._first
        if order == 2:
            return self._second
        raise ValueError(f"derivative order must be 1 or 2, got {order}")

    @cached_property
    def _first(self) -> "HolomorphicFunction":
        tree = self.tree.derivative()
        return HolomorphicFunction(tree.to_source(), tree)

    @cached_property
    def _second(self) -> "HolomorphicFunction":
        return self._first.derivative(1)

    def to_source(self) -> str:
        return self.tree.to_source()

    def __str__(self):
        return self.source


def parse(expr: str) -> HolomorphicFunction:
    if not expr or not expr.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return HolomorphicFunction(expr, _Parser(expr).parse())


def evaluate(f: HolomorphicFunction, z: complex) -> complex:
    return f.evaluate(z)


def derivative(f: HolomorphicFunction, order: int = 1) -> HolomorphicFunction:
    return f.derivative(order)


def second_time_derivative(f: HolomorphicFunction, z: complex) -> complex:
    """z̈ along solutions of ż = f(z), which is f'(z)·f(z) by the chain rule."""
    return f.derivative(1).evaluate(z) * f.evaluate(z)


def cauchy_riemann_residual(f: HolomorphicFunction, z: complex, h: float) -> tuple[float, float]:
    """Return (|u_x - v_y|, |u_y + v_x|) from central differences of step h."""
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    z = complex(z)
    dx = (f.evaluate(z + h) - f.evaluate(z - h)) / (2 * h)
    dy = (f.evaluate(z + 1j * h) - f.evaluate(z - 1j * h)) / (2 * h)
    u_x, v_x = dx.real, dx.imag
    u_y, v_y = dy.real, dy.imag
    return abs(u_x - v_y), abs(u_y + v_x)
